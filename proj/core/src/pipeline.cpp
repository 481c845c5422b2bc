#include "aquaclear/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "aquaclear/color.hpp"
#include "aquaclear/error.hpp"
#include "aquaclear/metrics.hpp"
#include "aquaclear/neural/attention.hpp"
#include "aquaclear/ppm.hpp"
#include "aquaclear/random.hpp"

namespace aquaclear::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view method_key(NeuralMethod m) noexcept {
    switch (m) {
        case NeuralMethod::Classic: return "classic";
        case NeuralMethod::Vgg: return "vgg";
        case NeuralMethod::Resnet: return "resnet";
        case NeuralMethod::Unite: return "unite";
    }
    return "";
}

std::optional<NeuralMethod> parse_method(std::string_view text) noexcept {
    for (NeuralMethod m : {NeuralMethod::Classic, NeuralMethod::Vgg, NeuralMethod::Resnet, NeuralMethod::Unite}) {
        if (method_key(m) == text) return m;
    }
    return std::nullopt;
}

namespace {

[[noreturn]] void bad_param(const std::string& what) { throw Error(Errc::InvalidParameter, what); }
[[noreturn]] void parse_fail(const std::string& what) { throw Error(Errc::ParseError, what); }

// Reads one JSON object, rejecting unknown keys and wrong types.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) parse_fail("config: '" + path_ + "' must be an object");
    }

    const json* find(const std::string& key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) parse_fail("config: '" + qualified(key) + "' must be a number");
            out = v->get<double>();
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) parse_fail("config: '" + qualified(key) + "' must be an integer");
            const auto x = v->get<std::int64_t>();
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
                bad_param("config: '" + qualified(key) + "' out of range");
            }
            out = static_cast<int>(x);
        }
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) {
                parse_fail("config: '" + qualified(key) + "' must be a non-negative integer");
            }
            out = v->get<std::uint64_t>();
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) parse_fail("config: '" + qualified(key) + "' must be a boolean");
            out = v->get<bool>();
        }
    }

    std::optional<std::string> string(const std::string& key) {
        if (const json* v = find(key)) {
            if (!v->is_string()) parse_fail("config: '" + qualified(key) + "' must be a string");
            return v->get<std::string>();
        }
        return std::nullopt;
    }

    std::optional<Section> object(const std::string& key) {
        if (const json* v = find(key)) return Section(*v, qualified(key));
        return std::nullopt;
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) parse_fail("config: unknown key '" + qualified(it.key()) + "'");
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string_view kernel_mode_key(KernelMode m) { return m == KernelMode::Paper ? "paper" : "zero_sum"; }
std::string_view preprocess_key(PreprocessStep s) { return s == PreprocessStep::Homomorphic ? "homomorphic" : "hist_eq"; }

}  // namespace

void PipelineConfig::validate() const {
    thresholds.validate();
    classic.clahe.validate();
    classic.nlm.validate();
    classic.sharpen.validate();
    classic.homomorphic.validate();
    if (!std::isfinite(neural.gain) || neural.gain < 0.0) bad_param("neural.gain must be finite and >= 0");
    if (neural.vgg_depth < 1 || neural.vgg_depth > 4) {
        throw Error(Errc::UnsupportedDepth, "neural.vgg_depth must be in [1,4]");
    }
    for (double r : split.ratios) {
        if (!std::isfinite(r) || r <= 0.0) bad_param("split.ratios must be positive");
    }
    if (!(augment.crop_fraction > 0.0 && augment.crop_fraction <= 1.0)) {
        bad_param("augment.crop_fraction must be in (0,1]");
    }
    if (!(augment.jitter_amplitude >= 0.0 && augment.jitter_amplitude < 1.0)) {
        bad_param("augment.jitter_amplitude must be in [0,1)");
    }
    if (augment.samples_per_image < 1) bad_param("augment.samples_per_image must be >= 1");
    if (threads < 1) bad_param("threads must be >= 1");
    std::set<PreprocessStep> unique(preprocess.begin(), preprocess.end());
    if (unique.size() != preprocess.size()) throw Error(Errc::DuplicateStep, "preprocess lists a step twice");
}

PipelineConfig parse_config(const json& doc) {
    PipelineConfig c;
    Section root(doc, "");
    if (auto s = root.object("thresholds")) {
        s->number("cast_ratio", c.thresholds.cast_ratio);
        s->number("brightness_floor", c.thresholds.brightness_floor);
        s->number("sharpness_floor", c.thresholds.sharpness_floor);
        s->finish();
    }
    if (auto s = root.object("clahe")) {
        s->integer("tiles_x", c.classic.clahe.tiles_x);
        s->integer("tiles_y", c.classic.clahe.tiles_y);
        s->number("clip_limit", c.classic.clahe.clip_limit);
        s->integer("bins", c.classic.clahe.bins);
        s->finish();
    }
    if (auto s = root.object("nlm")) {
        s->integer("patch_radius", c.classic.nlm.patch_radius);
        s->integer("window_radius", c.classic.nlm.window_radius);
        s->number("h", c.classic.nlm.h);
        s->finish();
    }
    if (auto s = root.object("sharpen")) {
        s->number("strength", c.classic.sharpen.strength);
        if (auto mode = s->string("kernel_mode")) {
            if (*mode == "zero_sum") {
                c.classic.sharpen.kernel_mode = KernelMode::ZeroSum;
            } else if (*mode == "paper") {
                c.classic.sharpen.kernel_mode = KernelMode::Paper;
            } else {
                bad_param("sharpen.kernel_mode must be zero_sum or paper");
            }
        }
        s->finish();
    }
    if (auto s = root.object("homomorphic")) {
        s->number("gamma_low", c.classic.homomorphic.gamma_low);
        s->number("gamma_high", c.classic.homomorphic.gamma_high);
        s->number("sigma", c.classic.homomorphic.sigma);
        s->finish();
    }
    if (const json* p = root.find("preprocess")) {
        if (!p->is_array()) parse_fail("config: 'preprocess' must be an array");
        for (const auto& item : *p) {
            if (!item.is_string()) parse_fail("config: 'preprocess' entries must be strings");
            const auto name = item.get<std::string>();
            if (name == "homomorphic") {
                c.preprocess.push_back(PreprocessStep::Homomorphic);
            } else if (name == "hist_eq") {
                c.preprocess.push_back(PreprocessStep::HistEq);
            } else {
                bad_param("preprocess: unknown step '" + name + "'");
            }
        }
    }
    if (auto s = root.object("neural")) {
        if (auto m = s->string("method")) {
            auto parsed = parse_method(*m);
            if (!parsed) bad_param("neural.method must be classic, vgg, resnet or unite");
            c.neural.method = *parsed;
        }
        s->number("gain", c.neural.gain);
        s->unsigned64("seed", c.neural.seed);
        s->integer("vgg_depth", c.neural.vgg_depth);
        if (auto w = s->string("vgg_weights")) c.neural.vgg_weights = fs::path(*w);
        if (auto w = s->string("resnet_weights")) c.neural.resnet_weights = fs::path(*w);
        s->finish();
    }
    if (auto s = root.object("split")) {
        if (const json* r = s->find("ratios")) {
            if (!r->is_array() || r->size() != 3) parse_fail("config: 'split.ratios' must be an array of 3 numbers");
            for (std::size_t i = 0; i < 3; ++i) {
                if (!(*r)[i].is_number()) parse_fail("config: 'split.ratios' must be an array of 3 numbers");
                c.split.ratios[i] = (*r)[i].get<double>();
            }
        }
        s->finish();
    }
    if (auto s = root.object("augment")) {
        s->number("crop_fraction", c.augment.crop_fraction);
        s->number("jitter_amplitude", c.augment.jitter_amplitude);
        s->integer("samples_per_image", c.augment.samples_per_image);
        s->finish();
    }
    root.unsigned64("seed", c.seed);
    if (auto o = root.string("output_dir")) c.output_dir = *o;
    root.integer("threads", c.threads);
    root.boolean("verbose", c.verbose);
    root.finish();
    c.validate();
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        parse_fail(path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

ordered_json config_to_json(const PipelineConfig& c) {
    ordered_json j;
    j["thresholds"] = {{"cast_ratio", c.thresholds.cast_ratio},
                       {"brightness_floor", c.thresholds.brightness_floor},
                       {"sharpness_floor", c.thresholds.sharpness_floor}};
    j["clahe"] = {{"tiles_x", c.classic.clahe.tiles_x},
                  {"tiles_y", c.classic.clahe.tiles_y},
                  {"clip_limit", c.classic.clahe.clip_limit},
                  {"bins", c.classic.clahe.bins}};
    j["nlm"] = {{"patch_radius", c.classic.nlm.patch_radius},
                {"window_radius", c.classic.nlm.window_radius},
                {"h", c.classic.nlm.h}};
    j["sharpen"] = {{"strength", c.classic.sharpen.strength},
                    {"kernel_mode", kernel_mode_key(c.classic.sharpen.kernel_mode)}};
    j["homomorphic"] = {{"gamma_low", c.classic.homomorphic.gamma_low},
                        {"gamma_high", c.classic.homomorphic.gamma_high},
                        {"sigma", c.classic.homomorphic.sigma}};
    j["preprocess"] = ordered_json::array();
    for (auto s : c.preprocess) j["preprocess"].push_back(preprocess_key(s));
    ordered_json neural = {{"method", method_key(c.neural.method)},
                           {"gain", c.neural.gain},
                           {"seed", c.neural.seed},
                           {"vgg_depth", c.neural.vgg_depth}};
    if (c.neural.vgg_weights) neural["vgg_weights"] = c.neural.vgg_weights->string();
    if (c.neural.resnet_weights) neural["resnet_weights"] = c.neural.resnet_weights->string();
    j["neural"] = neural;
    j["split"] = {{"ratios", c.split.ratios}};
    j["augment"] = {{"crop_fraction", c.augment.crop_fraction},
                    {"jitter_amplitude", c.augment.jitter_amplitude},
                    {"samples_per_image", c.augment.samples_per_image}};
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir.string();
    j["threads"] = c.threads;
    j["verbose"] = c.verbose;
    return j;
}

std::vector<fs::path> list_images(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ppm") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::array<std::size_t, 3> allocate_split(std::size_t n, const std::array<double, 3>& ratios) {
    const double total = ratios[0] + ratios[1] + ratios[2];
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t b = 0; b < 3; ++b) {
        const double share = static_cast<double>(n) * ratios[b] / total;
        counts[b] = static_cast<std::size_t>(std::floor(share));
        remainder[b] = share - static_cast<double>(counts[b]);
        assigned += counts[b];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) counts[order[k % 3]] += 1;
    return counts;
}

std::vector<SplitEntry> assign_split(std::vector<std::string> files, const std::array<double, 3>& ratios,
                                     std::uint64_t seed) {
    std::sort(files.begin(), files.end());
    Rng rng(derive_seed(seed, "split", 0));
    for (std::size_t i = files.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(files[i - 1], files[j]);
    }
    const auto counts = allocate_split(files.size(), ratios);
    static constexpr const char* kBuckets[] = {"train", "val", "test"};
    std::vector<SplitEntry> out;
    out.reserve(files.size());
    std::size_t pos = 0;
    for (std::size_t b = 0; b < 3; ++b) {
        for (std::size_t k = 0; k < counts[b]; ++k) out.push_back({files[pos++], kBuckets[b]});
    }
    std::sort(out.begin(), out.end(), [](const SplitEntry& a, const SplitEntry& b) { return a.file < b.file; });
    return out;
}

AugmentSample augment_image(const ImageF32& img, const AugmentConfig& config, std::uint64_t seed,
                            std::string_view file_name, int sample_index) {
    img.require_rgb("augment");
    const int cw = static_cast<int>(std::floor(config.crop_fraction * img.width() + 1e-9));
    const int ch = static_cast<int>(std::floor(config.crop_fraction * img.height() + 1e-9));
    if (cw < 1 || ch < 1) {
        bad_param("crop of " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                  " is smaller than one pixel");
    }
    Rng rng(derive_seed(seed, file_name, static_cast<std::uint64_t>(sample_index)));
    AugmentSample s{ImageF32(1, 1, 3), 0, 0, {}};
    s.x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width() - cw + 1)));
    s.y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height() - ch + 1)));
    const double j = config.jitter_amplitude;
    for (auto& g : s.gains) g = rng.uniform(1.0 - j, 1.0 + j);
    ImageF32 out = img.crop(s.x0, s.y0, cw, ch);
    if (j > 0.0) {
        for (int c = 0; c < 3; ++c) {
            const double g = s.gains[static_cast<std::size_t>(c)];
            for (int y = 0; y < ch; ++y) {
                for (int x = 0; x < cw; ++x) out.set(c, x, y, clamp_unit(out.at(c, x, y) * g));
            }
        }
    }
    s.image = std::move(out);
    return s;
}

NeuralModels prepare_models(const NeuralConfig& config, std::uint64_t seed) {
    NeuralModels m;
    const bool want_vgg = config.method == NeuralMethod::Vgg || config.method == NeuralMethod::Unite;
    const bool want_resnet = config.method == NeuralMethod::Resnet || config.method == NeuralMethod::Unite;
    if (want_vgg) {
        const auto spec = nn::build_vgg_head(config.vgg_depth);
        m.vgg = config.vgg_weights ? nn::load_weights(spec, *config.vgg_weights)
                                   : nn::init_weights(spec, derive_seed(seed, "vgg", 0));
    }
    if (want_resnet) {
        const auto spec = nn::build_resnet_head();
        m.resnet = config.resnet_weights ? nn::load_weights(spec, *config.resnet_weights)
                                         : nn::init_weights(spec, derive_seed(seed, "resnet", 0));
    }
    return m;
}

namespace {

bool constant_value_channel(const ImageF32& img) {
    float lo = 1.0f;
    float hi = 0.0f;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const float v = std::max({img.at(0, x, y), img.at(1, x, y), img.at(2, x, y)});
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return lo == hi;
}

}  // namespace

EnhanceResult enhance_image(const ImageF32& img, const PipelineConfig& config, const NeuralModels& models) {
    img.require_rgb("enhance");
    EnhanceResult r{img, classify(img, config.thresholds), {}, {}, {}};
    if (r.classification.near_black_warning) r.warnings.push_back("near-black image: colour cast undefined");

    ImageF32 work = img;
    const NeuralMethod method = config.neural.method;
    if (method != NeuralMethod::Classic) {
        int divisor = 1;
        if (models.vgg) divisor = std::lcm(divisor, nn::required_divisor(models.vgg->spec));
        if (models.resnet) divisor = std::lcm(divisor, nn::required_divisor(models.resnet->spec));
        if (work.width() % divisor != 0 || work.height() % divisor != 0) {
            const int w = work.width() - work.width() % divisor;
            const int h = work.height() - work.height() % divisor;
            if (w == 0 || h == 0) {
                throw Error(Errc::IndivisibleDims, "image smaller than the required multiple of " +
                                                       std::to_string(divisor));
            }
            r.warnings.push_back("cropped " + std::to_string(work.width()) + "x" + std::to_string(work.height()) +
                                 " to " + std::to_string(w) + "x" + std::to_string(h));
            work = work.crop((work.width() - w) / 2, (work.height() - h) / 2, w, h);
        }
        std::optional<Plane> attention;
        if (models.vgg) {
            attention = nn::attention_map(nn::extract_features(work, *models.vgg), work.height(), work.width());
        }
        if (models.resnet) {
            Plane a = nn::attention_map(nn::extract_features(work, *models.resnet), work.height(), work.width());
            attention = attention ? nn::fuse_attention(*attention, a) : std::move(a);
        }
        if (!attention) throw Error(Errc::MissingWeights, "no feature extractor bound for the neural method");
        work = nn::feature_guided_enhance(work, *attention, config.neural.gain);
    }

    std::vector<PlanStep> steps;
    for (PreprocessStep p : config.preprocess) {
        if (p == PreprocessStep::Homomorphic) {
            steps.push_back({config.classic.homomorphic});
        } else if (constant_value_channel(work)) {
            r.warnings.push_back("skipped GlobalHistEq on constant value channel");
        } else {
            steps.push_back({HistEqParams{}});
        }
    }
    const EnhancementPlan classified = build_plan(r.classification.flags, config.classic);
    for (const PlanStep& s : classified.steps()) steps.push_back(s);
    r.plan = EnhancementPlan(std::move(steps));

    r.image = apply_plan(work, r.plan, [&](const ImageF32&, const StepDiagnostics& d) {
        for (const auto& w : d.warnings) r.warnings.push_back(w);
        if (config.verbose) r.diagnostics.push_back(d);
    });
    return r;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(Errc::IoFailure, "cannot create " + dir.string());
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

ordered_json step_json(const PlanStep& step) {
    ordered_json j;
    j["step"] = step_name(step.kind());
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ClaheParams>) {
                j["params"] = {{"tiles_x", p.tiles_x}, {"tiles_y", p.tiles_y}, {"clip_limit", p.clip_limit},
                               {"bins", p.bins}};
            } else if constexpr (std::is_same_v<T, NlmParams>) {
                j["params"] = {{"patch_radius", p.patch_radius}, {"window_radius", p.window_radius}, {"h", p.h}};
            } else if constexpr (std::is_same_v<T, SharpenParams>) {
                j["params"] = {{"strength", p.strength}, {"kernel_mode", kernel_mode_key(p.kernel_mode)}};
            } else if constexpr (std::is_same_v<T, HomomorphicParams>) {
                j["params"] = {{"gamma_low", p.gamma_low}, {"gamma_high", p.gamma_high}, {"sigma", p.sigma}};
            } else {
                j["params"] = ordered_json::object();
            }
        },
        step.params);
    return j;
}

}  // namespace

int cmd_classify(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log) {
    const auto files = list_images(opts.input);
    if (files.empty()) {
        log << "error: no input images in " << opts.input.string() << "\n";
        return kExitEmptyOrParse;
    }
    std::vector<std::optional<Classification>> results(files.size());
    std::vector<std::string> failures(files.size());
    parallel_for(files.size(), config.threads, [&](std::size_t i) {
        try {
            results[i] = classify(load_ppm(files[i]), config.thresholds);
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });

    std::string labels = "file,cast,lowlight,blur,category\n";
    std::vector<Category8> categories;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = files[i].filename().string();
        if (!results[i]) {
            log << "skip " << name << ": " << failures[i] << "\n";
            ++skipped;
            continue;
        }
        const auto& r = *results[i];
        if (r.near_black_warning) log << "warning " << name << ": near-black image, colour cast undefined\n";
        labels += name + "," + (r.flags.color_cast ? "1" : "0") + "," + (r.flags.low_light ? "1" : "0") + "," +
                  (r.flags.blurred ? "1" : "0") + "," + std::string(identifier(r.category)) + "\n";
        categories.push_back(r.category);
    }
    if (categories.empty()) {
        log << "error: no input images could be decoded (skipped " << skipped << ")\n";
        return kExitEmptyOrParse;
    }
    const DatasetReport report = summarize(categories);
    ensure_dir(opts.output);
    write_text(opts.output / "labels.csv", labels);
    write_text(opts.output / "summary.csv", summary_csv(report));
    write_text(opts.output / "cooccurrence.csv", cooccurrence_csv(report));
    write_text(opts.output / "marginals.csv", marginals_csv(report));
    log << "classified " << categories.size() << " images, skipped " << skipped << "\n";
    return kExitOk;
}

int cmd_enhance(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log) {
    const auto files = list_images(opts.input);
    if (files.empty()) {
        log << "error: no input images in " << opts.input.string() << "\n";
        return kExitEmptyOrParse;
    }
    const NeuralModels models = prepare_models(config.neural, config.neural.seed);
    std::vector<std::optional<EnhanceResult>> results(files.size());
    std::vector<std::string> failures(files.size());
    parallel_for(files.size(), config.threads, [&](std::size_t i) {
        try {
            results[i] = enhance_image(load_ppm(files[i]), config, models);
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });

    ensure_dir(opts.output);
    const std::string method(method_key(config.neural.method));
    std::string log_lines;
    std::string diag_lines;
    std::size_t written = 0;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = files[i].filename().string();
        if (!results[i]) {
            log << "skip " << name << ": " << failures[i] << "\n";
            ++skipped;
            continue;
        }
        const auto& r = *results[i];
        const std::string out_name = files[i].stem().string() + "." + method + ".ppm";
        save_ppm(r.image, opts.output / out_name);
        ++written;
        for (const auto& w : r.warnings) log << "warning " << name << ": " << w << "\n";

        ordered_json entry;
        entry["file"] = name;
        entry["output"] = out_name;
        entry["method"] = method;
        entry["flags"] = {{"cast", r.classification.flags.color_cast},
                          {"lowlight", r.classification.flags.low_light},
                          {"blur", r.classification.flags.blurred}};
        entry["category"] = identifier(r.classification.category);
        entry["plan"] = ordered_json::array();
        for (const auto& s : r.plan.steps()) entry["plan"].push_back(step_json(s));
        if (config.neural.method != NeuralMethod::Classic) {
            entry["neural"] = {{"gain", config.neural.gain}, {"seed", config.neural.seed}};
        }
        entry["warnings"] = r.warnings;
        log_lines += entry.dump() + "\n";

        for (const auto& d : r.diagnostics) {
            ordered_json dj;
            dj["file"] = name;
            dj["step_index"] = d.index;
            dj["step"] = step_name(d.kind);
            dj["mean_r"] = d.mean_r;
            dj["mean_g"] = d.mean_g;
            dj["mean_b"] = d.mean_b;
            dj["laplacian_variance"] = d.laplacian_variance;
            diag_lines += dj.dump() + "\n";
        }
    }
    write_text(opts.output / "enhance_log.jsonl", log_lines);
    if (config.verbose) write_text(opts.output / "diagnostics.jsonl", diag_lines);
    log << "enhanced " << written << " images with " << method << ", skipped " << skipped << "\n";
    return kExitOk;
}

int cmd_evaluate(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log) {
    const auto files = list_images(opts.input);
    if (files.empty()) {
        log << "error: no images to evaluate in " << opts.input.string() << "\n";
        return kExitEmptyOrParse;
    }
    struct Job {
        std::string image_id;
        MethodLabel method;
        fs::path test;
        std::optional<fs::path> reference;
    };
    std::vector<Job> jobs;
    std::set<std::string> ids;
    for (const auto& f : files) {
        const std::string stem = f.stem().string();
        Job job{stem, MethodLabel::Original, f, std::nullopt};
        const auto dot = stem.rfind('.');
        if (dot != std::string::npos) {
            if (auto label = parse_method_label(std::string_view(stem).substr(dot + 1))) {
                job.image_id = stem.substr(0, dot);
                job.method = *label;
            }
        }
        if (opts.reference) {
            const fs::path ref = *opts.reference / (job.image_id + ".ppm");
            if (fs::is_regular_file(ref)) {
                job.reference = ref;
            } else {
                log << "warning: no reference for " << f.filename().string() << "\n";
            }
        }
        ids.insert(job.image_id);
        jobs.push_back(std::move(job));
    }
    if (opts.reference) {
        std::size_t matched = 0;
        for (const auto& j : jobs) matched += j.reference ? 1 : 0;
        for (const auto& r : list_images(*opts.reference)) {
            if (!ids.count(r.stem().string())) log << "unmatched reference " << r.filename().string() << "\n";
        }
        if (matched == 0) {
            log << "error: no enhanced image matches a reference in " << opts.reference->string() << "\n";
            return kExitEmptyOrParse;
        }
    }

    std::vector<std::optional<QualityRow>> rows(jobs.size());
    std::vector<std::string> failures(jobs.size());
    std::vector<std::string> notes(jobs.size());
    parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        try {
            const ImageF32 test = load_ppm(job.test);
            std::optional<ImageF32> ref;
            if (job.reference) {
                ref = load_ppm(*job.reference);
                if (ref->width() != test.width() || ref->height() != test.height() ||
                    ref->channels() != test.channels()) {
                    notes[i] = "reference dimensions differ, PSNR omitted";
                    ref.reset();
                }
            }
            rows[i] = QualityRow{job.image_id, job.method, score_image(ref ? &*ref : nullptr, test)};
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });

    std::vector<QualityRow> kept;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string name = jobs[i].test.filename().string();
        if (!notes[i].empty()) log << "warning " << name << ": " << notes[i] << "\n";
        if (!rows[i]) {
            log << "skip " << name << ": " << failures[i] << "\n";
            continue;
        }
        kept.push_back(std::move(*rows[i]));
    }
    if (kept.empty()) {
        log << "error: no image could be scored\n";
        return kExitEmptyOrParse;
    }
    const QualityReport report = aggregate_rows(std::move(kept));
    ensure_dir(opts.output);
    write_text(opts.output / "scores.csv", scores_csv(report));
    write_text(opts.output / "table.csv", comparison_table_csv(report));
    log << "scored " << report.rows.size() << " images\n";
    return kExitOk;
}

int cmd_split(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log) {
    std::vector<std::string> files;
    std::error_code ec;
    if (fs::is_directory(opts.input, ec)) {
        for (const auto& entry : fs::directory_iterator(opts.input)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && !name.empty() && name[0] != '.') files.push_back(name);
        }
    }
    if (files.size() < 3) {
        log << "error: split needs at least 3 files, found " << files.size() << "\n";
        return kExitEmptyOrParse;
    }
    const auto entries = assign_split(files, config.split.ratios, config.seed);
    std::string csv = "file,bucket\n";
    std::map<std::string, std::size_t> counts;
    for (const auto& e : entries) {
        csv += e.file + "," + e.bucket + "\n";
        ++counts[e.bucket];
    }
    ensure_dir(opts.output);
    write_text(opts.output / "split.csv", csv);
    log << "split " << entries.size() << " files: train " << counts["train"] << ", val " << counts["val"]
        << ", test " << counts["test"] << "\n";
    return kExitOk;
}

int cmd_augment(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log) {
    const auto files = list_images(opts.input);
    if (files.empty()) {
        log << "error: no input images in " << opts.input.string() << "\n";
        return kExitEmptyOrParse;
    }
    const int per_image = config.augment.samples_per_image;
    std::vector<std::vector<AugmentSample>> results(files.size());
    std::vector<std::optional<Error>> failures(files.size());
    parallel_for(files.size(), config.threads, [&](std::size_t i) {
        try {
            const ImageF32 img = load_ppm(files[i]);
            const std::string name = files[i].filename().string();
            for (int k = 0; k < per_image; ++k) {
                results[i].push_back(augment_image(img, config.augment, config.seed, name, k));
            }
        } catch (const Error& e) {
            failures[i] = e;
        }
    });

    ensure_dir(opts.output);
    std::string csv = "file,sample,output,x0,y0,width,height,gain_r,gain_g,gain_b\n";
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = files[i].filename().string();
        if (failures[i]) {
            if (failures[i]->code() == Errc::InvalidParameter) {
                log << "error " << name << ": " << failures[i]->what() << "\n";
                return kExitBadParameters;
            }
            log << "skip " << name << ": " << failures[i]->what() << "\n";
            ++skipped;
            continue;
        }
        for (int k = 0; k < per_image; ++k) {
            const auto& s = results[i][static_cast<std::size_t>(k)];
            const std::string out_name = files[i].stem().string() + "_aug" + std::to_string(k) + ".ppm";
            save_ppm(s.image, opts.output / out_name);
            std::ostringstream row;
            row << std::fixed << std::setprecision(6) << name << "," << k << "," << out_name << "," << s.x0 << ","
                << s.y0 << "," << s.image.width() << "," << s.image.height() << "," << s.gains[0] << ","
                << s.gains[1] << "," << s.gains[2] << "\n";
            csv += row.str();
        }
    }
    write_text(opts.output / "augment.csv", csv);
    log << "augmented " << files.size() - skipped << " images, skipped " << skipped << "\n";
    return kExitOk;
}

namespace {

struct ParseFailure {
    std::string message;
};

std::vector<Category8> parse_labels(const fs::path& path) {
    const auto lines = split_lines(read_text(path));
    const std::string where = path.filename().string();
    if (lines.empty() || lines[0] != "file,cast,lowlight,blur,category") {
        throw ParseFailure{where + ":1: expected header file,cast,lowlight,blur,category"};
    }
    std::vector<Category8> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::string at = where + ":" + std::to_string(i + 1) + ": ";
        const auto f = split_fields(lines[i]);
        if (f.size() != 5) throw ParseFailure{at + "expected 5 fields, found " + std::to_string(f.size())};
        for (std::size_t k = 1; k <= 3; ++k) {
            if (f[k] != "0" && f[k] != "1") throw ParseFailure{at + "flag must be 0 or 1"};
        }
        auto cat = parse_category(f[4]);
        if (!cat) throw ParseFailure{at + "unknown category '" + f[4] + "'"};
        const DegradationFlags flags{f[1] == "1", f[2] == "1", f[3] == "1"};
        if (category_of(flags) != *cat) throw ParseFailure{at + "flags disagree with category"};
        out.push_back(*cat);
    }
    return out;
}

std::vector<QualityRow> parse_scores(const fs::path& path) {
    const auto lines = split_lines(read_text(path));
    const std::string where = path.filename().string();
    std::vector<QualityRow> out;
    if (lines.empty() || (lines.size() == 1 && lines[0].empty())) return out;
    if (lines[0] != kScoresHeader) throw ParseFailure{where + ":1: expected header " + std::string(kScoresHeader)};
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::string at = where + ":" + std::to_string(i + 1) + ": ";
        const auto f = split_fields(lines[i]);
        if (f.size() != 11) throw ParseFailure{at + "expected 11 fields, found " + std::to_string(f.size())};
        auto method = parse_method_label(f[1]);
        if (!method) throw ParseFailure{at + "unknown method '" + f[1] + "'"};
        if (f[0] == "mean") continue;  // recomputed from the image rows
        QualityRow row;
        row.image_id = f[0];
        row.method = *method;
        if (f[2] == "inf") {
            row.scores.psnr = Psnr::infinite();
        } else if (!f[2].empty()) {
            auto v = to_double(f[2]);
            if (!v) throw ParseFailure{at + "bad psnr value '" + f[2] + "'"};
            row.scores.psnr = Psnr::decibels(*v);
        }
        double* targets[] = {&row.scores.uciqe.score, &row.scores.uiqm.score, &row.scores.uciqe.sigma_c,
                             &row.scores.uciqe.con_l, &row.scores.uciqe.mu_s, &row.scores.uiqm.uicm,
                             &row.scores.uiqm.uism,   &row.scores.uiqm.uiconm};
        for (std::size_t k = 0; k < 8; ++k) {
            auto v = to_double(f[3 + k]);
            if (!v) throw ParseFailure{at + "bad number '" + f[3 + k] + "'"};
            *targets[k] = *v;
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::string fixed(double v, int decimals) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(decimals) << v;
    return ss.str();
}

}  // namespace

int cmd_report(const PipelineConfig&, const CommandOptions& opts, std::ostream& log) {
    std::vector<Category8> labels;
    std::vector<QualityRow> rows;
    try {
        labels = parse_labels(opts.labels);
        if (!opts.scores.empty()) rows = parse_scores(opts.scores);
    } catch (const ParseFailure& e) {
        log << "error: " << e.message << "\n";
        return kExitEmptyOrParse;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return kExitEmptyOrParse;
    }
    if (labels.empty()) {
        log << "error: " << opts.labels.string() << " has no label rows\n";
        return kExitEmptyOrParse;
    }
    const DatasetReport cats = summarize(labels);

    std::string md = "# Enhancement report\n\n## Degradation categories\n\n";
    md += "| Rank | Category | Count | Proportion |\n|---:|---|---:|---:|\n";
    std::string csv = "section,row,column,value\n";
    for (std::size_t k = 0; k < kAllCategories.size(); ++k) {
        const std::string desc(description(kAllCategories[k]));
        md += "| " + std::to_string(k + 1) + " | " + desc + " | " + std::to_string(cats.counts[k]) + " | " +
              fixed(100.0 * cats.proportions[k], 2) + "% |\n";
        csv += "categories," + desc + ",count," + std::to_string(cats.counts[k]) + "\n";
        csv += "categories," + desc + ",proportion," + fixed(cats.proportions[k], 4) + "\n";
    }
    md += "\nTotal images: " + std::to_string(cats.total) + "\n\n## Quality comparison\n\n";

    if (rows.empty()) {
        md += "No quality scores available.\n";
        log << "notice: no quality scores, category table only\n";
    } else {
        const QualityReport q = aggregate_rows(std::move(rows));
        md += "| Metric |";
        std::string rule = "|---|";
        for (const auto& a : q.aggregates) {
            md += " " + std::string(method_label_name(a.method)) + " |";
            rule += "---:|";
        }
        md += "\n" + rule + "\n";
        auto metric_row = [&](const std::string& metric, auto value_of) {
            md += "| " + metric + " |";
            for (const auto& a : q.aggregates) {
                const std::string v = value_of(a);
                md += " " + (v.empty() ? std::string("-") : v) + " |";
                csv += "methods," + metric + "," + std::string(method_label_name(a.method)) + "," + v + "\n";
            }
            md += "\n";
        };
        metric_row("PSNR", [](const MethodAggregate& a) {
            if (a.psnr_mean) return fixed(*a.psnr_mean, 4);
            return a.psnr_infinite > 0 ? std::string("inf") : std::string();
        });
        metric_row("UCIQE", [](const MethodAggregate& a) { return fixed(a.uciqe, 4); });
        metric_row("UIQM", [](const MethodAggregate& a) { return fixed(a.uiqm, 4); });
    }

    ensure_dir(opts.output);
    write_text(opts.output / "report.md", md);
    write_text(opts.output / "report.csv", csv);
    log << "report written to " << (opts.output / "report.md").string() << "\n";
    return kExitOk;
}

}  // namespace aquaclear::pipeline
