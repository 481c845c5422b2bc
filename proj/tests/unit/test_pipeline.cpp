#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "aquaclear/error.hpp"
#include "aquaclear/metrics.hpp"
#include "aquaclear/pipeline.hpp"
#include "aquaclear/ppm.hpp"
#include "aquaclear/synthetic.hpp"
#include "cli.hpp"
#include "support/oracles.hpp"

using namespace aquaclear;
using namespace aquaclear::pipeline;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = AQUACLEAR_FIXTURES;

struct CliRun {
    int code;
    std::string log;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "aquaclear");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream log;
    const int code = aquaclear::cli::run_cli(static_cast<int>(argv.size()), argv.data(), log);
    return {code, log.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::vector<std::string> out;
    std::istringstream in(slurp(p));
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

fs::path corpus_dir(const std::string& name, std::size_t n, int size = 32) {
    const auto dir = oracle::temp_dir(name);
    const auto images = synthetic::corpus(n, 7, size, size);
    for (std::size_t i = 0; i < images.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "img%02zu.ppm", i);
        save_ppm(images[i], dir / buf);
    }
    return dir;
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughJson) {
    const PipelineConfig d;
    const PipelineConfig back = parse_config(nlohmann::json::parse(config_to_json(d).dump()));
    EXPECT_EQ(config_to_json(back), config_to_json(d));
    EXPECT_EQ(back.neural.method, NeuralMethod::Classic);
    EXPECT_EQ(back.split.ratios, (std::array<double, 3>{8, 1, 1}));
}

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
    const auto doc = nlohmann::json::parse(R"({
        "thresholds": {"cast_ratio": 0.3},
        "sharpen": {"kernel_mode": "paper", "strength": 0.5},
        "neural": {"method": "unite", "gain": 0.25},
        "preprocess": ["homomorphic"],
        "threads": 3
    })");
    const PipelineConfig c = parse_config(doc);
    EXPECT_EQ(c.thresholds.cast_ratio, 0.3);
    EXPECT_EQ(c.classic.sharpen.kernel_mode, KernelMode::Paper);
    EXPECT_EQ(c.neural.method, NeuralMethod::Unite);
    EXPECT_EQ(c.preprocess, std::vector<PreprocessStep>{PreprocessStep::Homomorphic});
    EXPECT_EQ(c.threads, 3);

    auto code_of = [](const char* text) {
        try {
            parse_config(nlohmann::json::parse(text));
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::IoFailure;
    };
    EXPECT_EQ(code_of(R"({"colour": 1})"), Errc::ParseError);
    EXPECT_EQ(code_of(R"({"nlm": {"h": "high"}})"), Errc::ParseError);
    EXPECT_EQ(code_of(R"({"neural": {"vgg_depth": 5}})"), Errc::UnsupportedDepth);
    EXPECT_EQ(code_of(R"({"preprocess": ["hist_eq", "hist_eq"]})"), Errc::DuplicateStep);
    EXPECT_EQ(code_of(R"({"thresholds": {"cast_ratio": -1}})"), Errc::InvalidThresholds);
}

TEST(Cli, ExitCodesForBadInvocations) {
    const auto dir = oracle::temp_dir("cli_codes");
    EXPECT_EQ(run({"classify"}).code, kExitEmptyOrParse);
    EXPECT_EQ(run({"classify", "--input", dir.string(), "--output", (dir / "o").string()}).code, kExitEmptyOrParse);
    write_file(dir / "bad.json", "{ not json");
    EXPECT_EQ(run({"classify", "--input", dir.string(), "--config", (dir / "bad.json").string()}).code,
              kExitEmptyOrParse);
    write_file(dir / "range.json", R"({"augment": {"crop_fraction": 1.5}})");
    EXPECT_EQ(run({"classify", "--input", dir.string(), "--config", (dir / "range.json").string()}).code,
              kExitBadParameters);
}

TEST(Split, AllocationMatchesLargestRemainder) {
    EXPECT_EQ(allocate_split(10, {8, 1, 1}), (std::array<std::size_t, 3>{8, 1, 1}));
    EXPECT_EQ(allocate_split(12, {8, 1, 1}), (std::array<std::size_t, 3>{10, 1, 1}));
    EXPECT_EQ(allocate_split(3, {1, 1, 1}), (std::array<std::size_t, 3>{1, 1, 1}));
    oracle::Gen g(1);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = static_cast<std::size_t>(g.integer(0, 500));
        const std::array<double, 3> r{g.uniform(0.1, 10), g.uniform(0.1, 10), g.uniform(0.1, 10)};
        const auto a = allocate_split(n, r);
        EXPECT_EQ(a[0] + a[1] + a[2], n);
        const double total = r[0] + r[1] + r[2];
        for (int k = 0; k < 3; ++k) EXPECT_LT(std::fabs(static_cast<double>(a[k]) - n * r[k] / total), 1.0);
    }
}

TEST(Split, AssignmentIsDeterministicAndSeedDependent) {
    std::vector<std::string> files;
    for (int i = 0; i < 40; ++i) files.push_back("f" + std::to_string(i) + ".ppm");
    const auto a = assign_split(files, {8, 1, 1}, 7);
    auto shuffled = files;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto b = assign_split(shuffled, {8, 1, 1}, 7);
    ASSERT_EQ(a.size(), 40u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].file, b[i].file);
        EXPECT_EQ(a[i].bucket, b[i].bucket);
    }
    const auto c = assign_split(files, {8, 1, 1}, 8);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].bucket != c[i].bucket;
    EXPECT_TRUE(differs);
}

TEST(Split, CommandWritesBucketCounts) {
    for (auto [n, train] : {std::pair<int, int>{10, 8}, {12, 10}}) {
        const auto dir = oracle::temp_dir("split_" + std::to_string(n));
        fs::create_directories(dir / "in");
        for (int i = 0; i < n; ++i) write_file(dir / "in" / ("s" + std::to_string(i) + ".dat"), "x");
        const CliRun r = run({"split", "--input", (dir / "in").string(), "--output", (dir / "out").string()});
        ASSERT_EQ(r.code, kExitOk) << r.log;
        std::map<std::string, int> count;
        const auto l = lines_of(dir / "out" / "split.csv");
        EXPECT_EQ(l[0], "file,bucket");
        for (std::size_t i = 1; i < l.size(); ++i) count[l[i].substr(l[i].find(',') + 1)]++;
        EXPECT_EQ(count["train"], train);
        EXPECT_EQ(count["val"], 1);
        EXPECT_EQ(count["test"], 1);
    }
    const auto few = oracle::temp_dir("split_few");
    write_file(few / "a", "x");
    write_file(few / "b", "x");
    EXPECT_EQ(run({"split", "--input", few.string(), "--output", (few / "o").string()}).code, kExitEmptyOrParse);
}

TEST(Augment, FullCropWithoutJitterIsIdentity) {
    oracle::Gen g(2);
    const ImageF32 img = oracle::random_image(g, 17, 11);
    const AugmentConfig cfg{1.0, 0.0, 1};
    const AugmentSample s = augment_image(img, cfg, 7, "x.ppm", 0);
    EXPECT_EQ(s.image, img);
    EXPECT_EQ(s.x0, 0);
    EXPECT_EQ(s.y0, 0);
}

TEST(Augment, CropGeometryAndReproducibility) {
    oracle::Gen g(3);
    const ImageF32 img = oracle::random_image(g, 100, 100);
    const AugmentConfig cfg{0.8, 0.1, 2};
    for (int k = 0; k < 20; ++k) {
        const AugmentSample s = augment_image(img, cfg, 7, "a.ppm", k);
        EXPECT_EQ(s.image.width(), 80);
        EXPECT_EQ(s.image.height(), 80);
        EXPECT_GE(s.x0, 0);
        EXPECT_LE(s.x0, 20);
        EXPECT_GE(s.y0, 0);
        EXPECT_LE(s.y0, 20);
        for (double gain : s.gains) {
            EXPECT_GE(gain, 0.9);
            EXPECT_LE(gain, 1.1);
        }
        const AugmentSample again = augment_image(img, cfg, 7, "a.ppm", k);
        EXPECT_EQ(again.image, s.image);
        EXPECT_EQ(again.gains, s.gains);
    }
    const AugmentSample other = augment_image(img, cfg, 7, "b.ppm", 0);
    const AugmentSample first = augment_image(img, cfg, 7, "a.ppm", 0);
    EXPECT_FALSE(other.image == first.image);
}

TEST(Augment, CommandIdentityConfigCopiesImages) {
    const auto in = corpus_dir("augment_in", 3, 16);
    const auto out = oracle::temp_dir("augment_out");
    const auto cfg = oracle::temp_dir("augment_cfg") / "c.json";
    write_file(cfg, R"({"augment": {"crop_fraction": 1.0, "jitter_amplitude": 0.0, "samples_per_image": 1}})");
    const CliRun r = run({"augment", "--input", in.string(), "--output", out.string(), "--config", cfg.string()});
    ASSERT_EQ(r.code, kExitOk) << r.log;
    for (const auto& f : list_images(in)) {
        EXPECT_EQ(slurp(out / (f.stem().string() + "_aug0.ppm")), slurp(f));
    }
    EXPECT_EQ(lines_of(out / "augment.csv").size(), 4u);
}

TEST(Parallel, EachIndexOnceAndLowestErrorWins) {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (int h : hits) EXPECT_EQ(h, 1);
    try {
        parallel_for(50, 3, [](std::size_t i) {
            if (i == 7 || i == 30) throw std::runtime_error("at " + std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "at 7");
    }
}

TEST(Classify, CommandLabelsArchetypes) {
    const auto dir = oracle::temp_dir("classify_in");
    const Category8 cats[] = {Category8::ColorBiasOnly, Category8::LowLightBlur, Category8::NoIssues};
    for (int i = 0; i < 3; ++i) save_ppm(synthetic::make_archetype(cats[i], 5), dir / ("a" + std::to_string(i) + ".ppm"));
    write_file(dir / "broken.ppm", "P6\n4 4\n255\nxx");
    const auto out = oracle::temp_dir("classify_out");
    const CliRun r = run({"classify", "--input", dir.string(), "--output", out.string()});
    ASSERT_EQ(r.code, kExitOk) << r.log;
    EXPECT_NE(r.log.find("skip broken.ppm"), std::string::npos);
    EXPECT_NE(r.log.find("classified 3 images, skipped 1"), std::string::npos);
    const auto l = lines_of(out / "labels.csv");
    ASSERT_EQ(l.size(), 4u);
    EXPECT_EQ(l[0], "file,cast,lowlight,blur,category");
    EXPECT_EQ(l[1], "a0.ppm,1,0,0,ColorBiasOnly");
    EXPECT_EQ(l[2], "a1.ppm,0,1,1,LowLightBlur");
    EXPECT_EQ(l[3], "a2.ppm,0,0,0,NoIssues");
    EXPECT_EQ(lines_of(out / "summary.csv").size(), 9u);
}

TEST(Enhance, NoIssuesImageIsUnchangedByClassic) {
    const ImageF32 img = synthetic::make_archetype(Category8::NoIssues, 3, 32, 32);
    const PipelineConfig cfg;
    const EnhanceResult r = enhance_image(img, cfg, prepare_models(cfg.neural, cfg.seed));
    EXPECT_TRUE(r.plan.empty());
    EXPECT_EQ(r.image, img);
}

TEST(Enhance, UniteWithZeroGainEqualsClassic) {
    const ImageF32 img = synthetic::make_archetype(Category8::ColorBiasLowLightBlur, 4, 32, 32);
    PipelineConfig classic;
    PipelineConfig unite;
    unite.neural.method = NeuralMethod::Unite;
    unite.neural.gain = 0.0;
    const EnhanceResult a = enhance_image(img, classic, prepare_models(classic.neural, 7));
    const EnhanceResult b = enhance_image(img, unite, prepare_models(unite.neural, 7));
    EXPECT_EQ(a.image, b.image);
}

TEST(Enhance, NeuralRunsAreRepeatableAndCropIndivisibleInputs) {
    PipelineConfig cfg;
    cfg.neural.method = NeuralMethod::Vgg;
    const NeuralModels m = prepare_models(cfg.neural, 7);
    const ImageF32 img = synthetic::make_archetype(Category8::ColorBiasOnly, 1, 32, 32);
    EXPECT_EQ(enhance_image(img, cfg, m).image, enhance_image(img, cfg, prepare_models(cfg.neural, 7)).image);

    cfg.neural.method = NeuralMethod::Resnet;
    const EnhanceResult odd = enhance_image(img.crop(0, 0, 30, 27), cfg, prepare_models(cfg.neural, 7));
    EXPECT_EQ(odd.image.width(), 28);
    EXPECT_EQ(odd.image.height(), 24);
    ASSERT_FALSE(odd.warnings.empty());
    EXPECT_EQ(odd.warnings[0], "cropped 30x27 to 28x24");
}

TEST(Enhance, CommandMissingWeightsExitsThree) {
    const auto in = corpus_dir("enhance_missing", 1);
    const auto cfg = oracle::temp_dir("enhance_missing_cfg") / "c.json";
    write_file(cfg, R"({"neural": {"vgg_weights": "/nonexistent/manifest.json"}})");
    const CliRun r = run({"enhance", "--input", in.string(), "--output", (in / "o").string(), "--method", "vgg",
                       "--config", cfg.string()});
    EXPECT_EQ(r.code, kExitMissingWeights) << r.log;
}

TEST(Enhance, CommandWritesImagesAndLog) {
    const auto in = corpus_dir("enhance_in", 2);
    const auto out = oracle::temp_dir("enhance_out");
    const CliRun r = run({"enhance", "--input", in.string(), "--output", out.string(), "--method", "unite"});
    ASSERT_EQ(r.code, kExitOk) << r.log;
    EXPECT_TRUE(fs::exists(out / "img00.unite.ppm"));
    EXPECT_TRUE(fs::exists(out / "img01.unite.ppm"));
    const auto l = lines_of(out / "enhance_log.jsonl");
    ASSERT_EQ(l.size(), 2u);
    const auto j = nlohmann::json::parse(l[0]);
    EXPECT_EQ(j["file"], "img00.ppm");
    EXPECT_EQ(j["method"], "unite");
    EXPECT_EQ(j["neural"]["seed"], 7);
}

TEST(Evaluate, SelfReferenceIsInfiniteAndNoReferenceLeavesPsnrEmpty) {
    const auto in = corpus_dir("evaluate_in", 2, 16);
    const auto out = oracle::temp_dir("evaluate_out");
    CliRun r = run({"evaluate", "--input", in.string(), "--output", out.string()});
    ASSERT_EQ(r.code, kExitOk) << r.log;
    auto l = lines_of(out / "scores.csv");
    EXPECT_EQ(l[0], kScoresHeader);
    EXPECT_EQ(l[1].rfind("img00,Original,,", 0), 0u);

    r = run({"evaluate", "--input", in.string(), "--output", out.string(), "--reference", in.string()});
    ASSERT_EQ(r.code, kExitOk) << r.log;
    l = lines_of(out / "scores.csv");
    EXPECT_EQ(l[1].rfind("img00,Original,inf,", 0), 0u);

    const auto elsewhere = corpus_dir("evaluate_ref", 0);
    save_ppm(ImageF32(16, 16, 3, 0.5f), elsewhere / "other.ppm");
    r = run({"evaluate", "--input", in.string(), "--output", out.string(), "--reference", elsewhere.string()});
    EXPECT_EQ(r.code, kExitEmptyOrParse);
    EXPECT_NE(r.log.find("unmatched reference other.ppm"), std::string::npos);
}

TEST(Report, CategoryFixtureReproducesProportions) {
    const auto out = oracle::temp_dir("report_fixture");
    const CliRun r = run({"report", "--labels", (kFixtures / "labels_sample.csv").string(), "--scores",
                       (kFixtures / "scores_sample.csv").string(), "--output", out.string()});
    ASSERT_EQ(r.code, kExitOk) << r.log;
    const std::string md = slurp(out / "report.md");
    for (const char* row : {"| 1 | Color bias only | 154 | 51.33% |", "| 2 | Color bias + blur | 65 | 21.67% |",
                            "| 3 | Color bias + low light | 49 | 16.33% |", "| 4 | Color bias + low light + blur | 14 | 4.67% |",
                            "| 5 | No issues | 12 | 4.00% |", "| 6 | Blur only | 3 | 1.00% |",
                            "| 7 | Low light + blur | 2 | 0.67% |", "| 8 | Low light only | 1 | 0.33% |",
                            "Total images: 300", "| Metric | Original | Unite | VGG19 | ResNet50 |",
                            "| PSNR | 10.0000 | 11.1400 | 13.8000 | 12.7500 |",
                            "| UCIQE | 30.2300 | 94.4800 | 129.9200 | 105.6300 |",
                            "| UIQM | 43.3100 | 75.4200 | 82.9600 | 81.7600 |"}) {
        EXPECT_NE(md.find(row), std::string::npos) << row;
    }
    const auto csv = lines_of(out / "report.csv");
    EXPECT_EQ(csv[0], "section,row,column,value");
    EXPECT_NE(std::find(csv.begin(), csv.end(), "methods,UCIQE,VGG19,129.9200"), csv.end());
}

TEST(Report, EmptyScoresGiveCategoryTableOnly) {
    const auto dir = oracle::temp_dir("report_empty");
    write_file(dir / "scores.csv", std::string(kScoresHeader) + "\n");
    const CliRun r = run({"report", "--labels", (kFixtures / "labels_sample.csv").string(), "--scores",
                       (dir / "scores.csv").string(), "--output", dir.string()});
    ASSERT_EQ(r.code, kExitOk) << r.log;
    EXPECT_NE(r.log.find("notice:"), std::string::npos);
    EXPECT_NE(slurp(dir / "report.md").find("No quality scores available."), std::string::npos);
}

TEST(Report, MalformedRowNamesItsLine) {
    const auto dir = oracle::temp_dir("report_bad");
    auto l = lines_of(kFixtures / "labels_sample.csv");
    l[6] = "img005.ppm,1,0,0,Sideways";
    std::string text;
    for (const auto& s : l) text += s + "\n";
    write_file(dir / "labels.csv", text);
    write_file(dir / "scores.csv", "");
    const CliRun r = run({"report", "--labels", (dir / "labels.csv").string(), "--scores", (dir / "scores.csv").string(),
                       "--output", dir.string()});
    EXPECT_EQ(r.code, kExitEmptyOrParse);
    EXPECT_NE(r.log.find("labels.csv:7:"), std::string::npos) << r.log;
}
