#include "aquaclear/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "aquaclear/color.hpp"
#include "aquaclear/filter.hpp"

namespace aquaclear {

namespace {

constexpr double kMinChannelMean = 1e-6;
constexpr double kLogEpsilon = 1e-3;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Replaces the V channel of an HSV image and converts back to RGB.
ImageF32 with_value(ImageF32 hsv, const Plane& value) {
    hsv.set_plane(2, value);
    return hsv_to_rgb(hsv);
}

}  // namespace

ImageF32 gray_world_correct(const ImageF32& img, std::vector<std::string>* warnings) {
    const ChannelStats s = channel_stats(img);
    const double means[3] = {s.mean_r, s.mean_g, s.mean_b};
    static constexpr const char* kNames[3] = {"red", "green", "blue"};
    std::vector<float> out(img.samples().begin(), img.samples().end());
    const std::size_t n = img.pixel_count();
    for (int c = 0; c < 3; ++c) {
        if (means[c] <= kMinChannelMean) {
            if (warnings) warnings->push_back(std::string("ZeroChannelMean: ") + kNames[c] + " channel left unscaled");
            continue;
        }
        const double gain = s.mean_avg / means[c];
        for (std::size_t i = 0; i < n; ++i) {
            float& v = out[static_cast<std::size_t>(c) * n + i];
            v = clamp_unit(v * gain);
        }
    }
    return ImageF32(img.width(), img.height(), 3, std::move(out));
}

void ClaheParams::validate() const {
    if (tiles_x < 1 || tiles_y < 1) throw Error(Errc::InvalidParameter, "CLAHE tile counts must be >= 1");
    if (!(clip_limit >= 1.0)) throw Error(Errc::InvalidParameter, "CLAHE clip_limit must be >= 1");
    if (bins < 2) throw Error(Errc::InvalidParameter, "CLAHE needs at least 2 bins");
}

int value_bin(double v, int bins) noexcept {
    const int b = static_cast<int>(std::floor(v * bins));
    return std::clamp(b, 0, bins - 1);
}

double TileMapping::apply(double v, int bins) const noexcept {
    if (identity) return v;
    return table[static_cast<std::size_t>(value_bin(v, bins))];
}

TileMapping equalization_mapping(std::vector<double> histogram, double clip_limit) {
    const double bins = static_cast<double>(histogram.size());
    double total = 0.0;
    for (double h : histogram) total += h;

    if (std::isfinite(clip_limit)) {
        const double limit = clip_limit * total / bins;
        double excess = 0.0;
        for (double& h : histogram) {
            if (h > limit) {
                excess += h - limit;
                h = limit;
            }
        }
        const double share = excess / bins;
        for (double& h : histogram) h += share;
    }

    TileMapping m;
    m.table.resize(histogram.size());
    double cdf = 0.0;
    double cdf_min = -1.0;
    for (std::size_t b = 0; b < histogram.size(); ++b) {
        cdf += histogram[b];
        if (cdf_min < 0.0 && histogram[b] > 0.0) cdf_min = cdf;
        m.table[b] = cdf;
    }
    if (cdf_min < 0.0 || cdf_min >= total * (1.0 - 1e-12)) {
        m.identity = true;
        m.table.clear();
        return m;
    }
    const double denom = total - cdf_min;
    for (double& t : m.table) t = std::clamp((t - cdf_min) / denom, 0.0, 1.0);
    return m;
}

ImageF32 clahe_v(const ImageF32& img, const ClaheParams& params) {
    params.validate();
    img.require_rgb("clahe_v");
    const ImageF32 hsv = rgb_to_hsv(img);
    const Plane v = hsv.plane(2);
    const int w = v.width();
    const int h = v.height();
    const int tx = std::min(params.tiles_x, w);
    const int ty = std::min(params.tiles_y, h);

    auto edge = [](int i, int tiles, int size) { return static_cast<int>(static_cast<long long>(i) * size / tiles); };

    std::vector<TileMapping> maps(static_cast<std::size_t>(tx * ty));
    for (int j = 0; j < ty; ++j) {
        for (int i = 0; i < tx; ++i) {
            std::vector<double> hist(static_cast<std::size_t>(params.bins), 0.0);
            for (int y = edge(j, ty, h); y < edge(j + 1, ty, h); ++y)
                for (int x = edge(i, tx, w); x < edge(i + 1, tx, w); ++x)
                    hist[static_cast<std::size_t>(value_bin(v.at(x, y), params.bins))] += 1.0;
            maps[static_cast<std::size_t>(j * tx + i)] = equalization_mapping(std::move(hist), params.clip_limit);
        }
    }

    // Tile centres in pixel-centre coordinates.
    std::vector<double> cx(static_cast<std::size_t>(tx)), cy(static_cast<std::size_t>(ty));
    for (int i = 0; i < tx; ++i) cx[static_cast<std::size_t>(i)] = 0.5 * (edge(i, tx, w) + edge(i + 1, tx, w));
    for (int j = 0; j < ty; ++j) cy[static_cast<std::size_t>(j)] = 0.5 * (edge(j, ty, h) + edge(j + 1, ty, h));

    struct Interp {
        int lo, hi;
        double t;
    };
    auto locate = [](const std::vector<double>& centres, double p) {
        const int n = static_cast<int>(centres.size());
        if (p <= centres.front()) return Interp{0, 0, 0.0};
        if (p >= centres.back()) return Interp{n - 1, n - 1, 0.0};
        int lo = 0;
        while (lo + 1 < n && centres[static_cast<std::size_t>(lo + 1)] <= p) ++lo;
        const int hi = lo + 1;
        const double t = (p - centres[static_cast<std::size_t>(lo)]) /
                         (centres[static_cast<std::size_t>(hi)] - centres[static_cast<std::size_t>(lo)]);
        return Interp{lo, hi, t};
    };

    Plane out(w, h);
    for (int y = 0; y < h; ++y) {
        const Interp iy = locate(cy, y + 0.5);
        for (int x = 0; x < w; ++x) {
            const Interp ix = locate(cx, x + 0.5);
            const double val = v.at(x, y);
            auto map = [&](int i, int j) {
                return maps[static_cast<std::size_t>(j * tx + i)].apply(val, params.bins);
            };
            const double top = (1.0 - ix.t) * map(ix.lo, iy.lo) + ix.t * map(ix.hi, iy.lo);
            const double bottom = (1.0 - ix.t) * map(ix.lo, iy.hi) + ix.t * map(ix.hi, iy.hi);
            out.at(x, y) = clamp_unit((1.0 - iy.t) * top + iy.t * bottom);
        }
    }
    return with_value(hsv, out);
}

void SharpenParams::validate() const {
    if (!(strength >= 0.0)) throw Error(Errc::NegativeStrength, "sharpen strength must be >= 0");
}

Kernel2D sharpen_kernel(KernelMode mode) {
    const double centre = mode == KernelMode::ZeroSum ? 8.0 : -9.0;
    return Kernel2D(3, {-1, -1, -1, -1, centre, -1, -1, -1, -1});
}

Plane sharpen_response(const Plane& plane, const SharpenParams& params) {
    params.validate();
    const Plane response = convolve2d(plane, sharpen_kernel(params.kernel_mode));
    Plane out(plane.width(), plane.height());
    for (std::size_t i = 0; i < plane.size(); ++i) {
        out.values()[i] = static_cast<float>(plane.values()[i] + params.strength * response.values()[i]);
    }
    return out;
}

ImageF32 sharpen(const ImageF32& img, const SharpenParams& params) {
    std::vector<Plane> planes;
    for (int c = 0; c < img.channels(); ++c) planes.push_back(sharpen_response(img.plane(c), params));
    return ImageF32::from_planes(planes);  // clamps
}

void NlmParams::validate() const {
    if (patch_radius < 0 || window_radius < patch_radius) {
        throw Error(Errc::InvalidParameter, "NLM needs 0 <= patch_radius <= window_radius");
    }
    if (!(h > 0.0)) throw Error(Errc::InvalidParameter, "NLM h must be positive");
}

namespace {

// Patch distances for all pixels at one search offset come from a summed-area
// table of squared differences over the replicate-padded plane.
Plane nlm_plane(const Plane& src, const NlmParams& params) {
    const int w = src.width();
    const int h = src.height();
    const int p = params.patch_radius;
    const int pw = w + 2 * p;
    const int ph = h + 2 * p;
    const double inv_area = 1.0 / ((2.0 * p + 1.0) * (2.0 * p + 1.0));
    const double inv_h2 = 1.0 / (params.h * params.h);

    std::vector<double> padded(static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph));
    for (int v = 0; v < ph; ++v)
        for (int u = 0; u < pw; ++u) padded[static_cast<std::size_t>(v) * pw + u] = src.clamped(u - p, v - p);

    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    std::vector<double> num(n, 0.0), den(n, 0.0);
    std::vector<double> sat(static_cast<std::size_t>(pw + 1) * static_cast<std::size_t>(ph + 1), 0.0);
    const auto sat_at = [&](int u, int v) -> double& { return sat[static_cast<std::size_t>(v) * (pw + 1) + u]; };

    const int r = params.window_radius;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            for (int v = 0; v < ph; ++v) {
                double row = 0.0;
                const int v2 = v + dy;
                for (int u = 0; u < pw; ++u) {
                    const int u2 = u + dx;
                    double d2 = 0.0;
                    if (v2 >= 0 && v2 < ph && u2 >= 0 && u2 < pw) {
                        const double diff = padded[static_cast<std::size_t>(v) * pw + u] -
                                            padded[static_cast<std::size_t>(v2) * pw + u2];
                        d2 = diff * diff;
                    }
                    row += d2;
                    sat_at(u + 1, v + 1) = sat_at(u + 1, v) + row;
                }
            }
            for (int y = 0; y < h; ++y) {
                const int ny = y + dy;
                if (ny < 0 || ny >= h) continue;
                for (int x = 0; x < w; ++x) {
                    const int nx = x + dx;
                    if (nx < 0 || nx >= w) continue;
                    // patch of x spans padded [x, x+2p] x [y, y+2p]
                    const double box = sat_at(x + 2 * p + 1, y + 2 * p + 1) - sat_at(x, y + 2 * p + 1) -
                                       sat_at(x + 2 * p + 1, y) + sat_at(x, y);
                    const double weight = (dx == 0 && dy == 0) ? 1.0 : std::exp(-std::max(box, 0.0) * inv_area * inv_h2);
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    num[i] += weight * src.at(nx, ny);
                    den[i] += weight;
                }
            }
        }
    }

    Plane out(w, h);
    for (std::size_t i = 0; i < n; ++i) out.values()[i] = clamp_unit(num[i] / den[i]);
    return out;
}

}  // namespace

ImageF32 nlm_denoise(const ImageF32& img, const NlmParams& params) {
    params.validate();
    const int side = 2 * params.patch_radius + 1;
    if (img.width() < side || img.height() < side) {
        throw Error(Errc::ImageTooSmall, "image smaller than one NLM patch");
    }
    std::vector<Plane> planes;
    for (int c = 0; c < img.channels(); ++c) planes.push_back(nlm_plane(img.plane(c), params));
    return ImageF32::from_planes(planes);
}

void HomomorphicParams::validate() const {
    if (!(sigma > 0.0)) throw Error(Errc::NonPositiveSigma, "homomorphic sigma must be positive");
    if (!std::isfinite(gamma_low) || !std::isfinite(gamma_high)) {
        throw Error(Errc::InvalidParameter, "homomorphic gammas must be finite");
    }
}

ImageF32 homomorphic_filter(const ImageF32& img, const HomomorphicParams& params) {
    params.validate();
    img.require_rgb("homomorphic_filter");
    const ImageF32 hsv = rgb_to_hsv(img);
    const Plane v = hsv.plane(2);
    const std::size_t n = v.size();

    std::vector<double> logv(n);
    Plane log_plane(v.width(), v.height());
    for (std::size_t i = 0; i < n; ++i) {
        logv[i] = std::log(static_cast<double>(v.values()[i]) + kLogEpsilon);
        log_plane.values()[i] = static_cast<float>(logv[i]);
    }
    const Plane low = gaussian_blur(log_plane, params.sigma);

    Plane out(v.width(), v.height());
    for (std::size_t i = 0; i < n; ++i) {
        const double lp = low.values()[i];
        const double e = params.gamma_low * lp + params.gamma_high * (logv[i] - lp);
        out.values()[i] = clamp_unit(std::exp(e) - kLogEpsilon);
    }
    return with_value(hsv, out);
}

ImageF32 hist_equalize_global(const ImageF32& img) {
    img.require_rgb("hist_equalize_global");
    constexpr int kBins = 256;
    const ImageF32 hsv = rgb_to_hsv(img);
    const Plane v = hsv.plane(2);
    std::vector<double> hist(kBins, 0.0);
    for (float s : v.values()) hist[static_cast<std::size_t>(value_bin(s, kBins))] += 1.0;
    const TileMapping m = equalization_mapping(std::move(hist), std::numeric_limits<double>::infinity());
    Plane out(v.width(), v.height());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.values()[i] = m.identity ? 0.0f : static_cast<float>(m.apply(v.values()[i], kBins));
    }
    return with_value(hsv, out);
}

std::string_view step_name(StepKind kind) noexcept {
    switch (kind) {
        case StepKind::GrayWorld: return "GrayWorld";
        case StepKind::Clahe: return "Clahe";
        case StepKind::Denoise: return "Denoise";
        case StepKind::Sharpen: return "Sharpen";
        case StepKind::Homomorphic: return "Homomorphic";
        case StepKind::GlobalHistEq: return "GlobalHistEq";
    }
    return "";
}

StepKind step_kind(const StepParams& params) noexcept {
    return std::visit(Overloaded{
                          [](const GrayWorldParams&) { return StepKind::GrayWorld; },
                          [](const ClaheParams&) { return StepKind::Clahe; },
                          [](const NlmParams&) { return StepKind::Denoise; },
                          [](const SharpenParams&) { return StepKind::Sharpen; },
                          [](const HomomorphicParams&) { return StepKind::Homomorphic; },
                          [](const HistEqParams&) { return StepKind::GlobalHistEq; },
                      },
                      params);
}

EnhancementPlan::EnhancementPlan(std::vector<PlanStep> steps) : steps_(std::move(steps)) {
    std::set<StepKind> seen;
    for (const auto& s : steps_) {
        if (!seen.insert(s.kind()).second) {
            throw Error(Errc::DuplicateStep, "duplicate step " + std::string(step_name(s.kind())));
        }
    }
}

std::vector<StepKind> EnhancementPlan::kinds() const {
    std::vector<StepKind> out;
    for (const auto& s : steps_) out.push_back(s.kind());
    return out;
}

EnhancementPlan build_plan(const DegradationFlags& flags, const ClassicParams& params) {
    std::vector<PlanStep> steps;
    if (flags.color_cast) steps.push_back({GrayWorldParams{}});
    if (flags.low_light) steps.push_back({params.clahe});
    if (flags.blurred) {
        steps.push_back({params.nlm});
        steps.push_back({params.sharpen});
    }
    return EnhancementPlan(std::move(steps));
}

ImageF32 apply_step(const ImageF32& img, const PlanStep& step, std::vector<std::string>* warnings) {
    return std::visit(Overloaded{
                          [&](const GrayWorldParams&) { return gray_world_correct(img, warnings); },
                          [&](const ClaheParams& p) { return clahe_v(img, p); },
                          [&](const NlmParams& p) { return nlm_denoise(img, p); },
                          [&](const SharpenParams& p) { return sharpen(img, p); },
                          [&](const HomomorphicParams& p) { return homomorphic_filter(img, p); },
                          [&](const HistEqParams&) { return hist_equalize_global(img); },
                      },
                      step.params);
}

ImageF32 apply_plan(const ImageF32& img, const EnhancementPlan& plan, const DiagnosticsHook& hook) {
    ImageF32 current = img;
    for (std::size_t i = 0; i < plan.steps().size(); ++i) {
        const PlanStep& step = plan.steps()[i];
        StepDiagnostics diag;
        diag.index = i;
        diag.kind = step.kind();
        try {
            current = apply_step(current, step, &diag.warnings);
        } catch (const Error& e) {
            throw Error(e.code(), "step " + std::to_string(i) + " (" + std::string(step_name(step.kind())) +
                                      "): " + e.what());
        }
        if (hook) {
            if (current.channels() == 3) {
                const ChannelStats s = channel_stats(current);
                diag.mean_r = s.mean_r;
                diag.mean_g = s.mean_g;
                diag.mean_b = s.mean_b;
            }
            diag.laplacian_variance = laplacian_variance(current);
            hook(current, diag);
        }
    }
    return current;
}

}  // namespace aquaclear
