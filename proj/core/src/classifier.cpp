#include "aquaclear/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aquaclear/color.hpp"
#include "aquaclear/filter.hpp"

namespace aquaclear {

namespace {

constexpr double kNearBlack = 1e-6;

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

Category8 category_of(const DegradationFlags& f) noexcept {
    if (f.color_cast) {
        if (f.low_light) return f.blurred ? Category8::ColorBiasLowLightBlur : Category8::ColorBiasLowLight;
        return f.blurred ? Category8::ColorBiasBlur : Category8::ColorBiasOnly;
    }
    if (f.low_light) return f.blurred ? Category8::LowLightBlur : Category8::LowLightOnly;
    return f.blurred ? Category8::BlurOnly : Category8::NoIssues;
}

DegradationFlags flags_of(Category8 c) noexcept {
    switch (c) {
        case Category8::ColorBiasOnly: return {true, false, false};
        case Category8::ColorBiasBlur: return {true, false, true};
        case Category8::ColorBiasLowLight: return {true, true, false};
        case Category8::ColorBiasLowLightBlur: return {true, true, true};
        case Category8::NoIssues: return {false, false, false};
        case Category8::BlurOnly: return {false, false, true};
        case Category8::LowLightBlur: return {false, true, true};
        case Category8::LowLightOnly: return {false, true, false};
    }
    return {};
}

int rank_of(Category8 c) noexcept { return static_cast<int>(c) + 1; }

std::string_view description(Category8 c) noexcept {
    switch (c) {
        case Category8::ColorBiasOnly: return "Color bias only";
        case Category8::ColorBiasBlur: return "Color bias + blur";
        case Category8::ColorBiasLowLight: return "Color bias + low light";
        case Category8::ColorBiasLowLightBlur: return "Color bias + low light + blur";
        case Category8::NoIssues: return "No issues";
        case Category8::BlurOnly: return "Blur only";
        case Category8::LowLightBlur: return "Low light + blur";
        case Category8::LowLightOnly: return "Low light only";
    }
    return "";
}

std::string_view identifier(Category8 c) noexcept {
    switch (c) {
        case Category8::ColorBiasOnly: return "ColorBiasOnly";
        case Category8::ColorBiasBlur: return "ColorBiasBlur";
        case Category8::ColorBiasLowLight: return "ColorBiasLowLight";
        case Category8::ColorBiasLowLightBlur: return "ColorBiasLowLightBlur";
        case Category8::NoIssues: return "NoIssues";
        case Category8::BlurOnly: return "BlurOnly";
        case Category8::LowLightBlur: return "LowLightBlur";
        case Category8::LowLightOnly: return "LowLightOnly";
    }
    return "";
}

std::optional<Category8> parse_category(std::string_view text) noexcept {
    for (Category8 c : kAllCategories) {
        if (identifier(c) == text || description(c) == text) return c;
    }
    return std::nullopt;
}

void ClassifierThresholds::validate() const {
    if (!(cast_ratio > 0.0) || !(brightness_floor > 0.0) || !(brightness_floor < 1.0) ||
        !(sharpness_floor > 0.0)) {
        throw Error(Errc::InvalidThresholds,
                    "thresholds must be positive and brightness_floor < 1");
    }
}

CastResult detect_color_cast(const ImageF32& img, const ClassifierThresholds& thresholds) {
    const ChannelStats s = channel_stats(img);
    CastResult result;
    auto& d = result.diagnostics;
    d.mean_r = s.mean_r;
    d.mean_g = s.mean_g;
    d.mean_b = s.mean_b;
    d.mean_avg = s.mean_avg;
    if (s.mean_avg <= kNearBlack) {
        d.near_black = true;
        return result;
    }
    d.max_rel_dev = std::max({std::abs(s.mean_r - s.mean_avg), std::abs(s.mean_g - s.mean_avg),
                              std::abs(s.mean_b - s.mean_avg)}) /
                    s.mean_avg;
    result.cast = d.max_rel_dev > thresholds.cast_ratio;
    return result;
}

double mean_brightness(const ImageF32& img) {
    img.require_rgb("mean_brightness");
    // V = max(R,G,B); no need for the full HSV conversion.
    double sum = 0.0;
    auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) sum += std::max({r[i], g[i], b[i]});
    return sum / static_cast<double>(img.pixel_count());
}

bool detect_low_light(const ImageF32& img, const ClassifierThresholds& thresholds) {
    return mean_brightness(img) < thresholds.brightness_floor;
}

bool detect_blur(const ImageF32& img, const ClassifierThresholds& thresholds) {
    return laplacian_variance(img) < thresholds.sharpness_floor;
}

Classification classify(const ImageF32& img, const ClassifierThresholds& thresholds) {
    img.require_rgb("classify");
    Classification out;
    const CastResult cast = detect_color_cast(img, thresholds);
    out.cast = cast.diagnostics;
    out.near_black_warning = cast.diagnostics.near_black;
    out.brightness = mean_brightness(img);
    out.sharpness = laplacian_variance(img);
    out.flags.color_cast = cast.cast;
    out.flags.low_light = out.brightness < thresholds.brightness_floor;
    out.flags.blurred = out.sharpness < thresholds.sharpness_floor;
    out.category = category_of(out.flags);
    return out;
}

DatasetReport summarize(std::span<const Category8> labels) {
    if (labels.empty()) throw Error(Errc::EmptyDataset, "no labels to summarize");
    DatasetReport r;
    r.total = labels.size();
    for (Category8 c : labels) {
        ++r.counts[static_cast<std::size_t>(c)];
        const DegradationFlags f = flags_of(c);
        r.cast_count += f.color_cast;
        r.low_light_count += f.low_light;
        r.blur_count += f.blurred;
        ++r.cooccurrence[f.low_light ? 1 : 0][(f.color_cast ? 2 : 0) + (f.blurred ? 1 : 0)];
    }
    const double total = static_cast<double>(r.total);
    for (std::size_t i = 0; i < 8; ++i) r.proportions[i] = static_cast<double>(r.counts[i]) / total;
    r.cast_rate = static_cast<double>(r.cast_count) / total;
    r.low_light_rate = static_cast<double>(r.low_light_count) / total;
    r.blur_rate = static_cast<double>(r.blur_count) / total;
    return r;
}

std::string summary_csv(const DatasetReport& report) {
    std::string out = "Rank,Description,Proportion\n";
    for (Category8 c : kAllCategories) {
        const auto i = static_cast<std::size_t>(c);
        out += std::to_string(rank_of(c)) + "," + std::string(description(c)) + "," +
               fixed(100.0 * report.proportions[i], 2) + "%\n";
    }
    return out;
}

std::string cooccurrence_csv(const DatasetReport& report) {
    std::string out = "lowlight,cast,blur,count\n";
    for (int low = 0; low < 2; ++low) {
        for (int combo = 0; combo < 4; ++combo) {
            out += std::to_string(low) + "," + std::to_string(combo >> 1) + "," + std::to_string(combo & 1) +
                   "," + std::to_string(report.cooccurrence[static_cast<std::size_t>(low)][static_cast<std::size_t>(combo)]) +
                   "\n";
        }
    }
    return out;
}

std::string marginals_csv(const DatasetReport& report) {
    std::string out = "degradation,count,proportion\n";
    out += "color_cast," + std::to_string(report.cast_count) + "," + fixed(report.cast_rate, 4) + "\n";
    out += "low_light," + std::to_string(report.low_light_count) + "," + fixed(report.low_light_rate, 4) + "\n";
    out += "blur," + std::to_string(report.blur_count) + "," + fixed(report.blur_rate, 4) + "\n";
    return out;
}

}  // namespace aquaclear
