#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "aquaclear/image.hpp"

namespace aquaclear {

struct DegradationFlags {
    bool color_cast = false;
    bool low_light = false;
    bool blurred = false;

    bool operator==(const DegradationFlags&) const = default;
};

// Declaration order is the report rank order.
enum class Category8 {
    ColorBiasOnly,
    ColorBiasBlur,
    ColorBiasLowLight,
    ColorBiasLowLightBlur,
    NoIssues,
    BlurOnly,
    LowLightBlur,
    LowLightOnly,
};

inline constexpr std::array<Category8, 8> kAllCategories{
    Category8::ColorBiasOnly,     Category8::ColorBiasBlur, Category8::ColorBiasLowLight,
    Category8::ColorBiasLowLightBlur, Category8::NoIssues, Category8::BlurOnly,
    Category8::LowLightBlur,      Category8::LowLightOnly,
};

Category8 category_of(const DegradationFlags& flags) noexcept;
DegradationFlags flags_of(Category8 category) noexcept;
int rank_of(Category8 category) noexcept;  // 1-based
std::string_view description(Category8 category) noexcept;
std::string_view identifier(Category8 category) noexcept;  // e.g. "ColorBiasLowLightBlur"
std::optional<Category8> parse_category(std::string_view text) noexcept;

struct ClassifierThresholds {
    double cast_ratio = 0.25;
    double brightness_floor = 0.35;
    double sharpness_floor = 0.0015;

    void validate() const;
};

struct CastDiagnostics {
    double mean_r = 0.0;
    double mean_g = 0.0;
    double mean_b = 0.0;
    double mean_avg = 0.0;
    double max_rel_dev = 0.0;
    bool near_black = false;  // cast undefined; reported as false
};

struct CastResult {
    bool cast = false;
    CastDiagnostics diagnostics;
};

CastResult detect_color_cast(const ImageF32& img, const ClassifierThresholds& thresholds = {});
double mean_brightness(const ImageF32& img);  // mean of HSV V
bool detect_low_light(const ImageF32& img, const ClassifierThresholds& thresholds = {});
bool detect_blur(const ImageF32& img, const ClassifierThresholds& thresholds = {});

struct Classification {
    DegradationFlags flags;
    Category8 category = Category8::NoIssues;
    CastDiagnostics cast;
    double brightness = 0.0;
    double sharpness = 0.0;
    bool near_black_warning = false;
};

Classification classify(const ImageF32& img, const ClassifierThresholds& thresholds = {});

struct DatasetReport {
    std::size_t total = 0;
    std::array<std::size_t, 8> counts{};       // rank order
    std::array<double, 8> proportions{};       // rank order
    // Single-degradation marginals: images showing the degradation at all.
    std::size_t cast_count = 0;
    std::size_t low_light_count = 0;
    std::size_t blur_count = 0;
    double cast_rate = 0.0;
    double low_light_rate = 0.0;
    double blur_rate = 0.0;
    // [low_light][cast*2 + blur]
    std::array<std::array<std::size_t, 4>, 2> cooccurrence{};
};

DatasetReport summarize(std::span<const Category8> labels);

// Rank,Description,Proportion with percentages to two decimals
std::string summary_csv(const DatasetReport& report);
// lowlight,cast,blur,count
std::string cooccurrence_csv(const DatasetReport& report);
// degradation,count,proportion
std::string marginals_csv(const DatasetReport& report);

}  // namespace aquaclear
