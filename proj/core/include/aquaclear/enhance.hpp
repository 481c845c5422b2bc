#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aquaclear/classifier.hpp"
#include "aquaclear/image.hpp"

namespace aquaclear {

// Channel gains mean_avg / mean_c, then clamp. A channel whose mean is at or
// below 1e-6 is left unscaled and a warning is appended.
ImageF32 gray_world_correct(const ImageF32& img, std::vector<std::string>* warnings = nullptr);

struct ClaheParams {
    int tiles_x = 8;
    int tiles_y = 8;
    double clip_limit = 2.0;  // multiple of the uniform bin height
    int bins = 256;

    void validate() const;
};

// Per-tile mapping table of a CLAHE pass, exposed for inspection.
struct TileMapping {
    bool identity = false;  // every pixel of the tile fell in one bin
    std::vector<double> table;

    double apply(double v, int bins) const noexcept;
};

int value_bin(double v, int bins) noexcept;

// Mapping for one histogram; shared by CLAHE tiles and global equalization.
TileMapping equalization_mapping(std::vector<double> histogram, double clip_limit);

// CLAHE on the HSV value channel; hue and saturation untouched.
ImageF32 clahe_v(const ImageF32& img, const ClaheParams& params = {});

enum class KernelMode { ZeroSum, Paper };

struct SharpenParams {
    double strength = 1.0;
    KernelMode kernel_mode = KernelMode::ZeroSum;

    void validate() const;
};

Kernel2D sharpen_kernel(KernelMode mode);

// I + strength * (K * I) before clamping.
Plane sharpen_response(const Plane& plane, const SharpenParams& params);

// I' = clamp(I + strength * (K * I)) per channel.
ImageF32 sharpen(const ImageF32& img, const SharpenParams& params = {});

struct NlmParams {
    int patch_radius = 3;
    int window_radius = 10;
    double h = 0.1;

    void validate() const;
};

// Non-local means. Weight exp(-d^2/h^2) where d^2 is the mean squared
// difference of replicate-padded patches; the centre pixel takes part with
// weight 1. The search window is restricted to in-image positions.
ImageF32 nlm_denoise(const ImageF32& img, const NlmParams& params = {});

struct HomomorphicParams {
    double gamma_low = 0.7;
    double gamma_high = 1.3;
    double sigma = 15.0;

    void validate() const;
};

// Log-domain illumination/reflectance split of V via a spatial Gaussian lowpass.
ImageF32 homomorphic_filter(const ImageF32& img, const HomomorphicParams& params = {});

// 256-bin global equalization of V, mapping (cdf - cdf_min) / (N - cdf_min).
// A single-valued V maps to 0.
ImageF32 hist_equalize_global(const ImageF32& img);

struct GrayWorldParams {};
struct HistEqParams {};

using StepParams =
    std::variant<GrayWorldParams, ClaheParams, NlmParams, SharpenParams, HomomorphicParams, HistEqParams>;

enum class StepKind { GrayWorld, Clahe, Denoise, Sharpen, Homomorphic, GlobalHistEq };

std::string_view step_name(StepKind kind) noexcept;
StepKind step_kind(const StepParams& params) noexcept;

struct PlanStep {
    StepParams params;

    StepKind kind() const noexcept { return step_kind(params); }
};

class EnhancementPlan {
public:
    EnhancementPlan() = default;
    explicit EnhancementPlan(std::vector<PlanStep> steps);

    const std::vector<PlanStep>& steps() const noexcept { return steps_; }
    std::vector<StepKind> kinds() const;
    bool empty() const noexcept { return steps_.empty(); }

private:
    std::vector<PlanStep> steps_;
};

// Parameter defaults used when the planner instantiates steps.
struct ClassicParams {
    ClaheParams clahe;
    NlmParams nlm;
    SharpenParams sharpen;
    HomomorphicParams homomorphic;
};

// cast -> GrayWorld, low light -> Clahe, blurred -> Denoise, Sharpen;
// always in the order GrayWorld, Clahe, Denoise, Sharpen.
EnhancementPlan build_plan(const DegradationFlags& flags, const ClassicParams& params = {});

struct StepDiagnostics {
    std::size_t index = 0;
    StepKind kind = StepKind::GrayWorld;
    double mean_r = 0.0;
    double mean_g = 0.0;
    double mean_b = 0.0;
    double laplacian_variance = 0.0;
    std::vector<std::string> warnings;
};

using DiagnosticsHook = std::function<void(const ImageF32&, const StepDiagnostics&)>;

ImageF32 apply_step(const ImageF32& img, const PlanStep& step, std::vector<std::string>* warnings = nullptr);

// Applies the steps in order. Failures are rethrown with the step index in
// the message and the original error code.
ImageF32 apply_plan(const ImageF32& img, const EnhancementPlan& plan, const DiagnosticsHook& hook = {});

}  // namespace aquaclear
