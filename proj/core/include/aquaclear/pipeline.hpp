#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "aquaclear/classifier.hpp"
#include "aquaclear/enhance.hpp"
#include "aquaclear/image.hpp"
#include "aquaclear/neural/extractor.hpp"

namespace aquaclear::pipeline {

// Stable process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitEmptyOrParse = 2,
    kExitMissingWeights = 3,
    kExitBadParameters = 4,
};

enum class NeuralMethod { Classic, Vgg, Resnet, Unite };

std::string_view method_key(NeuralMethod m) noexcept;  // classic | vgg | resnet | unite
std::optional<NeuralMethod> parse_method(std::string_view text) noexcept;

enum class PreprocessStep { Homomorphic, HistEq };

struct NeuralConfig {
    NeuralMethod method = NeuralMethod::Classic;
    double gain = 0.5;
    std::uint64_t seed = 7;  // weight initialization when no manifest is given
    int vgg_depth = 4;
    std::optional<std::filesystem::path> vgg_weights;
    std::optional<std::filesystem::path> resnet_weights;
};

struct SplitConfig {
    std::array<double, 3> ratios{8.0, 1.0, 1.0};  // train, val, test
};

struct AugmentConfig {
    double crop_fraction = 0.8;
    double jitter_amplitude = 0.1;
    int samples_per_image = 2;
};

struct PipelineConfig {
    ClassifierThresholds thresholds;
    ClassicParams classic;
    std::vector<PreprocessStep> preprocess;  // run ahead of the classified plan
    NeuralConfig neural;
    SplitConfig split;
    AugmentConfig augment;
    std::uint64_t seed = 7;  // split and augmentation
    std::filesystem::path output_dir = "out";
    int threads = 1;
    bool verbose = false;

    // Throws Error(InvalidParameter / InvalidThresholds / ...).
    void validate() const;
};

// Unknown keys and wrong types raise Errc::ParseError; out-of-range values
// raise the owning module's error code.
PipelineConfig parse_config(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const PipelineConfig& config);

struct CommandOptions {
    std::filesystem::path input;
    std::filesystem::path output;
    std::optional<std::filesystem::path> reference;
    std::filesystem::path labels;
    std::filesystem::path scores;
};

// *.ppm files in a directory, sorted by file name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled exactly once; callers store results by index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Largest-remainder allocation of n items over the ratios; ties go to the
// earlier bucket.
std::array<std::size_t, 3> allocate_split(std::size_t n, const std::array<double, 3>& ratios);

struct SplitEntry {
    std::string file;
    std::string bucket;  // train | val | test
};

std::vector<SplitEntry> assign_split(std::vector<std::string> files, const std::array<double, 3>& ratios,
                                     std::uint64_t seed);

struct AugmentSample {
    ImageF32 image;
    int x0 = 0;
    int y0 = 0;
    std::array<double, 3> gains{1.0, 1.0, 1.0};
};

// Deterministic per (seed, file name, sample index).
AugmentSample augment_image(const ImageF32& img, const AugmentConfig& config, std::uint64_t seed,
                            std::string_view file_name, int sample_index);

// Feature extractors for the neural methods, bound once per run.
struct NeuralModels {
    std::optional<nn::Extractor> vgg;
    std::optional<nn::Extractor> resnet;
};

NeuralModels prepare_models(const NeuralConfig& config, std::uint64_t seed);

struct EnhanceResult {
    ImageF32 image;
    Classification classification;
    EnhancementPlan plan;
    std::vector<std::string> warnings;
    std::vector<StepDiagnostics> diagnostics;
};

// classify -> (neural attention adjustment) -> classical plan.
EnhanceResult enhance_image(const ImageF32& img, const PipelineConfig& config, const NeuralModels& models);

int cmd_classify(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log);
int cmd_enhance(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log);
int cmd_evaluate(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log);
int cmd_split(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log);
int cmd_augment(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log);
int cmd_report(const PipelineConfig& config, const CommandOptions& opts, std::ostream& log);

}  // namespace aquaclear::pipeline
