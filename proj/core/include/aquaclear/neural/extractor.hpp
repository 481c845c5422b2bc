#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aquaclear/image.hpp"
#include "aquaclear/neural/tensor.hpp"

namespace aquaclear::nn {

struct ConvSpec {
    std::string name;
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 3;
    int stride = 1;
    int padding = 1;
    Activation activation = Activation::Relu;
};

struct PoolSpec {
    std::string name;
};

// Two kernel x kernel convs at `channels`, stride 1, same padding.
struct ResidualSpec {
    std::string name;
    int channels = 0;
    int kernel = 3;
};

using LayerSpec = std::variant<ConvSpec, PoolSpec, ResidualSpec>;

enum class HeadKind { Vgg, Resnet, Custom };

struct ExtractorSpec {
    HeadKind kind = HeadKind::Custom;
    std::vector<LayerSpec> layers;
    std::string tap;  // name of the layer whose output is returned

    void validate() const;
    std::size_t tap_index() const;
};

std::string layer_name(const LayerSpec& layer);

// conv1_1(3->64) relu, conv1_2(64->64) relu, pool1, conv2_1(64->128) relu,
// conv2_2(128->128) relu, truncated after the depth-th conv.
ExtractorSpec build_vgg_head(int depth = 4);

// conv1 7x7/2 pad 3 (3->64) relu, pool1, res2a, res2b at 64 channels.
ExtractorSpec build_resnet_head();

// Shape after each layer up to the tap; throws the same errors the forward pass would.
std::vector<Shape3> layer_shapes(const ExtractorSpec& spec, const Shape3& input);

// Spatial divisor the input must satisfy for every pooling to see even dims.
int required_divisor(const ExtractorSpec& spec);

// One parameter tensor in manifest order.
struct ParameterInfo {
    std::string name;
    std::vector<int> shape;

    std::size_t count() const noexcept;
};

std::vector<ParameterInfo> parameter_layout(const ExtractorSpec& spec);

using BoundLayer = std::variant<ConvLayer, PoolSpec, ResidualBlock>;

// Optional per-channel affine x * scale + offset applied to the input tensor.
struct InputAffine {
    std::array<float, 3> scale{1.0f, 1.0f, 1.0f};
    std::array<float, 3> offset{0.0f, 0.0f, 0.0f};
};

struct Extractor {
    ExtractorSpec spec;
    std::vector<BoundLayer> layers;  // parallel to spec.layers, up to the tap
    std::optional<InputAffine> input_affine;
};

// Binds a flat parameter list (manifest order) to the spec.
Extractor bind_parameters(const ExtractorSpec& spec, const std::vector<std::vector<float>>& params);

// He-scaled normals (std sqrt(2/fan_in)) from Rng(seed), biases zero.
Extractor init_weights(const ExtractorSpec& spec, std::uint64_t seed);

// All-zero weights and biases.
Extractor zero_weights(const ExtractorSpec& spec);

// manifest.json + blob of little-endian f32. The manifest lists
// {name, shape, dtype "f32le", byte_offset, byte_length} in execution order.
Extractor load_weights(const ExtractorSpec& spec, const std::filesystem::path& manifest_path);
void save_weights(const Extractor& extractor, const std::filesystem::path& directory);

std::vector<std::vector<float>> flatten_parameters(const Extractor& extractor);

Tensor forward(const Extractor& extractor, const Tensor& input);

Tensor image_to_tensor(const ImageF32& img);

// Checks divisibility (IndivisibleDims), converts RGB to a (3,H,W) tensor in
// [0,1] and runs the head to its tap.
Tensor extract_features(const ImageF32& img, const Extractor& extractor);

}  // namespace aquaclear::nn
