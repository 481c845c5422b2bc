#pragma once

#include <array>
#include <span>
#include <vector>

#include "aquaclear/error.hpp"

namespace aquaclear::nn {

// (channels, height, width), channel-major then row-major.
struct Shape3 {
    int channels = 0;
    int height = 0;
    int width = 0;

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
               static_cast<std::size_t>(width);
    }
    bool operator==(const Shape3&) const = default;
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape3 shape, float fill = 0.0f);
    Tensor(Shape3 shape, std::vector<float> data);

    const Shape3& shape() const noexcept { return shape_; }
    int channels() const noexcept { return shape_.channels; }
    int height() const noexcept { return shape_.height; }
    int width() const noexcept { return shape_.width; }

    float at(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }
    float& at(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    bool operator==(const Tensor&) const = default;

private:
    std::size_t index(int c, int y, int x) const noexcept {
        return (static_cast<std::size_t>(c) * static_cast<std::size_t>(shape_.height) +
                static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(shape_.width) +
               static_cast<std::size_t>(x);
    }

    Shape3 shape_;
    std::vector<float> data_;
};

enum class Activation { None, Relu };

// weights are (out, in, k, k); output element sums run input-channel-major,
// then kernel row, then kernel column. Cross-correlation, zero padding.
struct ConvLayer {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 1;
    int stride = 1;
    int padding = 0;
    Activation activation = Activation::None;
    std::vector<float> weights;
    std::vector<float> bias;

    static ConvLayer zeros(int in, int out, int kernel, int stride, int padding, Activation act);

    float weight(int o, int i, int ky, int kx) const noexcept {
        return weights[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
    }
    float& weight(int o, int i, int ky, int kx) noexcept {
        return weights[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
    }

    void validate() const;
    Shape3 output_shape(const Shape3& input) const;
};

// relu(x + conv_b(conv_a(x))), conv_a with relu, conv_b without.
struct ResidualBlock {
    ConvLayer conv_a;
    ConvLayer conv_b;

    void validate() const;
};

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer);
Tensor relu(const Tensor& t);
Tensor add(const Tensor& a, const Tensor& b);
Tensor residual_forward(const Tensor& input, const ResidualBlock& block);
Tensor max_pool2(const Tensor& t);

}  // namespace aquaclear::nn
