#include "aquaclear/neural/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aquaclear::nn {

namespace {

int floor_div(int a, int b) noexcept { return a >= 0 ? a / b : -((-a + b - 1) / b); }

std::string shape_str(const Shape3& s) {
    return "(" + std::to_string(s.channels) + "," + std::to_string(s.height) + "," + std::to_string(s.width) + ")";
}

}  // namespace

Tensor::Tensor(Shape3 shape, float fill) : shape_(shape) {
    if (shape.channels < 1 || shape.height < 1 || shape.width < 1) {
        throw Error(Errc::ShapeMismatch, "tensor dimensions must be positive, got " + shape_str(shape));
    }
    data_.assign(shape.count(), fill);
}

Tensor::Tensor(Shape3 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    if (shape.channels < 1 || shape.height < 1 || shape.width < 1 || data_.size() != shape.count()) {
        throw Error(Errc::ShapeMismatch, "tensor data does not match shape " + shape_str(shape));
    }
    for (float v : data_) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidParameter, "tensor values must be finite");
    }
}

ConvLayer ConvLayer::zeros(int in, int out, int kernel, int stride, int padding, Activation act) {
    ConvLayer l;
    l.in_channels = in;
    l.out_channels = out;
    l.kernel = kernel;
    l.stride = stride;
    l.padding = padding;
    l.activation = act;
    l.weights.assign(static_cast<std::size_t>(out) * in * kernel * kernel, 0.0f);
    l.bias.assign(static_cast<std::size_t>(out), 0.0f);
    l.validate();
    return l;
}

void ConvLayer::validate() const {
    if (in_channels < 1 || out_channels < 1) throw Error(Errc::ShapeMismatch, "conv channel counts must be positive");
    if (kernel < 1 || kernel % 2 == 0) throw Error(Errc::EvenKernel, "conv kernel must be odd");
    if (stride < 1 || padding < 0) throw Error(Errc::InvalidParameter, "conv stride >= 1 and padding >= 0");
    if (weights.size() != static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel ||
        bias.size() != static_cast<std::size_t>(out_channels)) {
        throw Error(Errc::ShapeMismatch, "conv weight/bias sizes inconsistent with declared shape");
    }
}

Shape3 ConvLayer::output_shape(const Shape3& input) const {
    if (input.channels != in_channels) {
        throw Error(Errc::ShapeMismatch, "conv expects " + std::to_string(in_channels) + " input channels, got " +
                                             std::to_string(input.channels));
    }
    const int span_h = input.height + 2 * padding - kernel;
    const int span_w = input.width + 2 * padding - kernel;
    if (span_h < 0 || span_w < 0) {
        throw Error(Errc::NonIntegralOutputDim, "kernel larger than padded input " + shape_str(input));
    }
    return {out_channels, span_h / stride + 1, span_w / stride + 1};
}

void ResidualBlock::validate() const {
    conv_a.validate();
    conv_b.validate();
    const bool same = conv_a.stride == 1 && conv_b.stride == 1 && conv_a.padding * 2 + 1 == conv_a.kernel &&
                      conv_b.padding * 2 + 1 == conv_b.kernel && conv_a.in_channels == conv_a.out_channels &&
                      conv_b.in_channels == conv_b.out_channels && conv_a.out_channels == conv_b.in_channels;
    if (!same) throw Error(Errc::ShapeMismatch, "residual convs must preserve shape (stride 1, same padding)");
}

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer) {
    layer.validate();
    const Shape3 out_shape = layer.output_shape(input.shape());
    Tensor out(out_shape);
    const int k = layer.kernel;
    const int s = layer.stride;
    const int p = layer.padding;
    const int ih = input.height();
    const int iw = input.width();
    const int oh = out_shape.height;
    const int ow = out_shape.width;

    for (int o = 0; o < layer.out_channels; ++o) {
        float* dst = out.data().data() + static_cast<std::size_t>(o) * oh * ow;
        for (int i = 0; i < layer.in_channels; ++i) {
            const float* src = input.data().data() + static_cast<std::size_t>(i) * ih * iw;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const float wgt = layer.weight(o, i, ky, kx);
                    if (wgt == 0.0f) continue;  // adding +/-0 products leaves sums unchanged
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * s + ky - p;
                        if (iy < 0 || iy >= ih) continue;
                        const float* row = src + static_cast<std::size_t>(iy) * iw;
                        float* drow = dst + static_cast<std::size_t>(oy) * ow;
                        // ox range with 0 <= ox*s + kx - p < iw
                        const int lo = std::max(0, -floor_div(kx - p, s));
                        const int hi = std::min(ow, floor_div(iw - 1 + p - kx, s) + 1);
                        if (s == 1) {
                            const float* srow = row + kx - p;
                            for (int ox = lo; ox < hi; ++ox) drow[ox] += wgt * srow[ox];
                        } else {
                            for (int ox = lo; ox < hi; ++ox) drow[ox] += wgt * row[ox * s + kx - p];
                        }
                    }
                }
            }
        }
        const float b = layer.bias[static_cast<std::size_t>(o)];
        for (int j = 0; j < oh * ow; ++j) {
            float v = dst[j] + b;
            if (layer.activation == Activation::Relu) v = std::max(v, 0.0f);
            dst[j] = v;
        }
    }
    return out;
}

Tensor relu(const Tensor& t) {
    Tensor out = t;
    for (float& v : out.data()) v = std::max(v, 0.0f);
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw Error(Errc::ShapeMismatch, "add: shapes differ");
    Tensor out = a;
    auto src = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    return out;
}

Tensor residual_forward(const Tensor& input, const ResidualBlock& block) {
    block.validate();
    if (input.channels() != block.conv_a.in_channels) {
        throw Error(Errc::ShapeMismatch, "residual block channel count differs from input");
    }
    // conv_a carries its own relu; conv_b has none.
    ConvLayer a = block.conv_a;
    a.activation = Activation::Relu;
    ConvLayer b = block.conv_b;
    b.activation = Activation::None;
    return relu(add(input, conv2d_forward(conv2d_forward(input, a), b)));
}

Tensor max_pool2(const Tensor& t) {
    if (t.height() % 2 != 0 || t.width() % 2 != 0) {
        throw Error(Errc::OddSpatialDim, "max_pool2 needs even spatial dims, got " + shape_str(t.shape()));
    }
    const int oh = t.height() / 2;
    const int ow = t.width() / 2;
    Tensor out({t.channels(), oh, ow});
    for (int c = 0; c < t.channels(); ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                out.at(c, y, x) = std::max({t.at(c, 2 * y, 2 * x), t.at(c, 2 * y, 2 * x + 1), t.at(c, 2 * y + 1, 2 * x),
                                            t.at(c, 2 * y + 1, 2 * x + 1)});
    return out;
}

}  // namespace aquaclear::nn
