#include "aquaclear/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aquaclear {

float clamp_unit(double v) noexcept {
    if (!(v > 0.0)) return 0.0f;  // also maps NaN to 0
    if (v >= 1.0) return 1.0f;
    return static_cast<float>(v);
}

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw Error(Errc::InvalidDimensions,
                    "dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    }
}

}  // namespace

Plane::Plane(int width, int height, float fill) : width_(width), height_(height) {
    check_dims(width, height);
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Plane::Plane(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
    check_dims(width, height);
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(Errc::InvalidDimensions, "plane value count does not match dimensions");
    }
}

float Plane::clamped(int x, int y) const noexcept {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return values_[index(x, y)];
}

double Plane::mean() const noexcept {
    if (values_.empty()) return 0.0;
    double sum = 0.0;
    for (float v : values_) sum += v;
    return sum / static_cast<double>(values_.size());
}

double Plane::variance() const noexcept {
    if (values_.empty()) return 0.0;
    const double m = mean();
    double acc = 0.0;
    for (float v : values_) {
        const double d = v - m;
        acc += d * d;
    }
    return acc / static_cast<double>(values_.size());
}

ImageF32::ImageF32(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    check_dims(width, height);
    if (channels != 1 && channels != 3) {
        throw Error(Errc::InvalidDimensions, "channels must be 1 or 3");
    }
    samples_.assign(pixel_count() * static_cast<std::size_t>(channels), clamp_unit(fill));
}

ImageF32::ImageF32(int width, int height, int channels, std::vector<float> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
    check_dims(width, height);
    if (channels != 1 && channels != 3) {
        throw Error(Errc::InvalidDimensions, "channels must be 1 or 3");
    }
    if (samples_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
        throw Error(Errc::InvalidDimensions, "sample count does not match dimensions");
    }
    for (auto& s : samples_) s = clamp_unit(s);
}

ImageF32 ImageF32::from_planes(std::span<const Plane> planes) {
    if (planes.size() != 1 && planes.size() != 3) {
        throw Error(Errc::InvalidDimensions, "from_planes needs 1 or 3 planes");
    }
    const int w = planes[0].width();
    const int h = planes[0].height();
    ImageF32 img(w, h, static_cast<int>(planes.size()));
    for (std::size_t c = 0; c < planes.size(); ++c) img.set_plane(static_cast<int>(c), planes[c]);
    return img;
}

ImageF32 ImageF32::filled_rgb(int width, int height, float r, float g, float b) {
    ImageF32 img(width, height, 3);
    const std::size_t n = img.pixel_count();
    std::fill_n(img.samples_.begin(), n, clamp_unit(r));
    std::fill_n(img.samples_.begin() + static_cast<std::ptrdiff_t>(n), n, clamp_unit(g));
    std::fill_n(img.samples_.begin() + static_cast<std::ptrdiff_t>(2 * n), n, clamp_unit(b));
    return img;
}

void ImageF32::set(int c, int x, int y, float v) noexcept { samples_[index(c, x, y)] = clamp_unit(v); }

Plane ImageF32::plane(int c) const {
    auto ch = channel(c);
    return Plane(width_, height_, std::vector<float>(ch.begin(), ch.end()));
}

void ImageF32::set_plane(int c, const Plane& p) {
    if (p.width() != width_ || p.height() != height_) {
        throw Error(Errc::DimMismatch, "plane dimensions differ from image");
    }
    auto src = p.values();
    auto dst = samples_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c) * pixel_count());
    for (std::size_t i = 0; i < src.size(); ++i) dst[static_cast<std::ptrdiff_t>(i)] = clamp_unit(src[i]);
}

ImageF32 ImageF32::crop(int x0, int y0, int width, int height) const {
    if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > width_ || y0 + height > height_) {
        throw Error(Errc::InvalidDimensions, "crop rectangle outside image");
    }
    ImageF32 out(width, height, channels_);
    for (int c = 0; c < channels_; ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out.samples_[out.index(c, x, y)] = at(c, x0 + x, y0 + y);
    return out;
}

void ImageF32::require_rgb(const char* op) const {
    if (channels_ != 3) {
        throw Error(Errc::ChannelMismatch, std::string(op) + " requires a 3-channel image");
    }
}

Kernel2D::Kernel2D(int side, std::vector<double> weights) : side_(side), weights_(std::move(weights)) {
    if (side < 1 || side % 2 == 0) {
        throw Error(Errc::EvenKernel, "kernel side must be odd and positive, got " + std::to_string(side));
    }
    if (weights_.size() != static_cast<std::size_t>(side) * static_cast<std::size_t>(side)) {
        throw Error(Errc::InvalidDimensions, "kernel weight count must be side*side");
    }
    for (double w : weights_) {
        if (!std::isfinite(w)) throw Error(Errc::InvalidParameter, "kernel weights must be finite");
    }
}

Kernel2D Kernel2D::delta(int side) {
    std::vector<double> w(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), 0.0);
    if (side > 0) w[w.size() / 2] = 1.0;
    return Kernel2D(side, std::move(w));
}

Kernel2D Kernel2D::box(int side) {
    const double v = 1.0 / (static_cast<double>(side) * side);
    return Kernel2D(side, std::vector<double>(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), v));
}

}  // namespace aquaclear
