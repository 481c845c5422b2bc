#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aquaclear/error.hpp"

namespace aquaclear {

// Single-channel float raster, row-major. Values are unconstrained reals
// (log-domain and filter responses live here too).
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, float fill = 0.0f);
    Plane(int width, int height, std::vector<float> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    float at(int x, int y) const noexcept { return values_[index(x, y)]; }
    float& at(int x, int y) noexcept { return values_[index(x, y)]; }

    // Replicate-border access.
    float clamped(int x, int y) const noexcept;

    std::span<const float> values() const noexcept { return values_; }
    std::span<float> values() noexcept { return values_; }

    double mean() const noexcept;
    double variance() const noexcept;

    bool operator==(const Plane&) const = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
};

// Planar image with samples in [0,1]. Channel-major, then row-major.
// Every constructor and mutator clamps, so the range invariant always holds.
class ImageF32 {
public:
    ImageF32() = default;
    ImageF32(int width, int height, int channels, float fill = 0.0f);
    ImageF32(int width, int height, int channels, std::vector<float> samples);

    static ImageF32 from_planes(std::span<const Plane> planes);
    static ImageF32 filled_rgb(int width, int height, float r, float g, float b);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    float at(int c, int x, int y) const noexcept { return samples_[index(c, x, y)]; }
    void set(int c, int x, int y, float v) noexcept;

    std::span<const float> samples() const noexcept { return samples_; }
    std::span<const float> channel(int c) const noexcept {
        return std::span<const float>(samples_).subspan(static_cast<std::size_t>(c) * pixel_count(),
                                                        pixel_count());
    }

    Plane plane(int c) const;
    void set_plane(int c, const Plane& p);

    // Sub-rectangle copy.
    ImageF32 crop(int x0, int y0, int width, int height) const;

    void require_rgb(const char* op) const;

    bool operator==(const ImageF32&) const = default;

private:
    std::size_t index(int c, int x, int y) const noexcept {
        return static_cast<std::size_t>(c) * pixel_count() +
               static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> samples_;
};

class Kernel2D {
public:
    Kernel2D(int side, std::vector<double> weights);

    static Kernel2D delta(int side);
    static Kernel2D box(int side);

    int side() const noexcept { return side_; }
    int radius() const noexcept { return side_ / 2; }
    double at(int i, int j) const noexcept {
        return weights_[static_cast<std::size_t>(j) * static_cast<std::size_t>(side_) +
                        static_cast<std::size_t>(i)];
    }
    std::span<const double> weights() const noexcept { return weights_; }

private:
    int side_;
    std::vector<double> weights_;
};

float clamp_unit(double v) noexcept;

}  // namespace aquaclear
