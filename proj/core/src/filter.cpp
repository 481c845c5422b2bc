#include "aquaclear/filter.hpp"

#include <algorithm>
#include <cmath>

#include "aquaclear/color.hpp"

namespace aquaclear {

Plane convolve2d(const Plane& plane, const Kernel2D& kernel) {
    const int w = plane.width();
    const int h = plane.height();
    const int r = kernel.radius();
    const int side = kernel.side();
    Plane out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = 0; j < side; ++j) {
                for (int i = 0; i < side; ++i) {
                    // flipped: weight (i,j) meets the sample at offset (r-i, r-j)
                    acc += kernel.at(i, j) * plane.clamped(x + r - i, y + r - j);
                }
            }
            out.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

std::vector<double> gaussian_taps(double sigma) {
    if (!(sigma > 0.0)) throw Error(Errc::NonPositiveSigma, "sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

Plane gaussian_blur(const Plane& plane, double sigma) {
    const auto taps = gaussian_taps(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = plane.width();
    const int h = plane.height();

    // Horizontal pass kept in double so the vertical pass sees unrounded sums.
    std::vector<double> tmp(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += taps[static_cast<std::size_t>(k + radius)] * plane.clamped(x + k, y);
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    Plane out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int yy = std::clamp(y + k, 0, h - 1);
                acc += taps[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            out.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

ChannelStats channel_stats(const ImageF32& img) {
    img.require_rgb("channel_stats");
    ChannelStats s;
    double sums[3] = {0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
        for (float v : img.channel(c)) sums[c] += v;
    }
    const double n = static_cast<double>(img.pixel_count());
    s.mean_r = sums[0] / n;
    s.mean_g = sums[1] / n;
    s.mean_b = sums[2] / n;
    s.mean_avg = (s.mean_r + s.mean_g + s.mean_b) / 3.0;
    return s;
}

Kernel2D laplacian_kernel() { return Kernel2D(3, {0, 1, 0, 1, -4, 1, 0, 1, 0}); }

double laplacian_variance(const ImageF32& img) {
    return convolve2d(luma(img), laplacian_kernel()).variance();
}

}  // namespace aquaclear
