#pragma once

#include "aquaclear/image.hpp"

namespace aquaclear {

// True convolution (kernel flipped) with replicate borders. Output has the
// input's dimensions; sums are accumulated in double in row-major kernel order.
Plane convolve2d(const Plane& plane, const Kernel2D& kernel);

// Normalized Gaussian, radius ceil(3 sigma), applied separably.
Plane gaussian_blur(const Plane& plane, double sigma);

// 1-D taps of gaussian_blur, normalized to sum 1. Exposed for tests.
std::vector<double> gaussian_taps(double sigma);

struct ChannelStats {
    double mean_r = 0.0;
    double mean_g = 0.0;
    double mean_b = 0.0;
    double mean_avg = 0.0;  // (mean_r + mean_g + mean_b) / 3
};

ChannelStats channel_stats(const ImageF32& img);

// [0,1,0; 1,-4,1; 0,1,0]
Kernel2D laplacian_kernel();

// Variance of the Laplacian response on luma. Zero for constant images.
double laplacian_variance(const ImageF32& img);

}  // namespace aquaclear
