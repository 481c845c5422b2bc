#pragma once

#include <cstdint>
#include <vector>

#include "aquaclear/classifier.hpp"
#include "aquaclear/image.hpp"

namespace aquaclear::synthetic {

// Scene = level * tint_c * (1 + checker + smooth_c). Sharp scenes carry a
// one-pixel checkerboard, blurred ones only period-32 colour undulations.
// Parameter ranges keep each detector statistic at least 2x beyond the
// default classifier thresholds for 64x64 output.
ImageF32 make_archetype(Category8 category, std::uint64_t seed, int width = 64, int height = 64);

// Constant `level` plus i.i.d. Gaussian noise, clamped; all channels share the noise.
ImageF32 noisy_constant(int width, int height, float level, double sigma, std::uint64_t seed);

// n archetypes cycling through the eight categories.
std::vector<ImageF32> corpus(std::size_t n, std::uint64_t seed, int width = 64, int height = 64);

}  // namespace aquaclear::synthetic
