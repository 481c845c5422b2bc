#include "aquaclear/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "aquaclear/random.hpp"

namespace aquaclear::synthetic {

ImageF32 make_archetype(Category8 category, std::uint64_t seed, int width, int height) {
    const DegradationFlags flags = flags_of(category);
    Rng rng(derive_seed(seed, identifier(category), 0));

    const double level = flags.low_light ? rng.uniform(0.08, 0.13) : rng.uniform(0.72, 0.74);
    double tint[3];
    if (flags.color_cast) {
        tint[0] = rng.uniform(0.15, 0.30);
        tint[1] = rng.uniform(0.70, 0.90);
        tint[2] = 1.0;
    } else {
        for (double& t : tint) t = 1.0 + rng.uniform(-0.03, 0.03);
    }
    const double checker = flags.blurred ? 0.0 : 0.25;
    constexpr double kSmooth = 0.1;
    const double k = 2.0 * std::numbers::pi / 32.0;
    double phase_x[3], phase_y[3];
    for (int c = 0; c < 3; ++c) {
        phase_x[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        phase_y[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }

    ImageF32 img(width, height, 3);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double sign = ((x + y) % 2 == 0) ? 1.0 : -1.0;
                const double smooth = std::sin(k * x + phase_x[c]) * std::cos(k * y + phase_y[c]);
                const double v = level * tint[c] * (1.0 + checker * sign + kSmooth * smooth);
                img.set(c, x, y, static_cast<float>(v));
            }
        }
    }
    return img;
}

ImageF32 noisy_constant(int width, int height, float level, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    ImageF32 img(width, height, 3);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double v = level + sigma * rng.normal();
            for (int c = 0; c < 3; ++c) img.set(c, x, y, static_cast<float>(v));
        }
    }
    return img;
}

std::vector<ImageF32> corpus(std::size_t n, std::uint64_t seed, int width, int height) {
    std::vector<ImageF32> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(make_archetype(kAllCategories[i % kAllCategories.size()], seed + i, width, height));
    }
    return out;
}

}  // namespace aquaclear::synthetic
