#include "aquaclear/neural/attention.hpp"

#include <algorithm>
#include <cmath>

#include "aquaclear/color.hpp"

namespace aquaclear::nn {

Plane resize_bilinear(const Plane& src, int out_w, int out_h) {
    Plane out(out_w, out_h);
    const double sx = static_cast<double>(src.width()) / out_w;
    const double sy = static_cast<double>(src.height()) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height() - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, src.height() - 1);
        const double ty = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width() - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, src.width() - 1);
            const double tx = fx - x0;
            const double top = (1.0 - tx) * src.at(x0, y0) + tx * src.at(x1, y0);
            const double bottom = (1.0 - tx) * src.at(x0, y1) + tx * src.at(x1, y1);
            out.at(x, y) = static_cast<float>((1.0 - ty) * top + ty * bottom);
        }
    }
    return out;
}

Plane attention_map(const Tensor& features, int out_h, int out_w) {
    const int h = features.height();
    const int w = features.width();
    std::vector<double> mean(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0.0);
    for (int c = 0; c < features.channels(); ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) mean[static_cast<std::size_t>(y) * w + x] += features.at(c, y, x);
    for (double& m : mean) m /= features.channels();

    const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
    const double mn = *lo;
    const double range = *hi - *lo;
    Plane norm(w, h);
    for (std::size_t i = 0; i < mean.size(); ++i) {
        norm.values()[i] = range > 0.0 ? static_cast<float>((mean[i] - mn) / range) : 0.5f;
    }
    if (out_w == w && out_h == h) return norm;
    return resize_bilinear(norm, out_w, out_h);
}

Plane fuse_attention(const Plane& a, const Plane& b, FusionMode) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(Errc::DimMismatch, "attention maps differ in size");
    }
    Plane out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.values()[i] = static_cast<float>(0.5 * (static_cast<double>(a.values()[i]) + b.values()[i]));
    }
    return out;
}

ImageF32 feature_guided_enhance(const ImageF32& img, const Plane& attention, double gain) {
    img.require_rgb("feature_guided_enhance");
    if (attention.width() != img.width() || attention.height() != img.height()) {
        throw Error(Errc::DimMismatch, "attention map size differs from image");
    }
    if (!(gain >= 0.0)) throw Error(Errc::InvalidParameter, "gain must be >= 0");
    if (gain == 0.0) return img;

    const double mean = attention.mean();
    ImageF32 hsv = rgb_to_hsv(img);
    Plane v = hsv.plane(2);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double factor = 1.0 + gain * (attention.values()[i] - mean);
        v.values()[i] = clamp_unit(v.values()[i] * factor);
    }
    hsv.set_plane(2, v);
    return hsv_to_rgb(hsv);
}

}  // namespace aquaclear::nn
