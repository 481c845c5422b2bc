#include "aquaclear/color.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace aquaclear {

namespace {

constexpr std::array<std::array<double, 3>, 3> kRgbToXyz{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

constexpr std::array<std::array<double, 3>, 3> kXyzToRgb{{
    {3.2404542, -1.5371385, -0.4985314},
    {-0.9692660, 1.8760108, 0.0415560},
    {0.0556434, -0.2040259, 1.0572252},
}};

// Reference white as the row sums of the forward matrix, so (1,1,1) lands on it.
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

constexpr double kDelta = 6.0 / 29.0;

double srgb_eotf(double v) noexcept {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double srgb_oetf(double v) noexcept {
    return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) noexcept {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double f) noexcept {
    return f > kDelta ? f * f * f : 3.0 * kDelta * kDelta * (f - 4.0 / 29.0);
}

}  // namespace

ImageF32 rgb_to_hsv(const ImageF32& rgb) {
    rgb.require_rgb("rgb_to_hsv");
    const std::size_t n = rgb.pixel_count();
    std::vector<float> out(n * 3);
    auto r = rgb.channel(0), g = rgb.channel(1), b = rgb.channel(2);
    for (std::size_t i = 0; i < n; ++i) {
        const double rv = r[i], gv = g[i], bv = b[i];
        const double mx = std::max({rv, gv, bv});
        const double mn = std::min({rv, gv, bv});
        const double chroma = mx - mn;
        double h = 0.0;
        if (chroma > 0.0) {
            if (mx == rv) {
                h = (gv - bv) / chroma;
                if (h < 0.0) h += 6.0;
            } else if (mx == gv) {
                h = (bv - rv) / chroma + 2.0;
            } else {
                h = (rv - gv) / chroma + 4.0;
            }
            h /= 6.0;
            if (h >= 1.0) h -= 1.0;
        }
        const double s = mx > 0.0 ? chroma / mx : 0.0;
        out[i] = static_cast<float>(h);
        out[n + i] = static_cast<float>(s);
        out[2 * n + i] = static_cast<float>(mx);
    }
    return ImageF32(rgb.width(), rgb.height(), 3, std::move(out));
}

ImageF32 hsv_to_rgb(const ImageF32& hsv) {
    hsv.require_rgb("hsv_to_rgb");
    const std::size_t n = hsv.pixel_count();
    std::vector<float> out(n * 3);
    auto hc = hsv.channel(0), sc = hsv.channel(1), vc = hsv.channel(2);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = vc[i];
        const double s = sc[i];
        double h6 = static_cast<double>(hc[i]) * 6.0;
        if (h6 >= 6.0) h6 -= 6.0;
        const int sector = static_cast<int>(std::floor(h6));
        const double f = h6 - sector;
        const double p = v * (1.0 - s);
        const double q = v * (1.0 - s * f);
        const double t = v * (1.0 - s * (1.0 - f));
        double r = v, g = v, b = v;
        switch (sector) {
            case 0: r = v; g = t; b = p; break;
            case 1: r = q; g = v; b = p; break;
            case 2: r = p; g = v; b = t; break;
            case 3: r = p; g = q; b = v; break;
            case 4: r = t; g = p; b = v; break;
            default: r = v; g = p; b = q; break;
        }
        out[i] = static_cast<float>(r);
        out[n + i] = static_cast<float>(g);
        out[2 * n + i] = static_cast<float>(b);
    }
    return ImageF32(hsv.width(), hsv.height(), 3, std::move(out));
}

LabPixel srgb_to_lab(double r, double g, double b) noexcept {
    const double lr = srgb_eotf(r), lg = srgb_eotf(g), lb = srgb_eotf(b);
    const double y = kRgbToXyz[1][0] * lr + kRgbToXyz[1][1] * lg + kRgbToXyz[1][2] * lb;
    const double fy = lab_f(y / kWhiteY);
    // Neutral input has no opponent component; skip the matrix round-off.
    if (r == g && g == b) return {116.0 * fy - 16.0, 0.0, 0.0};
    const double x = kRgbToXyz[0][0] * lr + kRgbToXyz[0][1] * lg + kRgbToXyz[0][2] * lb;
    const double z = kRgbToXyz[2][0] * lr + kRgbToXyz[2][1] * lg + kRgbToXyz[2][2] * lb;
    const double fx = lab_f(x / kWhiteX);
    const double fz = lab_f(z / kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

void lab_to_srgb(const LabPixel& lab, double& r, double& g, double& b) noexcept {
    const double fy = (lab.L + 16.0) / 116.0;
    const double fx = fy + lab.a / 500.0;
    const double fz = fy - lab.b / 200.0;
    const double x = kWhiteX * lab_f_inv(fx);
    const double y = kWhiteY * lab_f_inv(fy);
    const double z = kWhiteZ * lab_f_inv(fz);
    r = srgb_oetf(kXyzToRgb[0][0] * x + kXyzToRgb[0][1] * y + kXyzToRgb[0][2] * z);
    g = srgb_oetf(kXyzToRgb[1][0] * x + kXyzToRgb[1][1] * y + kXyzToRgb[1][2] * z);
    b = srgb_oetf(kXyzToRgb[2][0] * x + kXyzToRgb[2][1] * y + kXyzToRgb[2][2] * z);
}

std::vector<LabPixel> rgb_to_lab(const ImageF32& rgb) {
    rgb.require_rgb("rgb_to_lab");
    const std::size_t n = rgb.pixel_count();
    std::vector<LabPixel> out(n);
    auto r = rgb.channel(0), g = rgb.channel(1), b = rgb.channel(2);
    for (std::size_t i = 0; i < n; ++i) out[i] = srgb_to_lab(r[i], g[i], b[i]);
    return out;
}

ImageF32 lab_to_rgb(const std::vector<LabPixel>& lab, int width, int height) {
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (lab.size() != n) throw Error(Errc::InvalidDimensions, "Lab pixel count does not match dimensions");
    std::vector<float> out(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        double r, g, b;
        lab_to_srgb(lab[i], r, g, b);
        out[i] = static_cast<float>(r);
        out[n + i] = static_cast<float>(g);
        out[2 * n + i] = static_cast<float>(b);
    }
    return ImageF32(width, height, 3, std::move(out));
}

Plane luma(const ImageF32& img) {
    if (img.channels() == 1) return img.plane(0);
    const std::size_t n = img.pixel_count();
    std::vector<float> out(n);
    auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
    }
    return Plane(img.width(), img.height(), std::move(out));
}

}  // namespace aquaclear
