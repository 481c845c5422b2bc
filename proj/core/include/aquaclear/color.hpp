#pragma once

#include <vector>

#include "aquaclear/image.hpp"

namespace aquaclear {

// Hexcone HSV. Hue is stored as degrees/360 in [0,1); achromatic pixels get hue 0.
ImageF32 rgb_to_hsv(const ImageF32& rgb);
ImageF32 hsv_to_rgb(const ImageF32& hsv);

struct LabPixel {
    double L = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// sRGB (D65, piecewise 2.4-gamma EOTF) to CIE L*a*b*.
LabPixel srgb_to_lab(double r, double g, double b) noexcept;
void lab_to_srgb(const LabPixel& lab, double& r, double& g, double& b) noexcept;

std::vector<LabPixel> rgb_to_lab(const ImageF32& rgb);
ImageF32 lab_to_rgb(const std::vector<LabPixel>& lab, int width, int height);

// 0.299 R + 0.587 G + 0.114 B; single-channel input is returned as-is.
Plane luma(const ImageF32& img);

}  // namespace aquaclear
