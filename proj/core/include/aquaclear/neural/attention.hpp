#pragma once

#include "aquaclear/image.hpp"
#include "aquaclear/neural/tensor.hpp"

namespace aquaclear::nn {

// Channel mean per position, min-max normalized (0.5 everywhere when flat),
// then bilinearly resampled (pixel-centre aligned) to out_w x out_h.
Plane attention_map(const Tensor& features, int out_h, int out_w);

// Pixel-centre aligned bilinear resampling with edge clamping.
Plane resize_bilinear(const Plane& src, int out_w, int out_h);

enum class FusionMode { Mean };

Plane fuse_attention(const Plane& a, const Plane& b, FusionMode mode = FusionMode::Mean);

// V' = clamp(V * (1 + gain * (attn - mean(attn)))) in HSV; hue and
// saturation kept. Only the adjustment: the classical plan is composed by
// the caller.
ImageF32 feature_guided_enhance(const ImageF32& img, const Plane& attention, double gain = 0.5);

}  // namespace aquaclear::nn
