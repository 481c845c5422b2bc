#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aquaclear/image.hpp"

namespace aquaclear {

// Binary PPM (P6, maxval 255). Reading accepts any single whitespace run
// between header fields; writing emits exactly "P6\n<w> <h>\n255\n".
ImageF32 decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const ImageF32& img);

ImageF32 load_ppm(const std::filesystem::path& path);
void save_ppm(const ImageF32& img, const std::filesystem::path& path);

// round(s * 255), halves away from zero.
std::uint8_t quantize_sample(float s) noexcept;

}  // namespace aquaclear
