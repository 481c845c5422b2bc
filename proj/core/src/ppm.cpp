#include "aquaclear/ppm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace aquaclear {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_whitespace() {
        bool any = false;
        while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) {
            ++pos_;
            any = true;
        }
        if (!any) throw Error(Errc::MalformedHeader, "expected whitespace at offset " + std::to_string(pos_));
    }

    long number(const char* field) {
        std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000L) throw Error(Errc::MalformedHeader, std::string(field) + " too large");
            ++pos_;
        }
        if (pos_ == start) throw Error(Errc::MalformedHeader, std::string("non-numeric ") + field);
        return value;
    }

    void magic() {
        if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '6') {
            throw Error(Errc::MalformedHeader, "magic is not P6");
        }
        pos_ = 2;
    }

    // Exactly one whitespace byte separates maxval from the payload.
    void single_separator() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw Error(Errc::MalformedHeader, "missing separator before payload");
        }
        ++pos_;
    }

    std::size_t position() const noexcept { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::uint8_t quantize_sample(float s) noexcept {
    const double scaled = static_cast<double>(clamp_unit(s)) * 255.0;
    return static_cast<std::uint8_t>(std::lround(scaled));
}

ImageF32 decode_ppm(std::span<const std::uint8_t> bytes) {
    HeaderReader reader(bytes);
    reader.magic();
    reader.skip_whitespace();
    const long width = reader.number("width");
    reader.skip_whitespace();
    const long height = reader.number("height");
    reader.skip_whitespace();
    const long maxval = reader.number("maxval");
    reader.single_separator();

    if (width < 1 || height < 1) throw Error(Errc::MalformedHeader, "zero dimension");
    if (maxval != 255) throw Error(Errc::UnsupportedMaxval, "maxval " + std::to_string(maxval));

    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const std::size_t payload = bytes.size() - reader.position();
    if (payload < n * 3) {
        throw Error(Errc::TruncatedPayload,
                    "expected " + std::to_string(n * 3) + " payload bytes, found " + std::to_string(payload));
    }

    std::vector<float> samples(n * 3);
    const std::uint8_t* px = bytes.data() + reader.position();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            samples[c * n + i] = static_cast<float>(px[i * 3 + c] / 255.0);
        }
    }
    return ImageF32(static_cast<int>(width), static_cast<int>(height), 3, std::move(samples));
}

std::vector<std::uint8_t> encode_ppm(const ImageF32& img) {
    if (img.channels() != 3) throw Error(Errc::GrayscaleUnsupported, "PPM output needs 3 channels");
    const std::string header =
        "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    const std::size_t n = img.pixel_count();
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + n * 3);
    auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(quantize_sample(r[i]));
        out.push_back(quantize_sample(g[i]));
        out.push_back(quantize_sample(b[i]));
    }
    return out;
}

ImageF32 load_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_ppm(bytes);
}

void save_ppm(const ImageF32& img, const std::filesystem::path& path) {
    const auto bytes = encode_ppm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

}  // namespace aquaclear
