#include "aquaclear/neural/extractor.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "aquaclear/random.hpp"

namespace aquaclear::nn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string shape_text(const std::vector<int>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + ")";
}

ConvLayer conv_from(const ConvSpec& c) {
    return ConvLayer::zeros(c.in_channels, c.out_channels, c.kernel, c.stride, c.padding, c.activation);
}

ResidualBlock residual_from(const ResidualSpec& r) {
    return {ConvLayer::zeros(r.channels, r.channels, r.kernel, 1, r.kernel / 2, Activation::Relu),
            ConvLayer::zeros(r.channels, r.channels, r.kernel, 1, r.kernel / 2, Activation::None)};
}

void append_conv_params(std::vector<ParameterInfo>& out, const std::string& name, int in, int o, int k) {
    out.push_back({name + ".weight", {o, in, k, k}});
    out.push_back({name + ".bias", {o}});
}

}  // namespace

std::string layer_name(const LayerSpec& layer) {
    return std::visit([](const auto& l) { return l.name; }, layer);
}

void ExtractorSpec::validate() const {
    std::set<std::string> names;
    for (const auto& l : layers) {
        if (!names.insert(layer_name(l)).second) {
            throw Error(Errc::InvalidParameter, "duplicate layer name " + layer_name(l));
        }
    }
    (void)tap_index();
}

std::size_t ExtractorSpec::tap_index() const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layer_name(layers[i]) == tap) return i;
    }
    throw Error(Errc::InvalidParameter, "tap point '" + tap + "' names no layer");
}

ExtractorSpec build_vgg_head(int depth) {
    if (depth < 1 || depth > 4) {
        throw Error(Errc::UnsupportedDepth, "VGG head depth must be in [1,4], got " + std::to_string(depth));
    }
    const ConvSpec convs[4] = {
        {"conv1_1", 3, 64, 3, 1, 1, Activation::Relu},
        {"conv1_2", 64, 64, 3, 1, 1, Activation::Relu},
        {"conv2_1", 64, 128, 3, 1, 1, Activation::Relu},
        {"conv2_2", 128, 128, 3, 1, 1, Activation::Relu},
    };
    ExtractorSpec spec;
    spec.kind = HeadKind::Vgg;
    for (int i = 0; i < depth; ++i) {
        if (i == 2) spec.layers.emplace_back(PoolSpec{"pool1"});
        spec.layers.emplace_back(convs[i]);
    }
    spec.tap = convs[depth - 1].name;
    return spec;
}

ExtractorSpec build_resnet_head() {
    ExtractorSpec spec;
    spec.kind = HeadKind::Resnet;
    spec.layers = {
        ConvSpec{"conv1", 3, 64, 7, 2, 3, Activation::Relu},
        PoolSpec{"pool1"},
        ResidualSpec{"res2a", 64, 3},
        ResidualSpec{"res2b", 64, 3},
    };
    spec.tap = "res2b";
    return spec;
}

std::vector<Shape3> layer_shapes(const ExtractorSpec& spec, const Shape3& input) {
    const std::size_t tap = spec.tap_index();
    std::vector<Shape3> shapes;
    Shape3 cur = input;
    for (std::size_t i = 0; i <= tap; ++i) {
        cur = std::visit(Overloaded{
                             [&](const ConvSpec& c) { return conv_from(c).output_shape(cur); },
                             [&](const PoolSpec&) {
                                 if (cur.height % 2 || cur.width % 2) {
                                     throw Error(Errc::OddSpatialDim, "pooling needs even spatial dims");
                                 }
                                 return Shape3{cur.channels, cur.height / 2, cur.width / 2};
                             },
                             [&](const ResidualSpec& r) {
                                 if (cur.channels != r.channels) {
                                     throw Error(Errc::ShapeMismatch, "residual block channel count differs");
                                 }
                                 return cur;
                             },
                         },
                         spec.layers[i]);
        shapes.push_back(cur);
    }
    return shapes;
}

int required_divisor(const ExtractorSpec& spec) {
    const std::size_t tap = spec.tap_index();
    int divisor = 1;
    int scale = 1;  // cumulative stride before the current layer
    for (std::size_t i = 0; i <= tap; ++i) {
        if (const auto* c = std::get_if<ConvSpec>(&spec.layers[i])) {
            scale *= c->stride;
        } else if (std::holds_alternative<PoolSpec>(spec.layers[i])) {
            scale *= 2;
            divisor = scale;
        }
    }
    return divisor;
}

std::size_t ParameterInfo::count() const noexcept {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

std::vector<ParameterInfo> parameter_layout(const ExtractorSpec& spec) {
    const std::size_t tap = spec.tap_index();
    std::vector<ParameterInfo> out;
    for (std::size_t i = 0; i <= tap; ++i) {
        std::visit(Overloaded{
                       [&](const ConvSpec& c) { append_conv_params(out, c.name, c.in_channels, c.out_channels, c.kernel); },
                       [&](const PoolSpec&) {},
                       [&](const ResidualSpec& r) {
                           append_conv_params(out, r.name + ".conv_a", r.channels, r.channels, r.kernel);
                           append_conv_params(out, r.name + ".conv_b", r.channels, r.channels, r.kernel);
                       },
                   },
                   spec.layers[i]);
    }
    return out;
}

Extractor bind_parameters(const ExtractorSpec& spec, const std::vector<std::vector<float>>& params) {
    spec.validate();
    const auto layout = parameter_layout(spec);
    if (params.size() != layout.size()) {
        throw Error(Errc::ShapeMismatchInManifest, "expected " + std::to_string(layout.size()) +
                                                       " parameter tensors, got " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (params[i].size() != layout[i].count()) {
            throw Error(Errc::ShapeMismatchInManifest, layout[i].name + ": wrong element count");
        }
    }

    Extractor ex;
    ex.spec = spec;
    std::size_t next = 0;
    auto fill = [&](ConvLayer& layer) {
        layer.weights = params[next++];
        layer.bias = params[next++];
    };
    const std::size_t tap = spec.tap_index();
    for (std::size_t i = 0; i <= tap; ++i) {
        ex.layers.push_back(std::visit(Overloaded{
                                           [&](const ConvSpec& c) -> BoundLayer {
                                               ConvLayer l = conv_from(c);
                                               fill(l);
                                               return l;
                                           },
                                           [&](const PoolSpec& p) -> BoundLayer { return p; },
                                           [&](const ResidualSpec& r) -> BoundLayer {
                                               ResidualBlock b = residual_from(r);
                                               fill(b.conv_a);
                                               fill(b.conv_b);
                                               return b;
                                           },
                                       },
                                       spec.layers[i]));
    }
    return ex;
}

Extractor init_weights(const ExtractorSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<float>> params;
    for (const auto& info : parameter_layout(spec)) {
        std::vector<float> values(info.count(), 0.0f);
        if (info.shape.size() == 4) {
            const double fan_in = static_cast<double>(info.shape[1]) * info.shape[2] * info.shape[3];
            const double scale = std::sqrt(2.0 / fan_in);
            for (float& v : values) v = static_cast<float>(rng.normal() * scale);
        }
        params.push_back(std::move(values));
    }
    return bind_parameters(spec, params);
}

Extractor zero_weights(const ExtractorSpec& spec) {
    std::vector<std::vector<float>> params;
    for (const auto& info : parameter_layout(spec)) params.emplace_back(info.count(), 0.0f);
    return bind_parameters(spec, params);
}

std::vector<std::vector<float>> flatten_parameters(const Extractor& extractor) {
    std::vector<std::vector<float>> out;
    for (const auto& layer : extractor.layers) {
        std::visit(Overloaded{
                       [&](const ConvLayer& c) {
                           out.push_back(c.weights);
                           out.push_back(c.bias);
                       },
                       [&](const PoolSpec&) {},
                       [&](const ResidualBlock& b) {
                           out.push_back(b.conv_a.weights);
                           out.push_back(b.conv_a.bias);
                           out.push_back(b.conv_b.weights);
                           out.push_back(b.conv_b.bias);
                       },
                   },
                   layer);
    }
    return out;
}

Extractor load_weights(const ExtractorSpec& spec, const std::filesystem::path& manifest_path) {
    using nlohmann::json;
    std::ifstream in(manifest_path);
    if (!in) throw Error(Errc::MissingWeights, "cannot open weight manifest " + manifest_path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, "weight manifest: " + std::string(e.what()));
    }

    const std::string blob_name = doc.value("blob", std::string("weights.bin"));
    const auto blob_path = manifest_path.parent_path() / blob_name;
    std::ifstream bin(blob_path, std::ios::binary);
    if (!bin) throw Error(Errc::MissingWeights, "cannot open weight blob " + blob_path.string());
    const std::vector<unsigned char> blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

    const auto layout = parameter_layout(spec);
    if (!doc.contains("layers") || !doc["layers"].is_array()) {
        throw Error(Errc::ParseError, "weight manifest lacks a layers array");
    }
    const auto& entries = doc["layers"];
    if (entries.size() != layout.size()) {
        throw Error(Errc::ShapeMismatchInManifest, "manifest lists " + std::to_string(entries.size()) +
                                                       " tensors, head expects " + std::to_string(layout.size()));
    }

    std::vector<std::vector<float>> params;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& e = entries[i];
        std::vector<int> shape;
        std::uint64_t offset = 0, length = 0;
        std::string dtype;
        try {
            shape = e.at("shape").get<std::vector<int>>();
            offset = e.at("byte_offset").get<std::uint64_t>();
            length = e.at("byte_length").get<std::uint64_t>();
            dtype = e.at("dtype").get<std::string>();
        } catch (const json::exception& ex) {
            throw Error(Errc::ParseError, "manifest entry " + std::to_string(i) + ": " + ex.what());
        }
        if (shape != layout[i].shape) {
            throw Error(Errc::ShapeMismatchInManifest, layout[i].name + ": manifest shape " + shape_text(shape) +
                                                           ", head expects " + shape_text(layout[i].shape));
        }
        if (dtype != "f32le") throw Error(Errc::CorruptBlob, "unsupported dtype " + dtype);
        if (length != 4 * layout[i].count()) {
            throw Error(Errc::CorruptBlob, layout[i].name + ": byte_length does not equal 4 * element count");
        }
        if (offset + length > blob.size()) {
            throw Error(Errc::CorruptBlob, layout[i].name + ": blob too short");
        }
        for (const auto& [o, l] : ranges) {
            if (offset < o + l && o < offset + length) {
                throw Error(Errc::CorruptBlob, layout[i].name + ": overlapping byte range");
            }
        }
        ranges.emplace_back(offset, length);

        std::vector<float> values(layout[i].count());
        for (std::size_t k = 0; k < values.size(); ++k) {
            const unsigned char* p = blob.data() + offset + 4 * k;
            const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                       (static_cast<std::uint32_t>(p[2]) << 16) |
                                       (static_cast<std::uint32_t>(p[3]) << 24);
            values[k] = std::bit_cast<float>(bits);
            if (!std::isfinite(values[k])) throw Error(Errc::CorruptBlob, layout[i].name + ": non-finite value");
        }
        params.push_back(std::move(values));
    }

    Extractor ex = bind_parameters(spec, params);
    if (doc.contains("input_affine")) {
        InputAffine affine;
        try {
            const auto scale = doc["input_affine"].at("scale").get<std::vector<float>>();
            const auto off = doc["input_affine"].at("offset").get<std::vector<float>>();
            if (scale.size() != 3 || off.size() != 3) throw Error(Errc::ParseError, "input_affine needs 3 values each");
            for (int c = 0; c < 3; ++c) {
                affine.scale[static_cast<std::size_t>(c)] = scale[static_cast<std::size_t>(c)];
                affine.offset[static_cast<std::size_t>(c)] = off[static_cast<std::size_t>(c)];
            }
        } catch (const json::exception& e2) {
            throw Error(Errc::ParseError, "input_affine: " + std::string(e2.what()));
        }
        ex.input_affine = affine;
    }
    return ex;
}

void save_weights(const Extractor& extractor, const std::filesystem::path& directory) {
    using nlohmann::ordered_json;
    std::filesystem::create_directories(directory);
    const auto layout = parameter_layout(extractor.spec);
    const auto params = flatten_parameters(extractor);

    ordered_json doc;
    doc["blob"] = "weights.bin";
    doc["layers"] = ordered_json::array();
    std::vector<char> blob;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        ordered_json e;
        e["name"] = layout[i].name;
        e["shape"] = layout[i].shape;
        e["dtype"] = "f32le";
        e["byte_offset"] = blob.size();
        e["byte_length"] = 4 * params[i].size();
        doc["layers"].push_back(e);
        for (float v : params[i]) {
            const auto bits = std::bit_cast<std::uint32_t>(v);
            for (int b = 0; b < 4; ++b) blob.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
        }
    }
    if (extractor.input_affine) {
        doc["input_affine"] = {{"scale", extractor.input_affine->scale}, {"offset", extractor.input_affine->offset}};
    }

    std::ofstream m(directory / "manifest.json");
    m << doc.dump(2) << "\n";
    std::ofstream b(directory / "weights.bin", std::ios::binary);
    b.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!m || !b) throw Error(Errc::IoFailure, "failed writing weights to " + directory.string());
}

Tensor forward(const Extractor& extractor, const Tensor& input) {
    Tensor cur = input;
    if (extractor.input_affine) {
        const auto& a = *extractor.input_affine;
        for (int c = 0; c < cur.channels() && c < 3; ++c)
            for (int y = 0; y < cur.height(); ++y)
                for (int x = 0; x < cur.width(); ++x) {
                    float& v = cur.at(c, y, x);
                    v = v * a.scale[static_cast<std::size_t>(c)] + a.offset[static_cast<std::size_t>(c)];
                }
    }
    for (const auto& layer : extractor.layers) {
        cur = std::visit(Overloaded{
                             [&](const ConvLayer& c) { return conv2d_forward(cur, c); },
                             [&](const PoolSpec&) { return max_pool2(cur); },
                             [&](const ResidualBlock& b) { return residual_forward(cur, b); },
                         },
                         layer);
    }
    return cur;
}

Tensor image_to_tensor(const ImageF32& img) {
    img.require_rgb("image_to_tensor");
    auto s = img.samples();
    return Tensor({3, img.height(), img.width()}, std::vector<float>(s.begin(), s.end()));
}

Tensor extract_features(const ImageF32& img, const Extractor& extractor) {
    const int d = required_divisor(extractor.spec);
    if (img.width() % d != 0 || img.height() % d != 0) {
        throw Error(Errc::IndivisibleDims, "image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                               " not divisible by " + std::to_string(d));
    }
    return forward(extractor, image_to_tensor(img));
}

}  // namespace aquaclear::nn
