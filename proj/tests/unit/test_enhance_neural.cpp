#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "aquaclear/color.hpp"
#include "aquaclear/error.hpp"
#include "aquaclear/neural/attention.hpp"
#include "aquaclear/neural/extractor.hpp"
#include "aquaclear/neural/tensor.hpp"
#include "support/oracles.hpp"

using namespace aquaclear;
using namespace aquaclear::nn;

namespace {

Tensor random_tensor(oracle::Gen& g, Shape3 s, double lo = -1.0, double hi = 1.0) {
    std::vector<float> v(s.count());
    for (auto& x : v) x = static_cast<float>(g.uniform(lo, hi));
    return Tensor(s, std::move(v));
}

ConvLayer random_conv(oracle::Gen& g, int in, int out, int k, int stride, int pad, Activation act) {
    ConvLayer l = ConvLayer::zeros(in, out, k, stride, pad, act);
    for (auto& w : l.weights) w = static_cast<float>(g.uniform(-1, 1));
    for (auto& b : l.bias) b = static_cast<float>(g.uniform(-0.5, 0.5));
    return l;
}

template <class F>
Errc error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::ParseError;
}

void write_bytes(const std::filesystem::path& p, const std::vector<float>& values) {
    std::ofstream out(p, std::ios::binary);
    for (float v : values) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        const char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                           static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
        out.write(b, 4);
    }
}

ExtractorSpec one_conv_spec() {
    ExtractorSpec s;
    s.layers.push_back(ConvSpec{"c", 1, 4, 1, 1, 0, Activation::None});
    s.tap = "c";
    return s;
}

// Pixel-centre aligned bilinear sample of a row-major grid.
double bilinear(const std::vector<double>& grid, int w, int h, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0, fy = y - y0;
    auto at = [&](int xx, int yy) { return grid[static_cast<std::size_t>(yy) * w + xx]; };
    return (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x1, y0)) + fy * ((1 - fx) * at(x0, y1) + fx * at(x1, y1));
}

}  // namespace

// Sum and sum of squares of the conv2_2 features for seed 7 on the 8x8 image
// below, frozen from one run of the reference implementation.
constexpr double kVggChecksumSum = 632.620447690133;
constexpr double kVggChecksumSq = 636.128081006207;

TEST(Conv, DeltaKernelIsExactIdentity) {
    oracle::Gen g(1);
    const Tensor t = random_tensor(g, {1, 6, 7});
    ConvLayer l = ConvLayer::zeros(1, 1, 3, 1, 1, Activation::None);
    l.weight(0, 0, 1, 1) = 1.0f;
    EXPECT_EQ(conv2d_forward(t, l), t);
}

TEST(Conv, ZeroWeightsGiveRectifiedBias) {
    ConvLayer l = ConvLayer::zeros(2, 3, 3, 1, 1, Activation::Relu);
    l.bias = {0.5f, -0.25f, 2.0f};
    oracle::Gen g(2);
    const Tensor out = conv2d_forward(random_tensor(g, {2, 4, 4}), l);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) EXPECT_EQ(out.at(c, y, x), std::max(l.bias[static_cast<std::size_t>(c)], 0.0f));
}

TEST(Conv, MatchesSixLoopOracle) {
    oracle::Gen g(3);
    const Tensor t = random_tensor(g, {2, 5, 5});
    const ConvLayer l = random_conv(g, 2, 3, 3, 1, 1, Activation::None);
    const Tensor out = conv2d_forward(t, l);
    const auto ref = oracle::cnn_conv(t, l);
    ASSERT_EQ(out.data().size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(out.data()[i], ref[i], 1e-5);
}

TEST(Conv, RandomConfigsMatchOracleAndDeclaredShape) {
    oracle::Gen g(4);
    int checked = 0;
    while (checked < 200) {
        const int k = g.odd(1, 5);
        const int s = g.integer(1, 2);
        const int p = g.integer(0, k / 2);
        const Shape3 in{g.integer(1, 3), g.integer(1, 8), g.integer(1, 8)};
        if (in.height + 2 * p < k || in.width + 2 * p < k) continue;
        const ConvLayer l = random_conv(g, in.channels, g.integer(1, 3), k, s, p,
                                        g.integer(0, 1) ? Activation::Relu : Activation::None);
        const Tensor t = random_tensor(g, in);
        const Tensor out = conv2d_forward(t, l);
        ASSERT_EQ(out.shape(), l.output_shape(in));
        const auto ref = oracle::cnn_conv(t, l);
        for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(out.data()[i], ref[i], 1e-5);
        ++checked;
    }
}

TEST(Conv, ShapeErrors) {
    const ConvLayer l = ConvLayer::zeros(2, 1, 3, 1, 1, Activation::None);
    EXPECT_EQ(error_of([&] { conv2d_forward(Tensor({3, 4, 4}), l); }), Errc::ShapeMismatch);
    const ConvLayer strided = ConvLayer::zeros(1, 1, 3, 2, 0, Activation::None);
    EXPECT_EQ(error_of([&] { conv2d_forward(Tensor({1, 2, 2}), strided); }), Errc::NonIntegralOutputDim);
    // Uneven strides floor, as in the 7x7/2 stem: (6 - 3) / 2 + 1 = 2.
    EXPECT_EQ(conv2d_forward(Tensor({1, 6, 6}), strided).shape(), (Shape3{1, 2, 2}));
}

TEST(Relu, ExamplesAndIdempotence) {
    const Tensor t({1, 1, 3}, {-1.0f, 0.0f, 2.0f});
    EXPECT_EQ(relu(t), Tensor({1, 1, 3}, {0.0f, 0.0f, 2.0f}));
    oracle::Gen g(5);
    const Tensor r = random_tensor(g, {3, 5, 5});
    EXPECT_EQ(relu(relu(r)), relu(r));
    const Tensor pos = random_tensor(g, {2, 3, 3}, 0.0, 1.0);
    EXPECT_EQ(relu(pos), pos);
}

TEST(Residual, ZeroBlockIsIdentityOnNonNegativeInput) {
    ResidualBlock b{ConvLayer::zeros(4, 4, 3, 1, 1, Activation::Relu), ConvLayer::zeros(4, 4, 3, 1, 1, Activation::None)};
    oracle::Gen g(6);
    const Tensor t = random_tensor(g, {4, 6, 6}, 0.0, 3.0);
    EXPECT_EQ(residual_forward(t, b), t);
    b.conv_b.bias.assign(4, -1.0f);
    const Tensor zero({4, 6, 6});
    EXPECT_EQ(residual_forward(zero, b), zero);
}

TEST(Residual, EqualsManualComposition) {
    oracle::Gen g(7);
    const ResidualBlock b{random_conv(g, 3, 3, 3, 1, 1, Activation::Relu), random_conv(g, 3, 3, 3, 1, 1, Activation::None)};
    const Tensor t = random_tensor(g, {3, 5, 5});
    const Tensor manual = relu(add(t, conv2d_forward(relu(conv2d_forward(t, b.conv_a)), b.conv_b)));
    EXPECT_EQ(residual_forward(t, b), manual);
    const ResidualBlock bad{random_conv(g, 3, 2, 3, 1, 1, Activation::Relu), random_conv(g, 2, 3, 3, 1, 1, Activation::None)};
    EXPECT_EQ(error_of([&] { residual_forward(t, bad); }), Errc::ShapeMismatch);
}

TEST(MaxPool, ExamplesAndOracle) {
    EXPECT_EQ(max_pool2(Tensor({1, 2, 2}, {1, 2, 3, 4})), Tensor({1, 1, 1}, {4}));
    EXPECT_EQ(max_pool2(Tensor({2, 4, 6}, 0.5f)), Tensor({2, 2, 3}, 0.5f));
    oracle::Gen g(8);
    const Tensor t = random_tensor(g, {3, 8, 8});
    const Tensor out = max_pool2(t);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                const float m = std::max({t.at(c, 2 * y, 2 * x), t.at(c, 2 * y, 2 * x + 1), t.at(c, 2 * y + 1, 2 * x),
                                          t.at(c, 2 * y + 1, 2 * x + 1)});
                EXPECT_EQ(out.at(c, y, x), m);
            }
    EXPECT_EQ(error_of([] { max_pool2(Tensor({1, 3, 4})); }), Errc::OddSpatialDim);
}

TEST(Heads, ShapeArithmetic) {
    EXPECT_EQ(layer_shapes(build_vgg_head(4), {3, 64, 64}).back(), (Shape3{128, 32, 32}));
    EXPECT_EQ(layer_shapes(build_vgg_head(1), {3, 16, 16}).back(), (Shape3{64, 16, 16}));
    EXPECT_EQ(layer_shapes(build_resnet_head(), {3, 64, 64}).back(), (Shape3{64, 16, 16}));
    EXPECT_EQ(layer_shapes(build_resnet_head(), {3, 32, 32}).back(), (Shape3{64, 8, 8}));
    EXPECT_EQ(error_of([] { build_vgg_head(0); }), Errc::UnsupportedDepth);
    EXPECT_EQ(error_of([] { build_vgg_head(5); }), Errc::UnsupportedDepth);
    EXPECT_EQ(error_of([] { layer_shapes(build_resnet_head(), {3, 33, 33}); }), Errc::OddSpatialDim);
}

TEST(Heads, ForwardShapesMatchDeclaredShapes) {
    oracle::Gen g(9);
    for (int depth = 1; depth <= 4; ++depth) {
        const Extractor e = init_weights(build_vgg_head(depth), 3);
        const Tensor in = random_tensor(g, {3, 8, 8}, 0.0, 1.0);
        EXPECT_EQ(forward(e, in).shape(), layer_shapes(e.spec, in.shape()).back());
    }
    const Extractor r = init_weights(build_resnet_head(), 3);
    EXPECT_EQ(forward(r, random_tensor(g, {3, 16, 16}, 0.0, 1.0)).shape(), (Shape3{64, 4, 4}));
}

TEST(Heads, ExtractFeaturesChecksDivisibility) {
    const Extractor r = zero_weights(build_resnet_head());
    EXPECT_EQ(error_of([&] { extract_features(ImageF32(50, 50, 3), r); }), Errc::IndivisibleDims);
    const Extractor v = zero_weights(build_vgg_head(4));
    const Tensor zero = extract_features(ImageF32(8, 8, 3), v);
    for (float x : zero.data()) EXPECT_EQ(x, 0.0f);
}

TEST(Weights, InitIsDeterministicAndHeScaled) {
    const auto spec = build_vgg_head(4);
    const auto a = flatten_parameters(init_weights(spec, 7));
    EXPECT_EQ(a, flatten_parameters(init_weights(spec, 7)));
    EXPECT_NE(a, flatten_parameters(init_weights(spec, 8)));
    // conv1_2: fan_in 64*9, std sqrt(2/576).
    const auto& w = a[2];
    double sq = 0.0;
    for (float x : w) sq += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(sq / static_cast<double>(w.size())), std::sqrt(2.0 / 576.0), 0.05 * std::sqrt(2.0 / 576.0));
    for (float b : a[3]) EXPECT_EQ(b, 0.0f);
}

TEST(Weights, SaveLoadRoundTripIsBitExact) {
    const auto dir = oracle::temp_dir("weights_rt");
    const Extractor e = init_weights(build_resnet_head(), 11);
    save_weights(e, dir);
    const Extractor back = load_weights(build_resnet_head(), dir / "manifest.json");
    EXPECT_EQ(flatten_parameters(back), flatten_parameters(e));
}

TEST(Weights, ManifestReadsLittleEndianFloats) {
    const auto dir = oracle::temp_dir("weights_manual");
    write_bytes(dir / "weights.bin", {1.0f, 0.0f, 0.0f, 0.0f, 0.5f, 0.0f, 0.0f, -2.0f});
    nlohmann::json m;
    m["layers"] = {{{"name", "c.weight"}, {"shape", {4, 1, 1, 1}}, {"dtype", "f32le"}, {"byte_offset", 0}, {"byte_length", 16}},
                   {{"name", "c.bias"}, {"shape", {4}}, {"dtype", "f32le"}, {"byte_offset", 16}, {"byte_length", 16}}};
    std::ofstream(dir / "manifest.json") << m.dump();
    const Extractor e = load_weights(one_conv_spec(), dir / "manifest.json");
    const auto params = flatten_parameters(e);
    EXPECT_EQ(params[0][0], 1.0f);
    EXPECT_EQ(params[1][3], -2.0f);

    // Truncated blob.
    write_bytes(dir / "weights.bin", {1.0f, 0.0f});
    EXPECT_EQ(error_of([&] { load_weights(one_conv_spec(), dir / "manifest.json"); }), Errc::CorruptBlob);
    EXPECT_EQ(error_of([&] { load_weights(one_conv_spec(), dir / "absent.json"); }), Errc::MissingWeights);
}

TEST(Weights, ShapeMismatchIsReported) {
    const auto dir = oracle::temp_dir("weights_mismatch");
    save_weights(init_weights(build_resnet_head(), 1), dir);
    nlohmann::json m;
    std::ifstream(dir / "manifest.json") >> m;
    m["layers"][0]["shape"] = {64, 3, 3, 3};
    std::ofstream(dir / "manifest.json") << m.dump();
    EXPECT_EQ(error_of([&] { load_weights(build_resnet_head(), dir / "manifest.json"); }), Errc::ShapeMismatchInManifest);
}

TEST(Features, SeededChecksumIsFrozen) {
    ImageF32 img(8, 8, 3);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) img.set(c, x, y, static_cast<float>((x + 2 * y + 3 * c) % 8) / 7.0f);
    const Extractor e = init_weights(build_vgg_head(4), 7);
    const Tensor f = extract_features(img, e);
    EXPECT_EQ(f, extract_features(img, e));
    double sum = 0.0, sq = 0.0;
    for (float v : f.data()) {
        sum += v;
        sq += static_cast<double>(v) * v;
    }
    EXPECT_NEAR(sum, kVggChecksumSum, 1e-6 * std::max(1.0, std::fabs(kVggChecksumSum)));
    EXPECT_NEAR(sq, kVggChecksumSq, 1e-6 * std::max(1.0, std::fabs(kVggChecksumSq)));
}

TEST(Attention, DegenerateAndHotCell) {
    const Plane flat = attention_map(Tensor({3, 4, 4}, 2.0f), 4, 4);
    for (float v : flat.values()) EXPECT_EQ(v, 0.5f);
    Tensor hot({2, 4, 4});
    hot.at(0, 1, 2) = 3.0f;
    hot.at(1, 1, 2) = 1.0f;
    const Plane m = attention_map(hot, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) EXPECT_EQ(m.at(x, y), (x == 2 && y == 1) ? 1.0f : 0.0f);
}

TEST(Attention, MatchesMeanNormalizeBilinearOracle) {
    oracle::Gen g(10);
    for (int t = 0; t < 20; ++t) {
        const Shape3 s{g.integer(1, 4), g.integer(1, 6), g.integer(1, 6)};
        const Tensor f = random_tensor(g, s);
        const int oh = g.integer(1, 20), ow = g.integer(1, 20);
        std::vector<double> mean(static_cast<std::size_t>(s.height) * s.width, 0.0);
        for (int y = 0; y < s.height; ++y)
            for (int x = 0; x < s.width; ++x) {
                double acc = 0.0;
                for (int c = 0; c < s.channels; ++c) acc += f.at(c, y, x);
                mean[static_cast<std::size_t>(y) * s.width + x] = acc / s.channels;
            }
        const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
        const double mn = *lo, mx = *hi;
        for (auto& v : mean) v = mx == mn ? 0.5 : (v - mn) / (mx - mn);
        const Plane m = attention_map(f, oh, ow);
        ASSERT_EQ(m.width(), ow);
        ASSERT_EQ(m.height(), oh);
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                const double sx = (x + 0.5) * s.width / ow - 0.5;
                const double sy = (y + 0.5) * s.height / oh - 0.5;
                ASSERT_NEAR(m.at(x, y), bilinear(mean, s.width, s.height, sx, sy), 1e-6);
            }
    }
}

TEST(Fusion, MeanProperties) {
    oracle::Gen g(11);
    const Plane a = oracle::random_plane(g, 7, 5);
    const Plane b = oracle::random_plane(g, 7, 5);
    EXPECT_EQ(fuse_attention(a, a), a);
    EXPECT_EQ(fuse_attention(a, b), fuse_attention(b, a));
    const Plane half = fuse_attention(Plane(3, 3, 0.0f), Plane(3, 3, 1.0f));
    for (float v : half.values()) EXPECT_EQ(v, 0.5f);
    EXPECT_EQ(error_of([&] { fuse_attention(a, Plane(5, 7)); }), Errc::DimMismatch);
}

TEST(FeatureGuided, GainZeroAndUniformAttentionAreIdentity) {
    oracle::Gen g(12);
    const ImageF32 img = oracle::random_image(g, 9, 9);
    EXPECT_EQ(feature_guided_enhance(img, oracle::random_plane(g, 9, 9), 0.0), img);
    const ImageF32 out = feature_guided_enhance(img, Plane(9, 9, 0.3f), 0.5);
    for (std::size_t i = 0; i < img.samples().size(); ++i) EXPECT_NEAR(out.samples()[i], img.samples()[i], 1e-6);
    EXPECT_EQ(error_of([&] { feature_guided_enhance(img, Plane(8, 9), 0.5); }), Errc::DimMismatch);
}

TEST(FeatureGuided, HalfAttentionMatchesFormula) {
    const ImageF32 img = ImageF32::filled_rgb(8, 8, 0.4f, 0.2f, 0.1f);
    Plane attn(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 4; ++x) attn.at(x, y) = 1.0f;
    const ImageF32 out = feature_guided_enhance(img, attn, 0.5);
    // mean attention 0.5: left V * 1.25, right V * 0.75; hue and saturation kept.
    EXPECT_NEAR(out.at(0, 0, 0), 0.4 * 1.25, 1e-6);
    EXPECT_NEAR(out.at(2, 0, 0), 0.1 * 1.25, 1e-6);
    EXPECT_NEAR(out.at(0, 7, 0), 0.4 * 0.75, 1e-6);
    EXPECT_NEAR(out.at(1, 7, 0), 0.2 * 0.75, 1e-6);
    const ImageF32 h0 = rgb_to_hsv(img), h1 = rgb_to_hsv(out);
    EXPECT_NEAR(h0.at(0, 0, 0), h1.at(0, 0, 0), 1e-6);
    EXPECT_NEAR(h0.at(1, 7, 0), h1.at(1, 7, 0), 1e-6);
}
