#include "aquaclear/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aquaclear/color.hpp"

namespace aquaclear {

namespace {

constexpr int kBlock = 8;

std::string fixed(double v, int decimals = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

void require_blocks(const ImageF32& img, const char* op) {
    if (img.width() < kBlock || img.height() < kBlock) {
        throw Error(Errc::ImageTooSmall, std::string(op) + " needs at least 8x8 pixels");
    }
}

// Sobel gradient magnitude with replicate borders, evaluated in double.
std::vector<double> sobel(std::span<const float> plane, int w, int h) {
    auto px = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return static_cast<double>(plane[static_cast<std::size_t>(y) * w + x]);
    };
    std::vector<double> mag(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            mag[static_cast<std::size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return mag;
}

template <class Fn>
double block_average(std::span<const double> values, int w, int h, Fn&& per_block) {
    const int bx = w / kBlock;
    const int by = h / kBlock;
    double sum = 0.0;
    for (int j = 0; j < by; ++j) {
        for (int i = 0; i < bx; ++i) {
            double mn = values[static_cast<std::size_t>(j * kBlock) * w + i * kBlock];
            double mx = mn;
            for (int y = j * kBlock; y < (j + 1) * kBlock; ++y)
                for (int x = i * kBlock; x < (i + 1) * kBlock; ++x) {
                    const double v = values[static_cast<std::size_t>(y) * w + x];
                    mn = std::min(mn, v);
                    mx = std::max(mx, v);
                }
            sum += per_block(mn, mx);
        }
    }
    return sum / (static_cast<double>(bx) * by);
}

}  // namespace

std::string Psnr::to_string() const { return infinite_ ? "inf" : fixed(db_); }

Psnr psnr(const ImageF32& reference, const ImageF32& test) {
    if (reference.width() != test.width() || reference.height() != test.height() ||
        reference.channels() != test.channels()) {
        throw Error(Errc::DimMismatch, "psnr inputs differ in shape");
    }
    auto a = reference.samples();
    auto b = test.samples();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(a.size());
    if (mse == 0.0) return Psnr::infinite();
    return Psnr::decibels(10.0 * std::log10(1.0 / mse));
}

UciqeResult uciqe(const ImageF32& img) {
    img.require_rgb("uciqe");
    const auto lab = rgb_to_lab(img);
    const std::size_t n = lab.size();
    std::vector<double> chroma(n), lightness(n);
    double chroma_sum = 0.0, sat_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = std::sqrt(lab[i].a * lab[i].a + lab[i].b * lab[i].b);
        chroma[i] = c;
        lightness[i] = lab[i].L;
        chroma_sum += c;
        const double denom2 = c * c + lab[i].L * lab[i].L;
        sat_sum += denom2 < 1e-9 ? 0.0 : c / std::sqrt(denom2);
    }
    const double chroma_mean = chroma_sum / static_cast<double>(n);
    double var = 0.0;
    for (double c : chroma) var += (c - chroma_mean) * (c - chroma_mean);
    var /= static_cast<double>(n);

    std::sort(lightness.begin(), lightness.end());
    const auto k = static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(n)));
    double low = 0.0, high = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        low += lightness[i];
        high += lightness[n - 1 - i];
    }

    UciqeResult r;
    r.sigma_c = std::sqrt(var) / 100.0;
    r.con_l = (high / static_cast<double>(k) - low / static_cast<double>(k)) / 100.0;
    r.mu_s = sat_sum / static_cast<double>(n);
    r.score = kUciqeChromaWeight * r.sigma_c + kUciqeContrastWeight * r.con_l + kUciqeSaturationWeight * r.mu_s;
    return r;
}

double trimmed_mean(std::vector<double> values, double alpha) {
    if (values.empty()) return 0.0;
    std::stable_sort(values.begin(), values.end());
    const auto trim = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(values.size())));
    double sum = 0.0;
    const std::size_t kept = values.size() - 2 * trim;
    for (std::size_t i = trim; i < values.size() - trim; ++i) sum += values[i];
    return sum / static_cast<double>(kept);
}

double uicm(const ImageF32& img) {
    img.require_rgb("uicm");
    const std::size_t n = img.pixel_count();
    auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
    std::vector<double> rg(n), yb(n);
    for (std::size_t i = 0; i < n; ++i) {
        rg[i] = static_cast<double>(r[i]) - g[i];
        yb[i] = 0.5 * (static_cast<double>(r[i]) + g[i]) - b[i];
    }
    auto spread = [](const std::vector<double>& v, double mu) {
        double acc = 0.0;
        for (double x : v) acc += (x - mu) * (x - mu);
        return acc / static_cast<double>(v.size());
    };
    const double mu_rg = trimmed_mean(rg, 0.1);
    const double mu_yb = trimmed_mean(yb, 0.1);
    const double var_rg = spread(rg, mu_rg);
    const double var_yb = spread(yb, mu_yb);
    return -0.0268 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb) + 0.1586 * std::sqrt(var_rg + var_yb);
}

double uism(const ImageF32& img) {
    img.require_rgb("uism");
    require_blocks(img, "uism");
    static constexpr double kWeights[3] = {0.299, 0.587, 0.114};
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto mag = sobel(img.channel(c), img.width(), img.height());
        const double eme = 2.0 * block_average(mag, img.width(), img.height(), [](double mn, double mx) {
            return mn < 1e-6 ? 0.0 : std::log(mx / mn);
        });
        total += kWeights[c] * eme;
    }
    return total;
}

double uiconm(const ImageF32& img) {
    require_blocks(img, "uiconm");
    const Plane y = luma(img);
    std::vector<double> values(y.values().begin(), y.values().end());
    return block_average(values, img.width(), img.height(), [](double mn, double mx) {
        const double t = (mx - mn) / (mx + mn + 1e-12);
        return t > 0.0 ? t * std::abs(std::log(t)) : 0.0;
    });
}

double uiqm_combine(double uicm_v, double uism_v, double uiconm_v) noexcept {
    return kUiqmColorWeight * uicm_v + kUiqmSharpnessWeight * uism_v + kUiqmContrastWeight * uiconm_v;
}

UiqmResult uiqm(const ImageF32& img) {
    UiqmResult r;
    r.uicm = uicm(img);
    r.uism = uism(img);
    r.uiconm = uiconm(img);
    r.score = uiqm_combine(r.uicm, r.uism, r.uiconm);
    return r;
}

std::string_view method_label_name(MethodLabel m) noexcept {
    switch (m) {
        case MethodLabel::Original: return "Original";
        case MethodLabel::Unite: return "Unite";
        case MethodLabel::VGG19: return "VGG19";
        case MethodLabel::ResNet50: return "ResNet50";
        case MethodLabel::Classic: return "Classic";
    }
    return "";
}

std::optional<MethodLabel> parse_method_label(std::string_view text) noexcept {
    for (MethodLabel m : kMethodOrder) {
        if (method_label_name(m) == text) return m;
    }
    if (text == "original") return MethodLabel::Original;
    if (text == "unite") return MethodLabel::Unite;
    if (text == "vgg") return MethodLabel::VGG19;
    if (text == "resnet") return MethodLabel::ResNet50;
    if (text == "classic") return MethodLabel::Classic;
    return std::nullopt;
}

QualityScores score_image(const ImageF32* reference, const ImageF32& test) {
    QualityScores s;
    if (reference) s.psnr = psnr(*reference, test);
    s.uciqe = uciqe(test);
    s.uiqm = uiqm(test);
    return s;
}

QualityReport aggregate_rows(std::vector<QualityRow> rows) {
    QualityReport report;
    report.rows = std::move(rows);
    for (MethodLabel m : kMethodOrder) {
        MethodAggregate agg;
        agg.method = m;
        double psnr_sum = 0.0;
        for (const auto& row : report.rows) {
            if (row.method != m) continue;
            ++agg.rows;
            const auto& s = row.scores;
            if (s.psnr) {
                if (s.psnr->is_infinite()) {
                    ++agg.psnr_infinite;
                } else {
                    ++agg.psnr_finite;
                    psnr_sum += s.psnr->db();
                }
            }
            agg.uciqe += s.uciqe.score;
            agg.uiqm += s.uiqm.score;
            agg.sigma_c += s.uciqe.sigma_c;
            agg.con_l += s.uciqe.con_l;
            agg.mu_s += s.uciqe.mu_s;
            agg.uicm += s.uiqm.uicm;
            agg.uism += s.uiqm.uism;
            agg.uiconm += s.uiqm.uiconm;
        }
        if (agg.rows == 0) continue;
        const double n = static_cast<double>(agg.rows);
        if (agg.psnr_finite > 0) agg.psnr_mean = psnr_sum / static_cast<double>(agg.psnr_finite);
        for (double* v : {&agg.uciqe, &agg.uiqm, &agg.sigma_c, &agg.con_l, &agg.mu_s, &agg.uicm, &agg.uism, &agg.uiconm}) {
            *v /= n;
        }
        report.aggregates.push_back(agg);
    }
    return report;
}

QualityReport evaluate_batch(std::span<const EvaluationInput> inputs) {
    if (inputs.empty()) throw Error(Errc::EmptyBatch, "no images to evaluate");
    std::vector<QualityRow> rows;
    rows.reserve(inputs.size());
    for (const auto& in : inputs) {
        rows.push_back({in.image_id, in.method, score_image(in.reference ? &*in.reference : nullptr, in.test)});
    }
    return aggregate_rows(std::move(rows));
}

std::string scores_csv(const QualityReport& report) {
    std::string out(kScoresHeader);
    out += "\n";
    for (const auto& row : report.rows) {
        const auto& s = row.scores;
        out += row.image_id + "," + std::string(method_label_name(row.method)) + "," +
               (s.psnr ? s.psnr->to_string() : "") + "," + fixed(s.uciqe.score) + "," + fixed(s.uiqm.score) + "," +
               fixed(s.uciqe.sigma_c) + "," + fixed(s.uciqe.con_l) + "," + fixed(s.uciqe.mu_s) + "," +
               fixed(s.uiqm.uicm) + "," + fixed(s.uiqm.uism) + "," + fixed(s.uiqm.uiconm) + "\n";
    }
    for (const auto& a : report.aggregates) {
        out += "mean," + std::string(method_label_name(a.method)) + "," + (a.psnr_mean ? fixed(*a.psnr_mean) : "") +
               "," + fixed(a.uciqe) + "," + fixed(a.uiqm) + "," + fixed(a.sigma_c) + "," + fixed(a.con_l) + "," +
               fixed(a.mu_s) + "," + fixed(a.uicm) + "," + fixed(a.uism) + "," + fixed(a.uiconm) + "\n";
    }
    return out;
}

std::string comparison_table_csv(const QualityReport& report, int decimals) {
    std::string out = "metric";
    for (const auto& a : report.aggregates) out += "," + std::string(method_label_name(a.method));
    out += "\nPSNR";
    for (const auto& a : report.aggregates) out += "," + (a.psnr_mean ? fixed(*a.psnr_mean, decimals) : "");
    out += "\nUCIQE";
    for (const auto& a : report.aggregates) out += "," + fixed(a.uciqe, decimals);
    out += "\nUIQM";
    for (const auto& a : report.aggregates) out += "," + fixed(a.uiqm, decimals);
    return out + "\n";
}

}  // namespace aquaclear
