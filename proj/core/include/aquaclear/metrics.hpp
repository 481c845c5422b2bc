#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aquaclear/image.hpp"

namespace aquaclear {

// PSNR in dB, or the Infinite sentinel for identical inputs.
class Psnr {
public:
    static Psnr infinite() noexcept { return Psnr(0.0, true); }
    static Psnr decibels(double db) noexcept { return Psnr(db, false); }

    bool is_infinite() const noexcept { return infinite_; }
    double db() const noexcept { return db_; }
    std::string to_string() const;  // "inf" or six decimals

    bool operator==(const Psnr&) const = default;

private:
    Psnr(double db, bool inf) noexcept : db_(db), infinite_(inf) {}
    double db_;
    bool infinite_;
};

// 10 log10(1 / MSE) over all samples, MAX = 1.
Psnr psnr(const ImageF32& reference, const ImageF32& test);

inline constexpr double kUciqeChromaWeight = 0.4680;
inline constexpr double kUciqeContrastWeight = 0.2745;
inline constexpr double kUciqeSaturationWeight = 0.2576;
inline constexpr double kUiqmColorWeight = 0.0282;
inline constexpr double kUiqmSharpnessWeight = 0.2953;
inline constexpr double kUiqmContrastWeight = 3.5753;

struct UciqeResult {
    double score = 0.0;
    double sigma_c = 0.0;  // chroma std / 100
    double con_l = 0.0;    // (top 1% L mean - bottom 1% L mean) / 100
    double mu_s = 0.0;     // mean c / sqrt(c^2 + L^2)
};

UciqeResult uciqe(const ImageF32& img);

// Colourfulness from alpha-trimmed (10% per side) opponent channel statistics.
double uicm(const ImageF32& img);

// Sobel magnitude per channel, EME over 8x8 blocks, luma-weighted.
double uism(const ImageF32& img);

// Mean of t |ln t| over 8x8 luma blocks, t = (max-min)/(max+min).
double uiconm(const ImageF32& img);

struct UiqmResult {
    double score = 0.0;
    double uicm = 0.0;
    double uism = 0.0;
    double uiconm = 0.0;
};

double uiqm_combine(double uicm, double uism, double uiconm) noexcept;
UiqmResult uiqm(const ImageF32& img);

// Mean after dropping floor(alpha * N) of the smallest and of the largest values.
double trimmed_mean(std::vector<double> values, double alpha);

enum class MethodLabel { Original, Unite, VGG19, ResNet50, Classic };

inline constexpr MethodLabel kMethodOrder[] = {MethodLabel::Original, MethodLabel::Unite, MethodLabel::VGG19,
                                               MethodLabel::ResNet50, MethodLabel::Classic};

std::string_view method_label_name(MethodLabel m) noexcept;
// Accepts the label names and the CLI method keys (classic, vgg, resnet, unite, original).
std::optional<MethodLabel> parse_method_label(std::string_view text) noexcept;

struct QualityScores {
    std::optional<Psnr> psnr;  // absent when no reference
    UciqeResult uciqe;
    UiqmResult uiqm;
};

QualityScores score_image(const ImageF32* reference, const ImageF32& test);

struct EvaluationInput {
    std::string image_id;
    MethodLabel method = MethodLabel::Original;
    std::optional<ImageF32> reference;
    ImageF32 test;
};

struct QualityRow {
    std::string image_id;
    MethodLabel method = MethodLabel::Original;
    QualityScores scores;
};

struct MethodAggregate {
    MethodLabel method = MethodLabel::Original;
    std::size_t rows = 0;
    std::size_t psnr_finite = 0;
    std::size_t psnr_infinite = 0;
    std::optional<double> psnr_mean;  // over finite rows only
    double uciqe = 0.0;
    double uiqm = 0.0;
    double sigma_c = 0.0;
    double con_l = 0.0;
    double mu_s = 0.0;
    double uicm = 0.0;
    double uism = 0.0;
    double uiconm = 0.0;
};

struct QualityReport {
    std::vector<QualityRow> rows;             // input order
    std::vector<MethodAggregate> aggregates;  // canonical method order, present methods only
};

QualityReport evaluate_batch(std::span<const EvaluationInput> inputs);
QualityReport aggregate_rows(std::vector<QualityRow> rows);

inline constexpr std::string_view kScoresHeader = "image,method,psnr,uciqe,uiqm,sigma_c,con_l,mu_s,uicm,uism,uiconm";

// Long format: one row per image, then one "mean" row per method.
std::string scores_csv(const QualityReport& report);

// Metric x method means: header "metric,<methods...>", rows PSNR, UCIQE, UIQM.
std::string comparison_table_csv(const QualityReport& report, int decimals = 6);

}  // namespace aquaclear
