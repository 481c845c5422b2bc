#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aquaclear {

enum class Errc {
    // image-core
    MalformedHeader,
    TruncatedPayload,
    UnsupportedMaxval,
    IoFailure,
    GrayscaleUnsupported,
    ChannelMismatch,
    EvenKernel,
    NonPositiveSigma,
    InvalidDimensions,
    // degradation-classifier
    EmptyDataset,
    InvalidThresholds,
    // enhance-classic
    NegativeStrength,
    ImageTooSmall,
    InvalidParameter,
    DuplicateStep,
    // enhance-neural
    ShapeMismatch,
    NonIntegralOutputDim,
    OddSpatialDim,
    UnsupportedDepth,
    ShapeMismatchInManifest,
    CorruptBlob,
    IndivisibleDims,
    DimMismatch,
    // quality-metrics
    EmptyBatch,
    // pipeline
    ParseError,
    MissingWeights,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace aquaclear
