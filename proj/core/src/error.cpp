#include "aquaclear/error.hpp"

namespace aquaclear {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::MalformedHeader: return "MalformedHeader";
        case Errc::TruncatedPayload: return "TruncatedPayload";
        case Errc::UnsupportedMaxval: return "UnsupportedMaxval";
        case Errc::IoFailure: return "IoFailure";
        case Errc::GrayscaleUnsupported: return "GrayscaleUnsupported";
        case Errc::ChannelMismatch: return "ChannelMismatch";
        case Errc::EvenKernel: return "EvenKernel";
        case Errc::NonPositiveSigma: return "NonPositiveSigma";
        case Errc::InvalidDimensions: return "InvalidDimensions";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::InvalidThresholds: return "InvalidThresholds";
        case Errc::NegativeStrength: return "NegativeStrength";
        case Errc::ImageTooSmall: return "ImageTooSmall";
        case Errc::InvalidParameter: return "InvalidParameter";
        case Errc::DuplicateStep: return "DuplicateStep";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::NonIntegralOutputDim: return "NonIntegralOutputDim";
        case Errc::OddSpatialDim: return "OddSpatialDim";
        case Errc::UnsupportedDepth: return "UnsupportedDepth";
        case Errc::ShapeMismatchInManifest: return "ShapeMismatchInManifest";
        case Errc::CorruptBlob: return "CorruptBlob";
        case Errc::IndivisibleDims: return "IndivisibleDims";
        case Errc::DimMismatch: return "DimMismatch";
        case Errc::EmptyBatch: return "EmptyBatch";
        case Errc::ParseError: return "ParseError";
        case Errc::MissingWeights: return "MissingWeights";
    }
    return "Unknown";
}

}  // namespace aquaclear
