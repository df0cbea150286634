#include "acousim/error.hpp"

namespace acousim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SelfIntersectingPolygon: return "SelfIntersectingPolygon";
    case ErrorCode::NonPositiveHeight: return "NonPositiveHeight";
    case ErrorCode::RT60OnNonShoebox: return "RT60OnNonShoebox";
    case ErrorCode::AbsorptionOutOfRange: return "AbsorptionOutOfRange";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::SamplingExhausted: return "SamplingExhausted";
    case ErrorCode::BandOutOfRange: return "BandOutOfRange";
    case ErrorCode::MicAtImagePosition: return "MicAtImagePosition";
    case ErrorCode::MixedMaterialsUnsupported: return "MixedMaterialsUnsupported";
    case ErrorCode::DirectionalTransducerUnsupported: return "DirectionalTransducerUnsupported";
    case ErrorCode::AliasedChirp: return "AliasedChirp";
    case ErrorCode::ZeroPowerSignal: return "ZeroPowerSignal";
    case ErrorCode::ZeroPowerInterferer: return "ZeroPowerInterferer";
    case ErrorCode::EmptyTemplate: return "EmptyTemplate";
    case ErrorCode::UpsamplingRequested: return "UpsamplingRequested";
    case ErrorCode::NoPeakFound: return "NoPeakFound";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::MissingEstimate: return "MissingEstimate";
    case ErrorCode::EmptyErrorSet: return "EmptyErrorSet";
    case ErrorCode::InsufficientDecayRange: return "InsufficientDecayRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UpstreamMissing: return "UpstreamMissing";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::StageFailure: return "StageFailure";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace acousim
