#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace acousim {

enum class ErrorCode {
  InvalidArgument,
  // scene
  SelfIntersectingPolygon,
  NonPositiveHeight,
  RT60OnNonShoebox,
  AbsorptionOutOfRange,
  EmptyGrid,
  SamplingExhausted,
  // propagation
  BandOutOfRange,
  MicAtImagePosition,
  MixedMaterialsUnsupported,
  DirectionalTransducerUnsupported,
  // signal
  AliasedChirp,
  ZeroPowerSignal,
  ZeroPowerInterferer,
  EmptyTemplate,
  UpsamplingRequested,
  // positioning
  NoPeakFound,
  DegenerateGeometry,
  // evaluation
  MissingEstimate,
  EmptyErrorSet,
  InsufficientDecayRange,
  // pipeline
  ParseError,
  UnknownKey,
  ValidationError,
  UpstreamMissing,
  MissingFeatures,
  StageFailure,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::InvalidArgument, message);
}

}  // namespace acousim
