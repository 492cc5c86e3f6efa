#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xirpaug {

enum class Errc {
  ConstantSeries,
  InvalidRange,
  NonPositiveValue,
  ZeroVariance,
  TooFewObservations,
  LengthMismatch,
  SeriesTooShort,
  DomainError,
  NonSquare,
  NonPositiveDiagonal,
  NonPositiveStart,
  InvalidSpec,
  ShapeMismatch,
  InsufficientData,
  DivergenceDetected,
  EmptyInput,
  DegenerateDataset,
  TooManyFeatures,
  FileNotFound,
  MalformedRow,
  InvalidConfig,
  Io,
};

std::string_view to_string(Errc code) noexcept;

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace xirpaug
