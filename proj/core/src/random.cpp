#include "xirpaug/random.hpp"

#include "xirpaug/error.hpp"

namespace xirpaug {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ConstantSeries: return "ConstantSeries";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::NonPositiveValue: return "NonPositiveValue";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::TooFewObservations: return "TooFewObservations";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::DomainError: return "DomainError";
    case Errc::NonSquare: return "NonSquare";
    case Errc::NonPositiveDiagonal: return "NonPositiveDiagonal";
    case Errc::NonPositiveStart: return "NonPositiveStart";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::DivergenceDetected: return "DivergenceDetected";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DegenerateDataset: return "DegenerateDataset";
    case Errc::TooManyFeatures: return "TooManyFeatures";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view dataset_id,
                          std::string_view stage) noexcept {
  return mix64(mix64(master ^ fnv1a(dataset_id)) ^ fnv1a(stage));
}

std::uint64_t child_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace xirpaug
