#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace xirpaug::xirp {

/// Dense row-major square grid; S stays small (<= 64) in every pipeline.
using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Pairwise log returns: R(i, j) = log(x_i / x_j).
struct Irp {
  Grid matrix;
};

/// Irp with the series itself written onto the diagonal.
struct Xirp {
  Grid matrix;
};

/// Min-max record for one partition of the grid. A degenerate partition
/// (max == min) maps to 0 and back to `min`.
struct AffineRange {
  double min = 0.0;
  double max = 0.0;
  bool degenerate = true;
};

/// The diagonal and the off-diagonal carry different quantities, so each
/// gets its own range.
struct XirpScaling {
  AffineRange diagonal;
  AffineRange off_diagonal;
};

struct ScaledXirp {
  Grid matrix;  ///< entries in [-1, 1]
  XirpScaling params;
};

[[nodiscard]] Irp encode_irp(std::span<const double> series);
[[nodiscard]] Xirp encode_xirp(std::span<const double> series);

/// Ranges spanning every image in `images`; used to put a whole training set
/// (and everything later sampled from it) on one common scale.
[[nodiscard]] XirpScaling fit_scaling(std::span<const Xirp> images);

[[nodiscard]] ScaledXirp scale_xirp(const Xirp& x);
[[nodiscard]] ScaledXirp scale_xirp(const Xirp& x, const XirpScaling& params);
[[nodiscard]] Xirp unscale_xirp(const ScaledXirp& sx);
[[nodiscard]] Xirp unscale_xirp(const Grid& scaled, const XirpScaling& params);

[[nodiscard]] std::vector<double> decode_diagonal(const Xirp& x);

/// Variant j: s_i = x_jj * exp(R(i, j)) for i != j and s_j = x_jj.
/// Throws NonPositiveDiagonal unless every diagonal entry is > 0.
[[nodiscard]] std::vector<std::vector<double>> decode_variants(const Xirp& x);
[[nodiscard]] std::vector<double> decode_average(const Xirp& x);
[[nodiscard]] std::vector<double> decode_random(const Xirp& x, std::uint64_t seed);

[[nodiscard]] std::vector<double> recover_from_irp(const Irp& irp, double x0);

enum class DecodeMethod { diagonal, average, random };

inline constexpr double kDiagonalFloor = 1e-6;

struct DecodedSample {
  std::vector<double> values;
  std::size_t clamp_count = 0;  ///< diagonal entries raised to kDiagonalFloor
};

/// Decoder for generator output: clamps the diagonal to >= kDiagonalFloor
/// first, then applies `method`. Off-diagonal entries are used as-is.
[[nodiscard]] DecodedSample decode_sampled(const Xirp& x, DecodeMethod method,
                                           std::uint64_t seed = 0);

/// `xirp v1 S=<n> diag_scaled=<0|1>` followed by S comma-separated rows.
struct XirpFile {
  Grid matrix;
  bool diag_scaled = false;
};

void write_xirp(const std::filesystem::path& path, const Grid& matrix, bool diag_scaled);
[[nodiscard]] XirpFile read_xirp(const std::filesystem::path& path);

}  // namespace xirpaug::xirp
