#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xirpaug::series {

enum class Frequency { daily, weekly, monthly, quarterly, yearly, other };

[[nodiscard]] std::string_view to_string(Frequency f) noexcept;
/// Accepts the full name or the M4 single-letter prefix (D, W, M, Q, Y).
[[nodiscard]] Frequency parse_frequency(std::string_view text);

/// Ordered real observations. Construct through `make_series` to validate.
struct TimeSeries {
  std::string id;
  Frequency frequency = Frequency::other;
  std::vector<double> values;
};

/// Throws SeriesTooShort for fewer than two values, DomainError on non-finite values.
[[nodiscard]] TimeSeries make_series(std::string id, Frequency frequency,
                                     std::vector<double> values);

struct ScaleParams {
  double original_min = 0.0;
  double original_max = 1.0;
  double lo = 0.1;
  double hi = 1.0;
};

struct ScaledSeries {
  std::vector<double> values;
  ScaleParams params;
};

inline constexpr double kDefaultScaleLo = 0.1;
inline constexpr double kDefaultScaleHi = 1.0;

/// Affine min-max map of `values` onto [lo, hi] with lo > 0 so that log returns exist.
[[nodiscard]] ScaledSeries scale_positive(std::span<const double> values,
                                          double lo = kDefaultScaleLo,
                                          double hi = kDefaultScaleHi);

[[nodiscard]] std::vector<double> inverse_scale(const ScaledSeries& scaled);

/// r_t = log(x_{t+1} / x_t).
[[nodiscard]] std::vector<double> log_returns(std::span<const double> values);

/// Sample mean and variance (n-1 divisor), plus standardized third and fourth
/// central moments (population moments, non-excess kurtosis). The higher
/// moments are empty when the data has zero variance or too few points.
struct FeatureMoments {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> skewness;
  std::optional<double> kurtosis;

  /// Throws ZeroVariance when either higher moment is undefined.
  void require_higher() const;
};

[[nodiscard]] FeatureMoments moments(std::span<const double> data);

struct LjungBoxResult {
  double q = 0.0;
  std::size_t lags = 0;
  std::size_t n = 0;
};

/// min(10, floor(n / 5)).
[[nodiscard]] std::size_t default_ljung_box_lags(std::size_t n) noexcept;

/// Sample autocorrelation at lags 0..max_lag (index 0 is 1).
[[nodiscard]] std::vector<double> autocorrelation(std::span<const double> data,
                                                  std::size_t max_lag);

/// Q = n(n+2) sum_{k=1..h} rho_k^2 / (n-k), on |r| when `absolute`.
[[nodiscard]] LjungBoxResult ljung_box(std::span<const double> returns, std::size_t lags,
                                       bool absolute = false);

/// Average ranks (1-based); ties share the mean of their positions.
[[nodiscard]] std::vector<double> average_ranks(std::span<const double> data);

[[nodiscard]] double pearson(std::span<const double> a, std::span<const double> b);

[[nodiscard]] double spearman(std::span<const double> a, std::span<const double> b);

[[nodiscard]] std::vector<std::vector<double>> windows(std::span<const double> values,
                                                       std::size_t length,
                                                       std::size_t stride = 1);

enum class ErrorKind { rmse, mae, bce };

[[nodiscard]] double forecast_error(std::span<const double> pred, std::span<const double> actual,
                                    ErrorKind kind);

}  // namespace xirpaug::series
