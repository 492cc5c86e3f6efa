#include "xirpaug/series.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "xirpaug/error.hpp"

namespace xirpaug::series {

std::string_view to_string(Frequency f) noexcept {
  switch (f) {
    case Frequency::daily: return "daily";
    case Frequency::weekly: return "weekly";
    case Frequency::monthly: return "monthly";
    case Frequency::quarterly: return "quarterly";
    case Frequency::yearly: return "yearly";
    case Frequency::other: return "other";
  }
  return "other";
}

Frequency parse_frequency(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "daily" || lower == "d") return Frequency::daily;
  if (lower == "weekly" || lower == "w") return Frequency::weekly;
  if (lower == "monthly" || lower == "m") return Frequency::monthly;
  if (lower == "quarterly" || lower == "q") return Frequency::quarterly;
  if (lower == "yearly" || lower == "y") return Frequency::yearly;
  if (lower == "other" || lower == "o") return Frequency::other;
  throw Error(Errc::InvalidConfig, "unknown frequency '" + std::string(text) + "'");
}

TimeSeries make_series(std::string id, Frequency frequency, std::vector<double> values) {
  if (values.size() < 2) {
    throw Error(Errc::SeriesTooShort, "series '" + id + "' needs at least 2 values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(Errc::DomainError, "series '" + id + "' has non-finite value");
  }
  return TimeSeries{std::move(id), frequency, std::move(values)};
}

ScaledSeries scale_positive(std::span<const double> values, double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo)) {
    throw Error(Errc::InvalidRange, "need hi > lo > 0");
  }
  if (values.empty()) throw Error(Errc::EmptyInput, "cannot scale an empty series");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double vmin = *min_it;
  const double vmax = *max_it;
  if (!(vmax > vmin)) throw Error(Errc::ConstantSeries, "max == min");

  ScaledSeries out;
  out.params = ScaleParams{vmin, vmax, lo, hi};
  out.values.reserve(values.size());
  const double slope = (hi - lo) / (vmax - vmin);
  for (double v : values) {
    double s = lo + (v - vmin) * slope;
    // Pin the endpoints against rounding so min -> lo and max -> hi exactly.
    if (v == vmin) s = lo;
    if (v == vmax) s = hi;
    out.values.push_back(s);
  }
  return out;
}

std::vector<double> inverse_scale(const ScaledSeries& scaled) {
  const auto& p = scaled.params;
  if (!(p.hi > p.lo)) throw Error(Errc::InvalidRange, "malformed scale parameters");
  const double slope = (p.original_max - p.original_min) / (p.hi - p.lo);
  std::vector<double> out;
  out.reserve(scaled.values.size());
  for (double s : scaled.values) {
    out.push_back(p.original_min + (s - p.lo) * slope);
  }
  return out;
}

std::vector<double> log_returns(std::span<const double> values) {
  for (double v : values) {
    if (!(v > 0.0)) throw Error(Errc::NonPositiveValue, "log returns need positive values");
  }
  std::vector<double> out;
  if (values.size() < 2) return out;
  out.reserve(values.size() - 1);
  for (std::size_t t = 0; t + 1 < values.size(); ++t) {
    out.push_back(std::log(values[t + 1] / values[t]));
  }
  return out;
}

void FeatureMoments::require_higher() const {
  if (!skewness || !kurtosis) {
    throw Error(Errc::ZeroVariance, "skewness/kurtosis undefined");
  }
}

FeatureMoments moments(std::span<const double> data) {
  const std::size_t n = data.size();
  if (n < 2) throw Error(Errc::TooFewObservations, "moments need at least 2 values");

  FeatureMoments m;
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  // Summation can round the mean of identical values away from the value itself.
  m.mean = *lo == *hi ? *lo : std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n);

  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : data) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m.variance = m2 / static_cast<double>(n - 1);
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);

  if (m2 > 0.0) {
    if (n >= 3) m.skewness = m3 / std::pow(m2, 1.5);
    if (n >= 4) m.kurtosis = m4 / (m2 * m2);
  }
  return m;
}

std::size_t default_ljung_box_lags(std::size_t n) noexcept {
  return std::min<std::size_t>(10, n / 5);
}

std::vector<double> autocorrelation(std::span<const double> data, std::size_t max_lag) {
  const std::size_t n = data.size();
  if (max_lag >= n) throw Error(Errc::TooFewObservations, "lag must be below sample size");
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n);

  double denom = 0.0;
  for (double x : data) denom += (x - mean) * (x - mean);
  if (!(denom > 0.0)) throw Error(Errc::ZeroVariance, "autocorrelation of a constant sequence");

  std::vector<double> rho(max_lag + 1, 0.0);
  rho[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = k; t < n; ++t) num += (data[t] - mean) * (data[t - k] - mean);
    rho[k] = num / denom;
  }
  return rho;
}

LjungBoxResult ljung_box(std::span<const double> returns, std::size_t lags, bool absolute) {
  const std::size_t n = returns.size();
  if (lags < 1) throw Error(Errc::TooFewObservations, "need at least one lag");
  if (n <= lags) throw Error(Errc::TooFewObservations, "need n > h");

  std::vector<double> data(returns.begin(), returns.end());
  if (absolute) {
    for (double& x : data) x = std::abs(x);
  }
  const auto rho = autocorrelation(data, lags);

  const double nd = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t k = 1; k <= lags; ++k) {
    sum += rho[k] * rho[k] / (nd - static_cast<double>(k));
  }
  return LjungBoxResult{nd * (nd + 2.0) * sum, lags, n};
}

std::vector<double> average_ranks(std::span<const double> data) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data[a] < data[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && data[order[j + 1]] == data[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "pearson inputs differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw Error(Errc::TooFewObservations, "pearson needs at least 2 pairs");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw Error(Errc::ZeroVariance, "correlation of a constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "spearman inputs differ in length");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

std::vector<std::vector<double>> windows(std::span<const double> values, std::size_t length,
                                         std::size_t stride) {
  if (length == 0 || stride == 0) throw Error(Errc::InvalidRange, "window length and stride must be positive");
  if (values.size() < length) throw Error(Errc::SeriesTooShort, "series shorter than window length");
  std::vector<std::vector<double>> out;
  out.reserve((values.size() - length) / stride + 1);
  for (std::size_t start = 0; start + length <= values.size(); start += stride) {
    out.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(start),
                     values.begin() + static_cast<std::ptrdiff_t>(start + length));
  }
  return out;
}

double forecast_error(std::span<const double> pred, std::span<const double> actual,
                      ErrorKind kind) {
  if (pred.size() != actual.size()) throw Error(Errc::LengthMismatch, "prediction/actual length differ");
  if (pred.empty()) throw Error(Errc::EmptyInput, "forecast_error needs at least one value");
  const double n = static_cast<double>(pred.size());
  double acc = 0.0;
  switch (kind) {
    case ErrorKind::rmse:
      for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - actual[i]) * (pred[i] - actual[i]);
      return std::sqrt(acc / n);
    case ErrorKind::mae:
      for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - actual[i]);
      return acc / n;
    case ErrorKind::bce:
      for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = pred[i];
        const double y = actual[i];
        if (!(p > 0.0 && p < 1.0)) throw Error(Errc::DomainError, "bce prediction outside (0,1)");
        if (y != 0.0 && y != 1.0) throw Error(Errc::DomainError, "bce label outside {0,1}");
        acc -= y * std::log(p) + (1.0 - y) * std::log1p(-p);
      }
      return acc / n;
  }
  return acc;
}

}  // namespace xirpaug::series
