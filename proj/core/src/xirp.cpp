#include "xirpaug/xirp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "xirpaug/error.hpp"
#include "xirpaug/random.hpp"

namespace xirpaug::xirp {
namespace {

void require_positive(std::span<const double> series) {
  for (double v : series) {
    if (!(v > 0.0)) throw Error(Errc::NonPositiveValue, "XIRP encoding needs positive values");
  }
}

void require_square(const Grid& m) {
  if (m.rows() != m.cols()) throw Error(Errc::NonSquare, "matrix is not square");
}

double scale_value(double v, const AffineRange& r) {
  if (r.degenerate) return 0.0;
  return 2.0 * (v - r.min) / (r.max - r.min) - 1.0;
}

double unscale_value(double v, const AffineRange& r) {
  if (r.degenerate) return r.min;
  return r.min + 0.5 * (v + 1.0) * (r.max - r.min);
}

struct RangeAccumulator {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  [[nodiscard]] AffineRange finish() const {
    if (!(hi >= lo)) return AffineRange{0.0, 0.0, true};
    return AffineRange{lo, hi, !(hi > lo)};
  }
};

std::vector<double> variant(const Grid& m, Eigen::Index j) {
  const Eigen::Index s = m.rows();
  std::vector<double> out(static_cast<std::size_t>(s));
  const double base = m(j, j);
  for (Eigen::Index i = 0; i < s; ++i) {
    out[static_cast<std::size_t>(i)] = i == j ? base : base * std::exp(m(i, j));
  }
  return out;
}

std::vector<double> average_of_variants(const Grid& m) {
  const Eigen::Index s = m.rows();
  std::vector<double> acc(static_cast<std::size_t>(s), 0.0);
  for (Eigen::Index j = 0; j < s; ++j) {
    const auto v = variant(m, j);
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
  }
  for (double& a : acc) a /= static_cast<double>(s);
  return acc;
}

Eigen::Index random_column(Eigen::Index s, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, s - 1);
  return pick(rng);
}

void require_positive_diagonal(const Grid& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(m(i, i) > 0.0)) throw Error(Errc::NonPositiveDiagonal, "diagonal entry " + std::to_string(i) + " is not positive");
  }
}

}  // namespace

Irp encode_irp(std::span<const double> series) {
  require_positive(series);
  const auto s = static_cast<Eigen::Index>(series.size());
  Irp out{Grid(s, s)};
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      out.matrix(i, j) = i == j ? 0.0 : std::log(series[i] / series[j]);
    }
  }
  return out;
}

Xirp encode_xirp(std::span<const double> series) {
  Xirp out{encode_irp(series).matrix};
  for (Eigen::Index i = 0; i < out.matrix.rows(); ++i) out.matrix(i, i) = series[i];
  return out;
}

XirpScaling fit_scaling(std::span<const Xirp> images) {
  RangeAccumulator diag;
  RangeAccumulator off;
  for (const auto& x : images) {
    require_square(x.matrix);
    const Eigen::Index s = x.matrix.rows();
    for (Eigen::Index i = 0; i < s; ++i) {
      for (Eigen::Index j = 0; j < s; ++j) {
        (i == j ? diag : off).add(x.matrix(i, j));
      }
    }
  }
  return XirpScaling{diag.finish(), off.finish()};
}

ScaledXirp scale_xirp(const Xirp& x) {
  return scale_xirp(x, fit_scaling(std::span<const Xirp>(&x, 1)));
}

ScaledXirp scale_xirp(const Xirp& x, const XirpScaling& params) {
  require_square(x.matrix);
  const Eigen::Index s = x.matrix.rows();
  ScaledXirp out{Grid(s, s), params};
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      out.matrix(i, j) = scale_value(x.matrix(i, j), i == j ? params.diagonal : params.off_diagonal);
    }
  }
  return out;
}

Xirp unscale_xirp(const ScaledXirp& sx) { return unscale_xirp(sx.matrix, sx.params); }

Xirp unscale_xirp(const Grid& scaled, const XirpScaling& params) {
  require_square(scaled);
  const Eigen::Index s = scaled.rows();
  Xirp out{Grid(s, s)};
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      out.matrix(i, j) = unscale_value(scaled(i, j), i == j ? params.diagonal : params.off_diagonal);
    }
  }
  return out;
}

std::vector<double> decode_diagonal(const Xirp& x) {
  require_square(x.matrix);
  std::vector<double> out(static_cast<std::size_t>(x.matrix.rows()));
  for (Eigen::Index i = 0; i < x.matrix.rows(); ++i) out[static_cast<std::size_t>(i)] = x.matrix(i, i);
  return out;
}

std::vector<std::vector<double>> decode_variants(const Xirp& x) {
  require_square(x.matrix);
  require_positive_diagonal(x.matrix);
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(x.matrix.rows()));
  for (Eigen::Index j = 0; j < x.matrix.cols(); ++j) out.push_back(variant(x.matrix, j));
  return out;
}

std::vector<double> decode_average(const Xirp& x) {
  require_square(x.matrix);
  require_positive_diagonal(x.matrix);
  return average_of_variants(x.matrix);
}

std::vector<double> decode_random(const Xirp& x, std::uint64_t seed) {
  require_square(x.matrix);
  require_positive_diagonal(x.matrix);
  return variant(x.matrix, random_column(x.matrix.rows(), seed));
}

std::vector<double> recover_from_irp(const Irp& irp, double x0) {
  require_square(irp.matrix);
  if (!(x0 > 0.0)) throw Error(Errc::NonPositiveStart, "start value must be positive");
  std::vector<double> out(static_cast<std::size_t>(irp.matrix.rows()));
  for (Eigen::Index i = 0; i < irp.matrix.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = x0 * std::exp(irp.matrix(i, 0));
  }
  return out;
}

DecodedSample decode_sampled(const Xirp& x, DecodeMethod method, std::uint64_t seed) {
  require_square(x.matrix);
  Grid m = x.matrix;
  DecodedSample out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(m(i, i) >= kDiagonalFloor)) {
      m(i, i) = kDiagonalFloor;
      ++out.clamp_count;
    }
  }
  switch (method) {
    case DecodeMethod::diagonal: out.values = decode_diagonal(Xirp{m}); break;
    case DecodeMethod::average: out.values = average_of_variants(m); break;
    case DecodeMethod::random: out.values = variant(m, random_column(m.rows(), seed)); break;
  }
  return out;
}

void write_xirp(const std::filesystem::path& path, const Grid& matrix, bool diag_scaled) {
  require_square(matrix);
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  out << "xirp v1 S=" << matrix.rows() << " diag_scaled=" << (diag_scaled ? 1 : 0) << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

XirpFile read_xirp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  std::string header;
  std::getline(in, header);
  long long s = -1;
  int flag = -1;
  if (std::sscanf(header.c_str(), "xirp v1 S=%lld diag_scaled=%d", &s, &flag) != 2 || s < 1 ||
      (flag != 0 && flag != 1)) {
    throw Error(Errc::MalformedRow, "bad XIRP header in " + path.string());
  }
  XirpFile out{Grid(s, s), flag == 1};
  std::string line;
  for (long long i = 0; i < s; ++i) {
    if (!std::getline(in, line)) throw Error(Errc::MalformedRow, "missing row " + std::to_string(i));
    std::stringstream row(line);
    std::string cell;
    long long j = 0;
    while (std::getline(row, cell, ',')) {
      if (j >= s) throw Error(Errc::MalformedRow, "row " + std::to_string(i) + " too long");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) throw Error(Errc::MalformedRow, "row " + std::to_string(i) + " has a bad value");
      out.matrix(i, j++) = v;
    }
    if (j != s) throw Error(Errc::MalformedRow, "row " + std::to_string(i) + " has " + std::to_string(j) + " values");
  }
  return out;
}

}  // namespace xirpaug::xirp
