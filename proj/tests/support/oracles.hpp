#pragma once

// Independent scalar reference implementations used as test oracles. These
// deliberately avoid the library's code paths (no Eigen, long double sums,
// quadratic algorithms).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Real = long double;

inline double mean(const std::vector<double>& x) {
  Real s = 0;
  for (double v : x) s += v;
  return static_cast<double>(s / static_cast<Real>(x.size()));
}

inline double sample_variance(const std::vector<double>& x) {
  const Real m = mean(x);
  Real s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return static_cast<double>(s / static_cast<Real>(x.size() - 1));
}

/// Population-standardized central moment of order k.
inline double standardized_moment(const std::vector<double>& x, int k) {
  const Real n = static_cast<Real>(x.size());
  Real m = 0;
  for (double v : x) m += v;
  m /= n;
  Real m2 = 0;
  Real mk = 0;
  for (double v : x) {
    const Real d = v - m;
    m2 += d * d;
    Real p = 1;
    for (int i = 0; i < k; ++i) p *= d;
    mk += p;
  }
  m2 /= n;
  mk /= n;
  return static_cast<double>(mk / std::pow(m2, static_cast<Real>(k) / 2));
}

inline double autocorrelation(const std::vector<double>& x, std::size_t lag) {
  const std::size_t n = x.size();
  Real m = 0;
  for (double v : x) m += v;
  m /= static_cast<Real>(n);
  Real num = 0;
  for (std::size_t t = lag; t < n; ++t) num += (x[t] - m) * (x[t - lag] - m);
  Real den = 0;
  for (double v : x) den += (v - m) * (v - m);
  return static_cast<double>(num / den);
}

inline double ljung_box(std::vector<double> r, std::size_t h, bool absolute) {
  if (absolute) {
    for (auto& v : r) v = std::fabs(v);
  }
  const Real n = static_cast<Real>(r.size());
  Real q = 0;
  for (std::size_t k = 1; k <= h; ++k) {
    const Real rho = autocorrelation(r, k);
    q += rho * rho / (n - static_cast<Real>(k));
  }
  return static_cast<double>(n * (n + 2) * q);
}

/// rank_i = 1 + #{a_j < a_i} + (#{a_j == a_i} - 1) / 2
inline std::vector<double> ranks(const std::vector<double>& a) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t less = 0;
    std::size_t equal = 0;
    for (double v : a) {
      less += v < a[i];
      equal += v == a[i];
    }
    r[i] = 1.0 + static_cast<double>(less) + (static_cast<double>(equal) - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const Real ma = mean(a);
  const Real mb = mean(b);
  Real sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

/// Shapley values by averaging marginal contributions over all m! orderings.
/// `f` evaluates one row.
inline std::vector<double> shapley_permutations(const std::function<double(const std::vector<double>&)>& f,
                                                const std::vector<double>& x,
                                                const std::vector<std::vector<double>>& background) {
  const std::size_t m = x.size();
  auto value = [&](const std::vector<bool>& in) {
    Real s = 0;
    for (const auto& b : background) {
      std::vector<double> row(m);
      for (std::size_t j = 0; j < m; ++j) row[j] = in[j] ? x[j] : b[j];
      s += f(row);
    }
    return static_cast<double>(s / static_cast<Real>(background.size()));
  };
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Real> phi(m, 0);
  std::size_t count = 0;
  do {
    std::vector<bool> in(m, false);
    double before = value(in);
    for (std::size_t j : order) {
      in[j] = true;
      const double after = value(in);
      phi[j] += after - before;
      before = after;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = static_cast<double>(phi[j] / static_cast<Real>(count));
  return out;
}

/// Central differences of `f` at `p`.
inline std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                             std::vector<double> p, double h = 1e-5) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = f(p);
    p[i] = keep - h;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

/// |a - b| <= rel * max(|a|, |b|) + abs_floor
inline bool close_relative(double a, double b, double rel, double abs_floor) {
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b)) + abs_floor;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// One LSTM layer (gate rows i, f, g, o) followed by a linear head, scalar
/// input per step. Weight layout mirrors the library's flat parameter vector:
/// W (4H x 1), U (4H x H), b (4H), head W (1 x H), head b.
inline double lstm_scalar(const std::vector<double>& p, std::size_t hidden, const std::vector<double>& inputs) {
  const std::size_t H = hidden;
  std::size_t k = 0;
  std::vector<double> W(4 * H), U(4 * H * H), b(4 * H), V(H);
  // Column-major storage, as Eigen's default.
  for (std::size_t r = 0; r < 4 * H; ++r) W[r] = p[k++];
  for (std::size_t c = 0; c < H; ++c)
    for (std::size_t r = 0; r < 4 * H; ++r) U[r * H + c] = p[k++];
  for (std::size_t r = 0; r < 4 * H; ++r) b[r] = p[k++];
  for (std::size_t c = 0; c < H; ++c) V[c] = p[k++];
  const double c0 = p[k++];

  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (double x : inputs) {
    std::vector<double> z(4 * H);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      double s = W[r] * x + b[r];
      for (std::size_t j = 0; j < H; ++j) s += U[r * H + j] * h[j];
      z[r] = s;
    }
    std::vector<double> hn(H);
    for (std::size_t u = 0; u < H; ++u) {
      const double ig = sigmoid(z[u]);
      const double fg = sigmoid(z[H + u]);
      const double gg = std::tanh(z[2 * H + u]);
      const double og = sigmoid(z[3 * H + u]);
      c[u] = fg * c[u] + ig * gg;
      hn[u] = og * std::tanh(c[u]);
    }
    h = hn;
  }
  double y = c0;
  for (std::size_t u = 0; u < H; ++u) y += V[u] * h[u];
  return y;
}

inline std::vector<double> positive_series(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 10.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace oracle
