#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "xirpaug/error.hpp"
#include "xirpaug/eval.hpp"
#include "xirpaug/series.hpp"

namespace fixture {

/// Price path whose log returns follow AR(1) with coefficient `phi`.
inline std::vector<double> ar1_prices(std::size_t n, std::uint64_t seed, double phi = 0.5, double sigma = 0.02) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> price{100.0};
  double r = 0.0;
  while (price.size() < n) {
    r = phi * r + noise(rng);
    price.push_back(price.back() * std::exp(r));
  }
  return price;
}

/// Sliding windows of the [0.1, 1]-scaled AR(1) price path.
inline xirpaug::eval::Windows ar1_windows(std::size_t n, std::size_t window, std::uint64_t seed, double phi = 0.5) {
  const auto scaled = xirpaug::series::scale_positive(ar1_prices(n, seed, phi));
  return xirpaug::series::windows(scaled.values, window);
}

inline xirpaug::eval::Windows offset(xirpaug::eval::Windows w, double by) {
  for (auto& s : w)
    for (auto& v : s) v += by;
  return w;
}

/// Small LSTMs and few epochs so harness tests run in seconds.
inline xirpaug::eval::EvalConfig fast_eval(std::size_t window, std::uint64_t seed) {
  xirpaug::eval::EvalConfig c;
  c.window = window;
  c.repetitions = 3;
  c.forecaster_layers = 1;
  c.forecaster_width = 4;
  c.classifier_layers = 1;
  c.classifier_width = 4;
  c.max_epochs = 30;
  c.learning_rate = 1e-2;
  c.mixing_neighbors = 10;
  c.seed = seed;
  return c;
}

template <class F>
bool throws_code(F&& f, xirpaug::Errc code) {
  try {
    f();
  } catch (const xirpaug::Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace fixture
