#include "xirpaug/app/smoke_data.hpp"

#include <cmath>
#include <random>
#include <string>

#include "xirpaug/random.hpp"

namespace xirpaug::app {

std::vector<series::TimeSeries> smoke_datasets(std::uint64_t seed) {
  std::vector<series::TimeSeries> out;
  for (int k = 0; k < 6; ++k) {
    const bool trend = k % 2 == 1;
    const std::string id = std::string(k < 3 ? "D" : "W") + std::to_string(k % 3 + 1);
    Rng rng(derive_seed(seed, id, "smoke"));
    std::uniform_int_distribution<int> len(200, 400);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> v(n);
    if (!trend) {
      const double phi = 0.2 + 0.15 * k;
      double r = 0.0;
      double log_p = std::log(100.0);
      for (auto& x : v) {
        r = phi * r + 0.01 * noise(rng);
        log_p += 0.0005 + r;
        x = std::exp(log_p);
      }
    } else {
      const double slope = 0.05 * (k + 1);
      double e = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        e = 0.7 * e + noise(rng);
        v[t] = 50.0 + slope * static_cast<double>(t) + e;
      }
    }
    out.push_back(series::make_series(id, k < 3 ? series::Frequency::daily : series::Frequency::weekly, std::move(v)));
  }
  return out;
}

}  // namespace xirpaug::app
