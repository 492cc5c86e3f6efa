#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "xirpaug/error.hpp"
#include "xirpaug/eval.hpp"

using namespace xirpaug;
using namespace xirpaug::eval;
using fixture::throws_code;

namespace {

double median5(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + 2, v.end());
  return v[2];
}

/// Brute-force k-NN label mixing over given 2-D coordinates.
double knn_oracle(const MixingReport& r, std::size_t k) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < r.coords.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < r.coords.size(); ++j) {
      if (j == i) continue;
      const double dx = r.coords[i][0] - r.coords[j][0], dy = r.coords[i][1] - r.coords[j][1];
      d.emplace_back(dx * dx + dy * dy, j);
    }
    std::sort(d.begin(), d.end());
    std::size_t opposite = 0;
    for (std::size_t q = 0; q < k; ++q) opposite += r.labels[d[q].second] != r.labels[i];
    total += static_cast<long double>(opposite) / static_cast<long double>(k);
  }
  return static_cast<double>(total / static_cast<long double>(r.coords.size()));
}

}  // namespace

TEST(EvalConfig, DefaultsAndValidation) {
  const EvalConfig c;
  EXPECT_EQ(c.window, 28u);
  EXPECT_EQ(c.repetitions, 10u);
  EXPECT_EQ(c.patience, 5u);
  EXPECT_EQ(c.train_fraction, 0.8);
  ASSERT_EQ(c.alpha_grid.size(), 11u);
  EXPECT_EQ(c.alpha_grid.front(), 0.0);
  EXPECT_NEAR(c.alpha_grid.back(), 0.5, 1e-15);
  EXPECT_EQ(c.forecaster_layers, 3u);
  EXPECT_EQ(c.forecaster_width, 7u);
  EXPECT_EQ(c.classifier_layers, 3u);
  EXPECT_EQ(c.classifier_width, 8u);

  EvalConfig bad;
  bad.train_fraction = 1.0;
  EXPECT_TRUE(throws_code([&] { validate(bad); }, Errc::InvalidConfig));
  bad = EvalConfig{};
  bad.alpha_grid = {0.0, 1.0};
  EXPECT_TRUE(throws_code([&] { validate(bad); }, Errc::InvalidConfig));
  bad = EvalConfig{};
  bad.repetitions = 0;
  EXPECT_TRUE(throws_code([&] { validate(bad); }, Errc::InvalidConfig));
}

TEST(Split, PartitionProperties) {
  for (std::size_t n : {2u, 3u, 10u, 101u}) {
    const Split s = split_indices(n, 0.8, 5);
    EXPECT_GE(s.train.size(), 1u);
    EXPECT_GE(s.test.size(), 1u);
    EXPECT_EQ(s.train.size() + s.test.size(), n);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    EXPECT_EQ(all.size(), n);
    EXPECT_EQ(split_indices(n, 0.8, 5).train, s.train);
  }
  EXPECT_EQ(split_indices(100, 0.8, 1).train.size(), 80u);
}

TEST(SyntheticCount, Examples) {
  EXPECT_EQ(synthetic_count_for(0.0, 100), 0u);
  EXPECT_EQ(synthetic_count_for(0.2, 100), 25u);
  EXPECT_EQ(synthetic_count_for(0.5, 10), 10u);
  EXPECT_EQ(synthetic_count_for(0.1, 7), 1u);
  for (std::size_t n = 1; n < 200; n += 7) {
    for (double a : default_alpha_grid()) {
      const std::size_t m = synthetic_count_for(a, n);
      if (a == 0.0) continue;
      // Smallest count whose share of the pooled set reaches alpha.
      EXPECT_GE(static_cast<double>(m) / static_cast<double>(m + n), a - 1e-12);
      if (m > 0) EXPECT_LT(static_cast<double>(m - 1) / static_cast<double>(m - 1 + n), a - 1e-12);
    }
  }
}

TEST(Mixing, DuplicateSetIsMixed) {
  const auto real = fixture::ar1_windows(300, 8, 1);
  const auto rep = embedding_mixing(real, real, fixture::fast_eval(8, 1));
  EXPECT_NEAR(rep.knn_mixing, 0.5, 0.1);
  EXPECT_EQ(rep.coords.size(), 2 * real.size());
  EXPECT_EQ(std::count(rep.labels.begin(), rep.labels.end(), 1), static_cast<long>(real.size()));
}

TEST(Mixing, OffsetSetIsSeparated) {
  const auto real = fixture::ar1_windows(300, 8, 2);
  const auto rep = embedding_mixing(real, fixture::offset(real, 100.0), fixture::fast_eval(8, 2));
  EXPECT_LT(rep.knn_mixing, 0.05);
}

TEST(Mixing, MatchesBruteForceNeighbours) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto real = fixture::ar1_windows(80, 6, seed);
    const auto fake = fixture::ar1_windows(90, 6, seed + 100, -0.3);
    auto cfg = fixture::fast_eval(6, seed);
    cfg.mixing_neighbors = 5;
    const auto rep = embedding_mixing(real, fake, cfg);
    EXPECT_NEAR(rep.knn_mixing, knn_oracle(rep, 5), 1e-12);
    EXPECT_GE(rep.knn_mixing, 0.0);
    EXPECT_LE(rep.knn_mixing, 1.0);
  }
}

TEST(Mixing, ProjectionIsCenteredAndOrderedByVariance) {
  const auto real = fixture::ar1_windows(120, 6, 3);
  const auto fake = fixture::ar1_windows(120, 6, 4);
  const auto rep = embedding_mixing(real, fake, fixture::fast_eval(6, 0));
  double mx = 0, my = 0, vx = 0, vy = 0, cxy = 0;
  for (const auto& c : rep.coords) {
    mx += c[0];
    my += c[1];
  }
  const double n = static_cast<double>(rep.coords.size());
  mx /= n;
  my /= n;
  for (const auto& c : rep.coords) {
    vx += (c[0] - mx) * (c[0] - mx);
    vy += (c[1] - my) * (c[1] - my);
    cxy += (c[0] - mx) * (c[1] - my);
  }
  EXPECT_NEAR(mx, 0.0, 1e-12);
  EXPECT_NEAR(my, 0.0, 1e-12);
  EXPECT_GE(vx, vy);
  EXPECT_NEAR(cxy / std::sqrt(vx * vy), 0.0, 1e-9);
}

TEST(Mixing, EmptyInput) {
  const auto real = fixture::ar1_windows(50, 6, 3);
  EXPECT_TRUE(throws_code([&] { (void)embedding_mixing(real, {}, EvalConfig{}); }, Errc::EmptyInput));
}

TEST(PredictiveScore, SameTrainingDataMatchesBaseline) {
  const auto real = fixture::ar1_windows(300, 8, 5);
  auto cfg = fixture::fast_eval(8, 5);
  cfg.repetitions = 1;
  const Split split = predictive_split(real.size(), cfg, 0);
  Windows train;
  for (auto i : split.train) train.push_back(real[i]);
  const double base = baseline_predictive_score(real, cfg);
  const double sp = predictive_score(real, train, cfg);
  EXPECT_NEAR(sp, base, 0.05 * base);
}

TEST(PredictiveScore, ConstantSyntheticIsWorse) {
  const auto real = fixture::ar1_windows(300, 8, 6, 0.8);
  const auto cfg = fixture::fast_eval(8, 6);
  const Windows flat(200, std::vector<double>(8, 0.5));
  EXPECT_GT(predictive_score(real, flat, cfg), baseline_predictive_score(real, cfg));
}

TEST(PredictiveScore, DeterministicAndNonNegative) {
  const auto real = fixture::ar1_windows(200, 8, 7);
  const auto fake = fixture::ar1_windows(200, 8, 8);
  const auto cfg = fixture::fast_eval(8, 7);
  const double a = predictive_score(real, fake, cfg);
  EXPECT_EQ(a, predictive_score(real, fake, cfg));
  EXPECT_GE(a, 0.0);
  EXPECT_TRUE(throws_code([&] { (void)predictive_score(real, {}, cfg); }, Errc::InsufficientData));
  EXPECT_TRUE(throws_code([&] { (void)predictive_score(real, fixture::ar1_windows(50, 6, 1), cfg); },
                          Errc::ShapeMismatch));
}

TEST(DiscriminativeScore, CopiesAreIndistinguishable) {
  std::vector<double> scores;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto real = fixture::ar1_windows(250, 8, 20 + seed);
    scores.push_back(discriminative_score(real, real, fixture::fast_eval(8, seed)));
  }
  EXPECT_NEAR(median5(scores), 0.5, 0.1);
}

TEST(DiscriminativeScore, OffsetIsSeparable) {
  const auto real = fixture::ar1_windows(250, 8, 9);
  const auto cfg = fixture::fast_eval(8, 9);
  const double sd = discriminative_score(real, fixture::offset(real, 100.0), cfg);
  EXPECT_LT(sd, 0.05);
  EXPECT_GE(sd, 0.0);
  EXPECT_EQ(sd, discriminative_score(real, fixture::offset(real, 100.0), cfg));
}

TEST(Sweep, ReferencePointIgnoresPool) {
  const auto real = fixture::ar1_windows(200, 8, 10);
  auto cfg = fixture::fast_eval(8, 10);
  cfg.alpha_grid = {0.0, 0.2, 0.4};
  const auto empty = rmse_curve(real, {}, cfg);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0].alpha, 0.0);
  const auto full = rmse_curve(real, fixture::ar1_windows(300, 8, 11), cfg);
  ASSERT_EQ(full.size(), 3u);
  EXPECT_EQ(full[0].rmse, empty[0].rmse);
  EXPECT_EQ(baseline_rmse(real, cfg), empty[0].rmse);
  const auto other = rmse_curve(real, fixture::offset(real, 3.0), cfg);
  EXPECT_EQ(other[0].rmse, empty[0].rmse);
}

TEST(Sweep, TestPartitionHoldsOnlyRealWindows) {
  const auto real = fixture::ar1_windows(150, 8, 12);
  auto cfg = fixture::fast_eval(8, 12);
  cfg.alpha_grid = {0.0, 0.25, 0.5};
  const auto curve = rmse_curve(real, fixture::ar1_windows(200, 8, 13), cfg);
  const std::size_t n_train = sweep_split(real.size(), cfg, 0).train.size();
  for (const auto& p : curve) {
    EXPECT_EQ(p.synthetic_in_test, 0u);
    EXPECT_EQ(p.synthetic_count, synthetic_count_for(p.alpha, n_train));
    EXPECT_GT(p.rmse, 0.0);
  }
}

TEST(Sweep, ScoreDefinitionAndErrors) {
  const auto real = fixture::ar1_windows(150, 8, 14);
  const auto fake = fixture::ar1_windows(200, 8, 15);
  auto cfg = fixture::fast_eval(8, 14);
  cfg.alpha_grid = {0.0, 0.1, 0.3};
  const auto res = augmentation_sweep(real, fake, cfg);
  ASSERT_EQ(res.curve.size(), 3u);
  const auto best = std::min_element(res.curve.begin() + 1, res.curve.end(),
                                     [](const CurvePoint& a, const CurvePoint& b) { return a.rmse < b.rmse; });
  EXPECT_EQ(res.alpha_star, best->alpha);
  EXPECT_EQ(res.s_a, 1.0 - best->rmse / res.curve[0].rmse);
  EXPECT_EQ(res.optimal_level, res.s_a > 0.0 ? res.alpha_star : 0.0);

  EXPECT_TRUE(throws_code([&] { (void)augmentation_sweep(real, {}, cfg); }, Errc::InsufficientData));
  cfg.alpha_grid = {0.1, 0.2};
  EXPECT_TRUE(throws_code([&] { (void)augmentation_sweep(real, fake, cfg); }, Errc::InvalidConfig));
}

TEST(Sweep, CopiesOfRealBarelyMoveTheError) {
  std::vector<double> sa;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto real = fixture::ar1_windows(200, 8, 30 + seed);
    auto cfg = fixture::fast_eval(8, seed);
    cfg.repetitions = 1;
    cfg.alpha_grid = {0.0, 0.1, 0.2, 0.3};
    Windows train;
    for (auto i : sweep_split(real.size(), cfg, 0).train) train.push_back(real[i]);
    sa.push_back(augmentation_sweep(real, train, cfg).s_a);
  }
  EXPECT_LE(std::fabs(median5(sa)), 0.1);
}

TEST(Correlations, Properties) {
  std::vector<ScoreRecord> recs;
  for (int i = 0; i < 8; ++i) {
    ScoreRecord r;
    r.dataset_id = "D" + std::to_string(i);
    r.s_p = 0.1 * i;
    r.s_a = std::exp(r.s_p);
    r.s_d = std::sin(3.0 * i);
    recs.push_back(r);
  }
  const auto rho = score_correlations(recs);
  EXPECT_NEAR(rho(0, 1), 1.0, 1e-12);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(rho(i, i), 1.0);
    for (int j = 0; j < 3; ++j) EXPECT_EQ(rho(i, j), rho(j, i));
  }
  std::vector<double> sa, sd;
  for (const auto& r : recs) {
    sa.push_back(r.s_a);
    sd.push_back(r.s_d);
  }
  EXPECT_NEAR(rho(0, 2), oracle::spearman(sa, sd), 1e-12);

  for (auto& r : recs) r.s_d = 0.5;
  EXPECT_TRUE(std::isnan(score_correlations(recs)(0, 2)));
  recs.resize(2);
  EXPECT_TRUE(throws_code([&] { (void)score_correlations(recs); }, Errc::InsufficientData));
}

TEST(Records, CsvRoundTrip) {
  std::vector<ScoreRecord> recs(2);
  recs[0] = {"D12", "daily", 0.1, 0.45, -0.03, 0.2, {0.0, 0.1, 0.2}, {1.0 / 3.0, 0.25, 0.5}};
  recs[1] = {"W3", "weekly", 0.2, 0.15, 0.07, 0.1, {0.0, 0.1, 0.2}, {0.3, 0.1, 0.2}};
  const auto path = std::filesystem::temp_directory_path() / "xirpaug_scores_test.csv";
  write_score_records(path, recs);
  const auto back = read_score_records(path);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].dataset_id, recs[i].dataset_id);
    EXPECT_EQ(back[i].frequency, recs[i].frequency);
    EXPECT_EQ(back[i].s_p, recs[i].s_p);
    EXPECT_EQ(back[i].s_d, recs[i].s_d);
    EXPECT_EQ(back[i].s_a, recs[i].s_a);
    EXPECT_EQ(back[i].alpha_star, recs[i].alpha_star);
    EXPECT_EQ(back[i].alphas, recs[i].alphas);
    EXPECT_EQ(back[i].rmse_curve, recs[i].rmse_curve);
  }
  EXPECT_EQ(back[0].optimal_level(), 0.0);
  EXPECT_EQ(back[1].optimal_level(), 0.1);
  std::filesystem::remove(path);
  EXPECT_TRUE(throws_code([&] { (void)read_score_records(path); }, Errc::FileNotFound));
}
