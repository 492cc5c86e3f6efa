#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace xirpaug::eval {

using Windows = std::vector<std::vector<double>>;

/// 0, 0.05, ..., 0.50
[[nodiscard]] std::vector<double> default_alpha_grid();

struct EvalConfig {
  std::size_t window = 28;        ///< D_seq
  std::size_t repetitions = 10;   ///< k
  std::size_t patience = 5;       ///< c
  double train_fraction = 0.8;
  std::vector<double> alpha_grid = default_alpha_grid();
  std::size_t forecaster_layers = 3;
  std::size_t forecaster_width = 7;
  std::size_t classifier_layers = 3;
  std::size_t classifier_width = 8;
  std::size_t max_epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t mixing_neighbors = 10;
  std::size_t mixing_cap = 500;
  std::uint64_t seed = 0;
};

void validate(const EvalConfig& cfg);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, first round(train_fraction * n) indices train. Both sides
/// keep at least one element when n >= 2.
[[nodiscard]] Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

/// Split used by repetition `rep` of the predictive score (and its real-data baseline).
[[nodiscard]] Split predictive_split(std::size_t n, const EvalConfig& cfg, std::size_t rep);

/// Split used by repetition `rep` of every alpha cell of the augmentation sweep.
[[nodiscard]] Split sweep_split(std::size_t n, const EvalConfig& cfg, std::size_t rep);

// ------------------------------------------------------------ mixing

struct MixingReport {
  std::vector<std::array<double, 2>> coords;
  std::vector<int> labels;  ///< 0 real, 1 synthetic
  std::size_t neighbors = 0;
  double knn_mixing = 0.0;  ///< mean opposite-label fraction among k nearest neighbours
};

/// Rank-2 principal-component projection of the pooled windows (each time
/// step is a feature) and the k-NN label mixing score in that plane.
[[nodiscard]] MixingReport embedding_mixing(const Windows& real, const Windows& synthetic,
                                            const EvalConfig& cfg);

void write_mixing_csv(const std::filesystem::path& path, const MixingReport& report);

// ------------------------------------------------------------ forecasting scores

struct ForecastRun {
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t epochs = 0;
};

/// One-step-ahead LSTM forecaster (first window-1 values -> last value)
/// trained on `train`, early-stopped on `test` MAE.
[[nodiscard]] ForecastRun train_forecaster(const Windows& train, const Windows& test,
                                           const EvalConfig& cfg, std::uint64_t seed);

/// s_p: mean real-test MAE of forecasters trained on synthetic windows only.
[[nodiscard]] double predictive_score(const Windows& real, const Windows& synthetic,
                                      const EvalConfig& cfg);
/// Same protocol as `predictive_score` but trained on the real train split.
[[nodiscard]] double baseline_predictive_score(const Windows& real, const EvalConfig& cfg);

/// s_d: held-out error rate (1 - accuracy) of a class-balanced real/synthetic
/// LSTM classifier, averaged over repetitions.
[[nodiscard]] double discriminative_score(const Windows& real, const Windows& synthetic,
                                          const EvalConfig& cfg);

struct CurvePoint {
  double alpha = 0.0;
  double rmse = 0.0;
  std::size_t synthetic_count = 0;   ///< synthetic windows in each training set
  std::size_t synthetic_in_test = 0; ///< label audit; always 0
};

/// Mean real-test RMSE per alpha. Alpha values above 0 are skipped when the
/// synthetic pool is empty; alpha = 0 never touches the pool.
[[nodiscard]] std::vector<CurvePoint> rmse_curve(const Windows& real, const Windows& synthetic,
                                                 const EvalConfig& cfg);

/// Real-only forecaster RMSE with the sweep's splits and seeds; equals the
/// alpha = 0 point of `rmse_curve` exactly.
[[nodiscard]] double baseline_rmse(const Windows& real, const EvalConfig& cfg);

struct SweepResult {
  std::vector<CurvePoint> curve;
  double s_a = 0.0;
  double alpha_star = 0.0;     ///< argmin over alpha > 0, ties to the smaller alpha
  double optimal_level = 0.0;  ///< alpha_star when s_a > 0, else 0
};

[[nodiscard]] SweepResult augmentation_sweep(const Windows& real, const Windows& synthetic,
                                             const EvalConfig& cfg);

/// Synthetic windows needed for fraction alpha: ceil(alpha / (1 - alpha) * n_real).
[[nodiscard]] std::size_t synthetic_count_for(double alpha, std::size_t n_real);

// ------------------------------------------------------------ records

struct ScoreRecord {
  std::string dataset_id;
  std::string frequency = "other";
  double s_p = 0.0;
  double s_d = 0.0;
  double s_a = 0.0;
  double alpha_star = 0.0;
  std::vector<double> alphas;
  std::vector<double> rmse_curve;

  /// alpha_star when augmentation helped, otherwise 0.
  [[nodiscard]] double optimal_level() const noexcept { return s_a > 0.0 ? alpha_star : 0.0; }
};

/// Spearman matrix over (s_a, s_p, s_d), in that order.
[[nodiscard]] Eigen::Matrix3d score_correlations(std::span<const ScoreRecord> records);

/// dataset_id,s_p,s_d,s_a,alpha_star,rmse_alpha_<a>...
void write_score_records(const std::filesystem::path& path, std::span<const ScoreRecord> records);
[[nodiscard]] std::vector<ScoreRecord> read_score_records(const std::filesystem::path& path);

void write_correlations_csv(const std::filesystem::path& path, const Eigen::Matrix3d& rho);

}  // namespace xirpaug::eval
