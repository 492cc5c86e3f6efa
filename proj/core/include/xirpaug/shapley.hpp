#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "xirpaug/nn.hpp"
#include "xirpaug/series.hpp"

namespace xirpaug::shapley {

using RowMatrix = Eigen::MatrixXd;  ///< one instance per row
using Eigen::VectorXd;

inline constexpr std::size_t kMaxExactFeatures = 12;

struct PriorScores {
  double s_p = 0.0;
  double s_d = 0.0;
};

/// mean, variance, skewness, kurtosis, q_raw, q_abs [, s_p, s_d]
struct FeatureVector {
  std::string dataset_id;
  std::vector<std::string> names;
  std::vector<double> values;
};

[[nodiscard]] std::vector<std::string> feature_names(bool with_prior_scores);

/// Moments and Ljung-Box statistics of the log returns. Raw values are used
/// when strictly positive, otherwise the series is first min-max scaled onto
/// [0.1, 1]. Throws DegenerateDataset when a statistic is undefined
/// (constant returns, constant absolute returns) and TooFewObservations when
/// there are too few returns for a single Ljung-Box lag.
[[nodiscard]] FeatureVector build_features(const series::TimeSeries& dataset,
                                           std::optional<PriorScores> prior = std::nullopt);

/// Column-wise z-score. Constant columns map to 0.
struct Standardizer {
  VectorXd mean;
  VectorXd scale;

  [[nodiscard]] static Standardizer fit(const RowMatrix& x);
  [[nodiscard]] RowMatrix apply(const RowMatrix& x) const;
};

struct SurrogateSpec {
  std::vector<std::size_t> hidden{10, 10};
  nn::Activation activation = nn::Activation::tanh;
  double train_fraction = 0.8;
  std::size_t patience = 5;
  std::size_t max_epochs = 500;
  std::size_t batch_size = 32;
  double learning_rate = 1e-2;
  std::size_t min_instances = 10;
  std::uint64_t seed = 0;
};

/// Regressor from raw features to a scalar target. Inputs and target are
/// standardized internally.
class Surrogate {
 public:
  Surrogate(Standardizer features, double target_mean, double target_scale,
            std::optional<nn::Network> net);

  [[nodiscard]] VectorXd predict(const RowMatrix& x) const;
  [[nodiscard]] double predict(std::span<const double> x) const;
  [[nodiscard]] std::size_t feature_count() const noexcept {
    return static_cast<std::size_t>(features_.mean.size());
  }
  /// True when the target had zero spread and the prediction is its mean.
  [[nodiscard]] bool constant() const noexcept { return !net_.has_value(); }
  [[nodiscard]] const std::optional<nn::Network>& network() const noexcept { return net_; }

  double test_mse = 0.0;  ///< on the held-out split, original target units
  double test_r2 = 0.0;

 private:
  Standardizer features_;
  double target_mean_;
  double target_scale_;
  std::optional<nn::Network> net_;
};

/// MSE training with a seeded train/test split and early stopping on test MSE.
/// Throws InsufficientData below `spec.min_instances` rows, DomainError on NaNs.
[[nodiscard]] Surrogate fit_surrogate(const RowMatrix& features, const VectorXd& target,
                                      const SurrogateSpec& spec);

/// Batched model: rows in, one prediction per row out.
using Model = std::function<VectorXd(const RowMatrix&)>;

/// Exact Shapley values by enumerating all 2^m coalitions. The value of a
/// coalition S is the model output averaged over background rows with the
/// features outside S taken from the background row.
[[nodiscard]] VectorXd shapley_exact(const Model& model, std::span<const double> instance,
                                     const RowMatrix& background);

struct AttributionReport {
  std::string target;
  std::vector<std::string> feature_names;
  std::vector<std::string> dataset_ids;
  RowMatrix values;        ///< raw feature values
  RowMatrix standardized;  ///< cohort z-scores
  RowMatrix phi;
  VectorXd prediction;     ///< f(x) per instance
  double baseline = 0.0;   ///< mean prediction over the background
  VectorXd mean_abs_phi;
  std::vector<std::size_t> order;  ///< feature indices by mean |phi| descending, ties by index

  /// max over instances of |sum(phi) - (f(x) - baseline)|
  [[nodiscard]] double efficiency_gap() const;
};

[[nodiscard]] AttributionReport attribution_report(std::string target, const Surrogate& surrogate,
                                                   std::vector<std::string> feature_names,
                                                   std::vector<std::string> dataset_ids,
                                                   const RowMatrix& instances,
                                                   const RowMatrix& background);

/// dataset_id,feature,phi,feature_value,feature_rank,feature_z
void write_attribution_csv(const std::filesystem::path& path, const AttributionReport& report);
/// feature,mean_abs_phi,rank
void write_importance_csv(const std::filesystem::path& path, const AttributionReport& report);
/// dataset_id,<feature names>
void write_features_csv(const std::filesystem::path& path, std::span<const FeatureVector> features);

}  // namespace xirpaug::shapley
