#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xirpaug/app/config.hpp"
#include "xirpaug/eval.hpp"
#include "xirpaug/series.hpp"
#include "xirpaug/shapley.hpp"
#include "xirpaug/wgan.hpp"
#include "xirpaug/xirp.hpp"

namespace xirpaug::app {

/// Seeds of one dataset, all derived from (master seed, dataset id, stage).
struct DatasetSeeds {
  std::uint64_t gan = 0;
  std::uint64_t sample = 0;
  std::uint64_t decode = 0;
  std::uint64_t eval = 0;
};
[[nodiscard]] DatasetSeeds dataset_seeds(std::uint64_t master, const std::string& dataset_id);

/// Config file (`key = value`) or a manifest written by `run_pipeline`.
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Reads every configured input, applies the dataset selection. Warnings
/// collect skipped rows and unmatched selections.
[[nodiscard]] std::vector<series::TimeSeries> load_datasets(const RunConfig& config,
                                                            std::vector<std::string>& warnings);

// ------------------------------------------------------------ stages

/// Windows of the series after scaling onto [0.1, 1].
[[nodiscard]] eval::Windows real_windows(const series::TimeSeries& data, const RunConfig& config);

/// XIRPs of every window on one shared scale.
[[nodiscard]] std::vector<xirp::ScaledXirp> encode_windows(const eval::Windows& windows);

[[nodiscard]] wgan::GanModel train_stage(std::span<const xirp::ScaledXirp> images, const RunConfig& config,
                                         const std::string& dataset_id);

struct SyntheticPool {
  eval::Windows windows;
  std::size_t clamp_count = 0;  ///< diagonal entries lifted to the decode floor
};
[[nodiscard]] SyntheticPool sample_stage(const wgan::GanModel& model, std::size_t count, const RunConfig& config,
                                         const std::string& dataset_id);

/// Pool size for `n_real` windows.
[[nodiscard]] std::size_t synthetic_pool_size(std::size_t n_real, const RunConfig& config);

struct Evaluation {
  eval::ScoreRecord record;
  eval::MixingReport mixing;
  eval::SweepResult sweep;
};
[[nodiscard]] Evaluation evaluate_stage(const eval::Windows& real, const eval::Windows& synthetic,
                                        const RunConfig& config, const series::TimeSeries& data);

struct DatasetOutcome {
  std::string id;
  series::Frequency frequency = series::Frequency::other;
  std::size_t length = 0;
  std::size_t windows = 0;
  DatasetSeeds seeds;
  bool ok = false;
  std::string stage;  ///< last stage entered
  std::string error_code;
  std::string error;
  double seconds = 0.0;
  std::size_t clamp_count = 0;
  double knn_mixing = 0.0;
  std::optional<eval::ScoreRecord> record;
};

/// Full per-dataset chain; failures are captured in the outcome, not thrown.
/// Artifacts go under `dir` when it is non-empty.
[[nodiscard]] DatasetOutcome run_dataset(const series::TimeSeries& data, const RunConfig& config,
                                         const std::filesystem::path& dir);

// ------------------------------------------------------------ attribution

struct TargetAttribution {
  std::string target;
  std::vector<std::string> features;
  std::optional<shapley::AttributionReport> report;
  double test_mse = 0.0;
  std::string skipped;  ///< reason when no report could be made
};

struct AttributionResult {
  std::vector<shapley::FeatureVector> features;      ///< datasets with defined statistics
  std::map<std::string, std::string> excluded;       ///< dataset id -> reason
  std::vector<TargetAttribution> targets;            ///< s_p, s_d, s_a, alpha_star
};

[[nodiscard]] double target_value(const eval::ScoreRecord& record, const std::string& target);

/// Builds features, fits one surrogate per target and attributes every
/// instance against the whole cohort as background.
[[nodiscard]] AttributionResult attribute(std::span<const eval::ScoreRecord> records,
                                          std::span<const series::TimeSeries> datasets, const RunConfig& config);

/// Writes features.csv and attribution_<t>.csv / importance_<t>.csv.
void write_attribution(const std::filesystem::path& dir, const AttributionResult& result);

// ------------------------------------------------------------ campaign

struct CampaignResult {
  std::vector<DatasetOutcome> outcomes;
  std::vector<eval::ScoreRecord> records;
  std::optional<AttributionResult> attribution;
  std::vector<std::string> warnings;
  int exit_code = 0;
};

/// Report stage: scores.csv, correlations.csv and plots from finished records.
void write_report(const std::filesystem::path& out, std::span<const eval::ScoreRecord> records,
                  const AttributionResult* attribution, std::vector<std::string>& warnings);

/// Ingest, per-dataset chain on a bounded worker pool, then aggregation,
/// attribution, plots and manifest.json under `config.output_dir`.
[[nodiscard]] CampaignResult run_pipeline(const RunConfig& config);

}  // namespace xirpaug::app
