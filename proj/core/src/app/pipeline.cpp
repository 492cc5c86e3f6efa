#include "xirpaug/app/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "xirpaug/app/csv.hpp"
#include "xirpaug/app/ingest.hpp"
#include "xirpaug/app/plots.hpp"
#include "xirpaug/error.hpp"
#include "xirpaug/format.hpp"
#include "xirpaug/random.hpp"

namespace xirpaug::app {
namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kTargets{"s_p", "s_d", "s_a", "alpha_star"};

std::string safe_name(const std::string& id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out.empty() ? "_" : out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string seed_text(std::uint64_t s) { return std::to_string(s); }

void write_curve_csv(const std::filesystem::path& path, const eval::SweepResult& sweep) {
  std::string out = "alpha,rmse,synthetic_count,synthetic_in_test\n";
  for (const auto& p : sweep.curve) {
    out += format_double(p.alpha) + ',' + format_double(p.rmse) + ',' + std::to_string(p.synthetic_count) + ',' +
           std::to_string(p.synthetic_in_test) + '\n';
  }
  write_atomic(path, out);
}

void write_history(const std::filesystem::path& path, const wgan::GanModel& model) {
  wgan::write_history_csv(path.string() + ".tmp", model.history);
  std::filesystem::rename(path.string() + ".tmp", path);
}

}  // namespace

DatasetSeeds dataset_seeds(std::uint64_t master, const std::string& dataset_id) {
  return {derive_seed(master, dataset_id, "gan"), derive_seed(master, dataset_id, "sample"),
          derive_seed(master, dataset_id, "decode"), derive_seed(master, dataset_id, "eval")};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (path.extension() != ".json") return load_config(path);
  json manifest;
  try {
    manifest = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
  if (!manifest.contains("config")) throw Error(Errc::InvalidConfig, path.string() + ": no config section");
  RunConfig c;
  for (const auto& [key, value] : manifest["config"].items()) set_value(c, key, value.get<std::string>());
  return c;
}

std::vector<series::TimeSeries> load_datasets(const RunConfig& config, std::vector<std::string>& warnings) {
  std::vector<series::TimeSeries> all;
  for (const auto& input : config.inputs) {
    auto r = ingest_m4_csv(input, config.frequency, config.lengths, config.eval.window + 1);
    for (auto& w : r.warnings) warnings.push_back(input.string() + ": " + w);
    for (auto& s : r.series) all.push_back(std::move(s));
  }
  if (config.datasets.empty()) return all;
  std::vector<series::TimeSeries> picked;
  for (const auto& id : config.datasets) {
    auto it = std::find_if(all.begin(), all.end(), [&](const series::TimeSeries& s) { return s.id == id; });
    if (it == all.end()) {
      warnings.push_back("dataset " + id + " not found in inputs");
      continue;
    }
    picked.push_back(*it);
  }
  return picked;
}

// ------------------------------------------------------------ stages

eval::Windows real_windows(const series::TimeSeries& data, const RunConfig& config) {
  const auto scaled = series::scale_positive(data.values);
  return series::windows(scaled.values, config.eval.window, config.window_stride);
}

std::vector<xirp::ScaledXirp> encode_windows(const eval::Windows& windows) {
  std::vector<xirp::Xirp> raw;
  raw.reserve(windows.size());
  for (const auto& w : windows) raw.push_back(xirp::encode_xirp(w));
  const auto scaling = xirp::fit_scaling(raw);
  std::vector<xirp::ScaledXirp> out;
  out.reserve(raw.size());
  for (const auto& x : raw) out.push_back(xirp::scale_xirp(x, scaling));
  return out;
}

wgan::GanModel train_stage(std::span<const xirp::ScaledXirp> images, const RunConfig& config,
                           const std::string& dataset_id) {
  wgan::GanConfig gc = config.gan;
  gc.image_size = config.eval.window;
  gc.seed = dataset_seeds(config.seed, dataset_id).gan;
  if (images.size() < 2 * gc.batch_size) {
    throw Error(Errc::InsufficientData, std::to_string(images.size()) + " windows, GAN needs at least " +
                                            std::to_string(2 * gc.batch_size));
  }
  return wgan::train_wgan(images, gc);
}

std::size_t synthetic_pool_size(std::size_t n_real, const RunConfig& config) {
  return static_cast<std::size_t>(std::ceil(config.synthetic_multiplier * static_cast<double>(n_real)));
}

SyntheticPool sample_stage(const wgan::GanModel& model, std::size_t count, const RunConfig& config,
                           const std::string& dataset_id) {
  const auto seeds = dataset_seeds(config.seed, dataset_id);
  const auto images = wgan::sample_xirps(model, count, seeds.sample);
  SyntheticPool pool;
  pool.windows.reserve(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    auto d = xirp::decode_sampled(xirp::unscale_xirp(images[k]), config.decode, child_seed(seeds.decode, k));
    pool.clamp_count += d.clamp_count;
    pool.windows.push_back(std::move(d.values));
  }
  return pool;
}

Evaluation evaluate_stage(const eval::Windows& real, const eval::Windows& synthetic, const RunConfig& config,
                          const series::TimeSeries& data) {
  eval::EvalConfig ec = config.eval;
  ec.seed = dataset_seeds(config.seed, data.id).eval;
  Evaluation ev;
  ev.mixing = eval::embedding_mixing(real, synthetic, ec);
  ev.record.dataset_id = data.id;
  ev.record.frequency = std::string(series::to_string(data.frequency));
  ev.record.s_p = eval::predictive_score(real, synthetic, ec);
  ev.record.s_d = eval::discriminative_score(real, synthetic, ec);
  ev.sweep = eval::augmentation_sweep(real, synthetic, ec);
  ev.record.s_a = ev.sweep.s_a;
  ev.record.alpha_star = ev.sweep.alpha_star;
  for (const auto& p : ev.sweep.curve) {
    ev.record.alphas.push_back(p.alpha);
    ev.record.rmse_curve.push_back(p.rmse);
  }
  return ev;
}

DatasetOutcome run_dataset(const series::TimeSeries& data, const RunConfig& config, const std::filesystem::path& dir) {
  DatasetOutcome o;
  o.id = data.id;
  o.frequency = data.frequency;
  o.length = data.values.size();
  o.seeds = dataset_seeds(config.seed, data.id);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    o.stage = "window";
    const auto real = real_windows(data, config);
    o.windows = real.size();

    o.stage = "encode";
    const auto images = encode_windows(real);

    o.stage = "train";
    const auto model = train_stage(images, config, data.id);
    if (!dir.empty()) {
      std::filesystem::create_directories(dir);
      write_history(dir / "gan_history.csv", model);
      if (config.save_models) wgan::save_checkpoint(dir / "checkpoint", model);
    }

    o.stage = "sample";
    const auto pool = sample_stage(model, synthetic_pool_size(real.size(), config), config, data.id);
    o.clamp_count = pool.clamp_count;
    if (!dir.empty()) write_windows_csv(dir / "synthetic_windows.csv", pool.windows);

    o.stage = "evaluate";
    auto ev = evaluate_stage(real, pool.windows, config, data);
    o.knn_mixing = ev.mixing.knn_mixing;
    if (!dir.empty()) {
      eval::write_mixing_csv(dir / "mixing.csv.tmp", ev.mixing);
      std::filesystem::rename(dir / "mixing.csv.tmp", dir / "mixing.csv");
      write_curve_csv(dir / "rmse_curve.csv", ev.sweep);
    }
    o.record = std::move(ev.record);
    o.stage = "done";
    o.ok = true;
  } catch (const Error& e) {
    o.error_code = std::string(to_string(e.code()));
    o.error = e.what();
  } catch (const std::exception& e) {
    o.error_code = "Exception";
    o.error = e.what();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

// ------------------------------------------------------------ attribution

double target_value(const eval::ScoreRecord& record, const std::string& target) {
  if (target == "s_p") return record.s_p;
  if (target == "s_d") return record.s_d;
  if (target == "s_a") return record.s_a;
  if (target == "alpha_star") return record.optimal_level();
  throw Error(Errc::InvalidConfig, "unknown attribution target " + target);
}

AttributionResult attribute(std::span<const eval::ScoreRecord> records, std::span<const series::TimeSeries> datasets,
                            const RunConfig& config) {
  AttributionResult result;
  std::vector<const eval::ScoreRecord*> kept;
  for (const auto& r : records) {
    auto it = std::find_if(datasets.begin(), datasets.end(), [&](const series::TimeSeries& s) { return s.id == r.dataset_id; });
    if (it == datasets.end()) {
      result.excluded[r.dataset_id] = "series not available";
      continue;
    }
    try {
      result.features.push_back(shapley::build_features(*it, shapley::PriorScores{r.s_p, r.s_d}));
      kept.push_back(&r);
    } catch (const Error& e) {
      result.excluded[r.dataset_id] = e.what();
      spdlog::warn("attribution excludes {}: {}", r.dataset_id, e.what());
    }
  }

  for (const auto& target : kTargets) {
    TargetAttribution ta;
    ta.target = target;
    const bool with_prior = std::find(config.prior_score_targets.begin(), config.prior_score_targets.end(), target) !=
                            config.prior_score_targets.end();
    ta.features = shapley::feature_names(with_prior);
    const auto m = static_cast<Eigen::Index>(ta.features.size());
    const auto n = static_cast<Eigen::Index>(kept.size());
    shapley::RowMatrix x(n, m);
    shapley::VectorXd y(n);
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& f = result.features[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < m; ++j) x(i, j) = f.values[static_cast<std::size_t>(j)];
      y[i] = target_value(*kept[static_cast<std::size_t>(i)], target);
      ids.push_back(f.dataset_id);
    }
    try {
      shapley::SurrogateSpec spec = config.surrogate;
      spec.seed = derive_seed(config.seed, "", "surrogate-" + target);
      const auto surrogate = shapley::fit_surrogate(x, y, spec);
      ta.test_mse = surrogate.test_mse;
      ta.report = shapley::attribution_report(target, surrogate, ta.features, ids, x, x);
    } catch (const Error& e) {
      ta.skipped = e.what();
      spdlog::warn("attribution for {} skipped: {}", target, e.what());
    }
    result.targets.push_back(std::move(ta));
  }
  return result;
}

void write_attribution(const std::filesystem::path& dir, const AttributionResult& result) {
  std::filesystem::create_directories(dir);
  const auto tmp = [](const std::filesystem::path& p) { return std::filesystem::path(p.string() + ".tmp"); };
  auto commit = [&](const std::filesystem::path& p) { std::filesystem::rename(tmp(p), p); };
  shapley::write_features_csv(tmp(dir / "features.csv"), result.features);
  commit(dir / "features.csv");
  for (const auto& t : result.targets) {
    if (!t.report) continue;
    const auto a = dir / ("attribution_" + t.target + ".csv");
    const auto i = dir / ("importance_" + t.target + ".csv");
    shapley::write_attribution_csv(tmp(a), *t.report);
    commit(a);
    shapley::write_importance_csv(tmp(i), *t.report);
    commit(i);
  }
}

// ------------------------------------------------------------ campaign

void write_report(const std::filesystem::path& out, std::span<const eval::ScoreRecord> records,
                  const AttributionResult* attribution, std::vector<std::string>& warnings) {
  std::filesystem::create_directories(out);
  eval::write_score_records(out / "scores.csv.tmp", records);
  std::filesystem::rename(out / "scores.csv.tmp", out / "scores.csv");
  if (records.size() >= 3) {
    eval::write_correlations_csv(out / "correlations.csv.tmp", eval::score_correlations(records));
    std::filesystem::rename(out / "correlations.csv.tmp", out / "correlations.csv");
  } else {
    warnings.push_back("fewer than 3 score records; no correlation matrix");
  }
  if (records.empty()) {
    warnings.push_back("no score records; plots skipped");
    return;
  }
  std::vector<shapley::AttributionReport> reports;
  if (attribution != nullptr) {
    for (const auto& t : attribution->targets) {
      if (t.report) reports.push_back(*t.report);
    }
  }
  (void)emit_plots(records, reports, out / "plots");
}

CampaignResult run_pipeline(const RunConfig& input_config) {
  RunConfig config = input_config;
  finalize(config);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  CampaignResult result;
  const auto& out = config.output_dir;
  std::filesystem::create_directories(out);

  const auto datasets = load_datasets(config, result.warnings);
  if (datasets.empty()) {
    result.warnings.push_back("no datasets to process");
    spdlog::warn("no datasets to process");
  }

  result.outcomes.resize(datasets.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < datasets.size(); i = next++) {
      const auto& d = datasets[i];
      {
        std::lock_guard lock(log_mutex);
        spdlog::info("dataset {} ({} values) started", d.id, d.values.size());
      }
      result.outcomes[i] = run_dataset(d, config, out / "datasets" / safe_name(d.id));
      std::lock_guard lock(log_mutex);
      const auto& o = result.outcomes[i];
      if (o.ok) {
        spdlog::info("dataset {} done in {:.1f}s", o.id, o.seconds);
      } else {
        spdlog::error("dataset {} quarantined at {}: {}", o.id, o.stage, o.error);
      }
    }
  };
  const std::size_t n_workers = std::min(config.jobs, std::max<std::size_t>(datasets.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  for (const auto& o : result.outcomes) {
    if (o.record) result.records.push_back(*o.record);
  }
  if (!result.records.empty()) {
    result.attribution = attribute(result.records, datasets, config);
    write_attribution(out / "attribution", *result.attribution);
  }
  write_report(out, result.records, result.attribution ? &*result.attribution : nullptr, result.warnings);

  const bool all_failed = !datasets.empty() && result.records.empty();
  result.exit_code = all_failed ? 1 : 0;

  json manifest;
  manifest["tool"] = "xirpaug";
  manifest["version"] = XIRPAUG_VERSION;
  manifest["master_seed"] = seed_text(config.seed);
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  manifest["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json cfg = json::object();
  for (const auto& [k, v] : to_key_values(config)) cfg[k] = v;
  manifest["config"] = cfg;
  json ds = json::array();
  for (const auto& o : result.outcomes) {
    json j;
    j["id"] = o.id;
    j["frequency"] = std::string(series::to_string(o.frequency));
    j["length"] = o.length;
    j["windows"] = o.windows;
    j["seeds"] = {{"gan", seed_text(o.seeds.gan)},
                  {"sample", seed_text(o.seeds.sample)},
                  {"decode", seed_text(o.seeds.decode)},
                  {"eval", seed_text(o.seeds.eval)}};
    j["status"] = o.ok ? "ok" : "quarantined";
    if (!o.ok) {
      j["failed_stage"] = o.stage;
      j["error_code"] = o.error_code;
      j["error"] = o.error;
    }
    j["clamped_diagonal_entries"] = o.clamp_count;
    j["knn_mixing"] = o.knn_mixing;
    j["seconds"] = o.seconds;
    ds.push_back(j);
  }
  manifest["datasets"] = ds;
  if (result.attribution) {
    json attr;
    attr["excluded"] = result.attribution->excluded;
    for (const auto& t : result.attribution->targets) {
      json tj;
      tj["features"] = t.features;
      if (t.report) {
        tj["baseline"] = t.report->baseline;
        tj["surrogate_test_mse"] = t.test_mse;
        tj["efficiency_gap"] = t.report->efficiency_gap();
      } else {
        tj["skipped"] = t.skipped;
      }
      attr[t.target] = tj;
    }
    manifest["attribution"] = attr;
  }
  manifest["warnings"] = result.warnings;
  manifest["exit_code"] = result.exit_code;
  write_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  write_atomic(out / "config.txt", to_text(config));
  for (const auto& w : result.warnings) spdlog::warn("{}", w);
  return result;
}

}  // namespace xirpaug::app
