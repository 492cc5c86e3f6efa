// Command line front end: individual stages and the full pipeline.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "xirpaug/app/config.hpp"
#include "xirpaug/app/csv.hpp"
#include "xirpaug/app/ingest.hpp"
#include "xirpaug/app/pipeline.hpp"
#include "xirpaug/app/plots.hpp"
#include "xirpaug/error.hpp"
#include "xirpaug/eval.hpp"
#include "xirpaug/wgan.hpp"
#include "xirpaug/xirp.hpp"

namespace fs = std::filesystem;
using namespace xirpaug;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> frequency;
  std::optional<std::string> alpha_grid;
  std::optional<std::size_t> jobs;
  std::vector<std::string> inputs;
  std::vector<std::string> datasets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value config file or a pipeline manifest.json");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--frequency", c.frequency, "daily|weekly|monthly|quarterly|yearly|other|auto");
  cmd->add_option("--alpha-grid", c.alpha_grid, "Comma separated synthetic fractions, must include 0");
  cmd->add_option("--jobs", c.jobs, "Datasets processed in parallel");
  cmd->add_option("--input", c.inputs, "M4-style CSV input (repeatable)");
  cmd->add_option("--dataset", c.datasets, "Dataset id to process (repeatable)");
}

app::RunConfig resolve(const Common& c) {
  app::RunConfig cfg = c.config_path.empty() ? app::RunConfig{} : app::load_run_config(c.config_path);
  for (const auto& key : app::apply_environment(cfg)) spdlog::info("{} set from {}", key, app::env_name(key));
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.output_dir = *c.out;
  if (c.frequency) app::set_value(cfg, "run.frequency", *c.frequency);
  if (c.alpha_grid) app::set_value(cfg, "eval.alpha_grid", *c.alpha_grid);
  if (c.jobs) cfg.jobs = *c.jobs;
  if (!c.inputs.empty()) cfg.inputs.assign(c.inputs.begin(), c.inputs.end());
  if (!c.datasets.empty()) cfg.datasets = c.datasets;
  app::finalize(cfg);
  return cfg;
}

series::TimeSeries single_dataset(const app::RunConfig& cfg) {
  std::vector<std::string> warnings;
  auto data = app::load_datasets(cfg, warnings);
  for (const auto& w : warnings) spdlog::warn("{}", w);
  if (data.size() != 1) {
    throw Error(Errc::InvalidConfig, "select exactly one dataset with --dataset (found " + std::to_string(data.size()) + ")");
  }
  return data.front();
}

fs::path dataset_dir(const app::RunConfig& cfg, const std::string& id) { return cfg.output_dir / "datasets" / id; }

int cmd_ingest(const app::RunConfig& cfg) {
  std::vector<std::string> warnings;
  const auto data = app::load_datasets(cfg, warnings);
  for (const auto& w : warnings) spdlog::warn("{}", w);
  fs::create_directories(cfg.output_dir);
  app::write_m4_csv(cfg.output_dir / "ingested.csv", data);
  for (const auto& s : data) std::cout << s.id << ',' << series::to_string(s.frequency) << ',' << s.values.size() << '\n';
  return 0;
}

int cmd_encode(const app::RunConfig& cfg) {
  const auto data = single_dataset(cfg);
  const auto windows = app::real_windows(data, cfg);
  const auto images = app::encode_windows(windows);
  const fs::path dir = dataset_dir(cfg, data.id) / "xirps";
  fs::create_directories(dir);
  for (std::size_t k = 0; k < images.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "window_%05zu.xirp", k);
    xirp::write_xirp(dir / name, images[k].matrix, true);
  }
  app::write_windows_csv(dataset_dir(cfg, data.id) / "real_windows.csv", windows);
  std::cout << images.size() << " XIRPs written to " << dir.string() << '\n';
  return 0;
}

int cmd_train(const app::RunConfig& cfg) {
  const auto data = single_dataset(cfg);
  const auto images = app::encode_windows(app::real_windows(data, cfg));
  const auto model = app::train_stage(images, cfg, data.id);
  const fs::path dir = dataset_dir(cfg, data.id);
  fs::create_directories(dir);
  wgan::save_checkpoint(dir / "checkpoint", model);
  wgan::write_history_csv(dir / "gan_history.csv", model.history);
  std::cout << "checkpoint written to " << (dir / "checkpoint").string() << '\n';
  return 0;
}

int cmd_sample(const app::RunConfig& cfg, const std::string& checkpoint, std::size_t count, const std::string& id) {
  const auto model = wgan::load_checkpoint(checkpoint);
  const auto pool = app::sample_stage(model, count, cfg, id);
  const fs::path dir = dataset_dir(cfg, id);
  app::write_windows_csv(dir / "synthetic_windows.csv", pool.windows);
  const auto images = wgan::sample_xirps(model, count, app::dataset_seeds(cfg.seed, id).sample);
  fs::create_directories(dir / "samples");
  for (std::size_t k = 0; k < images.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05zu.xirp", k);
    xirp::write_xirp(dir / "samples" / name, images[k].matrix, true);
  }
  std::cout << count << " windows sampled (" << pool.clamp_count << " diagonal entries clamped)\n";
  return 0;
}

int cmd_evaluate(const app::RunConfig& cfg, const std::string& synthetic_path) {
  const auto data = single_dataset(cfg);
  const auto real = app::real_windows(data, cfg);
  const fs::path synth = synthetic_path.empty() ? dataset_dir(cfg, data.id) / "synthetic_windows.csv" : fs::path(synthetic_path);
  const auto synthetic = app::read_windows_csv(synth);
  const auto ev = app::evaluate_stage(real, synthetic, cfg, data);
  const fs::path dir = dataset_dir(cfg, data.id);
  fs::create_directories(dir);
  eval::write_mixing_csv(dir / "mixing.csv", ev.mixing);
  const std::vector<eval::ScoreRecord> one{ev.record};
  eval::write_score_records(dir / "scores.csv", one);
  std::printf("s_p=%.6g s_d=%.6g s_a=%.6g alpha*=%.6g knn_mixing=%.6g\n", ev.record.s_p, ev.record.s_d, ev.record.s_a,
              ev.record.alpha_star, ev.mixing.knn_mixing);
  return 0;
}

int cmd_shapley(const app::RunConfig& cfg, const std::string& scores) {
  const auto records = eval::read_score_records(scores);
  std::vector<std::string> warnings;
  const auto data = app::load_datasets(cfg, warnings);
  for (const auto& w : warnings) spdlog::warn("{}", w);
  const auto result = app::attribute(records, data, cfg);
  app::write_attribution(cfg.output_dir / "attribution", result);
  for (const auto& t : result.targets) {
    if (!t.report) {
      std::cout << t.target << ": skipped (" << t.skipped << ")\n";
      continue;
    }
    app::write_beeswarm(cfg.output_dir / "plots", "beeswarm_" + t.target, *t.report);
    std::cout << t.target << ": top feature " << t.report->feature_names[t.report->order.front()] << '\n';
  }
  return 0;
}

int cmd_report(const app::RunConfig& cfg, const std::string& scores) {
  const auto records = eval::read_score_records(scores);
  std::vector<std::string> warnings;
  app::write_report(cfg.output_dir, records, nullptr, warnings);
  for (const auto& w : warnings) spdlog::warn("{}", w);
  std::cout << records.size() << " records reported\n";
  return 0;
}

int cmd_pipeline(const app::RunConfig& cfg) {
  const auto result = app::run_pipeline(cfg);
  std::size_t ok = 0;
  for (const auto& o : result.outcomes) ok += o.ok;
  std::cout << ok << '/' << result.outcomes.size() << " datasets completed; outputs in " << cfg.output_dir.string() << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time series augmentation with XIRP images and WGAN-GP"};
  app.require_subcommand(1);
  Common common;

  auto* ingest = app.add_subcommand("ingest", "Parse and truncate M4-style CSV input");
  auto* encode = app.add_subcommand("encode", "Encode the windows of one dataset as XIRP files");
  auto* train = app.add_subcommand("train", "Train a WGAN-GP on one dataset");
  auto* sample = app.add_subcommand("sample", "Sample and decode synthetic windows from a checkpoint");
  auto* evaluate = app.add_subcommand("evaluate", "Score synthetic windows against one dataset");
  auto* shap = app.add_subcommand("shapley", "Surrogate models and exact Shapley attribution");
  auto* report = app.add_subcommand("report", "Correlation matrix and histograms from a score file");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage for every dataset");
  auto* print_config = app.add_subcommand("config", "Print the resolved configuration");
  for (auto* c : {ingest, encode, train, sample, evaluate, shap, report, pipeline, print_config}) add_common(c, common);

  std::string checkpoint;
  std::size_t count = 0;
  std::string sample_id;
  sample->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  sample->add_option("--count", count, "Number of windows")->required();
  sample->add_option("--id", sample_id, "Dataset id used for seeds and output location")->required();
  std::string synthetic;
  evaluate->add_option("--synthetic", synthetic, "Synthetic windows CSV (defaults to the sample output)");
  std::string scores;
  shap->add_option("--scores", scores, "Score records CSV")->required();
  report->add_option("--scores", scores, "Score records CSV")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    const auto cfg = resolve(common);
    if (*ingest) return cmd_ingest(cfg);
    if (*encode) return cmd_encode(cfg);
    if (*train) return cmd_train(cfg);
    if (*sample) return cmd_sample(cfg, checkpoint, count, sample_id);
    if (*evaluate) return cmd_evaluate(cfg, synthetic);
    if (*shap) return cmd_shapley(cfg, scores);
    if (*report) return cmd_report(cfg, scores);
    if (*pipeline) return cmd_pipeline(cfg);
    if (*print_config) {
      std::cout << app::to_text(cfg);
      return 0;
    }
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
