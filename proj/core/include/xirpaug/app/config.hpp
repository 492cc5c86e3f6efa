#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "xirpaug/eval.hpp"
#include "xirpaug/series.hpp"
#include "xirpaug/shapley.hpp"
#include "xirpaug/wgan.hpp"
#include "xirpaug/xirp.hpp"

namespace xirpaug::app {

/// Per-frequency number of most recent observations kept at ingest.
struct TruncationLengths {
  std::size_t daily = 1000;
  std::size_t weekly = 500;
  std::size_t monthly = 250;
  std::size_t quarterly = 100;
  std::size_t yearly = 75;
  std::size_t other = 0;  ///< 0 keeps everything

  [[nodiscard]] std::size_t for_frequency(series::Frequency f) const noexcept;
};

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  std::string frequency = "auto";      ///< "auto" reads the M4 id prefix
  std::vector<std::string> datasets;   ///< explicit selection; empty keeps all
  std::filesystem::path output_dir = "xirpaug-out";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  TruncationLengths lengths;
  std::size_t window_stride = 1;

  wgan::GanConfig gan;                 ///< image size follows eval.window
  double synthetic_multiplier = 2.0;   ///< synthetic pool size / real window count
  xirp::DecodeMethod decode = xirp::DecodeMethod::average;
  bool save_models = true;

  eval::EvalConfig eval;

  shapley::SurrogateSpec surrogate;
  std::vector<std::string> prior_score_targets{"s_a", "alpha_star"};
};

/// Every key with its current value, in a fixed order.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& config);

/// Throws InvalidConfig for unknown keys or unparsable values.
void set_value(RunConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` text; `#` starts a comment.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);
void apply_text(RunConfig& config, const std::string& text);

/// `gan.lambda` is overridden by XIRPAUG_GAN_LAMBDA, and so on.
[[nodiscard]] std::string env_name(const std::string& key);
/// Returns the keys that were overridden.
std::vector<std::string> apply_environment(RunConfig& config);

/// Propagates shared settings (image size = window) and validates every section.
void finalize(RunConfig& config);

[[nodiscard]] std::string to_text(const RunConfig& config);

[[nodiscard]] std::vector<double> parse_double_list(const std::string& text);
[[nodiscard]] std::string format_double_list(const std::vector<double>& values);

}  // namespace xirpaug::app
