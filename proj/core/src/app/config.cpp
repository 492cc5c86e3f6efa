#include "xirpaug/app/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "xirpaug/error.hpp"
#include "xirpaug/format.hpp"

namespace xirpaug::app {
namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(Errc::InvalidConfig, "bad value '" + value + "' for " + key);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') bad_value(key, v);
    const auto r = std::stoull(v, &pos);
    if (pos != v.size()) bad_value(key, v);
    return static_cast<std::size_t>(r);
  } catch (const std::logic_error&) {
    bad_value(key, v);
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) bad_value(key, v);
    return r;
  } catch (const std::logic_error&) {
    bad_value(key, v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  bad_value(key, v);
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split(v, ',')) out.push_back(to_size(key, s));
  return out;
}

std::string sizes_text(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string decode_text(xirp::DecodeMethod m) {
  switch (m) {
    case xirp::DecodeMethod::diagonal: return "diagonal";
    case xirp::DecodeMethod::average: return "average";
    case xirp::DecodeMethod::random: return "random";
  }
  return "average";
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define XA_SIZE(KEY, MEMBER)                                                       \
  Field {                                                                          \
    KEY, [](const RunConfig& c) { return std::to_string(c.MEMBER); },              \
        [](RunConfig& c, const std::string& v) { c.MEMBER = to_size(KEY, v); }     \
  }
#define XA_DOUBLE(KEY, MEMBER)                                                     \
  Field {                                                                          \
    KEY, [](const RunConfig& c) { return format_short_exact(c.MEMBER); },          \
        [](RunConfig& c, const std::string& v) { c.MEMBER = to_double(KEY, v); }   \
  }

/// Shortest text that parses back to the same double.
std::string format_short_exact(double v) {
  for (int digits = 6; digits <= 17; ++digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return format_double(v);
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"run.inputs",
       [](const RunConfig& c) {
         std::vector<std::string> s;
         for (const auto& p : c.inputs) s.push_back(p.string());
         return join(s);
       },
       [](RunConfig& c, const std::string& v) {
         c.inputs.clear();
         for (const auto& s : split(v, ',')) c.inputs.emplace_back(s);
       }},
      {"run.frequency", [](const RunConfig& c) { return c.frequency; },
       [](RunConfig& c, const std::string& v) {
         if (v != "auto") (void)series::parse_frequency(v);
         c.frequency = v;
       }},
      {"run.datasets", [](const RunConfig& c) { return join(c.datasets); },
       [](RunConfig& c, const std::string& v) { c.datasets = split(v, ','); }},
      {"run.out", [](const RunConfig& c) { return c.output_dir.string(); },
       [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"run.seed", [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = to_size("run.seed", v); }},
      XA_SIZE("run.jobs", jobs),
      XA_SIZE("ingest.length.daily", lengths.daily),
      XA_SIZE("ingest.length.weekly", lengths.weekly),
      XA_SIZE("ingest.length.monthly", lengths.monthly),
      XA_SIZE("ingest.length.quarterly", lengths.quarterly),
      XA_SIZE("ingest.length.yearly", lengths.yearly),
      XA_SIZE("ingest.length.other", lengths.other),
      XA_SIZE("ingest.window_stride", window_stride),
      XA_SIZE("gan.latent_dim", gan.latent_dim),
      XA_DOUBLE("gan.lambda", gan.lambda),
      XA_SIZE("gan.critic_steps", gan.critic_steps),
      XA_SIZE("gan.batch_size", gan.batch_size),
      XA_SIZE("gan.generator_steps", gan.generator_steps),
      {"gan.generator_hidden", [](const RunConfig& c) { return sizes_text(c.gan.generator_hidden); },
       [](RunConfig& c, const std::string& v) { c.gan.generator_hidden = to_sizes("gan.generator_hidden", v); }},
      {"gan.critic_hidden", [](const RunConfig& c) { return sizes_text(c.gan.critic_hidden); },
       [](RunConfig& c, const std::string& v) { c.gan.critic_hidden = to_sizes("gan.critic_hidden", v); }},
      XA_DOUBLE("gan.generator_learning_rate", gan.generator_adam.learning_rate),
      XA_DOUBLE("gan.critic_learning_rate", gan.critic_adam.learning_rate),
      XA_DOUBLE("gan.beta1", gan.generator_adam.beta1),
      XA_DOUBLE("gan.beta2", gan.generator_adam.beta2),
      XA_DOUBLE("sample.multiplier", synthetic_multiplier),
      {"sample.decode", [](const RunConfig& c) { return decode_text(c.decode); },
       [](RunConfig& c, const std::string& v) {
         if (v == "diagonal") c.decode = xirp::DecodeMethod::diagonal;
         else if (v == "average") c.decode = xirp::DecodeMethod::average;
         else if (v == "random") c.decode = xirp::DecodeMethod::random;
         else bad_value("sample.decode", v);
       }},
      {"sample.save_models", [](const RunConfig& c) { return std::string(c.save_models ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.save_models = to_bool("sample.save_models", v); }},
      XA_SIZE("eval.window", eval.window),
      XA_SIZE("eval.repetitions", eval.repetitions),
      XA_SIZE("eval.patience", eval.patience),
      XA_DOUBLE("eval.train_fraction", eval.train_fraction),
      {"eval.alpha_grid", [](const RunConfig& c) { return format_double_list(c.eval.alpha_grid); },
       [](RunConfig& c, const std::string& v) { c.eval.alpha_grid = parse_double_list(v); }},
      XA_SIZE("eval.forecaster_layers", eval.forecaster_layers),
      XA_SIZE("eval.forecaster_width", eval.forecaster_width),
      XA_SIZE("eval.classifier_layers", eval.classifier_layers),
      XA_SIZE("eval.classifier_width", eval.classifier_width),
      XA_SIZE("eval.max_epochs", eval.max_epochs),
      XA_SIZE("eval.batch_size", eval.batch_size),
      XA_DOUBLE("eval.learning_rate", eval.learning_rate),
      XA_SIZE("eval.mixing_neighbors", eval.mixing_neighbors),
      XA_SIZE("eval.mixing_cap", eval.mixing_cap),
      {"shapley.hidden", [](const RunConfig& c) { return sizes_text(c.surrogate.hidden); },
       [](RunConfig& c, const std::string& v) { c.surrogate.hidden = to_sizes("shapley.hidden", v); }},
      XA_DOUBLE("shapley.train_fraction", surrogate.train_fraction),
      XA_SIZE("shapley.patience", surrogate.patience),
      XA_SIZE("shapley.max_epochs", surrogate.max_epochs),
      XA_SIZE("shapley.batch_size", surrogate.batch_size),
      XA_DOUBLE("shapley.learning_rate", surrogate.learning_rate),
      XA_SIZE("shapley.min_instances", surrogate.min_instances),
      {"shapley.prior_score_targets", [](const RunConfig& c) { return join(c.prior_score_targets); },
       [](RunConfig& c, const std::string& v) {
         c.prior_score_targets = split(v, ',');
         for (const auto& t : c.prior_score_targets) {
           if (t != "s_p" && t != "s_d" && t != "s_a" && t != "alpha_star") bad_value("shapley.prior_score_targets", t);
         }
       }},
  };
  return table;
}

#undef XA_SIZE
#undef XA_DOUBLE

}  // namespace

std::size_t TruncationLengths::for_frequency(series::Frequency f) const noexcept {
  switch (f) {
    case series::Frequency::daily: return daily;
    case series::Frequency::weekly: return weekly;
    case series::Frequency::monthly: return monthly;
    case series::Frequency::quarterly: return quarterly;
    case series::Frequency::yearly: return yearly;
    case series::Frequency::other: return other;
  }
  return other;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(to_double("list", s));
  return out;
}

std::string format_double_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_short_exact(values[i]);
  return out;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

void set_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, trim(value));
      return;
    }
  }
  throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
}

void apply_text(RunConfig& config, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    set_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c;
  apply_text(c, buf.str());
  return c;
}

std::string env_name(const std::string& key) {
  std::string out = "XIRPAUG_";
  for (char ch : key) out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

std::vector<std::string> apply_environment(RunConfig& config) {
  std::vector<std::string> applied;
  for (const auto& f : fields()) {
    if (const char* v = std::getenv(env_name(f.key).c_str())) {
      f.set(config, trim(v));
      applied.push_back(f.key);
    }
  }
  return applied;
}

void finalize(RunConfig& config) {
  config.gan.image_size = config.eval.window;
  config.gan.critic_adam.beta1 = config.gan.generator_adam.beta1;
  config.gan.critic_adam.beta2 = config.gan.generator_adam.beta2;
  if (config.jobs == 0) throw Error(Errc::InvalidConfig, "run.jobs must be positive");
  if (config.window_stride == 0) throw Error(Errc::InvalidConfig, "ingest.window_stride must be positive");
  if (!(config.synthetic_multiplier > 0.0)) throw Error(Errc::InvalidConfig, "sample.multiplier must be positive");
  if (config.frequency != "auto") (void)series::parse_frequency(config.frequency);
  const auto& l = config.lengths;
  if (l.daily == 0 || l.weekly == 0 || l.monthly == 0 || l.quarterly == 0 || l.yearly == 0) {
    throw Error(Errc::InvalidConfig, "ingest.length values must be positive (only ingest.length.other may be 0)");
  }
  const auto& s = config.surrogate;
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) {
    throw Error(Errc::InvalidConfig, "shapley.train_fraction must be in (0, 1)");
  }
  if (s.hidden.empty() || s.max_epochs == 0 || s.batch_size == 0 || s.min_instances == 0) {
    throw Error(Errc::InvalidConfig, "shapley.hidden, max_epochs, batch_size and min_instances must be positive");
  }
  wgan::validate(config.gan);
  eval::validate(config.eval);
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : to_key_values(config)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace xirpaug::app
