#include "xirpaug/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "xirpaug/error.hpp"
#include "xirpaug/format.hpp"
#include "xirpaug/nn.hpp"
#include "xirpaug/random.hpp"
#include "xirpaug/series.hpp"

namespace xirpaug::eval {
namespace {

std::uint64_t stage_seed(const EvalConfig& cfg, std::string_view stage) {
  return derive_seed(cfg.seed, "", stage);
}

void require_window_length(const Windows& w, std::size_t length, const char* what) {
  for (const auto& s : w) {
    if (s.size() != length) {
      throw Error(Errc::ShapeMismatch, std::string(what) + " window length differs from the configured window");
    }
  }
}

template <class T>
std::vector<T> pick(const std::vector<T>& items, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(items[i]);
  return out;
}

/// Draw `count` distinct items when possible; past the pool size the
/// remainder is drawn with replacement.
Windows subsample(const Windows& pool, std::size_t count, std::uint64_t seed) {
  Windows out;
  if (count == 0 || pool.empty()) return out;
  Rng rng(seed);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  out.reserve(count);
  for (std::size_t k = 0; k < std::min(count, pool.size()); ++k) out.push_back(pool[order[k]]);
  std::uniform_int_distribution<std::size_t> any(0, pool.size() - 1);
  while (out.size() < count) out.push_back(pool[any(rng)]);
  return out;
}

nn::Samples forecast_samples(const Windows& w) {
  const std::size_t len = w.front().size();
  nn::Samples s;
  s.steps = len - 1;
  s.input_dim = 1;
  s.inputs.resize(static_cast<Eigen::Index>(len - 1), static_cast<Eigen::Index>(w.size()));
  s.targets.resize(1, static_cast<Eigen::Index>(w.size()));
  for (std::size_t c = 0; c < w.size(); ++c) {
    for (std::size_t t = 0; t + 1 < len; ++t) s.inputs(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = w[c][t];
    s.targets(0, static_cast<Eigen::Index>(c)) = w[c][len - 1];
  }
  return s;
}

nn::Samples class_samples(const Windows& w, const std::vector<int>& labels) {
  const std::size_t len = w.front().size();
  nn::Samples s;
  s.steps = len;
  s.input_dim = 1;
  s.inputs.resize(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(w.size()));
  s.targets.resize(1, static_cast<Eigen::Index>(w.size()));
  for (std::size_t c = 0; c < w.size(); ++c) {
    for (std::size_t t = 0; t < len; ++t) s.inputs(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = w[c][t];
    s.targets(0, static_cast<Eigen::Index>(c)) = labels[c];
  }
  return s;
}

nn::FitOptions fit_options(const EvalConfig& cfg, nn::Loss loss, std::uint64_t seed) {
  nn::FitOptions o;
  o.loss = loss;
  o.max_epochs = cfg.max_epochs;
  o.batch_size = cfg.batch_size;
  o.patience = cfg.patience;
  o.adam.learning_rate = cfg.learning_rate;
  o.seed = seed;
  return o;
}

std::string alpha_column(double a) { return "rmse_alpha_" + format_short(a); }

}  // namespace

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.05 * i);
  return grid;
}

void validate(const EvalConfig& cfg) {
  if (cfg.window < 3) throw Error(Errc::InvalidConfig, "window must be at least 3");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) throw Error(Errc::InvalidConfig, "train fraction must be in (0, 1)");
  if (cfg.repetitions < 1) throw Error(Errc::InvalidConfig, "repetitions must be >= 1");
  if (cfg.alpha_grid.empty()) throw Error(Errc::InvalidConfig, "alpha grid is empty");
  for (double a : cfg.alpha_grid) {
    if (!(a >= 0.0 && a < 1.0)) throw Error(Errc::InvalidConfig, "alpha grid values must be in [0, 1)");
  }
  if (cfg.batch_size == 0 || cfg.max_epochs == 0) throw Error(Errc::InvalidConfig, "batch size and epochs must be positive");
}

Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

Split predictive_split(std::size_t n, const EvalConfig& cfg, std::size_t rep) {
  return split_indices(n, cfg.train_fraction, child_seed(stage_seed(cfg, "predictive-split"), rep));
}

Split sweep_split(std::size_t n, const EvalConfig& cfg, std::size_t rep) {
  return split_indices(n, cfg.train_fraction, child_seed(child_seed(stage_seed(cfg, "sweep"), rep), 0));
}

// ------------------------------------------------------------ mixing

MixingReport embedding_mixing(const Windows& real, const Windows& synthetic, const EvalConfig& cfg) {
  if (real.empty() || synthetic.empty()) throw Error(Errc::EmptyInput, "mixing needs both real and synthetic windows");
  const std::size_t len = real.front().size();
  require_window_length(real, len, "real");
  require_window_length(synthetic, len, "synthetic");

  const Windows r = real.size() > cfg.mixing_cap ? subsample(real, cfg.mixing_cap, stage_seed(cfg, "mixing-real")) : real;
  const Windows s = synthetic.size() > cfg.mixing_cap
                        ? subsample(synthetic, cfg.mixing_cap, stage_seed(cfg, "mixing-synthetic"))
                        : synthetic;
  const auto n = static_cast<Eigen::Index>(r.size() + s.size());
  const auto d = static_cast<Eigen::Index>(len);

  Eigen::MatrixXd x(n, d);
  MixingReport rep;
  rep.labels.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < r.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(r[i].data(), d);
    rep.labels.push_back(0);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    x.row(static_cast<Eigen::Index>(r.size() + i)) = Eigen::Map<const Eigen::RowVectorXd>(s[i].data(), d);
    rep.labels.push_back(1);
  }

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues ascend; take the two largest. Fix each axis sign so the
  // largest-magnitude loading is positive.
  Eigen::MatrixXd axes(d, 2);
  for (int k = 0; k < 2; ++k) {
    const Eigen::Index col = std::max<Eigen::Index>(d - 1 - k, 0);
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    axes.col(k) = (d >= 2 || k == 0) ? v : Eigen::VectorXd::Zero(d);
  }
  const Eigen::MatrixXd proj = centered * axes;
  rep.coords.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) rep.coords[static_cast<std::size_t>(i)] = {proj(i, 0), proj(i, 1)};

  const auto k = std::min<std::size_t>(cfg.mixing_neighbors, static_cast<std::size_t>(n - 1));
  rep.neighbors = k;
  if (k == 0) return rep;

  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n - 1));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = proj(i, 0) - proj(j, 0);
      const double dy = proj(i, 1) - proj(j, 1);
      dist[m++] = {dx * dx + dy * dy, j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::size_t opposite = 0;
    for (std::size_t q = 0; q < k; ++q) {
      opposite += rep.labels[static_cast<std::size_t>(dist[q].second)] != rep.labels[static_cast<std::size_t>(i)];
    }
    total += static_cast<double>(opposite) / static_cast<double>(k);
  }
  rep.knn_mixing = total / static_cast<double>(n);
  return rep;
}

void write_mixing_csv(const std::filesystem::path& path, const MixingReport& report) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string());
  out << "# knn_mixing=" << format_double(report.knn_mixing) << " k=" << report.neighbors << '\n';
  out << "x,y,label\n";
  for (std::size_t i = 0; i < report.coords.size(); ++i) {
    out << format_double(report.coords[i][0]) << ',' << format_double(report.coords[i][1]) << ','
        << (report.labels[i] == 0 ? "real" : "synthetic") << '\n';
  }
}

// ------------------------------------------------------------ forecasting

ForecastRun train_forecaster(const Windows& train, const Windows& test, const EvalConfig& cfg,
                             std::uint64_t seed) {
  if (train.empty() || test.empty()) throw Error(Errc::InsufficientData, "forecaster needs train and test windows");
  require_window_length(train, cfg.window, "training");
  require_window_length(test, cfg.window, "test");

  const nn::Samples tr = forecast_samples(train);
  const nn::Samples te = forecast_samples(test);
  nn::Network net(nn::lstm_stack(1, cfg.forecaster_layers, cfg.forecaster_width, 1, child_seed(seed, 0)));

  auto test_mae = [&](const nn::Network& m) {
    const nn::Matrix y = nn::predict(m, te);
    return (y - te.targets).cwiseAbs().mean();
  };
  const auto fr = nn::fit(net, tr, test_mae, fit_options(cfg, nn::Loss::mse, child_seed(seed, 1)));

  const nn::Matrix y = nn::predict(net, te);
  ForecastRun run;
  run.mae = (y - te.targets).cwiseAbs().mean();
  run.rmse = std::sqrt((y - te.targets).array().square().mean());
  run.epochs = fr.epochs;
  return run;
}

namespace {

double predictive_protocol(const Windows& real, const Windows* synthetic, const EvalConfig& cfg) {
  validate(cfg);
  require_window_length(real, cfg.window, "real");
  if (real.size() < 2) throw Error(Errc::InsufficientData, "need at least 2 real windows");
  if (synthetic != nullptr) {
    if (synthetic->empty()) throw Error(Errc::InsufficientData, "no synthetic windows");
    require_window_length(*synthetic, cfg.window, "synthetic");
  }
  std::vector<double> maes;
  for (std::size_t r = 0; r < cfg.repetitions; ++r) {
    const Split split = predictive_split(real.size(), cfg, r);
    const Windows test = pick(real, split.test);
    const Windows train = synthetic != nullptr ? *synthetic : pick(real, split.train);
    maes.push_back(train_forecaster(train, test, cfg, child_seed(stage_seed(cfg, "predictive-fit"), r)).mae);
  }
  std::sort(maes.begin(), maes.end());
  return std::accumulate(maes.begin(), maes.end(), 0.0) / static_cast<double>(maes.size());
}

}  // namespace

double predictive_score(const Windows& real, const Windows& synthetic, const EvalConfig& cfg) {
  return predictive_protocol(real, &synthetic, cfg);
}

double baseline_predictive_score(const Windows& real, const EvalConfig& cfg) {
  return predictive_protocol(real, nullptr, cfg);
}

double discriminative_score(const Windows& real, const Windows& synthetic, const EvalConfig& cfg) {
  validate(cfg);
  if (real.empty() || synthetic.empty()) throw Error(Errc::InsufficientData, "both classes need windows");
  require_window_length(real, cfg.window, "real");
  require_window_length(synthetic, cfg.window, "synthetic");
  const std::size_t per_class = std::min(real.size(), synthetic.size());
  if (per_class < 2) throw Error(Errc::InsufficientData, "need at least 2 windows per class");

  std::vector<double> errors;
  for (std::size_t r = 0; r < cfg.repetitions; ++r) {
    const std::uint64_t rep_seed = child_seed(stage_seed(cfg, "discriminative"), r);
    Windows pooled = subsample(real, per_class, child_seed(rep_seed, 0));
    const Windows fake = subsample(synthetic, per_class, child_seed(rep_seed, 1));
    std::vector<int> labels(pooled.size(), 0);
    pooled.insert(pooled.end(), fake.begin(), fake.end());
    labels.resize(pooled.size(), 1);

    const Split split = split_indices(pooled.size(), cfg.train_fraction, child_seed(rep_seed, 2));
    const nn::Samples tr = class_samples(pick(pooled, split.train), pick(labels, split.train));
    const nn::Samples te = class_samples(pick(pooled, split.test), pick(labels, split.test));

    nn::Network net(nn::lstm_stack(1, cfg.classifier_layers, cfg.classifier_width, 1, child_seed(rep_seed, 3)));
    auto test_bce = [&](const nn::Network& m) {
      return nn::evaluate_loss(nn::predict(m, te), te.targets, nn::Loss::bce_logits).value;
    };
    nn::fit(net, tr, test_bce, fit_options(cfg, nn::Loss::bce_logits, child_seed(rep_seed, 4)));

    const nn::Matrix logits = nn::predict(net, te);
    std::size_t correct = 0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const int predicted = logits(0, c) > 0.0 ? 1 : 0;
      correct += predicted == static_cast<int>(te.targets(0, c));
    }
    errors.push_back(1.0 - static_cast<double>(correct) / static_cast<double>(logits.cols()));
  }
  std::sort(errors.begin(), errors.end());
  return std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
}

// ------------------------------------------------------------ augmentation sweep

std::size_t synthetic_count_for(double alpha, std::size_t n_real) {
  if (alpha <= 0.0) return 0;
  // Guard the ceil against representation noise (0.2 / 0.8 * 100 = 25.000000000000004).
  const double exact = alpha / (1.0 - alpha) * static_cast<double>(n_real);
  return static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

namespace {

/// One alpha cell of the sweep: mean real-test RMSE over all repetitions.
CurvePoint sweep_cell(const Windows& real, const Windows& synthetic, const EvalConfig& cfg, double alpha,
                      std::size_t alpha_index) {
  struct Labeled {
    std::vector<double> values;
    bool synthetic = false;
  };
  std::vector<double> rmses;
  CurvePoint point;
  point.alpha = alpha;
  for (std::size_t r = 0; r < cfg.repetitions; ++r) {
    const std::uint64_t rep_seed = child_seed(stage_seed(cfg, "sweep"), r);
    const Split split = sweep_split(real.size(), cfg, r);

    std::vector<Labeled> train_set;
    for (auto i : split.train) train_set.push_back({real[i], false});
    std::vector<Labeled> test_set;
    for (auto i : split.test) test_set.push_back({real[i], false});

    const std::size_t extra = synthetic_count_for(alpha, split.train.size());
    if (extra > 0) {
      for (auto& w : subsample(synthetic, extra, child_seed(child_seed(rep_seed, 1), alpha_index))) {
        train_set.push_back({std::move(w), true});
      }
    }
    point.synthetic_count = extra;
    point.synthetic_in_test += static_cast<std::size_t>(
        std::count_if(test_set.begin(), test_set.end(), [](const Labeled& l) { return l.synthetic; }));

    Windows train;
    Windows test;
    for (auto& l : train_set) train.push_back(std::move(l.values));
    for (auto& l : test_set) test.push_back(std::move(l.values));
    rmses.push_back(train_forecaster(train, test, cfg, child_seed(rep_seed, 2)).rmse);
  }
  std::sort(rmses.begin(), rmses.end());
  point.rmse = std::accumulate(rmses.begin(), rmses.end(), 0.0) / static_cast<double>(rmses.size());
  return point;
}

void require_sweep_input(const Windows& real, const Windows& synthetic, const EvalConfig& cfg) {
  validate(cfg);
  require_window_length(real, cfg.window, "real");
  require_window_length(synthetic, cfg.window, "synthetic");
  if (real.size() < 2) throw Error(Errc::InsufficientData, "need at least 2 real windows");
}

}  // namespace

double baseline_rmse(const Windows& real, const EvalConfig& cfg) {
  require_sweep_input(real, {}, cfg);
  return sweep_cell(real, {}, cfg, 0.0, 0).rmse;
}

std::vector<CurvePoint> rmse_curve(const Windows& real, const Windows& synthetic, const EvalConfig& cfg) {
  require_sweep_input(real, synthetic, cfg);
  std::vector<CurvePoint> curve;
  for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
    const double alpha = cfg.alpha_grid[a];
    if (alpha > 0.0 && synthetic.empty()) continue;
    curve.push_back(sweep_cell(real, synthetic, cfg, alpha, a));
  }
  return curve;
}

SweepResult augmentation_sweep(const Windows& real, const Windows& synthetic, const EvalConfig& cfg) {
  if (std::find(cfg.alpha_grid.begin(), cfg.alpha_grid.end(), 0.0) == cfg.alpha_grid.end()) {
    throw Error(Errc::InvalidConfig, "alpha grid must contain 0 as the reference point");
  }
  SweepResult out;
  out.curve = rmse_curve(real, synthetic, cfg);

  double reference = 0.0;
  const CurvePoint* best = nullptr;
  for (const auto& p : out.curve) {
    if (p.alpha == 0.0) {
      reference = p.rmse;
      continue;
    }
    if (best == nullptr || p.rmse < best->rmse || (p.rmse == best->rmse && p.alpha < best->alpha)) best = &p;
  }
  if (best == nullptr) throw Error(Errc::InsufficientData, "no alpha > 0 could be evaluated; s_a undefined");
  if (!(reference > 0.0)) throw Error(Errc::DomainError, "reference RMSE is zero");
  out.alpha_star = best->alpha;
  out.s_a = 1.0 - best->rmse / reference;
  out.optimal_level = out.s_a > 0.0 ? out.alpha_star : 0.0;
  return out;
}

// ------------------------------------------------------------ records

Eigen::Matrix3d score_correlations(std::span<const ScoreRecord> records) {
  if (records.size() < 3) throw Error(Errc::InsufficientData, "need at least 3 score records");
  std::array<std::vector<double>, 3> cols;
  for (const auto& r : records) {
    cols[0].push_back(r.s_a);
    cols[1].push_back(r.s_p);
    cols[2].push_back(r.s_d);
  }
  Eigen::Matrix3d rho = Eigen::Matrix3d::Identity();
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      double v = 0.0;
      try {
        v = series::spearman(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      } catch (const Error& e) {
        if (e.code() != Errc::ZeroVariance) throw;
        v = std::nan("");  // a constant score column has no rank correlation
      }
      rho(i, j) = v;
      rho(j, i) = v;
    }
  }
  return rho;
}

void write_score_records(const std::filesystem::path& path, std::span<const ScoreRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string());
  out << "dataset_id,s_p,s_d,s_a,alpha_star";
  const std::vector<double> alphas = records.empty() ? std::vector<double>{} : records.front().alphas;
  for (double a : alphas) out << ',' << alpha_column(a);
  out << '\n';
  for (const auto& r : records) {
    if (r.alphas != alphas) throw Error(Errc::ShapeMismatch, "score records use different alpha grids");
    out << r.dataset_id << ',' << format_double(r.s_p) << ',' << format_double(r.s_d) << ','
        << format_double(r.s_a) << ',' << format_double(r.alpha_star);
    for (double v : r.rmse_curve) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::vector<ScoreRecord> read_score_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::MalformedRow, "empty score file");
  const auto header = split_line(line);
  if (header.size() < 5 || header[0] != "dataset_id") throw Error(Errc::MalformedRow, "bad score header");
  std::vector<double> alphas;
  const std::string prefix = "rmse_alpha_";
  for (std::size_t i = 5; i < header.size(); ++i) {
    if (header[i].rfind(prefix, 0) != 0) throw Error(Errc::MalformedRow, "bad column " + header[i]);
    alphas.push_back(std::stod(header[i].substr(prefix.size())));
  }
  std::vector<ScoreRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) throw Error(Errc::MalformedRow, "row " + std::to_string(row));
    ScoreRecord r;
    r.dataset_id = cells[0];
    try {
      r.frequency = std::string(series::to_string(series::parse_frequency(cells[0].substr(0, 1))));
    } catch (const Error&) {
      r.frequency = "other";
    }
    r.s_p = std::stod(cells[1]);
    r.s_d = std::stod(cells[2]);
    r.s_a = std::stod(cells[3]);
    r.alpha_star = std::stod(cells[4]);
    r.alphas = alphas;
    for (std::size_t i = 5; i < cells.size(); ++i) r.rmse_curve.push_back(std::stod(cells[i]));
    out.push_back(std::move(r));
  }
  return out;
}

void write_correlations_csv(const std::filesystem::path& path, const Eigen::Matrix3d& rho) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string());
  const char* names[] = {"s_a", "s_p", "s_d"};
  out << "score,s_a,s_p,s_d\n";
  for (int i = 0; i < 3; ++i) {
    out << names[i];
    for (int j = 0; j < 3; ++j) out << ',' << format_double(rho(i, j));
    out << '\n';
  }
}

}  // namespace xirpaug::eval
