#include "xirpaug/shapley.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <fstream>
#include <numeric>

#include "xirpaug/error.hpp"
#include "xirpaug/format.hpp"
#include "xirpaug/random.hpp"

namespace xirpaug::shapley {
namespace {

nn::Samples to_samples(const RowMatrix& x, const VectorXd& y) {
  nn::Samples s;
  s.steps = 1;
  s.input_dim = static_cast<std::size_t>(x.cols());
  s.inputs = x.transpose();
  s.targets = y.transpose();
  return s;
}

RowMatrix rows(const RowMatrix& x, std::span<const std::size_t> idx) {
  RowMatrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

VectorXd entries(const VectorXd& v, std::span<const std::size_t> idx) {
  VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string());
  return out;
}

}  // namespace

std::vector<std::string> feature_names(bool with_prior_scores) {
  std::vector<std::string> names{"mean", "variance", "skewness", "kurtosis", "q_raw", "q_abs"};
  if (with_prior_scores) {
    names.emplace_back("s_p");
    names.emplace_back("s_d");
  }
  return names;
}

FeatureVector build_features(const series::TimeSeries& dataset, std::optional<PriorScores> prior) {
  const auto& x = dataset.values;
  if (x.size() < 3) throw Error(Errc::TooFewObservations, dataset.id + ": too few values");
  const bool positive = std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0; });
  std::vector<double> returns;
  if (positive) {
    returns = series::log_returns(x);
  } else {
    try {
      returns = series::log_returns(series::scale_positive(x).values);
    } catch (const Error& e) {
      if (e.code() == Errc::ConstantSeries) throw Error(Errc::DegenerateDataset, dataset.id + ": constant series");
      throw;
    }
  }
  const std::size_t lags = series::default_ljung_box_lags(returns.size());
  if (lags == 0) throw Error(Errc::TooFewObservations, dataset.id + ": too few returns for Ljung-Box");

  FeatureVector f;
  f.dataset_id = dataset.id;
  f.names = feature_names(prior.has_value());
  try {
    const auto m = series::moments(returns);
    m.require_higher();
    const auto q_raw = series::ljung_box(returns, lags, false);
    const auto q_abs = series::ljung_box(returns, lags, true);
    f.values = {m.mean, m.variance, *m.skewness, *m.kurtosis, q_raw.q, q_abs.q};
  } catch (const Error& e) {
    if (e.code() == Errc::ZeroVariance || e.code() == Errc::ConstantSeries) {
      throw Error(Errc::DegenerateDataset, dataset.id + ": " + e.what());
    }
    throw;
  }
  if (prior) {
    f.values.push_back(prior->s_p);
    f.values.push_back(prior->s_d);
  }
  for (double v : f.values) {
    if (!std::isfinite(v)) throw Error(Errc::DegenerateDataset, dataset.id + ": non-finite feature");
  }
  return f;
}

// ------------------------------------------------------------ standardizer

Standardizer Standardizer::fit(const RowMatrix& x) {
  if (x.rows() == 0) throw Error(Errc::EmptyInput, "no rows to standardize");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = x.rows() > 1 ? (x.col(j).array() - s.mean[j]).square().sum() / static_cast<double>(x.rows() - 1) : 0.0;
    const double sd = std::sqrt(var);
    s.scale[j] = sd > 0.0 ? sd : std::numeric_limits<double>::infinity();
  }
  return s;
}

RowMatrix Standardizer::apply(const RowMatrix& x) const {
  if (x.cols() != mean.size()) throw Error(Errc::ShapeMismatch, "feature count differs from the fitted standardizer");
  RowMatrix z = x.rowwise() - mean.transpose();
  return z.array().rowwise() / scale.transpose().array();
}

// ------------------------------------------------------------ surrogate

Surrogate::Surrogate(Standardizer features, double target_mean, double target_scale,
                     std::optional<nn::Network> net)
    : features_(std::move(features)), target_mean_(target_mean), target_scale_(target_scale), net_(std::move(net)) {}

VectorXd Surrogate::predict(const RowMatrix& x) const {
  if (!net_) {
    if (x.cols() != features_.mean.size()) throw Error(Errc::ShapeMismatch, "feature count differs from the surrogate");
    return VectorXd::Constant(x.rows(), target_mean_);
  }
  const nn::Matrix z = features_.apply(x).transpose();
  const nn::Matrix out = net_->forward(z);
  return (out.row(0).transpose().array() * target_scale_ + target_mean_).matrix();
}

double Surrogate::predict(std::span<const double> x) const {
  RowMatrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = x[j];
  return predict(row)[0];
}

Surrogate fit_surrogate(const RowMatrix& features, const VectorXd& target, const SurrogateSpec& spec) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (static_cast<std::size_t>(target.size()) != n) throw Error(Errc::LengthMismatch, "features and target row counts differ");
  if (n < spec.min_instances || n < 2) {
    throw Error(Errc::InsufficientData, "surrogate needs at least " + std::to_string(std::max<std::size_t>(spec.min_instances, 2)) +
                                            " instances, got " + std::to_string(n));
  }
  if (!features.allFinite() || !target.allFinite()) throw Error(Errc::DomainError, "surrogate inputs contain NaN or infinity");
  if (features.cols() == 0) throw Error(Errc::InvalidSpec, "surrogate needs at least one feature");

  // Seeded split, same rounding rule as the evaluation harness.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, "", "surrogate-split"));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n))), 1, n - 1);
  const std::span<const std::size_t> train_idx(order.data(), n_train);
  const std::span<const std::size_t> test_idx(order.data() + n_train, n - n_train);

  const RowMatrix x_train = rows(features, train_idx);
  const VectorXd y_train = entries(target, train_idx);
  const RowMatrix x_test = rows(features, test_idx);
  const VectorXd y_test = entries(target, test_idx);

  Standardizer standardizer = Standardizer::fit(x_train);
  const double y_mean = y_train.mean();
  const double y_sd = std::sqrt((y_train.array() - y_mean).square().sum() / static_cast<double>(std::max<std::size_t>(n_train - 1, 1)));

  auto finish = [&](Surrogate s) {
    const VectorXd pred = s.predict(x_test);
    s.test_mse = (pred - y_test).squaredNorm() / static_cast<double>(y_test.size());
    const double ss_tot = (y_test.array() - y_test.mean()).square().sum();
    s.test_r2 = ss_tot > 0.0 ? 1.0 - s.test_mse * static_cast<double>(y_test.size()) / ss_tot : 0.0;
    return s;
  };

  if (!(y_sd > 0.0)) return finish(Surrogate(std::move(standardizer), y_mean, 1.0, std::nullopt));

  const nn::Samples train = to_samples(standardizer.apply(x_train), ((y_train.array() - y_mean) / y_sd).matrix());
  const nn::Samples test = to_samples(standardizer.apply(x_test), ((y_test.array() - y_mean) / y_sd).matrix());

  nn::Network net(nn::mlp(static_cast<std::size_t>(features.cols()), spec.hidden, spec.activation, 1,
                          nn::Activation::identity, derive_seed(spec.seed, "", "surrogate-init")));
  nn::FitOptions opt;
  opt.loss = nn::Loss::mse;
  opt.max_epochs = spec.max_epochs;
  opt.batch_size = spec.batch_size;
  opt.patience = spec.patience;
  opt.adam.learning_rate = spec.learning_rate;
  opt.seed = derive_seed(spec.seed, "", "surrogate-fit");
  auto test_mse = [&](const nn::Network& m) { return (nn::predict(m, test) - test.targets).squaredNorm() / static_cast<double>(test.size()); };
  nn::fit(net, train, test_mse, opt);
  return finish(Surrogate(std::move(standardizer), y_mean, y_sd, std::move(net)));
}

// ------------------------------------------------------------ exact Shapley

VectorXd shapley_exact(const Model& model, std::span<const double> instance, const RowMatrix& background) {
  const std::size_t m = instance.size();
  if (m > kMaxExactFeatures) {
    throw Error(Errc::TooManyFeatures, std::to_string(m) + " features exceed the exact limit of " + std::to_string(kMaxExactFeatures));
  }
  if (background.rows() == 0) throw Error(Errc::EmptyInput, "background set is empty");
  if (static_cast<std::size_t>(background.cols()) != m) throw Error(Errc::ShapeMismatch, "background width differs from the instance");
  if (m == 0) return VectorXd();

  const std::size_t coalitions = std::size_t{1} << m;
  const Eigen::Index b = background.rows();

  // One batched model call for every (coalition, background row) pair.
  RowMatrix batch(static_cast<Eigen::Index>(coalitions) * b, static_cast<Eigen::Index>(m));
  for (std::size_t mask = 0; mask < coalitions; ++mask) {
    auto block = batch.middleRows(static_cast<Eigen::Index>(mask) * b, b);
    block = background;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask & (std::size_t{1} << j)) block.col(static_cast<Eigen::Index>(j)).setConstant(instance[j]);
    }
  }
  const VectorXd out = model(batch);
  if (out.size() != batch.rows()) throw Error(Errc::ShapeMismatch, "model returned the wrong number of predictions");

  std::vector<double> value(coalitions);
  for (std::size_t mask = 0; mask < coalitions; ++mask) {
    // Sorted summation keeps the value independent of background row order.
    std::vector<double> seg(out.data() + static_cast<std::ptrdiff_t>(mask) * b, out.data() + static_cast<std::ptrdiff_t>(mask + 1) * b);
    std::sort(seg.begin(), seg.end());
    value[mask] = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(b);
  }

  // weight[s] = s! (m - s - 1)! / m!
  std::vector<double> weight(m);
  for (std::size_t s = 0; s < m; ++s) {
    double w = 1.0 / static_cast<double>(m);
    // 1 / (m * C(m-1, s))
    for (std::size_t k = 1; k <= s; ++k) w *= static_cast<double>(k) / static_cast<double>(m - k);
    weight[s] = w;
  }

  VectorXd phi = VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double acc = 0.0;
    for (std::size_t mask = 0; mask < coalitions; ++mask) {
      if (mask & bit) continue;
      acc += weight[static_cast<std::size_t>(std::popcount(mask))] * (value[mask | bit] - value[mask]);
    }
    phi[static_cast<Eigen::Index>(i)] = acc;
  }
  return phi;
}

// ------------------------------------------------------------ report

double AttributionReport::efficiency_gap() const {
  double gap = 0.0;
  for (Eigen::Index r = 0; r < phi.rows(); ++r) {
    gap = std::max(gap, std::abs(phi.row(r).sum() - (prediction[r] - baseline)));
  }
  return gap;
}

AttributionReport attribution_report(std::string target, const Surrogate& surrogate,
                                     std::vector<std::string> feature_names,
                                     std::vector<std::string> dataset_ids, const RowMatrix& instances,
                                     const RowMatrix& background) {
  const auto m = static_cast<std::size_t>(instances.cols());
  if (feature_names.size() != m) throw Error(Errc::ShapeMismatch, "feature name count differs from the instance width");
  if (dataset_ids.size() != static_cast<std::size_t>(instances.rows())) throw Error(Errc::ShapeMismatch, "dataset id count differs from the instance count");
  if (instances.rows() == 0) throw Error(Errc::EmptyInput, "no instances to attribute");

  AttributionReport rep;
  rep.target = std::move(target);
  rep.feature_names = std::move(feature_names);
  rep.dataset_ids = std::move(dataset_ids);
  rep.values = instances;
  rep.standardized = Standardizer::fit(background).apply(instances);
  rep.prediction = surrogate.predict(instances);
  {
    const VectorXd bg = surrogate.predict(background);
    std::vector<double> sorted(bg.data(), bg.data() + bg.size());
    std::sort(sorted.begin(), sorted.end());
    rep.baseline = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  }
  const Model model = [&surrogate](const RowMatrix& x) { return surrogate.predict(x); };
  rep.phi.resize(instances.rows(), static_cast<Eigen::Index>(m));
  for (Eigen::Index r = 0; r < instances.rows(); ++r) {
    const VectorXd row = instances.row(r).transpose();
    rep.phi.row(r) = shapley_exact(model, std::span<const double>(row.data(), m), background).transpose();
  }
  rep.mean_abs_phi = rep.phi.cwiseAbs().colwise().mean().transpose();
  rep.order.resize(m);
  std::iota(rep.order.begin(), rep.order.end(), std::size_t{0});
  std::stable_sort(rep.order.begin(), rep.order.end(), [&](std::size_t a, std::size_t b) {
    return rep.mean_abs_phi[static_cast<Eigen::Index>(a)] > rep.mean_abs_phi[static_cast<Eigen::Index>(b)];
  });
  return rep;
}

void write_attribution_csv(const std::filesystem::path& path, const AttributionReport& report) {
  auto out = open_out(path);
  std::vector<std::size_t> rank(report.order.size());
  for (std::size_t k = 0; k < report.order.size(); ++k) rank[report.order[k]] = k + 1;
  out << "dataset_id,feature,phi,feature_value,feature_rank,feature_z\n";
  for (std::size_t k = 0; k < report.order.size(); ++k) {
    const std::size_t j = report.order[k];
    for (Eigen::Index r = 0; r < report.phi.rows(); ++r) {
      const auto jj = static_cast<Eigen::Index>(j);
      out << report.dataset_ids[static_cast<std::size_t>(r)] << ',' << report.feature_names[j] << ','
          << format_double(report.phi(r, jj)) << ',' << format_double(report.values(r, jj)) << ',' << rank[j] << ','
          << format_double(report.standardized(r, jj)) << '\n';
    }
  }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

void write_importance_csv(const std::filesystem::path& path, const AttributionReport& report) {
  auto out = open_out(path);
  out << "# target=" << report.target << " baseline=" << format_double(report.baseline) << " features=";
  for (std::size_t j = 0; j < report.feature_names.size(); ++j) out << (j ? ";" : "") << report.feature_names[j];
  out << '\n' << "feature,mean_abs_phi,rank\n";
  for (std::size_t k = 0; k < report.order.size(); ++k) {
    const std::size_t j = report.order[k];
    out << report.feature_names[j] << ',' << format_double(report.mean_abs_phi[static_cast<Eigen::Index>(j)]) << ',' << k + 1 << '\n';
  }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

void write_features_csv(const std::filesystem::path& path, std::span<const FeatureVector> features) {
  auto out = open_out(path);
  out << "dataset_id";
  if (!features.empty()) {
    for (const auto& n : features.front().names) out << ',' << n;
  }
  out << '\n';
  for (const auto& f : features) {
    out << f.dataset_id;
    for (double v : f.values) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace xirpaug::shapley
