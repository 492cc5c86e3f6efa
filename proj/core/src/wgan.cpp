#include "xirpaug/wgan.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "xirpaug/error.hpp"
#include "xirpaug/random.hpp"

namespace xirpaug::wgan {
namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> split_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream is(text);
  std::size_t v = 0;
  while (is >> v) out.push_back(v);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix standard_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = normal(rng);
  }
  return z;
}

void require_same_shape(const Matrix& a, const Matrix& b, std::span<const double> eps) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(Errc::ShapeMismatch, "real and fake batches differ in shape");
  if (static_cast<Eigen::Index>(eps.size()) != a.cols()) throw Error(Errc::ShapeMismatch, "need one eps per sample pair");
}

}  // namespace

void validate(const GanConfig& c) {
  if (c.image_size < 2) throw Error(Errc::InvalidConfig, "image size must be at least 2");
  if (c.latent_dim < 1) throw Error(Errc::InvalidConfig, "latent_dim must be >= 1");
  if (!(c.lambda >= 0.0)) throw Error(Errc::InvalidConfig, "lambda must be >= 0");
  if (c.critic_steps < 1) throw Error(Errc::InvalidConfig, "critic_steps must be >= 1");
  if (c.batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
}

nn::NetworkSpec generator_spec(const GanConfig& c) {
  return nn::mlp(c.latent_dim, c.generator_hidden, nn::Activation::leaky_relu,
                 c.image_size * c.image_size, nn::Activation::tanh, derive_seed(c.seed, "", "generator"));
}

nn::NetworkSpec critic_spec(const GanConfig& c) {
  return nn::mlp(c.image_size * c.image_size, c.critic_hidden, nn::Activation::leaky_relu, 1,
                 nn::Activation::identity, derive_seed(c.seed, "", "critic"));
}

GanModel init_gan(const GanConfig& config) {
  validate(config);
  return GanModel{config, nn::Network(generator_spec(config)), nn::Network(critic_spec(config)), {}, {}};
}

Matrix flatten(std::span<const xirp::ScaledXirp> images) {
  if (images.empty()) return Matrix();
  const Eigen::Index s = images.front().matrix.rows();
  Matrix out(s * s, static_cast<Eigen::Index>(images.size()));
  for (std::size_t k = 0; k < images.size(); ++k) {
    const auto& m = images[k].matrix;
    if (m.rows() != s || m.cols() != s) throw Error(Errc::ShapeMismatch, "training images differ in size");
    out.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vector>(m.data(), s * s);
  }
  return out;
}

Matrix interpolate(const Matrix& real, const Matrix& fake, std::span<const double> eps) {
  require_same_shape(real, fake, eps);
  Matrix out(real.rows(), real.cols());
  for (Eigen::Index b = 0; b < real.cols(); ++b) {
    const double e = eps[static_cast<std::size_t>(b)];
    out.col(b) = e * real.col(b) + (1.0 - e) * fake.col(b);
  }
  return out;
}

double gradient_penalty(const nn::Network& critic, const Matrix& real, const Matrix& fake,
                        std::span<const double> eps, Vector* grad, double weight) {
  const Matrix mixed = interpolate(real, fake, eps);
  return nn::input_gradient_penalty(critic, mixed, grad, weight).penalty;
}

double critic_loss(const nn::Network& critic, const Matrix& real, const Matrix& fake, double lambda,
                   std::span<const double> eps, Vector* grad) {
  require_same_shape(real, fake, eps);
  if (real.cols() == 0) throw Error(Errc::EmptyInput, "empty batch");
  const double inv = 1.0 / static_cast<double>(real.cols());

  nn::Tape real_tape;
  nn::Tape fake_tape;
  const Matrix d_real = critic.forward(nn::SequenceBatch{real}, real_tape);
  const Matrix d_fake = critic.forward(nn::SequenceBatch{fake}, fake_tape);
  if (grad != nullptr) {
    critic.backward(fake_tape, Matrix::Constant(1, fake.cols(), inv), *grad);
    critic.backward(real_tape, Matrix::Constant(1, real.cols(), -inv), *grad);
  }
  const double penalty = lambda != 0.0 ? gradient_penalty(critic, real, fake, eps, grad, lambda) : 0.0;
  return d_fake.mean() - d_real.mean() + lambda * penalty;
}

double generator_loss(const nn::Network& critic, const Matrix& fake) {
  if (fake.cols() == 0) throw Error(Errc::EmptyInput, "empty batch");
  return -critic.forward(fake).mean();
}

nn::LossAndGradient generator_loss_gradient(const nn::Network& generator, const nn::Network& critic,
                                            const Matrix& z) {
  if (z.cols() == 0) throw Error(Errc::EmptyInput, "empty batch");
  nn::Tape gen_tape;
  nn::Tape critic_tape;
  const Matrix fake = generator.forward(nn::SequenceBatch{z}, gen_tape);
  const Matrix score = critic.forward(nn::SequenceBatch{fake}, critic_tape);

  Vector critic_scratch = Vector::Zero(static_cast<Eigen::Index>(critic.size()));
  const double inv = 1.0 / static_cast<double>(z.cols());
  const Matrix d_fake = critic.backward(critic_tape, Matrix::Constant(1, z.cols(), -inv), critic_scratch).front();

  nn::LossAndGradient out;
  out.loss = -score.mean();
  out.grad = Vector::Zero(static_cast<Eigen::Index>(generator.size()));
  generator.backward(gen_tape, d_fake, out.grad);
  return out;
}

double minimax_value(std::span<const double> real_prob, std::span<const double> fake_prob) {
  if (real_prob.empty() || fake_prob.empty()) throw Error(Errc::EmptyInput, "empty batch");
  double a = 0.0;
  for (double p : real_prob) a += std::log(p);
  double b = 0.0;
  for (double p : fake_prob) b += std::log1p(-p);
  return a / static_cast<double>(real_prob.size()) + b / static_cast<double>(fake_prob.size());
}

double wasserstein_value(const nn::Network& critic, const Matrix& real, const Matrix& fake) {
  return critic.forward(real).mean() - critic.forward(fake).mean();
}

void train(GanModel& model, const Matrix& images) {
  const auto& c = model.config;
  validate(c);
  const auto pixels = static_cast<Eigen::Index>(c.image_size * c.image_size);
  if (images.rows() != pixels) throw Error(Errc::ShapeMismatch, "training images do not match image_size");
  if (static_cast<std::size_t>(images.cols()) < 2 * c.batch_size) {
    throw Error(Errc::InsufficientData, "need at least 2 * batch_size training images");
  }

  Rng rng(derive_seed(c.seed, "", "train"));
  std::uniform_int_distribution<Eigen::Index> pick(0, images.cols() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  nn::AdamState gen_adam(model.generator.size(), c.generator_adam);
  nn::AdamState critic_adam(model.critic.size(), c.critic_adam);

  const std::size_t first_step = model.history.empty() ? 1 : model.history.back().step + 1;
  std::vector<Eigen::Index> idx(c.batch_size);
  std::vector<double> eps(c.batch_size);

  for (std::size_t step = 0; step < c.generator_steps; ++step) {
    HistoryRow row;
    row.step = first_step + step;
    for (std::size_t k = 0; k < c.critic_steps; ++k) {
      for (auto& i : idx) i = pick(rng);
      const Matrix real = images(Eigen::all, idx);
      const Matrix fake = model.generator.forward(standard_normal(c.latent_dim, c.batch_size, rng));
      for (auto& e : eps) e = unit(rng);

      Vector grad = Vector::Zero(static_cast<Eigen::Index>(model.critic.size()));
      nn::Tape real_tape;
      nn::Tape fake_tape;
      const Matrix d_real = model.critic.forward(nn::SequenceBatch{real}, real_tape);
      const Matrix d_fake = model.critic.forward(nn::SequenceBatch{fake}, fake_tape);
      const double inv = 1.0 / static_cast<double>(c.batch_size);
      model.critic.backward(fake_tape, Matrix::Constant(1, fake.cols(), inv), grad);
      model.critic.backward(real_tape, Matrix::Constant(1, real.cols(), -inv), grad);
      const double penalty = gradient_penalty(model.critic, real, fake, eps, &grad, c.lambda);

      row.penalty = penalty;
      row.wasserstein_gap = d_real.mean() - d_fake.mean();
      row.critic_loss = -row.wasserstein_gap + c.lambda * penalty;
      if (!std::isfinite(row.critic_loss) || !grad.allFinite()) {
        model.history.push_back(row);
        throw Error(Errc::DivergenceDetected, "critic loss became non-finite at step " + std::to_string(row.step));
      }
      nn::adam_step(model.critic.params(), grad, critic_adam);
    }

    const auto lg = generator_loss_gradient(model.generator, model.critic,
                                            standard_normal(c.latent_dim, c.batch_size, rng));
    row.generator_loss = lg.loss;
    model.history.push_back(row);
    if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
      throw Error(Errc::DivergenceDetected, "generator loss became non-finite at step " + std::to_string(row.step));
    }
    nn::adam_step(model.generator.params(), lg.grad, gen_adam);
  }
}

GanModel train_wgan(std::span<const xirp::ScaledXirp> images, const GanConfig& config) {
  if (images.empty()) throw Error(Errc::InsufficientData, "no training images");
  for (const auto& im : images) {
    if (static_cast<std::size_t>(im.matrix.rows()) != config.image_size) {
      throw Error(Errc::ShapeMismatch, "training image size differs from config.image_size");
    }
  }
  GanModel model = init_gan(config);
  model.scaling = images.front().params;
  train(model, flatten(images));
  return model;
}

std::vector<xirp::ScaledXirp> sample_xirps(const GanModel& model, std::size_t n, std::uint64_t seed) {
  std::vector<xirp::ScaledXirp> out;
  if (n == 0) return out;
  const auto s = static_cast<Eigen::Index>(model.config.image_size);
  Rng rng(seed);
  const Matrix images = model.generator.forward(standard_normal(model.config.latent_dim, n, rng));
  out.reserve(n);
  for (Eigen::Index k = 0; k < images.cols(); ++k) {
    const Vector col = images.col(k);
    out.push_back(xirp::ScaledXirp{Eigen::Map<const xirp::Grid>(col.data(), s, s), model.scaling});
  }
  return out;
}

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> history) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string());
  out << "step,critic_loss,gen_loss,penalty\n";
  for (const auto& r : history) {
    out << r.step << ',' << fmt(r.critic_loss) << ',' << fmt(r.generator_loss) << ',' << fmt(r.penalty) << '\n';
  }
}

void save_checkpoint(const std::filesystem::path& dir, const GanModel& model) {
  std::filesystem::create_directories(dir);
  nn::save_params(dir / "generator.bin", model.generator);
  nn::save_params(dir / "critic.bin", model.critic);
  std::ofstream out(dir / "gan.cfg");
  if (!out) throw Error(Errc::Io, "cannot write gan.cfg");
  const auto& c = model.config;
  out << "gan.image_size=" << c.image_size << '\n'
      << "gan.latent_dim=" << c.latent_dim << '\n'
      << "gan.lambda=" << fmt(c.lambda) << '\n'
      << "gan.critic_steps=" << c.critic_steps << '\n'
      << "gan.batch_size=" << c.batch_size << '\n'
      << "gan.generator_steps=" << c.generator_steps << '\n'
      << "gan.generator_hidden=" << join(c.generator_hidden) << '\n'
      << "gan.critic_hidden=" << join(c.critic_hidden) << '\n'
      << "gan.generator_lr=" << fmt(c.generator_adam.learning_rate) << '\n'
      << "gan.generator_beta1=" << fmt(c.generator_adam.beta1) << '\n'
      << "gan.generator_beta2=" << fmt(c.generator_adam.beta2) << '\n'
      << "gan.critic_lr=" << fmt(c.critic_adam.learning_rate) << '\n'
      << "gan.critic_beta1=" << fmt(c.critic_adam.beta1) << '\n'
      << "gan.critic_beta2=" << fmt(c.critic_adam.beta2) << '\n'
      << "gan.seed=" << c.seed << '\n'
      << "scaling.diagonal.min=" << fmt(model.scaling.diagonal.min) << '\n'
      << "scaling.diagonal.max=" << fmt(model.scaling.diagonal.max) << '\n'
      << "scaling.diagonal.degenerate=" << model.scaling.diagonal.degenerate << '\n'
      << "scaling.off_diagonal.min=" << fmt(model.scaling.off_diagonal.min) << '\n'
      << "scaling.off_diagonal.max=" << fmt(model.scaling.off_diagonal.max) << '\n'
      << "scaling.off_diagonal.degenerate=" << model.scaling.off_diagonal.degenerate << '\n'
      << "history.steps=" << model.history.size() << '\n';
  if (!out) throw Error(Errc::Io, "write failed for gan.cfg");
}

GanModel load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "gan.cfg");
  if (!in) throw Error(Errc::FileNotFound, (dir / "gan.cfg").string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(Errc::InvalidConfig, "gan.cfg lacks " + key);
    return it->second;
  };
  GanConfig c;
  c.image_size = std::stoull(get("gan.image_size"));
  c.latent_dim = std::stoull(get("gan.latent_dim"));
  c.lambda = std::stod(get("gan.lambda"));
  c.critic_steps = std::stoull(get("gan.critic_steps"));
  c.batch_size = std::stoull(get("gan.batch_size"));
  c.generator_steps = std::stoull(get("gan.generator_steps"));
  c.generator_hidden = split_sizes(get("gan.generator_hidden"));
  c.critic_hidden = split_sizes(get("gan.critic_hidden"));
  c.generator_adam.learning_rate = std::stod(get("gan.generator_lr"));
  c.generator_adam.beta1 = std::stod(get("gan.generator_beta1"));
  c.generator_adam.beta2 = std::stod(get("gan.generator_beta2"));
  c.critic_adam.learning_rate = std::stod(get("gan.critic_lr"));
  c.critic_adam.beta1 = std::stod(get("gan.critic_beta1"));
  c.critic_adam.beta2 = std::stod(get("gan.critic_beta2"));
  c.seed = std::stoull(get("gan.seed"));
  validate(c);

  GanModel model{c, nn::load_params(dir / "generator.bin", generator_spec(c)),
                 nn::load_params(dir / "critic.bin", critic_spec(c)), {}, {}};
  model.scaling.diagonal = {std::stod(get("scaling.diagonal.min")), std::stod(get("scaling.diagonal.max")),
                            get("scaling.diagonal.degenerate") == "1"};
  model.scaling.off_diagonal = {std::stod(get("scaling.off_diagonal.min")),
                                std::stod(get("scaling.off_diagonal.max")),
                                get("scaling.off_diagonal.degenerate") == "1"};
  return model;
}

}  // namespace xirpaug::wgan
