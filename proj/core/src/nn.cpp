#include "xirpaug/nn.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "xirpaug/error.hpp"
#include "xirpaug/random.hpp"

namespace xirpaug::nn {
namespace {

constexpr double kLeakySlope = 0.2;
constexpr double kSmoothDelta = 1e-3;
constexpr std::array<char, 8> kMagic = {'X', 'I', 'R', 'P', 'N', 'N', 'P', '1'};
constexpr std::uint32_t kFormatVersion = 1;

Matrix activate(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::identity: return pre;
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::sigmoid: return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::leaky_relu: return (pre.array() > 0.0).select(pre, kLeakySlope * pre);
  }
  return pre;
}

// First derivative as a function of the pre-activation and the output.
Matrix derivative(Activation act, const Matrix& pre, const Matrix& out) {
  switch (act) {
    case Activation::identity: return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::tanh: return (1.0 - out.array().square()).matrix();
    case Activation::sigmoid: return (out.array() * (1.0 - out.array())).matrix();
    case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::leaky_relu:
      return (pre.array() > 0.0).select(Matrix::Ones(pre.rows(), pre.cols()),
                                        Matrix::Constant(pre.rows(), pre.cols(), kLeakySlope));
  }
  return Matrix::Ones(pre.rows(), pre.cols());
}

Matrix second_derivative(Activation act, const Matrix& out) {
  switch (act) {
    case Activation::tanh: {
      const auto y = out.array();
      return (-2.0 * y * (1.0 - y.square())).matrix();
    }
    case Activation::sigmoid: {
      const auto y = out.array();
      return (y * (1.0 - y) * (1.0 - 2.0 * y)).matrix();
    }
    default: return Matrix::Zero(out.rows(), out.cols());
  }
}

Matrix sigmoid(const Matrix& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
  }
  return "?";
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint64_t get_uint(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw Error(Errc::Io, "truncated model file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------- spec

std::size_t NetworkSpec::output_dim() const { return layers.empty() ? input_dim : layers.back().width; }

bool NetworkSpec::is_recurrent() const {
  return !layers.empty() && layers.front().kind == LayerKind::lstm;
}

std::string NetworkSpec::describe() const {
  std::ostringstream os;
  os << "in=" << input_dim;
  for (const auto& l : layers) {
    os << ';' << (l.kind == LayerKind::lstm ? "lstm" : "dense") << ':' << l.width;
    if (l.kind == LayerKind::dense) os << ':' << activation_name(l.activation);
  }
  return os.str();
}

std::uint64_t NetworkSpec::digest() const { return fnv1a(describe()); }

void validate(const NetworkSpec& spec) {
  if (spec.input_dim == 0) throw Error(Errc::InvalidSpec, "input dimension must be positive");
  if (spec.layers.empty()) throw Error(Errc::InvalidSpec, "network needs at least one layer");
  bool seen_dense = false;
  for (const auto& l : spec.layers) {
    if (l.width == 0) throw Error(Errc::InvalidSpec, "layer width must be positive");
    if (l.kind == LayerKind::dense) seen_dense = true;
    if (l.kind == LayerKind::lstm && seen_dense) {
      throw Error(Errc::InvalidSpec, "lstm layers must precede dense layers");
    }
  }
}

std::size_t parameter_count(const NetworkSpec& spec) {
  validate(spec);
  std::size_t in = spec.input_dim;
  std::size_t total = 0;
  for (const auto& l : spec.layers) {
    if (l.kind == LayerKind::lstm) {
      total += 4 * l.width * (in + l.width + 1);
    } else {
      total += l.width * (in + 1);
    }
    in = l.width;
  }
  return total;
}

NetworkSpec lstm_stack(std::size_t input_dim, std::size_t layers, std::size_t width,
                       std::size_t output_dim, std::uint64_t seed) {
  NetworkSpec spec{input_dim, {}, seed};
  for (std::size_t i = 0; i < layers; ++i) spec.layers.push_back({LayerKind::lstm, width});
  spec.layers.push_back({LayerKind::dense, output_dim, Activation::identity});
  return spec;
}

NetworkSpec mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                Activation hidden_activation, std::size_t output_dim, Activation output_activation,
                std::uint64_t seed) {
  NetworkSpec spec{input_dim, {}, seed};
  for (auto w : hidden) spec.layers.push_back({LayerKind::dense, w, hidden_activation});
  spec.layers.push_back({LayerKind::dense, output_dim, output_activation});
  return spec;
}

// ---------------------------------------------------------------- network

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  layout();
  params_ = Vector::Zero(static_cast<Eigen::Index>(parameter_count(spec_)));

  Rng rng(spec_.seed);
  auto fill = [&](Eigen::Index offset, Eigen::Index count, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index k = 0; k < count; ++k) params_[offset + k] = dist(rng);
  };
  for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
    const auto& o = offsets_[l];
    const auto in = static_cast<Eigen::Index>(o.in);
    const auto out = static_cast<Eigen::Index>(o.out);
    if (spec_.layers[l].kind == LayerKind::lstm) {
      fill(o.w, 4 * out * in, static_cast<double>(in), static_cast<double>(out));
      fill(o.u, 4 * out * out, static_cast<double>(out), static_cast<double>(out));
      params_.segment(o.b + out, out).setOnes();  // forget gate
    } else {
      fill(o.w, out * in, static_cast<double>(in), static_cast<double>(out));
    }
  }
}

Network::Network(NetworkSpec spec, Vector params) : spec_(std::move(spec)), params_(std::move(params)) {
  validate(spec_);
  layout();
  if (static_cast<std::size_t>(params_.size()) != parameter_count(spec_)) {
    throw Error(Errc::ShapeMismatch, "parameter vector does not match the network spec");
  }
}

void Network::layout() {
  offsets_.clear();
  lstm_count_ = 0;
  Eigen::Index cursor = 0;
  std::size_t in = spec_.input_dim;
  for (const auto& l : spec_.layers) {
    Offsets o;
    o.in = in;
    o.out = l.width;
    const auto ii = static_cast<Eigen::Index>(in);
    const auto h = static_cast<Eigen::Index>(l.width);
    if (l.kind == LayerKind::lstm) {
      ++lstm_count_;
      o.w = cursor;
      o.u = o.w + 4 * h * ii;
      o.b = o.u + 4 * h * h;
      cursor = o.b + 4 * h;
    } else {
      o.w = cursor;
      o.b = o.w + h * ii;
      cursor = o.b + h;
    }
    offsets_.push_back(o);
    in = l.width;
  }
}

Matrix Network::forward(const SequenceBatch& input) const {
  Tape tape;
  return forward(input, tape);
}

Matrix Network::forward(const Matrix& input) const { return forward(SequenceBatch{input}); }

Matrix Network::forward(const SequenceBatch& input, Tape& tape) const {
  if (input.empty()) throw Error(Errc::ShapeMismatch, "empty input sequence");
  const Eigen::Index batch = input.front().cols();
  for (const auto& step : input) {
    if (static_cast<std::size_t>(step.rows()) != spec_.input_dim || step.cols() != batch) {
      throw Error(Errc::ShapeMismatch, "input step has wrong shape");
    }
  }
  if (lstm_count_ == 0 && input.size() != 1) {
    throw Error(Errc::ShapeMismatch, "dense network takes a single input step");
  }

  tape.input = input;
  tape.lstm.assign(lstm_count_, {});
  tape.dense.clear();

  const SequenceBatch* seq = &input;
  SequenceBatch hidden_seq;
  const std::size_t steps = input.size();

  for (std::size_t l = 0; l < lstm_count_; ++l) {
    const auto& o = offsets_[l];
    const auto in = static_cast<Eigen::Index>(o.in);
    const auto h = static_cast<Eigen::Index>(o.out);
    const Eigen::Map<const Matrix> w(params_.data() + o.w, 4 * h, in);
    const Eigen::Map<const Matrix> u(params_.data() + o.u, 4 * h, h);
    const Eigen::Map<const Vector> b(params_.data() + o.b, 4 * h);

    Matrix hidden = Matrix::Zero(h, batch);
    Matrix cell = Matrix::Zero(h, batch);
    auto& layer = tape.lstm[l];
    layer.steps.resize(steps);
    SequenceBatch next(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      Matrix a = w * (*seq)[t];
      a.noalias() += u * hidden;
      a.colwise() += b;
      Matrix gates(4 * h, batch);
      gates.topRows(2 * h) = sigmoid(a.topRows(2 * h));
      gates.middleRows(2 * h, h) = a.middleRows(2 * h, h).array().tanh().matrix();
      gates.bottomRows(h) = sigmoid(a.bottomRows(h));

      cell = gates.middleRows(h, h).cwiseProduct(cell) +
             gates.topRows(h).cwiseProduct(gates.middleRows(2 * h, h));
      Matrix cell_tanh = cell.array().tanh().matrix();
      hidden = gates.bottomRows(h).cwiseProduct(cell_tanh);

      layer.steps[t] = Tape::LstmStep{std::move(gates), cell, std::move(cell_tanh), hidden};
      next[t] = hidden;
    }
    hidden_seq = std::move(next);
    seq = &hidden_seq;
  }

  Matrix x = lstm_count_ > 0 ? seq->back() : input.front();
  for (std::size_t l = lstm_count_; l < spec_.layers.size(); ++l) {
    const auto& o = offsets_[l];
    const auto in = static_cast<Eigen::Index>(o.in);
    const auto out = static_cast<Eigen::Index>(o.out);
    const Eigen::Map<const Matrix> w(params_.data() + o.w, out, in);
    const Eigen::Map<const Vector> b(params_.data() + o.b, out);
    Matrix pre = w * x;
    pre.colwise() += b;
    Matrix y = activate(spec_.layers[l].activation, pre);
    tape.dense.push_back(Tape::DenseLayer{std::move(x), std::move(pre), y});
    x = std::move(y);
  }
  return x;
}

SequenceBatch Network::backward(const Tape& tape, const Matrix& output_grad, Vector& grad) const {
  if (grad.size() == 0) grad = Vector::Zero(params_.size());
  if (grad.size() != params_.size()) throw Error(Errc::LengthMismatch, "gradient buffer has wrong length");
  if (static_cast<std::size_t>(output_grad.rows()) != spec_.output_dim()) {
    throw Error(Errc::ShapeMismatch, "output gradient has wrong shape");
  }

  Matrix d = output_grad;
  for (std::size_t k = tape.dense.size(); k-- > 0;) {
    const std::size_t l = lstm_count_ + k;
    const auto& o = offsets_[l];
    const auto in = static_cast<Eigen::Index>(o.in);
    const auto out = static_cast<Eigen::Index>(o.out);
    const auto& cache = tape.dense[k];
    const Matrix da = d.cwiseProduct(derivative(spec_.layers[l].activation, cache.pre, cache.out));
    Eigen::Map<Matrix> dw(grad.data() + o.w, out, in);
    dw.noalias() += da * cache.input.transpose();
    grad.segment(o.b, out) += da.rowwise().sum();
    const Eigen::Map<const Matrix> w(params_.data() + o.w, out, in);
    d = w.transpose() * da;
  }
  if (lstm_count_ == 0) return SequenceBatch{std::move(d)};

  const std::size_t steps = tape.input.size();
  const Eigen::Index batch = d.cols();
  SequenceBatch above(steps);
  {
    const auto h = static_cast<Eigen::Index>(offsets_[lstm_count_ - 1].out);
    for (auto& m : above) m = Matrix::Zero(h, batch);
    above.back() = d;
  }

  for (std::size_t l = lstm_count_; l-- > 0;) {
    const auto& o = offsets_[l];
    const auto in = static_cast<Eigen::Index>(o.in);
    const auto h = static_cast<Eigen::Index>(o.out);
    const Eigen::Map<const Matrix> w(params_.data() + o.w, 4 * h, in);
    const Eigen::Map<const Matrix> u(params_.data() + o.u, 4 * h, h);
    Eigen::Map<Matrix> dw(grad.data() + o.w, 4 * h, in);
    Eigen::Map<Matrix> du(grad.data() + o.u, 4 * h, h);
    auto db = grad.segment(o.b, 4 * h);
    const auto& layer = tape.lstm[l];

    Matrix dh_rec = Matrix::Zero(h, batch);
    Matrix dc_rec = Matrix::Zero(h, batch);
    SequenceBatch dx(steps);
    Matrix da(4 * h, batch);
    for (std::size_t t = steps; t-- > 0;) {
      const auto& s = layer.steps[t];
      const auto i = s.gates.topRows(h).array();
      const auto f = s.gates.middleRows(h, h).array();
      const auto g = s.gates.middleRows(2 * h, h).array();
      const auto og = s.gates.bottomRows(h).array();
      const auto ct = s.cell_tanh.array();

      const Matrix dh = above[t] + dh_rec;
      const Matrix dc = (dc_rec.array() + dh.array() * og * (1.0 - ct.square())).matrix();
      const Matrix c_prev = t > 0 ? layer.steps[t - 1].cell : Matrix::Zero(h, batch);

      da.topRows(h) = (dc.array() * g * i * (1.0 - i)).matrix();
      da.middleRows(h, h) = (dc.array() * c_prev.array() * f * (1.0 - f)).matrix();
      da.middleRows(2 * h, h) = (dc.array() * i * (1.0 - g.square())).matrix();
      da.bottomRows(h) = (dh.array() * ct * og * (1.0 - og)).matrix();
      dc_rec = (dc.array() * f).matrix();

      const Matrix& x_t = l == 0 ? tape.input[t] : tape.lstm[l - 1].steps[t].hidden;
      dw.noalias() += da * x_t.transpose();
      if (t > 0) du.noalias() += da * layer.steps[t - 1].hidden.transpose();
      db += da.rowwise().sum();
      dx[t] = w.transpose() * da;
      dh_rec = u.transpose() * da;
    }
    above = std::move(dx);
  }
  return above;
}

// ---------------------------------------------------------------- losses

LossValue evaluate_loss(const Matrix& output, const Matrix& target, Loss loss) {
  if (output.rows() != target.rows() || output.cols() != target.cols()) {
    throw Error(Errc::ShapeMismatch, "output and target shapes differ");
  }
  if (output.size() == 0) throw Error(Errc::EmptyInput, "empty batch");
  const double n = static_cast<double>(output.size());
  const auto y = output.array();
  const auto t = target.array();
  LossValue out;
  switch (loss) {
    case Loss::mse: {
      const auto d = y - t;
      out.value = d.square().sum() / n;
      out.grad = (2.0 * d / n).matrix();
      break;
    }
    case Loss::mae_smooth: {
      const auto d = y - t;
      const auto r = (d.square() + kSmoothDelta * kSmoothDelta).sqrt();
      out.value = (r - kSmoothDelta).sum() / n;
      out.grad = (d / r / n).matrix();
      break;
    }
    case Loss::bce_logits: {
      out.value = (y.max(0.0) - t * y + (-y.abs()).exp().log1p()).sum() / n;
      out.grad = ((1.0 / (1.0 + (-y).exp()) - t) / n).matrix();
      break;
    }
    case Loss::critic_score: {
      out.value = (t * y).sum() / n;
      out.grad = (t / n).matrix();
      break;
    }
  }
  return out;
}

LossAndGradient gradient(const Network& net, const SequenceBatch& input, const Matrix& target,
                         Loss loss) {
  if (input.empty() || input.front().cols() == 0) throw Error(Errc::EmptyInput, "empty batch");
  Tape tape;
  const Matrix y = net.forward(input, tape);
  auto lv = evaluate_loss(y, target, loss);
  LossAndGradient out;
  out.loss = lv.value;
  out.grad = Vector::Zero(static_cast<Eigen::Index>(net.size()));
  net.backward(tape, lv.grad, out.grad);
  return out;
}

Matrix input_gradient(const Network& net, const Matrix& points) {
  if (net.spec().output_dim() != 1) throw Error(Errc::ShapeMismatch, "input gradient needs a scalar output");
  Tape tape;
  net.forward(SequenceBatch{points}, tape);
  Vector scratch = Vector::Zero(static_cast<Eigen::Index>(net.size()));
  return net.backward(tape, Matrix::Ones(1, points.cols()), scratch).front();
}

PenaltyValue input_gradient_penalty(const Network& net, const Matrix& points, Vector* param_grad,
                                    double weight) {
  const auto& spec = net.spec();
  if (spec.is_recurrent()) throw Error(Errc::InvalidSpec, "gradient penalty needs a dense network");
  if (spec.output_dim() != 1) throw Error(Errc::ShapeMismatch, "gradient penalty needs a scalar output");

  Tape tape;
  net.forward(SequenceBatch{points}, tape);
  const std::size_t layers = tape.dense.size();
  const Eigen::Index batch = points.cols();
  const auto& p = net.params();

  // Layer k: a_k = W_k h_{k-1} + b_k. Offsets are recomputed locally so this
  // routine only relies on the public parameter layout.
  std::vector<Eigen::Index> w_off(layers), b_off(layers);
  std::vector<Eigen::Index> rows(layers), cols(layers);
  {
    Eigen::Index cursor = 0;
    std::size_t in = spec.input_dim;
    for (std::size_t k = 0; k < layers; ++k) {
      rows[k] = static_cast<Eigen::Index>(spec.layers[k].width);
      cols[k] = static_cast<Eigen::Index>(in);
      w_off[k] = cursor;
      b_off[k] = cursor + rows[k] * cols[k];
      cursor = b_off[k] + rows[k];
      in = spec.layers[k].width;
    }
  }
  auto weights = [&](std::size_t k) { return Eigen::Map<const Matrix>(p.data() + w_off[k], rows[k], cols[k]); };

  std::vector<Matrix> slope(layers);  // sigma'_k(a_k)
  for (std::size_t k = 0; k < layers; ++k) {
    slope[k] = derivative(spec.layers[k].activation, tape.dense[k].pre, tape.dense[k].out);
  }

  // Backward pass for g = dD/dx. v[k] = dD/da_k, u[k] = dD/d(input of layer k).
  std::vector<Matrix> v(layers), u(layers);
  v[layers - 1] = slope[layers - 1];
  for (std::size_t k = layers; k-- > 0;) {
    u[k] = weights(k).transpose() * v[k];
    if (k > 0) v[k - 1] = u[k].cwiseProduct(slope[k - 1]);
  }
  const Matrix& g = u[0];

  PenaltyValue out;
  out.norms = g.colwise().norm().transpose();
  out.penalty = (out.norms.array() - 1.0).square().mean();
  if (param_grad == nullptr) return out;

  if (param_grad->size() == 0) *param_grad = Vector::Zero(p.size());
  if (param_grad->size() != p.size()) throw Error(Errc::LengthMismatch, "gradient buffer has wrong length");

  // d(penalty)/dg
  Matrix u_bar(g.rows(), batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const double n = out.norms[b];
    const double scale = n > 0.0 ? weight * 2.0 * (n - 1.0) / (n * static_cast<double>(batch)) : 0.0;
    u_bar.col(b) = scale * g.col(b);
  }

  // Reverse through the input-gradient pass.
  std::vector<Matrix> a_bar(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    const Matrix v_bar = weights(k) * u_bar;
    Eigen::Map<Matrix>(param_grad->data() + w_off[k], rows[k], cols[k]).noalias() +=
        v[k] * u_bar.transpose();
    const Matrix curvature = second_derivative(spec.layers[k].activation, tape.dense[k].out);
    if (k + 1 < layers) {
      a_bar[k] = v_bar.cwiseProduct(u[k + 1]).cwiseProduct(curvature);
      u_bar = v_bar.cwiseProduct(slope[k]);
    } else {
      a_bar[k] = v_bar.cwiseProduct(curvature);
    }
  }

  // Reverse through the forward pass, seeded only by the curvature terms.
  Matrix h_bar = Matrix::Zero(rows[layers - 1], batch);
  for (std::size_t k = layers; k-- > 0;) {
    const Matrix total = a_bar[k] + h_bar.cwiseProduct(slope[k]);
    Eigen::Map<Matrix>(param_grad->data() + w_off[k], rows[k], cols[k]).noalias() +=
        total * tape.dense[k].input.transpose();
    param_grad->segment(b_off[k], rows[k]) += total.rowwise().sum();
    if (k > 0) h_bar = weights(k).transpose() * total;
  }
  return out;
}

// ---------------------------------------------------------------- optimizer

void adam_step(Vector& params, const Vector& grad, AdamState& state) {
  if (grad.size() != params.size() || state.first.size() != params.size() ||
      state.second.size() != params.size()) {
    throw Error(Errc::LengthMismatch, "adam vectors differ in length");
  }
  const auto& c = state.config;
  ++state.step;
  state.first = c.beta1 * state.first + (1.0 - c.beta1) * grad;
  state.second = c.beta2 * state.second + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  params.array() -= c.learning_rate * (state.first.array() / correction1) /
                    ((state.second.array() / correction2).sqrt() + c.epsilon);
}

EarlyStopState early_stop_update(EarlyStopState state, double metric) {
  state.improved = metric < state.best;
  if (state.improved) {
    state.best = metric;
    state.epochs_since_improvement = 0;
  } else {
    ++state.epochs_since_improvement;
  }
  state.stop = state.epochs_since_improvement >= state.patience;
  return state;
}

// ---------------------------------------------------------------- training

SequenceBatch to_sequence(const Matrix& columns, std::size_t steps, std::size_t input_dim) {
  if (static_cast<std::size_t>(columns.rows()) != steps * input_dim) {
    throw Error(Errc::ShapeMismatch, "sample columns do not match steps * input_dim");
  }
  SequenceBatch seq(steps);
  const auto d = static_cast<Eigen::Index>(input_dim);
  for (std::size_t t = 0; t < steps; ++t) {
    seq[t] = columns.middleRows(static_cast<Eigen::Index>(t) * d, d);
  }
  return seq;
}

Matrix predict(const Network& net, const Samples& samples) {
  return net.forward(to_sequence(samples.inputs, samples.steps, samples.input_dim));
}

FitResult fit(Network& net, const Samples& train,
              const std::function<double(const Network&)>& metric, const FitOptions& options) {
  const std::size_t n = train.size();
  if (n == 0) throw Error(Errc::InsufficientData, "no training samples");
  if (options.batch_size == 0) throw Error(Errc::InvalidConfig, "batch size must be positive");

  Rng rng(options.seed);
  AdamState adam(net.size(), options.adam);
  EarlyStopState stopper;
  stopper.patience = options.patience;
  Vector best = net.params();

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  FitResult result;
  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t stop = std::min(n, start + options.batch_size);
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Matrix xb = train.inputs(Eigen::all, idx);
      const Matrix tb = train.targets(Eigen::all, idx);
      const auto lg = gradient(net, to_sequence(xb, train.steps, train.input_dim), tb, options.loss);
      if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
        throw Error(Errc::DivergenceDetected, "non-finite training loss");
      }
      adam_step(net.params(), lg.grad, adam);
    }
    const double m = metric(net);
    result.metric_history.push_back(m);
    result.epochs = epoch;
    stopper = early_stop_update(stopper, m);
    if (stopper.improved) {
      best = net.params();
      result.best_epoch = epoch;
      result.best_metric = m;
    }
    if (stopper.stop) break;
  }
  net.params() = best;
  return result;
}

// ---------------------------------------------------------------- persistence

void save_params(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kFormatVersion);
  put_u64(out, net.spec().digest());
  put_u64(out, net.size());
  for (double v : net.params()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

Network load_params(const std::filesystem::path& path, const NetworkSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(Errc::Io, "not a model file: " + path.string());
  const auto version = get_uint(in, 4);
  if (version != kFormatVersion) throw Error(Errc::Io, "unsupported model version");
  const auto digest = get_uint(in, 8);
  if (digest != spec.digest()) throw Error(Errc::ShapeMismatch, "model file was saved for a different architecture");
  const auto count = get_uint(in, 8);
  if (count != parameter_count(spec)) throw Error(Errc::ShapeMismatch, "parameter count mismatch");
  Vector params(static_cast<Eigen::Index>(count));
  for (auto& v : params) v = std::bit_cast<double>(get_uint(in, 8));
  return Network(spec, std::move(params));
}

}  // namespace xirpaug::nn
