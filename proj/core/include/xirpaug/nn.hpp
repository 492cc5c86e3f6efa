#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace xirpaug::nn {

using Matrix = Eigen::MatrixXd;  // features x batch
using Vector = Eigen::VectorXd;

enum class LayerKind { dense, lstm };
enum class Activation { identity, tanh, sigmoid, relu, leaky_relu };

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t width = 1;
  Activation activation = Activation::identity;  ///< ignored by lstm layers
};

/// Layer stack: any number of LSTM layers followed by any number of dense
/// layers. The dense part reads the last LSTM hidden state.
struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<LayerSpec> layers;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t output_dim() const;
  [[nodiscard]] bool is_recurrent() const;
  /// Text form of the architecture (seed excluded); hashed into saved models.
  [[nodiscard]] std::string describe() const;
  [[nodiscard]] std::uint64_t digest() const;
};

void validate(const NetworkSpec& spec);
[[nodiscard]] std::size_t parameter_count(const NetworkSpec& spec);

[[nodiscard]] NetworkSpec lstm_stack(std::size_t input_dim, std::size_t layers, std::size_t width,
                                     std::size_t output_dim, std::uint64_t seed);
[[nodiscard]] NetworkSpec mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                              Activation hidden_activation, std::size_t output_dim,
                              Activation output_activation, std::uint64_t seed);

/// One (input_dim x batch) matrix per time step. Dense-only networks take one step.
using SequenceBatch = std::vector<Matrix>;

/// Activations cached by a forward pass, consumed by `Network::backward`.
struct Tape {
  struct LstmStep {
    Matrix gates;   // 4H x B, post-nonlinearity, order i, f, g, o
    Matrix cell;    // H x B
    Matrix cell_tanh;
    Matrix hidden;  // H x B
  };
  struct LstmLayer {
    std::vector<LstmStep> steps;
  };
  struct DenseLayer {
    Matrix input;  // in x B
    Matrix pre;    // out x B
    Matrix out;    // out x B
  };
  SequenceBatch input;
  std::vector<LstmLayer> lstm;
  std::vector<DenseLayer> dense;
};

class Network {
 public:
  /// Validates `spec` and initializes from `spec.seed`: weights uniform in
  /// +-sqrt(6 / (fan_in + fan_out)), biases zero, LSTM forget-gate bias one.
  explicit Network(NetworkSpec spec);
  Network(NetworkSpec spec, Vector params);

  [[nodiscard]] const NetworkSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const Vector& params() const noexcept { return params_; }
  [[nodiscard]] Vector& params() noexcept { return params_; }
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(params_.size()); }

  [[nodiscard]] Matrix forward(const SequenceBatch& input) const;
  [[nodiscard]] Matrix forward(const Matrix& input) const;
  Matrix forward(const SequenceBatch& input, Tape& tape) const;

  /// Adds d(loss)/d(params) to `grad` given d(loss)/d(output); returns
  /// d(loss)/d(input) for every input step.
  SequenceBatch backward(const Tape& tape, const Matrix& output_grad, Vector& grad) const;

 private:
  struct Offsets {
    Eigen::Index w = 0, u = 0, b = 0;
    std::size_t in = 0, out = 0;
  };
  void layout();

  NetworkSpec spec_;
  Vector params_;
  std::vector<Offsets> offsets_;
  std::size_t lstm_count_ = 0;
};

enum class Loss {
  mse,          ///< mean squared error
  mae_smooth,   ///< sqrt(d^2 + delta^2) - delta, delta = 1e-3
  bce_logits,   ///< binary cross entropy on logits, targets in {0, 1}
  critic_score, ///< mean(target * output); targets are +-1 weights
};

struct LossValue {
  double value = 0.0;
  Matrix grad;  ///< d(value)/d(output)
};

[[nodiscard]] LossValue evaluate_loss(const Matrix& output, const Matrix& target, Loss loss);

struct LossAndGradient {
  double loss = 0.0;
  Vector grad;
};

/// Mean batch loss and its exact gradient with respect to the parameters.
[[nodiscard]] LossAndGradient gradient(const Network& net, const SequenceBatch& input,
                                       const Matrix& target, Loss loss);

/// For a dense network with scalar output D: penalty = mean_b (||dD/dx_b|| - 1)^2.
/// When `param_grad` is set, adds weight * d(penalty)/d(params) (second-order
/// backward through the input-gradient computation).
struct PenaltyValue {
  double penalty = 0.0;
  Vector norms;  ///< ||dD/dx_b|| per column
};
PenaltyValue input_gradient_penalty(const Network& net, const Matrix& points,
                                    Vector* param_grad = nullptr, double weight = 1.0);

/// dD/dx for a network with scalar output, one column per sample.
[[nodiscard]] Matrix input_gradient(const Network& net, const Matrix& points);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(std::size_t n, AdamConfig cfg)
      : first(Vector::Zero(static_cast<Eigen::Index>(n))),
        second(Vector::Zero(static_cast<Eigen::Index>(n))),
        config(cfg) {}

  Vector first;
  Vector second;
  std::uint64_t step = 0;
  AdamConfig config;
};

void adam_step(Vector& params, const Vector& grad, AdamState& state);

struct EarlyStopState {
  double best = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improvement = 0;
  std::size_t patience = 5;
  bool improved = false;
  bool stop = false;
};

/// Lower is better. `stop` is raised once `patience` consecutive updates fail
/// to improve on the best metric.
[[nodiscard]] EarlyStopState early_stop_update(EarlyStopState state, double metric);

/// Column-per-sample supervised data. Each input column holds `steps`
/// consecutive blocks of `input_dim` values.
struct Samples {
  std::size_t steps = 1;
  std::size_t input_dim = 1;
  Matrix inputs;
  Matrix targets;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
};

[[nodiscard]] SequenceBatch to_sequence(const Matrix& columns, std::size_t steps,
                                        std::size_t input_dim);
[[nodiscard]] Matrix predict(const Network& net, const Samples& samples);

struct FitOptions {
  Loss loss = Loss::mse;
  std::size_t max_epochs = 100;
  std::size_t batch_size = 32;
  std::size_t patience = 5;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct FitResult {
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  std::vector<double> metric_history;
};

/// Minibatch Adam with early stopping on `metric` (evaluated after every
/// epoch). The parameters of the best epoch are restored before returning.
FitResult fit(Network& net, const Samples& train,
              const std::function<double(const Network&)>& metric, const FitOptions& options);

/// Header: 8-byte magic, u32 version, u64 spec digest, u64 count, then
/// little-endian f64 parameters.
void save_params(const std::filesystem::path& path, const Network& net);
[[nodiscard]] Network load_params(const std::filesystem::path& path, const NetworkSpec& spec);

}  // namespace xirpaug::nn
