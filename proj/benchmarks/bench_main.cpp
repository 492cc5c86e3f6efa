#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "xirpaug/eval.hpp"
#include "xirpaug/nn.hpp"
#include "xirpaug/random.hpp"
#include "xirpaug/shapley.hpp"
#include "xirpaug/wgan.hpp"
#include "xirpaug/xirp.hpp"

namespace {

using namespace xirpaug;

std::vector<double> positive_series(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

nn::Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

void BM_EncodeDecode(benchmark::State& state) {
  const auto s = positive_series(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    const auto x = xirp::encode_xirp(s);
    benchmark::DoNotOptimize(xirp::decode_average(x));
  }
}
BENCHMARK(BM_EncodeDecode)->Arg(28)->Arg(64);

wgan::GanConfig gan_config() {
  wgan::GanConfig c;
  c.image_size = 28;
  return c;
}

void BM_CriticForwardBackward(benchmark::State& state) {
  const nn::Network critic(wgan::critic_spec(gan_config()));
  const nn::Matrix x = uniform_matrix(28 * 28, 32, 2);
  nn::Vector grad = nn::Vector::Zero(static_cast<Eigen::Index>(critic.size()));
  for (auto _ : state) {
    nn::Tape tape;
    const nn::Matrix out = critic.forward(nn::SequenceBatch{x}, tape);
    critic.backward(tape, nn::Matrix::Constant(1, 32, 1.0 / 32), grad);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_CriticForwardBackward)->Unit(benchmark::kMillisecond);

void BM_GradientPenalty(benchmark::State& state) {
  const nn::Network critic(wgan::critic_spec(gan_config()));
  const nn::Matrix real = uniform_matrix(28 * 28, 32, 3);
  const nn::Matrix fake = uniform_matrix(28 * 28, 32, 4);
  const std::vector<double> eps(32, 0.3);
  nn::Vector grad = nn::Vector::Zero(static_cast<Eigen::Index>(critic.size()));
  for (auto _ : state) benchmark::DoNotOptimize(wgan::gradient_penalty(critic, real, fake, eps, &grad, 10.0));
}
BENCHMARK(BM_GradientPenalty)->Unit(benchmark::kMillisecond);

void BM_GanStep(benchmark::State& state) {
  auto cfg = gan_config();
  cfg.generator_steps = 1;
  const nn::Matrix images = uniform_matrix(28 * 28, 64, 5);
  auto model = wgan::init_gan(cfg);
  for (auto _ : state) wgan::train(model, images);
}
BENCHMARK(BM_GanStep)->Unit(benchmark::kMillisecond);


void BM_GeneratorGradient(benchmark::State& state) {
  const auto cfg = gan_config();
  const nn::Network gen(wgan::generator_spec(cfg));
  const nn::Network critic(wgan::critic_spec(cfg));
  const nn::Matrix z = uniform_matrix(64, 32, 10);
  for (auto _ : state) benchmark::DoNotOptimize(wgan::generator_loss_gradient(gen, critic, z).loss);
}
BENCHMARK(BM_GeneratorGradient)->Unit(benchmark::kMillisecond);

void BM_AdamStep(benchmark::State& state) {
  const nn::Network critic(wgan::critic_spec(gan_config()));
  nn::Vector p = critic.params();
  const nn::Vector g = nn::Vector::Constant(p.size(), 1e-3);
  nn::AdamState adam(static_cast<std::size_t>(p.size()), nn::AdamConfig{});
  for (auto _ : state) nn::adam_step(p, g, adam);
}
BENCHMARK(BM_AdamStep)->Unit(benchmark::kMillisecond);

void BM_LstmForecasterEpoch(benchmark::State& state) {
  eval::EvalConfig cfg;
  const nn::Network net(nn::lstm_stack(1, cfg.forecaster_layers, cfg.forecaster_width, 1, 6));
  nn::Samples s;
  s.steps = 27;
  s.input_dim = 1;
  s.inputs = uniform_matrix(27, 32, 7);
  s.targets = uniform_matrix(1, 32, 8);
  const auto seq = nn::to_sequence(s.inputs, 27, 1);
  for (auto _ : state) benchmark::DoNotOptimize(nn::gradient(net, seq, s.targets, nn::Loss::mse).loss);
}
BENCHMARK(BM_LstmForecasterEpoch)->Unit(benchmark::kMicrosecond);

void BM_ShapleyExact(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const shapley::RowMatrix background = uniform_matrix(100, m, 9);
  const std::vector<double> x(static_cast<std::size_t>(m), 0.5);
  const shapley::Model model = [](const shapley::RowMatrix& r) -> shapley::VectorXd {
    return (r.array().square().rowwise().sum() + r.col(0).array() * r.col(1).array()).matrix();
  };
  for (auto _ : state) benchmark::DoNotOptimize(shapley::shapley_exact(model, x, background));
}
BENCHMARK(BM_ShapleyExact)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
