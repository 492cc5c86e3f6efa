#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xirpaug/nn.hpp"
#include "xirpaug/xirp.hpp"

namespace xirpaug::wgan {

using nn::Matrix;
using nn::Vector;

/// Defaults follow the usual WGAN-GP recipe: lambda 10, five critic updates
/// per generator update, Adam(1e-4, 0, 0.9).
struct GanConfig {
  std::size_t image_size = 28;
  std::size_t latent_dim = 64;
  double lambda = 10.0;
  std::size_t critic_steps = 5;
  std::size_t batch_size = 32;
  std::size_t generator_steps = 1000;
  std::vector<std::size_t> generator_hidden{256, 512};
  std::vector<std::size_t> critic_hidden{512, 256};
  nn::AdamConfig generator_adam{1e-4, 0.0, 0.9, 1e-8};
  nn::AdamConfig critic_adam{1e-4, 0.0, 0.9, 1e-8};
  std::uint64_t seed = 0;
};

void validate(const GanConfig& config);

/// latent -> hidden (leaky relu) -> S*S with tanh output.
[[nodiscard]] nn::NetworkSpec generator_spec(const GanConfig& config);
/// S*S -> hidden (leaky relu) -> 1, no output activation, no normalization.
[[nodiscard]] nn::NetworkSpec critic_spec(const GanConfig& config);

struct HistoryRow {
  std::size_t step = 0;
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  double penalty = 0.0;
  double wasserstein_gap = 0.0;  ///< mean D(real) - mean D(fake) on the last critic batch
};

struct GanModel {
  GanConfig config;
  nn::Network generator;
  nn::Network critic;
  xirp::XirpScaling scaling;  ///< scale of the training images
  std::vector<HistoryRow> history;
};

[[nodiscard]] GanModel init_gan(const GanConfig& config);

/// Images as columns of row-major flattened pixels (S*S x N).
[[nodiscard]] Matrix flatten(std::span<const xirp::ScaledXirp> images);

/// eps_b * real_b + (1 - eps_b) * fake_b, one eps per column.
[[nodiscard]] Matrix interpolate(const Matrix& real, const Matrix& fake, std::span<const double> eps);

/// mean_b (||grad_x D(x_hat_b)||_2 - 1)^2 at the interpolates. Adds
/// weight * d/d(critic params) to `grad` when given.
double gradient_penalty(const nn::Network& critic, const Matrix& real, const Matrix& fake,
                        std::span<const double> eps, Vector* grad = nullptr, double weight = 1.0);

/// mean D(fake) - mean D(real) + lambda * penalty (the negated critic objective).
double critic_loss(const nn::Network& critic, const Matrix& real, const Matrix& fake,
                   double lambda, std::span<const double> eps, Vector* grad = nullptr);

/// -mean D(fake).
[[nodiscard]] double generator_loss(const nn::Network& critic, const Matrix& fake);

/// Generator loss at latent codes `z` and its gradient with respect to the
/// generator parameters (critic held fixed).
[[nodiscard]] nn::LossAndGradient generator_loss_gradient(const nn::Network& generator,
                                                          const nn::Network& critic,
                                                          const Matrix& z);

/// Original minimax value E[log D(x)] + E[log(1 - D(G(z)))] for discriminator
/// probabilities; evaluation only.
[[nodiscard]] double minimax_value(std::span<const double> real_prob, std::span<const double> fake_prob);
/// E[D(x)] - E[D(G(z))]; evaluation only.
[[nodiscard]] double wasserstein_value(const nn::Network& critic, const Matrix& real, const Matrix& fake);

/// Runs `generator_steps` rounds of `critic_steps` critic updates followed by
/// one generator update, appending to `model.history`. Throws
/// DivergenceDetected (history kept up to the failing step) on a non-finite loss.
void train(GanModel& model, const Matrix& images);

/// Needs at least 2 * batch_size images of identical size.
[[nodiscard]] GanModel train_wgan(std::span<const xirp::ScaledXirp> images, const GanConfig& config);

/// z ~ N(0, I), images = G(z); deterministic in `seed`.
[[nodiscard]] std::vector<xirp::ScaledXirp> sample_xirps(const GanModel& model, std::size_t n,
                                                         std::uint64_t seed);

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> history);

/// generator.bin and critic.bin in the nn model format plus a gan.cfg sidecar.
void save_checkpoint(const std::filesystem::path& dir, const GanModel& model);
[[nodiscard]] GanModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace xirpaug::wgan
