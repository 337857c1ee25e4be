// Copyright 2026 The synther Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "synther/nn.hpp"
#include "synther/transition.hpp"

namespace synther::edm {

using nn::Matrix;

struct EdmConfig {
  double sigma_min = 0.002;
  double sigma_max = 80.0;
  double s_churn = 80.0;
  double s_tmin = 0.05;
  double s_tmax = 50.0;
  double s_noise = 1.003;
  std::size_t steps = 128;
  double sigma_data = 1.0;
  double rho = 7.0;
  // Training noise: ln(sigma) ~ N(p_mean, p_std^2).
  double p_mean = -1.2;
  double p_std = 1.2;

  void validate() const;
  friend bool operator==(const EdmConfig&, const EdmConfig&) = default;
};

struct Preconditioning {
  double c_skip;
  double c_out;
  double c_in;
  double c_noise;
};

Preconditioning precondition(double sigma, double sigma_data);

// (sigma^2 + sigma_data^2) / (sigma sigma_data)^2
double loss_weight(double sigma, double sigma_data);

// [sigma_0 .. sigma_{N-1}, 0], rho-spaced from sigma_max down to sigma_min.
std::vector<double> sigma_schedule(const EdmConfig& config);

// Churn factor applied at sigma: min(S_churn / N, sqrt(2) - 1) inside
// [S_tmin, S_tmax], 0 elsewhere.
double churn_gamma(const EdmConfig& config, double sigma);

// D(x; sigma) for every row at a common noise level.
template <typename T>
using DenoiseFn =
    std::function<void(const Matrix<T>& x, double sigma, Matrix<T>& out)>;
// Fills `eps` (already sized) with standard normal draws.
template <typename T>
using NoiseFn = std::function<void(Matrix<T>& eps)>;

// One stochastic Heun step from sigma to sigma_next (< sigma). The Heun
// correction is skipped when sigma_next == 0.
template <typename T>
void sample_step(const DenoiseFn<T>& denoise, Matrix<T>& x, double sigma,
                 double sigma_next, const EdmConfig& config,
                 const NoiseFn<T>& noise);

// Runs the whole schedule; x must already hold x_0 = sigma_0 * eps.
template <typename T>
void run_sampler(const DenoiseFn<T>& denoise, Matrix<T>& x,
                 const EdmConfig& config, const NoiseFn<T>& noise);

// (D - x) / sigma^2
template <typename T>
Matrix<T> score(const DenoiseFn<T>& denoise, const Matrix<T>& x, double sigma);

// Preconditioned denoiser over a raw network, one sigma per row:
//   D = c_skip x + c_out net(c_in x, c_noise)
template <typename T>
void denoise_rows(const nn::ResidualMLP<T>& net, double sigma_data,
                  const Matrix<T>& x, std::span<const double> sigmas,
                  Matrix<T>& out);

template <typename T>
struct LossResult {
  double loss = 0.0;
  std::vector<T> grads;
};

// Mean over rows of lambda(sigma) ||D(x + eps; sigma) - x||^2 with
// ln sigma ~ N(p_mean, p_std^2) and eps ~ N(0, sigma^2 I), plus exact
// parameter gradients.
template <typename T, typename Gen>
LossResult<T> training_loss(const nn::ResidualMLP<T>& net,
                            const EdmConfig& config, const Matrix<T>& batch,
                            Gen& rng);

struct DenoiserShape {
  std::size_t width = 1024;
  std::size_t depth = 6;
  std::size_t rff_dim = 16;
};

// Denoiser weights plus everything needed to turn samples back into raw
// transitions. The network always sees normalized rows.
class DiffusionModel {
 public:
  DiffusionModel(TransitionSchema schema, const DenoiserShape& shape,
                 EdmConfig config, Normalizer normalizer, std::uint64_t seed);
  DiffusionModel(TransitionSchema schema, nn::ResidualMLP<float> net,
                 EdmConfig config, Normalizer normalizer);

  const TransitionSchema& schema() const noexcept { return schema_; }
  const EdmConfig& config() const noexcept { return config_; }
  EdmConfig& config() noexcept { return config_; }
  const Normalizer& normalizer() const noexcept { return normalizer_; }
  void set_normalizer(Normalizer n);
  const nn::ResidualMLP<float>& net() const noexcept { return net_; }
  nn::ResidualMLP<float>& net() noexcept { return net_; }
  std::size_t parameter_count() const noexcept { return net_.parameter_count(); }

  // Normalized-space denoiser at a common sigma.
  void denoise(const Matrix<float>& x, double sigma, Matrix<float>& out) const;
  DenoiseFn<float> denoiser() const;

 private:
  TransitionSchema schema_;
  nn::ResidualMLP<float> net_;
  EdmConfig config_;
  Normalizer normalizer_;
};

struct TrainConfig {
  std::size_t steps = 100'000;
  std::size_t batch_size = 256;
  double lr = 3e-4;
  std::uint64_t seed = 0;
  std::size_t log_every = 1000;
};

struct LossPoint {
  std::size_t step;
  double loss;  // mean over the preceding log window
};

// Carries optimizer state between calls so training can continue
// (continual fine-tuning in the online loop).
struct TrainerState {
  nn::AdamState<float> adam;
  std::uint64_t rounds = 0;
};

// Adam with cosine-annealed learning rate over `config.steps`. Batches are
// drawn uniformly with replacement from the dataset after normalization with
// the model's normalizer. Throws kNumeric on a non-finite loss.
std::vector<LossPoint> train(DiffusionModel& model,
                             const TransitionDataset& dataset,
                             const TrainConfig& config,
                             TrainerState* state = nullptr);

struct GenerateOptions {
  std::size_t chunk_rows = 16384;
  bool clamp = false;     // clamp raw outputs to the fitted data range
  unsigned threads = 0;   // 0: SYNTHER_THREADS or hardware concurrency
};

// Draws `count` rows; row k uses its own noise stream derived from
// (seed, k), so results do not depend on chunking or thread count.
TransitionDataset generate(const DiffusionModel& model, std::size_t count,
                           std::uint64_t seed,
                           const GenerateOptions& options = {});

// Checkpoint: nn weights block, then "SYNTHE1\0" | schema | EDM config |
// normalizer.
std::string encode_model(const DiffusionModel& model);
DiffusionModel decode_model(std::string bytes,
                            const std::string& source = "<memory>");
void save_model(const DiffusionModel& model, const std::string& path);
DiffusionModel load_model(const std::string& path);

}  // namespace synther::edm
