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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synther/envs.hpp"
#include "synther/nn.hpp"
#include "synther/rng.hpp"
#include "synther/transition.hpp"

namespace synther::rl {

using nn::Matrix;

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 3e-4;
  std::size_t hidden_width = 256;
  std::size_t hidden_depth = 2;
  std::size_t batch_size = 256;
  std::size_t utd = 1;  // gradient updates per environment step
  // TD3+BC
  double alpha = 2.5;
  double policy_noise = 0.2;  // fraction of the action bound
  double noise_clip = 0.5;    // fraction of the action bound
  std::size_t policy_delay = 2;
  double lambda_floor = 1e-6;
  // SAC
  double init_temperature = 1.0;
  bool learn_temperature = true;
  std::optional<double> target_entropy;  // default: -action_dim

  void validate() const;
  // Three hidden layers of width 512 with batch 1024.
  static AgentConfig larger();
};

// Column slices of a transition batch.
struct Batch {
  Matrix<float> state;
  Matrix<float> action;
  Matrix<float> reward;    // B x 1
  Matrix<float> next_state;
  Matrix<float> done;      // B x 1, zeros when the schema has no terminal
};

Batch make_batch(const TransitionDataset& rows);
Batch make_batch(std::span<const float> rows, const TransitionSchema& schema);

// Affine state normalization applied to agent inputs.
struct StateNormalizer {
  std::vector<float> mean;
  std::vector<float> std;

  static StateNormalizer identity(std::size_t dim);
  // Dataset state mean / (std + eps).
  static StateNormalizer fit(const TransitionDataset& data, double eps = 1e-3);
  Matrix<float> apply(const Matrix<float>& states) const;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::vector<float> act(std::span<const float> obs,
                                 bool deterministic, Rng& rng) const = 0;
  virtual std::string encode() const = 0;
  virtual const char* kind() const noexcept = 0;
  virtual std::size_t state_dim() const noexcept = 0;
  virtual std::size_t action_dim() const noexcept = 0;
};

struct Td3BcLosses {
  double critic_loss = 0.0;
  bool actor_updated = false;
  double actor_loss = 0.0;
  double lambda = 0.0;
};

// TD3 with a behaviour-cloning term on the actor:
//   critic: y = r + gamma (1 - d) min(Q1', Q2')(s', pi'(s') + clipped noise)
//   actor (every policy_delay updates):
//     -lambda Q1(s, pi(s)) + ||pi(s) - a||^2, lambda = alpha / mean|Q1|
class Td3Bc final : public Agent {
 public:
  Td3Bc(std::size_t state_dim, std::size_t action_dim, double max_action,
        const AgentConfig& config, std::uint64_t seed);

  void set_state_normalizer(StateNormalizer n) { obs_norm_ = std::move(n); }
  const StateNormalizer& state_normalizer() const noexcept { return obs_norm_; }

  Td3BcLosses update(const Batch& batch, Rng& rng);

  // TD3 target y for a batch without changing any state.
  Matrix<float> critic_target(const Batch& batch, Rng& rng) const;
  // Gradient of the actor loss for fixed critics (parameters of the actor).
  std::vector<float> actor_gradient(const Batch& batch, double* lambda,
                                    double* loss) const;

  std::vector<float> act(std::span<const float> obs, bool deterministic,
                         Rng& rng) const override;
  std::string encode() const override;
  const char* kind() const noexcept override { return "td3bc"; }
  std::size_t state_dim() const noexcept override { return state_dim_; }
  std::size_t action_dim() const noexcept override { return action_dim_; }

  nn::Mlp<float>& actor() noexcept { return actor_; }
  nn::Mlp<float>& critic1() noexcept { return q1_; }
  nn::Mlp<float>& critic2() noexcept { return q2_; }
  const nn::Mlp<float>& actor_target() const noexcept { return actor_t_; }
  const nn::Mlp<float>& critic1_target() const noexcept { return q1_t_; }
  std::uint64_t updates() const noexcept { return updates_; }
  const AgentConfig& config() const noexcept { return config_; }

  static std::unique_ptr<Td3Bc> decode(io::ByteReader& r);

 private:
  Matrix<float> policy(const nn::Mlp<float>& net,
                       const Matrix<float>& states) const;

  std::size_t state_dim_, action_dim_;
  double max_action_;
  AgentConfig config_;
  StateNormalizer obs_norm_;
  nn::Mlp<float> actor_, actor_t_, q1_, q2_, q1_t_, q2_t_;
  nn::AdamState<float> actor_opt_, q1_opt_, q2_opt_;
  std::uint64_t updates_ = 0;
};

struct SacLosses {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double temperature_loss = 0.0;
  double temperature = 0.0;
  double entropy = 0.0;  // -mean log pi of the sampled actions
};

// Squashed-Gaussian policy a = max_action tanh(mu + sigma xi) with twin
// critics and an automatically tuned temperature.
class Sac final : public Agent {
 public:
  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;

  Sac(std::size_t state_dim, std::size_t action_dim, double max_action,
      const AgentConfig& config, std::uint64_t seed);

  SacLosses update(const Batch& batch, Rng& rng);

  struct PolicySample {
    Matrix<float> action;    // B x A (scaled)
    Matrix<float> pre_tanh;  // u
    Matrix<float> noise;     // xi
    Matrix<float> mean;
    Matrix<float> log_std;   // clamped
    Matrix<float> raw_log_std;
    std::vector<double> log_prob;
  };
  PolicySample sample_policy(const Matrix<float>& states, Rng& rng) const;
  // log pi(a|s) for a given pre-tanh sample (excludes the action scale).
  static double log_prob(std::span<const float> u, std::span<const float> xi,
                         std::span<const float> log_std);

  Matrix<float> critic_target(const Batch& batch, Rng& rng) const;

  std::vector<float> act(std::span<const float> obs, bool deterministic,
                         Rng& rng) const override;
  std::string encode() const override;
  const char* kind() const noexcept override { return "sac"; }
  std::size_t state_dim() const noexcept override { return state_dim_; }
  std::size_t action_dim() const noexcept override { return action_dim_; }

  double temperature() const noexcept;
  double log_temperature() const noexcept { return log_alpha_; }
  void set_log_temperature(double v) noexcept { log_alpha_ = v; }
  double target_entropy() const noexcept { return target_entropy_; }
  nn::Mlp<float>& actor() noexcept { return actor_; }
  nn::Mlp<float>& critic1() noexcept { return q1_; }
  nn::Mlp<float>& critic2() noexcept { return q2_; }
  const nn::Mlp<float>& critic1_target() const noexcept { return q1_t_; }
  const nn::Mlp<float>& critic2_target() const noexcept { return q2_t_; }
  const AgentConfig& config() const noexcept { return config_; }

  static std::unique_ptr<Sac> decode(io::ByteReader& r);

 private:
  std::size_t state_dim_, action_dim_;
  double max_action_;
  AgentConfig config_;
  double target_entropy_;
  double log_alpha_;
  nn::Mlp<float> actor_, q1_, q2_, q1_t_, q2_t_;
  nn::AdamState<float> actor_opt_, q1_opt_, q2_opt_;
  nn::AdamState<double> alpha_opt_;
};

// Checkpoint: "SYNTHA1\0" | kind string | state_dim u32 | action_dim u32 |
// max_action f64 | config | state normalizer | SYNTHW1 blocks ...
void save_agent(const Agent& agent, const std::string& path);
std::unique_ptr<Agent> load_agent(const std::string& path);
std::unique_ptr<Agent> decode_agent(std::string bytes,
                                    const std::string& source = "<memory>");

struct EvalResult {
  std::vector<double> returns;
  double mean = 0.0;
  double std = 0.0;
};

// Deterministic (mean) actions; episode i resets from stream (seed, i).
EvalResult evaluate_policy(const envs::Env& env, const Agent& agent,
                           std::size_t episodes, std::uint64_t seed);

// Policy for data collection: with probability epsilon a uniform random
// action, otherwise the agent's deterministic action.
envs::Policy agent_policy(std::shared_ptr<const Agent> agent,
                          const envs::EnvSpec& spec, double epsilon);

}  // namespace synther::rl
