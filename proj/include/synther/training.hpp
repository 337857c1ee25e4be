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
#include <string>
#include <vector>

#include "synther/agents.hpp"
#include "synther/edm.hpp"
#include "synther/envs.hpp"
#include "synther/replay.hpp"
#include "synther/transition.hpp"

namespace synther::train {

// One evaluation point. Losses are means over the updates since the previous
// point; `aux` is lambda for TD3+BC and the temperature for SAC.
struct EvalRow {
  std::size_t step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double aux = 0.0;
};

std::string trace_csv(const std::vector<EvalRow>& rows, const std::string& aux_name);

struct OfflineConfig {
  std::size_t steps = 100'000;
  std::size_t eval_every = 5'000;
  std::size_t eval_episodes = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct OfflineResult {
  std::unique_ptr<rl::Td3Bc> agent;
  std::vector<EvalRow> trace;
};

// TD3+BC on a fixed dataset with dataset state normalization. The final
// step is always evaluated.
OfflineResult offline_train(const envs::Env& env, const rl::AgentConfig& agent,
                            const TransitionDataset& dataset,
                            const OfflineConfig& config);

struct OnlineConfig {
  std::size_t total_steps = 30'000;
  std::size_t warmup = 1'000;
  std::size_t eval_every = 1'000;
  std::size_t eval_episodes = 10;
  std::size_t real_capacity = 1'000'000;
  bool generation = true;
  double real_ratio = 0.5;
  std::size_t k_real = 100;          // env steps between generation rounds
  std::size_t m_synthetic = 10'000;  // rows generated per round
  std::size_t synthetic_capacity = kDefaultSyntheticCapacity;
  std::size_t diffusion_steps = 10'000;  // gradient steps per round
  std::size_t diffusion_batch = 256;
  double diffusion_lr = 3e-4;
  edm::DenoiserShape denoiser;
  edm::EdmConfig edm;
  unsigned threads = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Interaction loop with a replay buffer pair. Every k_real steps the
// diffusion model is fine-tuned on the whole real buffer and m_synthetic rows
// are pushed into the synthetic buffer; each env step after warmup performs
// `utd` SAC updates on batches mixed with ratio r. A diverging round falls
// back to real-only batches until the next successful round.
class OnlineTrainer {
 public:
  OnlineTrainer(const envs::Env& env, const rl::AgentConfig& agent,
                const OnlineConfig& config);

  // Runs up to `steps` more env steps (never past total_steps). Returns the
  // number actually taken.
  std::size_t advance(std::size_t steps);
  void run() { advance(config_.total_steps); }
  bool done() const noexcept { return t_ >= config_.total_steps; }

  std::size_t step() const noexcept { return t_; }
  const std::vector<EvalRow>& trace() const noexcept { return trace_; }
  const rl::Sac& agent() const noexcept { return *agent_; }
  const ReplayPair& buffers() const noexcept { return buffers_; }
  std::size_t generation_rounds() const noexcept { return rounds_; }
  std::size_t fallback_rounds() const noexcept { return fallbacks_; }
  const std::vector<std::string>& log() const noexcept { return log_; }

 private:
  void generation_round();
  rl::Batch next_batch();

  std::unique_ptr<envs::Env> env_;
  rl::AgentConfig agent_config_;
  OnlineConfig config_;
  TransitionSchema schema_;
  std::unique_ptr<rl::Sac> agent_;
  ReplayPair buffers_;
  Rng env_rng_, update_rng_;
  envs::Policy random_;
  std::optional<edm::DiffusionModel> model_;
  edm::TrainerState trainer_;
  bool fallback_ = false;
  std::size_t t_ = 0, rounds_ = 0, fallbacks_ = 0;
  std::vector<EvalRow> trace_;
  std::vector<std::string> log_;
  double critic_sum_ = 0.0, actor_sum_ = 0.0, temp_sum_ = 0.0;
  std::size_t loss_count_ = 0;
  std::vector<float> scratch_;
};

struct PlainSacConfig {
  std::size_t total_steps = 30'000;
  std::size_t warmup = 1'000;
  std::size_t eval_every = 1'000;
  std::size_t eval_episodes = 10;
  std::size_t capacity = 1'000'000;
  std::uint64_t seed = 0;
};

struct PlainSacResult {
  std::unique_ptr<rl::Sac> agent;
  std::vector<EvalRow> trace;
  TransitionDataset transitions;  // buffer contents, oldest first
};

// Standalone SAC loop with a single buffer. Shares the RNG stream layout of
// OnlineTrainer, so the two coincide when generation is off and r = 1.
PlainSacResult plain_sac_train(const envs::Env& env, const rl::AgentConfig& agent,
                               const PlainSacConfig& config);

}  // namespace synther::train
