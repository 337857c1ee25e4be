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

#include "synther/training.hpp"

#include <cmath>
#include <sstream>

#include "synther/dataset_io.hpp"
#include "synther/error.hpp"

namespace synther::train {
namespace {

// Stream layout shared by the online loops.
constexpr std::uint64_t kEnvStream = 1;
constexpr std::uint64_t kUpdateStream = 2;
constexpr std::uint64_t kAgentStream = 3;
constexpr std::uint64_t kEvalStream = 4;
constexpr std::uint64_t kDiffusionStream = 5;
constexpr std::uint64_t kGenerateStream = 6;

void check_schema(const envs::Env& env, const TransitionSchema& schema) {
  const TransitionSchema expected = env.spec().schema();
  require(expected == schema, ErrorCode::kConfig,
          "dataset schema " + schema.describe() + " does not match env '" +
              env.spec().name + "' schema " + expected.describe());
}

double max_action(const envs::EnvSpec& spec) {
  require(spec.action_low == -spec.action_high && spec.action_high > 0.0,
          ErrorCode::kInvalidInput, "agents need symmetric action bounds");
  return spec.action_high;
}

void append_row(std::vector<float>& row, std::span<const float> s,
                std::span<const float> a, const envs::StepResult& r,
                bool has_terminal) {
  row.clear();
  row.insert(row.end(), s.begin(), s.end());
  row.insert(row.end(), a.begin(), a.end());
  row.push_back(r.reward);
  row.insert(row.end(), r.next_state.begin(), r.next_state.end());
  if (has_terminal) row.push_back(r.terminal ? 1.0f : 0.0f);
}

struct LossWindow {
  double critic = 0.0, actor = 0.0, aux = 0.0;
  std::size_t count = 0, actor_count = 0;

  EvalRow close(std::size_t step, const rl::EvalResult& eval) {
    EvalRow row;
    row.step = step;
    row.mean_return = eval.mean;
    row.std_return = eval.std;
    row.critic_loss = count ? critic / double(count) : 0.0;
    row.actor_loss = actor_count ? actor / double(actor_count) : 0.0;
    row.aux = actor_count ? aux / double(actor_count) : 0.0;
    *this = {};
    return row;
  }
};

}  // namespace

std::string trace_csv(const std::vector<EvalRow>& rows, const std::string& aux_name) {
  std::ostringstream out;
  out << "step,mean_return,std_return,critic_loss,actor_loss," << aux_name << "\n";
  for (const auto& r : rows) {
    out << r.step << ',' << format_double(r.mean_return) << ','
        << format_double(r.std_return) << ',' << format_double(r.critic_loss)
        << ',' << format_double(r.actor_loss) << ',' << format_double(r.aux)
        << "\n";
  }
  return out.str();
}

void OfflineConfig::validate() const {
  require(steps > 0, ErrorCode::kConfig, "offline: steps must be positive");
  require(eval_every > 0, ErrorCode::kConfig, "offline: eval_every must be positive");
  require(eval_episodes > 0, ErrorCode::kConfig,
          "offline: eval_episodes must be positive");
}

OfflineResult offline_train(const envs::Env& env, const rl::AgentConfig& agent_cfg,
                            const TransitionDataset& dataset,
                            const OfflineConfig& config) {
  config.validate();
  require(dataset.count() > 0, ErrorCode::kUnavailableData,
          "offline training needs a non-empty dataset");
  check_schema(env, dataset.schema());
  const auto& spec = env.spec();
  OfflineResult result;
  result.agent = std::make_unique<rl::Td3Bc>(
      spec.state_dim, spec.action_dim, max_action(spec), agent_cfg,
      stream_key(config.seed, kAgentStream));
  result.agent->set_state_normalizer(rl::StateNormalizer::fit(dataset));

  Rng rng = make_rng(config.seed, kUpdateStream);
  const std::size_t rd = dataset.row_dim();
  std::vector<float> rows;
  LossWindow window;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    rows.clear();
    for (std::size_t i = 0; i < agent_cfg.batch_size; ++i) {
      auto row = dataset.row(uniform_index(rng, dataset.count()));
      rows.insert(rows.end(), row.begin(), row.begin() + std::ptrdiff_t(rd));
    }
    const rl::Td3BcLosses l =
        result.agent->update(rl::make_batch(rows, dataset.schema()), rng);
    window.critic += l.critic_loss;
    ++window.count;
    if (l.actor_updated) {
      window.actor += l.actor_loss;
      window.aux += l.lambda;
      ++window.actor_count;
    }
    if (step % config.eval_every == 0 || step == config.steps) {
      const rl::EvalResult eval =
          rl::evaluate_policy(env, *result.agent, config.eval_episodes,
                              stream_key(config.seed, kEvalStream));
      result.trace.push_back(window.close(step, eval));
    }
  }
  return result;
}

void OnlineConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    require(ok, ErrorCode::kConfig, std::string("online: ") + what);
  };
  check(total_steps > 0, "total_steps must be positive");
  check(total_steps >= warmup, "total_steps must be >= warmup");
  check(eval_every > 0 && eval_episodes > 0, "evaluation settings must be positive");
  check(real_capacity > 0, "real_capacity must be positive");
  check(real_ratio >= 0.0 && real_ratio <= 1.0, "real_ratio must be in [0, 1]");
  check(k_real >= 1 && m_synthetic >= 1, "k_real and m_synthetic must be >= 1");
  check(synthetic_capacity > 0, "synthetic_capacity must be positive");
  check(diffusion_batch > 0 && diffusion_lr > 0.0, "invalid diffusion settings");
  check(denoiser.width > 0 && denoiser.depth > 0, "invalid denoiser shape");
  edm.validate();
}

OnlineTrainer::OnlineTrainer(const envs::Env& env, const rl::AgentConfig& agent,
                             const OnlineConfig& config)
    : env_(env.clone()),
      agent_config_(agent),
      config_(config),
      schema_(env.spec().schema()),
      buffers_(schema_, config.real_capacity, config.synthetic_capacity,
               config.real_ratio),
      env_rng_(make_rng(config.seed, kEnvStream)),
      update_rng_(make_rng(config.seed, kUpdateStream)),
      random_(envs::random_policy(env.spec())) {
  config_.validate();
  agent_config_.validate();
  const auto& spec = env_->spec();
  agent_ = std::make_unique<rl::Sac>(spec.state_dim, spec.action_dim,
                                     max_action(spec), agent_config_,
                                     stream_key(config_.seed, kAgentStream));
  env_->reset(env_rng_);
}

rl::Batch OnlineTrainer::next_batch() {
  const std::size_t b = agent_config_.batch_size;
  const bool real_only = !config_.generation || fallback_ ||
                         buffers_.synthetic().size() == 0;
  if (real_only) {
    scratch_.clear();
    sample_uniform(buffers_.real(), b, update_rng_, scratch_);
    return rl::make_batch(scratch_, schema_);
  }
  return rl::make_batch(mixed_sample(buffers_, b, update_rng_));
}

void OnlineTrainer::generation_round() {
  const TransitionDataset real = buffers_.real().snapshot();
  if (real.count() < 2) return;
  ++rounds_;
  try {
    Normalizer norm = fit_normalizer(real);
    if (!model_) {
      model_.emplace(schema_, config_.denoiser, config_.edm, norm,
                     stream_key(config_.seed, kDiffusionStream));
      trainer_ = {};
    } else {
      model_->set_normalizer(std::move(norm));
    }
    edm::TrainConfig tc;
    tc.steps = config_.diffusion_steps;
    tc.batch_size = config_.diffusion_batch;
    tc.lr = config_.diffusion_lr;
    tc.seed = stream_key(config_.seed, kDiffusionStream);
    tc.log_every = config_.diffusion_steps;
    if (tc.steps > 0) edm::train(*model_, real, tc, &trainer_);
    edm::GenerateOptions opts;
    opts.threads = config_.threads;
    const TransitionDataset synth =
        edm::generate(*model_, config_.m_synthetic,
                      stream_key(config_.seed, kGenerateStream, rounds_), opts);
    buffers_.synthetic().push_all(synth);
    fallback_ = false;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumeric) throw;
    ++fallbacks_;
    fallback_ = true;
    model_.reset();
    log_.push_back("step " + std::to_string(t_) + ": diffusion round " +
                   std::to_string(rounds_) + " diverged (" + e.what() +
                   "); using real data only");
  }
}

std::size_t OnlineTrainer::advance(std::size_t steps) {
  const bool has_terminal = schema_.has_terminal();
  std::vector<float> row;
  std::size_t taken = 0;
  while (taken < steps && t_ < config_.total_steps) {
    ++t_;
    ++taken;
    const std::vector<float> obs(env_->state().begin(), env_->state().end());
    const std::vector<float> action = t_ <= config_.warmup
                                          ? random_(obs, env_rng_)
                                          : agent_->act(obs, false, env_rng_);
    const envs::StepResult res = env_->step(action);
    append_row(row, obs, action, res, has_terminal);
    buffers_.real().push(row);
    if (res.terminal || res.truncated) env_->reset(env_rng_);

    if (config_.generation && t_ % config_.k_real == 0) generation_round();

    if (t_ >= config_.warmup) {
      for (std::size_t u = 0; u < agent_config_.utd; ++u) {
        const rl::SacLosses l = agent_->update(next_batch(), update_rng_);
        critic_sum_ += l.critic_loss;
        actor_sum_ += l.actor_loss;
        temp_sum_ += l.temperature;
        ++loss_count_;
      }
    }
    if (t_ % config_.eval_every == 0 || t_ == config_.total_steps) {
      const rl::EvalResult eval =
          rl::evaluate_policy(*env_, *agent_, config_.eval_episodes,
                              stream_key(config_.seed, kEvalStream));
      EvalRow r;
      r.step = t_;
      r.mean_return = eval.mean;
      r.std_return = eval.std;
      if (loss_count_) {
        r.critic_loss = critic_sum_ / double(loss_count_);
        r.actor_loss = actor_sum_ / double(loss_count_);
        r.aux = temp_sum_ / double(loss_count_);
      }
      critic_sum_ = actor_sum_ = temp_sum_ = 0.0;
      loss_count_ = 0;
      trace_.push_back(r);
    }
  }
  return taken;
}

PlainSacResult plain_sac_train(const envs::Env& env, const rl::AgentConfig& agent_cfg,
                               const PlainSacConfig& config) {
  require(config.total_steps >= config.warmup && config.total_steps > 0,
          ErrorCode::kConfig, "sac: total_steps must be positive and >= warmup");
  require(config.eval_every > 0 && config.eval_episodes > 0 && config.capacity > 0,
          ErrorCode::kConfig, "sac: invalid evaluation or capacity settings");
  auto e = env.clone();
  const auto& spec = e->spec();
  const TransitionSchema schema = spec.schema();
  PlainSacResult result;
  result.agent = std::make_unique<rl::Sac>(spec.state_dim, spec.action_dim,
                                           max_action(spec), agent_cfg,
                                           stream_key(config.seed, kAgentStream));
  RingBuffer buffer(schema, config.capacity);
  Rng env_rng = make_rng(config.seed, kEnvStream);
  Rng update_rng = make_rng(config.seed, kUpdateStream);
  const envs::Policy random = envs::random_policy(spec);
  e->reset(env_rng);
  std::vector<float> row, rows;
  double critic = 0.0, actor = 0.0, temp = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 1; t <= config.total_steps; ++t) {
    const std::vector<float> obs(e->state().begin(), e->state().end());
    const std::vector<float> action = t <= config.warmup
                                          ? random(obs, env_rng)
                                          : result.agent->act(obs, false, env_rng);
    const envs::StepResult res = e->step(action);
    append_row(row, obs, action, res, schema.has_terminal());
    buffer.push(row);
    if (res.terminal || res.truncated) e->reset(env_rng);
    if (t >= config.warmup) {
      for (std::size_t u = 0; u < agent_cfg.utd; ++u) {
        rows.clear();
        sample_uniform(buffer, agent_cfg.batch_size, update_rng, rows);
        const rl::SacLosses l =
            result.agent->update(rl::make_batch(rows, schema), update_rng);
        critic += l.critic_loss;
        actor += l.actor_loss;
        temp += l.temperature;
        ++count;
      }
    }
    if (t % config.eval_every == 0 || t == config.total_steps) {
      const rl::EvalResult eval =
          rl::evaluate_policy(*e, *result.agent, config.eval_episodes,
                              stream_key(config.seed, kEvalStream));
      EvalRow r;
      r.step = t;
      r.mean_return = eval.mean;
      r.std_return = eval.std;
      if (count) {
        r.critic_loss = critic / double(count);
        r.actor_loss = actor / double(count);
        r.aux = temp / double(count);
      }
      critic = actor = temp = 0.0;
      count = 0;
      result.trace.push_back(r);
    }
  }
  result.transitions = buffer.snapshot();
  return result;
}

}  // namespace synther::train
