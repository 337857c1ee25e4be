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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synther/rng.hpp"
#include "synther/transition.hpp"

namespace synther::envs {

struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double action_low = -1.0;
  double action_high = 1.0;
  std::size_t max_episode_len = 200;
  bool has_terminal = false;

  TransitionSchema schema() const {
    return TransitionSchema(state_dim, action_dim, has_terminal);
  }
};

struct StepResult {
  std::vector<float> next_state;
  float reward = 0.0f;
  bool terminal = false;
  bool truncated = false;
  bool action_clipped = false;
};

struct OracleResult {
  std::vector<float> next_state;
  float reward = 0.0f;
  bool terminal = false;
};

// Deterministic environment. The state vector is exactly what appears in
// transition rows, so oracle_step on a recorded (s, a) reproduces (s', r)
// bit for bit.
class Env {
 public:
  virtual ~Env() = default;

  virtual const EnvSpec& spec() const noexcept = 0;
  // Pure dynamics on an arbitrary state. Throws kInvalidDomain for states the
  // model cannot interpret and kInvalidState for non-finite input.
  virtual OracleResult oracle_step(std::span<const float> state,
                                   std::span<const float> action) const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;

  // Samples an initial state from the start distribution.
  std::span<const float> reset(Rng& rng);
  StepResult step(std::span<const float> action);

  std::span<const float> state() const noexcept { return state_; }
  std::size_t elapsed() const noexcept { return elapsed_; }

 protected:
  virtual std::vector<float> initial_state(Rng& rng) const = 0;

 private:
  std::vector<float> state_;
  std::size_t elapsed_ = 0;
};

// x, y, vx, vy; accelerations in [-1, 1]^2; goal (1, 1).
class PointMass2D final : public Env {
 public:
  static constexpr double kDamping = 0.95;
  static constexpr double kAccelGain = 0.1;
  static constexpr double kDt = 0.05;
  static constexpr double kGoalX = 1.0;
  static constexpr double kGoalY = 1.0;
  static constexpr double kGoalRadius = 0.1;

  PointMass2D();
  const EnvSpec& spec() const noexcept override { return spec_; }
  OracleResult oracle_step(std::span<const float> state,
                           std::span<const float> action) const override;
  std::unique_ptr<Env> clone() const override;

 protected:
  std::vector<float> initial_state(Rng& rng) const override;

 private:
  EnvSpec spec_;
};

// Swing-up pendulum observed as (cos theta, sin theta, theta_dot).
class Pendulum final : public Env {
 public:
  static constexpr double kGravity = 10.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMass = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kNormTolerance = 0.2;

  Pendulum();
  const EnvSpec& spec() const noexcept override { return spec_; }
  OracleResult oracle_step(std::span<const float> state,
                           std::span<const float> action) const override;
  std::unique_ptr<Env> clone() const override;

  static std::vector<float> observe(double theta, double theta_dot);

 protected:
  std::vector<float> initial_state(Rng& rng) const override;

 private:
  EnvSpec spec_;
};

std::unique_ptr<Env> make_env(std::string_view name);
std::vector<std::string> env_names();
// Name of the built-in env whose transition schema matches, or "".
std::string env_for_schema(const TransitionSchema& schema);

// Maps an observation to an action; may use rng for exploration.
using Policy =
    std::function<std::vector<float>(std::span<const float> obs, Rng& rng)>;

Policy random_policy(const EnvSpec& spec);

// Rolls out `policy` for exactly n transitions, resetting after termination
// or truncation. Truncated steps are recorded with d = 0.
TransitionDataset collect_dataset(Env& env, const Policy& policy,
                                  std::size_t n_transitions,
                                  std::uint64_t seed);

}  // namespace synther::envs
