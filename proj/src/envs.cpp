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

#include "synther/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "synther/error.hpp"

namespace synther::envs {

namespace {

void check_finite(std::span<const float> v, const char* what) {
  for (float x : v) {
    if (!std::isfinite(x)) {
      fail(ErrorCode::kInvalidState, std::string("non-finite ") + what);
    }
  }
}

void check_sizes(const EnvSpec& spec, std::span<const float> state,
                 std::span<const float> action) {
  require(state.size() == spec.state_dim && action.size() == spec.action_dim,
          ErrorCode::kInvalidInput,
          spec.name + ": state/action width mismatch");
  check_finite(state, "state");
  check_finite(action, "action");
}

}  // namespace

std::span<const float> Env::reset(Rng& rng) {
  state_ = initial_state(rng);
  elapsed_ = 0;
  return state_;
}

StepResult Env::step(std::span<const float> action) {
  require(!state_.empty(), ErrorCode::kInvalidState, "step before reset");
  const EnvSpec& s = spec();
  StepResult out;
  std::vector<float> clipped(action.begin(), action.end());
  for (float& a : clipped) {
    const float c = std::clamp(a, static_cast<float>(s.action_low),
                               static_cast<float>(s.action_high));
    out.action_clipped |= (c != a);
    a = c;
  }
  OracleResult next = oracle_step(state_, clipped);
  ++elapsed_;
  out.next_state = next.next_state;
  out.reward = next.reward;
  out.terminal = next.terminal;
  out.truncated = !next.terminal && elapsed_ >= s.max_episode_len;
  state_ = std::move(next.next_state);
  return out;
}

PointMass2D::PointMass2D()
    : spec_{"pointmass2d", 4, 2, -1.0, 1.0, 200, true} {}

OracleResult PointMass2D::oracle_step(std::span<const float> state,
                                      std::span<const float> action) const {
  check_sizes(spec_, state, action);
  const double ax = std::clamp<double>(action[0], -1.0, 1.0);
  const double ay = std::clamp<double>(action[1], -1.0, 1.0);
  const float vx = static_cast<float>(kDamping * state[2] + kAccelGain * ax);
  const float vy = static_cast<float>(kDamping * state[3] + kAccelGain * ay);
  const float x = static_cast<float>(state[0] + kDt * double(vx));
  const float y = static_cast<float>(state[1] + kDt * double(vy));
  const double dist = std::hypot(double(x) - kGoalX, double(y) - kGoalY);
  OracleResult out;
  out.next_state = {x, y, vx, vy};
  out.reward = static_cast<float>(-dist);
  out.terminal = dist < kGoalRadius;
  return out;
}

std::vector<float> PointMass2D::initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  const double x = pos(rng);
  const double y = pos(rng);
  return {static_cast<float>(x), static_cast<float>(y), 0.0f, 0.0f};
}

std::unique_ptr<Env> PointMass2D::clone() const {
  return std::make_unique<PointMass2D>(*this);
}

Pendulum::Pendulum() : spec_{"pendulum", 3, 1, -2.0, 2.0, 200, false} {}

std::vector<float> Pendulum::observe(double theta, double theta_dot) {
  return {static_cast<float>(std::cos(theta)),
          static_cast<float>(std::sin(theta)),
          static_cast<float>(theta_dot)};
}

OracleResult Pendulum::oracle_step(std::span<const float> state,
                                   std::span<const float> action) const {
  check_sizes(spec_, state, action);
  const double norm = std::hypot(double(state[0]), double(state[1]));
  if (std::abs(norm - 1.0) > kNormTolerance) {
    fail(ErrorCode::kInvalidDomain,
         "pendulum: (cos, sin) norm " + std::to_string(norm) +
             " deviates from 1 by more than 0.2");
  }
  const double theta = std::atan2(double(state[1]), double(state[0]));
  const double theta_dot = state[2];
  const double u = std::clamp<double>(action[0], -kMaxTorque, kMaxTorque);
  const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta) +
                       3.0 / (kMass * kLength * kLength) * u;
  const double new_dot =
      std::clamp(theta_dot + accel * kDt, -kMaxSpeed, kMaxSpeed);
  const double new_theta = theta + new_dot * kDt;
  OracleResult out;
  out.next_state = observe(new_theta, new_dot);
  out.reward = static_cast<float>(
      -(theta * theta + 0.1 * theta_dot * theta_dot + 0.001 * u * u));
  out.terminal = false;
  return out;
}

std::vector<float> Pendulum::initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  const double theta = angle(rng);
  const double theta_dot = speed(rng);
  return observe(theta, theta_dot);
}

std::unique_ptr<Env> Pendulum::clone() const {
  return std::make_unique<Pendulum>(*this);
}

std::unique_ptr<Env> make_env(std::string_view name) {
  if (name == "pointmass2d") return std::make_unique<PointMass2D>();
  if (name == "pendulum") return std::make_unique<Pendulum>();
  fail(ErrorCode::kConfig, "unknown environment \"" + std::string(name) +
                               "\" (known: pointmass2d, pendulum)");
}

std::vector<std::string> env_names() { return {"pointmass2d", "pendulum"}; }

std::string env_for_schema(const TransitionSchema& schema) {
  for (const auto& name : env_names()) {
    if (make_env(name)->spec().schema() == schema) return name;
  }
  return {};
}

Policy random_policy(const EnvSpec& spec) {
  return [spec](std::span<const float>, Rng& rng) {
    std::uniform_real_distribution<double> dist(spec.action_low,
                                                spec.action_high);
    std::vector<float> a(spec.action_dim);
    for (float& x : a) x = static_cast<float>(dist(rng));
    return a;
  };
}

TransitionDataset collect_dataset(Env& env, const Policy& policy,
                                  std::size_t n_transitions,
                                  std::uint64_t seed) {
  require(n_transitions >= 1, ErrorCode::kInvalidInput,
          "collect_dataset: need at least one transition");
  const EnvSpec& spec = env.spec();
  const TransitionSchema schema = spec.schema();
  Rng rng = make_rng(seed, 0xc011);
  TransitionDataset out(schema);
  out.reserve(n_transitions);
  std::vector<float> row(schema.row_dim());
  env.reset(rng);
  for (std::size_t t = 0; t < n_transitions; ++t) {
    const std::vector<float> s(env.state().begin(), env.state().end());
    std::vector<float> a = policy(s, rng);
    for (float& x : a) {
      x = std::clamp(x, static_cast<float>(spec.action_low),
                     static_cast<float>(spec.action_high));
    }
    StepResult res = env.step(a);
    std::copy(s.begin(), s.end(), row.begin() + schema.state_offset());
    std::copy(a.begin(), a.end(), row.begin() + schema.action_offset());
    row[schema.reward_offset()] = res.reward;
    std::copy(res.next_state.begin(), res.next_state.end(),
              row.begin() + schema.next_state_offset());
    if (schema.has_terminal()) {
      row[schema.terminal_offset()] = res.terminal ? 1.0f : 0.0f;
    }
    out.append_row(row);
    if (res.terminal || res.truncated) env.reset(rng);
  }
  return out;
}

}  // namespace synther::envs
