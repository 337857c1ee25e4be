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

#include "synther/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "synther/binary_io.hpp"
#include "synther/error.hpp"

namespace synther::config {
namespace {

using T = ValueType;

const std::vector<KeySpec> kKeys = {
    {"agent.alpha", T::kDouble, "2.5", "TD3+BC behaviour-cloning weight"},
    {"agent.batch", T::kUnsigned, "256", "agent batch size"},
    {"agent.gamma", T::kDouble, "0.99", "discount"},
    {"agent.hidden_depth", T::kUnsigned, "2", "hidden layers"},
    {"agent.hidden_width", T::kUnsigned, "256", "hidden width"},
    {"agent.init_temperature", T::kDouble, "1", "SAC initial temperature"},
    {"agent.learn_temperature", T::kBool, "true", "SAC temperature tuning"},
    {"agent.lr", T::kDouble, "0.0003", "agent learning rate"},
    {"agent.noise_clip", T::kDouble, "0.5", "TD3 target noise clip"},
    {"agent.policy_delay", T::kUnsigned, "2", "TD3 actor update period"},
    {"agent.policy_noise", T::kDouble, "0.2", "TD3 target noise std"},
    {"agent.preset", T::kString, "default", "default | larger"},
    {"agent.target_entropy", T::kString, "", "SAC target entropy (empty: -action_dim)"},
    {"agent.tau", T::kDouble, "0.005", "target smoothing"},
    {"agent.utd", T::kUnsigned, "1", "updates per env step"},
    {"augment.count", T::kUnsigned, "0", "target row count (0: use factor)"},
    {"augment.data", T::kString, "", "input dataset"},
    {"augment.dynamics_high", T::kDouble, "1.5", "dynamics noise upper bound"},
    {"augment.dynamics_low", T::kDouble, "0.5", "dynamics noise lower bound"},
    {"augment.factor", T::kDouble, "10", "target = factor * input rows"},
    {"augment.kind", T::kString, "additive", "additive | multiplicative | dynamics"},
    {"augment.noise_std", T::kDouble, "0.1", "additive noise std"},
    {"augment.scale_high", T::kDouble, "1.2", "multiplicative upper bound"},
    {"augment.scale_low", T::kDouble, "0.8", "multiplicative lower bound"},
    {"collect.checkpoint", T::kString, "", "agent checkpoint for expert / mixed"},
    {"collect.count", T::kUnsigned, "50000", "transitions to collect"},
    {"collect.env", T::kString, "pointmass2d", "environment"},
    {"collect.epsilon", T::kDouble, "0.3", "random-action probability for mixed"},
    {"collect.fraction", T::kDouble, "1", "keep this fraction of the rows"},
    {"collect.policy", T::kString, "random", "random | mixed | expert"},
    {"denoiser.depth", T::kUnsigned, "6", "residual blocks"},
    {"denoiser.rff_dim", T::kUnsigned, "16", "random Fourier features"},
    {"denoiser.width", T::kUnsigned, "1024", "residual width"},
    {"diffusion.batch", T::kUnsigned, "256", "diffusion batch size"},
    {"diffusion.data", T::kString, "", "training dataset"},
    {"diffusion.log_every", T::kUnsigned, "1000", "loss log window"},
    {"diffusion.lr", T::kDouble, "0.0003", "diffusion learning rate"},
    {"diffusion.steps", T::kUnsigned, "100000", "gradient steps"},
    {"edm.p_mean", T::kDouble, "-1.2", "training log-sigma mean"},
    {"edm.p_std", T::kDouble, "1.2", "training log-sigma std"},
    {"edm.rho", T::kDouble, "7", "schedule exponent"},
    {"edm.s_churn", T::kDouble, "80", "stochasticity"},
    {"edm.s_noise", T::kDouble, "1.003", "churn noise inflation"},
    {"edm.s_tmax", T::kDouble, "50", "churn upper sigma"},
    {"edm.s_tmin", T::kDouble, "0.05", "churn lower sigma"},
    {"edm.sigma_data", T::kDouble, "1", "data std after normalization"},
    {"edm.sigma_max", T::kDouble, "80", "largest sampling sigma"},
    {"edm.sigma_min", T::kDouble, "0.002", "smallest sampling sigma"},
    {"edm.steps", T::kUnsigned, "128", "sampler steps"},
    {"generate.chunk_rows", T::kUnsigned, "16384", "rows per sampler chunk"},
    {"generate.clamp", T::kBool, "false", "clamp to the fitted data range"},
    {"generate.count", T::kUnsigned, "5000000", "rows to generate"},
    {"generate.model", T::kString, "", "diffusion checkpoint"},
    {"metrics.env", T::kString, "", "env for dynamics error (empty: infer)"},
    {"metrics.max_rows", T::kUnsigned, "100000", "rows per side for scores"},
    {"metrics.method", T::kString, "pearson", "pearson | spearman"},
    {"metrics.real", T::kString, "", "real dataset"},
    {"metrics.scatter_rows", T::kUnsigned, "10000", "rows in the scatter CSV (0: skip)"},
    {"metrics.synth", T::kString, "", "synthetic dataset"},
    {"offline.data", T::kString, "", "training dataset"},
    {"offline.env", T::kString, "", "evaluation env (empty: infer)"},
    {"offline.eval_episodes", T::kUnsigned, "10", "episodes per evaluation"},
    {"offline.eval_every", T::kUnsigned, "5000", "steps between evaluations"},
    {"offline.steps", T::kUnsigned, "100000", "gradient steps"},
    {"online.diffusion_batch", T::kUnsigned, "256", "diffusion batch size"},
    {"online.diffusion_lr", T::kDouble, "0.0003", "diffusion learning rate"},
    {"online.diffusion_steps", T::kUnsigned, "10000", "diffusion steps per round"},
    {"online.env", T::kString, "pendulum", "environment"},
    {"online.eval_episodes", T::kUnsigned, "10", "episodes per evaluation"},
    {"online.eval_every", T::kUnsigned, "1000", "env steps between evaluations"},
    {"online.generation", T::kBool, "true", "enable synthetic data"},
    {"online.k_real", T::kUnsigned, "100", "env steps between generation rounds"},
    {"online.m_synthetic", T::kUnsigned, "10000", "rows generated per round"},
    {"online.real_capacity", T::kUnsigned, "1000000", "real buffer capacity"},
    {"online.real_ratio", T::kDouble, "0.5", "real fraction of each batch"},
    {"online.synthetic_capacity", T::kUnsigned, "1000000", "synthetic buffer capacity"},
    {"online.total_steps", T::kUnsigned, "30000", "env steps"},
    {"online.warmup", T::kUnsigned, "1000", "random-action steps"},
    {"report.data", T::kString, "", "comma-separated datasets to include"},
    {"report.floats", T::kString, "12600000,42000000,84000000", "dataset float counts"},
    {"report.model", T::kString, "", "checkpoint providing the parameter count"},
    {"report.params", T::kUnsigned, "6500000", "model parameter count"},
    {"run.out", T::kString, "runs", "base output directory"},
    {"run.seed", T::kUnsigned, "0", "global seed"},
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            const char* expected) {
  fail(ErrorCode::kConfig, "config key '" + std::string(key) + "': expected " +
                               expected + ", got '" + std::string(value) + "'");
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size() ||
      !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void check_value(const KeySpec& spec, std::string_view value) {
  switch (spec.type) {
    case T::kUnsigned: parse_unsigned(spec.key, value); break;
    case T::kDouble: parse_double(spec.key, value); break;
    case T::kBool: parse_bool(spec.key, value); break;
    case T::kString: break;
  }
}

}  // namespace

const std::vector<KeySpec>& known_keys() { return kKeys; }

const KeySpec& key_spec(std::string_view key) {
  auto it = std::lower_bound(kKeys.begin(), kKeys.end(), key,
                             [](const KeySpec& s, std::string_view k) { return s.key < k; });
  if (it == kKeys.end() || it->key != key) {
    fail(ErrorCode::kConfig, "unknown config key '" + std::string(key) + "'");
  }
  return *it;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const KeySpec& spec = key_spec(key);
  check_value(spec, value);
  values_[std::string(key)] = std::string(value);
}

void RunConfig::merge_text(std::string_view text, const std::string& source) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    try {
      if (eq == std::string_view::npos) {
        fail(ErrorCode::kConfig, "expected key=value");
      }
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(ErrorCode::kConfig,
           source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::string& path) {
  merge_text(io::read_file(path), path);
}

bool RunConfig::is_set(std::string_view key) const {
  key_spec(key);
  return values_.find(key) != values_.end();
}

std::string RunConfig::get(std::string_view key) const {
  const KeySpec& spec = key_spec(key);
  auto it = values_.find(key);
  return it == values_.end() ? std::string(spec.default_value) : it->second;
}

std::uint64_t RunConfig::get_unsigned(std::string_view key) const {
  return parse_unsigned(key, get(key));
}

double RunConfig::get_double(std::string_view key) const {
  return parse_double(key, get(key));
}

bool RunConfig::get_bool(std::string_view key) const {
  return parse_bool(key, get(key));
}

std::string RunConfig::resolved_text() const {
  std::string out;
  for (const auto& spec : kKeys) {
    out += std::string(spec.key) + "=" + get(spec.key) + "\n";
  }
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : resolved_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

edm::EdmConfig edm_config(const RunConfig& c) {
  edm::EdmConfig e;
  e.sigma_min = c.get_double("edm.sigma_min");
  e.sigma_max = c.get_double("edm.sigma_max");
  e.s_churn = c.get_double("edm.s_churn");
  e.s_tmin = c.get_double("edm.s_tmin");
  e.s_tmax = c.get_double("edm.s_tmax");
  e.s_noise = c.get_double("edm.s_noise");
  e.steps = c.get_unsigned("edm.steps");
  e.sigma_data = c.get_double("edm.sigma_data");
  e.rho = c.get_double("edm.rho");
  e.p_mean = c.get_double("edm.p_mean");
  e.p_std = c.get_double("edm.p_std");
  e.validate();
  return e;
}

edm::DenoiserShape denoiser_shape(const RunConfig& c) {
  edm::DenoiserShape s;
  s.width = c.get_unsigned("denoiser.width");
  s.depth = c.get_unsigned("denoiser.depth");
  s.rff_dim = c.get_unsigned("denoiser.rff_dim");
  require(s.width > 0 && s.depth > 0 && s.rff_dim > 0, ErrorCode::kConfig,
          "denoiser width, depth and rff_dim must be positive");
  return s;
}

edm::TrainConfig diffusion_train_config(const RunConfig& c) {
  edm::TrainConfig t;
  t.steps = c.get_unsigned("diffusion.steps");
  t.batch_size = c.get_unsigned("diffusion.batch");
  t.lr = c.get_double("diffusion.lr");
  t.log_every = c.get_unsigned("diffusion.log_every");
  t.seed = c.get_unsigned("run.seed");
  require(t.steps > 0 && t.batch_size > 0 && t.lr > 0.0 && t.log_every > 0,
          ErrorCode::kConfig, "diffusion steps, batch, lr and log_every must be positive");
  return t;
}

rl::AgentConfig agent_config(const RunConfig& c) {
  const std::string preset = c.get("agent.preset");
  rl::AgentConfig a;
  if (preset == "larger") {
    a = rl::AgentConfig::larger();
  } else if (preset != "default") {
    fail(ErrorCode::kConfig, "agent.preset must be 'default' or 'larger', got '" +
                                 preset + "'");
  }
  // Explicit keys override the preset.
  auto pick = [&](const char* key, std::size_t& field) {
    if (c.is_set(key) || preset == "default") field = c.get_unsigned(key);
  };
  pick("agent.hidden_width", a.hidden_width);
  pick("agent.hidden_depth", a.hidden_depth);
  pick("agent.batch", a.batch_size);
  a.gamma = c.get_double("agent.gamma");
  a.tau = c.get_double("agent.tau");
  a.lr = c.get_double("agent.lr");
  a.utd = c.get_unsigned("agent.utd");
  a.alpha = c.get_double("agent.alpha");
  a.policy_noise = c.get_double("agent.policy_noise");
  a.noise_clip = c.get_double("agent.noise_clip");
  a.policy_delay = c.get_unsigned("agent.policy_delay");
  a.init_temperature = c.get_double("agent.init_temperature");
  a.learn_temperature = c.get_bool("agent.learn_temperature");
  const std::string te = c.get("agent.target_entropy");
  if (!te.empty()) a.target_entropy = parse_double("agent.target_entropy", te);
  require(a.gamma > 0.0 && a.gamma < 1.0, ErrorCode::kConfig,
          "agent.gamma must be in (0, 1)");
  a.validate();
  return a;
}

train::OfflineConfig offline_config(const RunConfig& c) {
  train::OfflineConfig o;
  o.steps = c.get_unsigned("offline.steps");
  o.eval_every = c.get_unsigned("offline.eval_every");
  o.eval_episodes = c.get_unsigned("offline.eval_episodes");
  o.seed = c.get_unsigned("run.seed");
  o.validate();
  return o;
}

train::OnlineConfig online_config(const RunConfig& c) {
  train::OnlineConfig o;
  o.total_steps = c.get_unsigned("online.total_steps");
  o.warmup = c.get_unsigned("online.warmup");
  o.eval_every = c.get_unsigned("online.eval_every");
  o.eval_episodes = c.get_unsigned("online.eval_episodes");
  o.real_capacity = c.get_unsigned("online.real_capacity");
  o.generation = c.get_bool("online.generation");
  o.real_ratio = c.get_double("online.real_ratio");
  o.k_real = c.get_unsigned("online.k_real");
  o.m_synthetic = c.get_unsigned("online.m_synthetic");
  o.synthetic_capacity = c.get_unsigned("online.synthetic_capacity");
  o.diffusion_steps = c.get_unsigned("online.diffusion_steps");
  o.diffusion_batch = c.get_unsigned("online.diffusion_batch");
  o.diffusion_lr = c.get_double("online.diffusion_lr");
  o.denoiser = denoiser_shape(c);
  o.edm = edm_config(c);
  o.seed = c.get_unsigned("run.seed");
  o.validate();
  return o;
}

augment::AugmentationScheme augmentation_scheme(const RunConfig& c) {
  augment::AugmentationScheme s;
  s.kind = augment::parse_kind(c.get("augment.kind"));
  s.noise_std = c.get_double("augment.noise_std");
  s.scale_low = c.get_double("augment.scale_low");
  s.scale_high = c.get_double("augment.scale_high");
  s.dynamics_low = c.get_double("augment.dynamics_low");
  s.dynamics_high = c.get_double("augment.dynamics_high");
  s.validate();
  return s;
}

metrics::ReportOptions report_options(const RunConfig& c) {
  metrics::ReportOptions r;
  r.max_rows = c.get_unsigned("metrics.max_rows");
  r.method = metrics::parse_correlation_method(c.get("metrics.method"));
  r.seed = c.get_unsigned("run.seed");
  require(r.max_rows >= 2, ErrorCode::kConfig, "metrics.max_rows must be >= 2");
  return r;
}

}  // namespace synther::config
