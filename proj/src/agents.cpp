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

#include "synther/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "synther/binary_io.hpp"
#include "synther/error.hpp"

namespace synther::rl {
namespace {

constexpr std::string_view kAgentMagic{"SYNTHA1\0", 8};

std::vector<std::size_t> layer_sizes(std::size_t in, std::size_t out,
                                     const AgentConfig& c) {
  std::vector<std::size_t> sizes{in};
  for (std::size_t i = 0; i < c.hidden_depth; ++i) sizes.push_back(c.hidden_width);
  sizes.push_back(out);
  return sizes;
}

Matrix<float> concat(const Matrix<float>& a, const Matrix<float>& b) {
  Matrix<float> out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

void polyak(nn::Mlp<float>& target, const nn::Mlp<float>& source, double tau) {
  nn::polyak_update<float>(target.parameters(), source.parameters(), tau);
}

void write_config(io::ByteWriter& w, const AgentConfig& c) {
  w.f64(c.gamma);
  w.f64(c.tau);
  w.f64(c.lr);
  w.u32(static_cast<std::uint32_t>(c.hidden_width));
  w.u32(static_cast<std::uint32_t>(c.hidden_depth));
  w.u32(static_cast<std::uint32_t>(c.batch_size));
  w.u32(static_cast<std::uint32_t>(c.utd));
  w.f64(c.alpha);
  w.f64(c.policy_noise);
  w.f64(c.noise_clip);
  w.u32(static_cast<std::uint32_t>(c.policy_delay));
  w.f64(c.lambda_floor);
  w.f64(c.init_temperature);
  w.u8(c.learn_temperature ? 1 : 0);
  w.u8(c.target_entropy ? 1 : 0);
  w.f64(c.target_entropy.value_or(0.0));
}

AgentConfig read_config(io::ByteReader& r) {
  AgentConfig c;
  c.gamma = r.f64();
  c.tau = r.f64();
  c.lr = r.f64();
  c.hidden_width = r.u32();
  c.hidden_depth = r.u32();
  c.batch_size = r.u32();
  c.utd = r.u32();
  c.alpha = r.f64();
  c.policy_noise = r.f64();
  c.noise_clip = r.f64();
  c.policy_delay = r.u32();
  c.lambda_floor = r.f64();
  c.init_temperature = r.f64();
  c.learn_temperature = r.u8() != 0;
  const bool has_target = r.u8() != 0;
  const double target = r.f64();
  if (has_target) c.target_entropy = target;
  try {
    c.validate();
  } catch (const Error& e) {
    r.fail(std::string("invalid agent config: ") + e.what());
  }
  return c;
}

void write_header(io::ByteWriter& w, const char* kind, std::size_t sd,
                  std::size_t ad, double max_action, const AgentConfig& c,
                  const StateNormalizer& norm) {
  w.bytes(kAgentMagic);
  w.str(kind);
  w.u32(static_cast<std::uint32_t>(sd));
  w.u32(static_cast<std::uint32_t>(ad));
  w.f64(max_action);
  write_config(w, c);
  w.f32s(norm.mean);
  w.f32s(norm.std);
}

struct Header {
  std::string kind;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double max_action = 1.0;
  AgentConfig config;
  StateNormalizer norm;
};

Header read_header(io::ByteReader& r) {
  Header h;
  r.expect_magic(kAgentMagic);
  h.kind = r.str();
  h.state_dim = r.u32();
  h.action_dim = r.u32();
  h.max_action = r.f64();
  if (h.state_dim == 0 || h.action_dim == 0 || !(h.max_action > 0.0)) {
    r.fail("invalid agent dimensions");
  }
  h.config = read_config(r);
  h.norm.mean.resize(h.state_dim);
  h.norm.std.resize(h.state_dim);
  r.f32s(h.norm.mean);
  r.f32s(h.norm.std);
  return h;
}

void check_net(io::ByteReader& r, const nn::Mlp<float>& net, std::size_t in,
               std::size_t out) {
  if (net.in_dim() != in || net.out_dim() != out) {
    r.fail("agent network shape does not match header");
  }
}

Matrix<float> row_matrix(std::span<const float> obs) {
  Matrix<float> m(1, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) m(0, Eigen::Index(i)) = obs[i];
  return m;
}

double mean_sq(const Matrix<float>& a, const Matrix<float>& b) {
  return (a - b).cast<double>().array().square().mean();
}

constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

void AgentConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    require(ok, ErrorCode::kConfig, std::string("agent: ") + what);
  };
  check(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
  check(tau > 0.0 && tau <= 1.0, "tau must be in (0, 1]");
  check(lr > 0.0 && std::isfinite(lr), "lr must be positive");
  check(hidden_width > 0 && hidden_depth > 0, "hidden layers must be non-empty");
  check(batch_size > 0, "batch_size must be positive");
  check(utd > 0, "utd must be positive");
  check(alpha >= 0.0, "alpha must be non-negative");
  check(policy_noise >= 0.0 && noise_clip >= 0.0, "policy noise must be >= 0");
  check(policy_delay > 0, "policy_delay must be positive");
  check(lambda_floor > 0.0, "lambda_floor must be positive");
  check(init_temperature > 0.0, "init_temperature must be positive");
  check(!target_entropy || std::isfinite(*target_entropy),
        "target_entropy must be finite");
}

AgentConfig AgentConfig::larger() {
  AgentConfig c;
  c.hidden_width = 512;
  c.hidden_depth = 3;
  c.batch_size = 1024;
  return c;
}

Batch make_batch(std::span<const float> rows, const TransitionSchema& schema) {
  const std::size_t rd = schema.row_dim();
  require(rd > 0 && rows.size() % rd == 0, ErrorCode::kInvalidInput,
          "batch rows do not match schema");
  const auto n = static_cast<Eigen::Index>(rows.size() / rd);
  const auto sd = static_cast<Eigen::Index>(schema.state_dim());
  const auto ad = static_cast<Eigen::Index>(schema.action_dim());
  Eigen::Map<const Matrix<float>> m(rows.data(), n, Eigen::Index(rd));
  Batch b;
  b.state = m.middleCols(Eigen::Index(schema.state_offset()), sd);
  b.action = m.middleCols(Eigen::Index(schema.action_offset()), ad);
  b.reward = m.middleCols(Eigen::Index(schema.reward_offset()), 1);
  b.next_state = m.middleCols(Eigen::Index(schema.next_state_offset()), sd);
  if (schema.has_terminal()) {
    b.done = m.middleCols(Eigen::Index(schema.terminal_offset()), 1);
  } else {
    b.done = Matrix<float>::Zero(n, 1);
  }
  return b;
}

Batch make_batch(const TransitionDataset& rows) {
  return make_batch(rows.data(), rows.schema());
}

StateNormalizer StateNormalizer::identity(std::size_t dim) {
  return {std::vector<float>(dim, 0.0f), std::vector<float>(dim, 1.0f)};
}

StateNormalizer StateNormalizer::fit(const TransitionDataset& data, double eps) {
  const auto& schema = data.schema();
  const std::size_t sd = schema.state_dim();
  require(data.count() > 0, ErrorCode::kUnavailableData,
          "cannot fit state normalizer on an empty dataset");
  std::vector<double> mean(sd, 0.0), sq(sd, 0.0);
  for (std::size_t i = 0; i < data.count(); ++i) {
    auto row = data.row(i);
    for (std::size_t j = 0; j < sd; ++j) mean[j] += row[schema.state_offset() + j];
  }
  for (auto& m : mean) m /= double(data.count());
  for (std::size_t i = 0; i < data.count(); ++i) {
    auto row = data.row(i);
    for (std::size_t j = 0; j < sd; ++j) {
      const double d = row[schema.state_offset() + j] - mean[j];
      sq[j] += d * d;
    }
  }
  StateNormalizer n;
  for (std::size_t j = 0; j < sd; ++j) {
    n.mean.push_back(static_cast<float>(mean[j]));
    n.std.push_back(static_cast<float>(std::sqrt(sq[j] / double(data.count())) + eps));
  }
  return n;
}

Matrix<float> StateNormalizer::apply(const Matrix<float>& states) const {
  Matrix<float> out(states.rows(), states.cols());
  for (Eigen::Index j = 0; j < states.cols(); ++j) {
    out.col(j) = (states.col(j).array() - mean[std::size_t(j)]) / std[std::size_t(j)];
  }
  return out;
}

// ---------------------------------------------------------------- TD3+BC

Td3Bc::Td3Bc(std::size_t state_dim, std::size_t action_dim, double max_action,
             const AgentConfig& config, std::uint64_t seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      max_action_(max_action),
      config_(config),
      obs_norm_(StateNormalizer::identity(state_dim)) {
  config_.validate();
  require(state_dim > 0 && action_dim > 0 && max_action > 0.0,
          ErrorCode::kInvalidInput, "td3bc: invalid dimensions");
  actor_ = nn::Mlp<float>(layer_sizes(state_dim, action_dim, config_),
                          stream_key(seed, 1));
  q1_ = nn::Mlp<float>(layer_sizes(state_dim + action_dim, 1, config_),
                       stream_key(seed, 2));
  q2_ = nn::Mlp<float>(layer_sizes(state_dim + action_dim, 1, config_),
                       stream_key(seed, 3));
  actor_t_ = actor_;
  q1_t_ = q1_;
  q2_t_ = q2_;
  actor_opt_ = nn::AdamState<float>(actor_.parameter_count());
  q1_opt_ = nn::AdamState<float>(q1_.parameter_count());
  q2_opt_ = nn::AdamState<float>(q2_.parameter_count());
}

Matrix<float> Td3Bc::policy(const nn::Mlp<float>& net,
                            const Matrix<float>& states) const {
  Matrix<float> out;
  net.forward(states, out);
  return (out.array().tanh() * float(max_action_)).matrix();
}

Matrix<float> Td3Bc::critic_target(const Batch& batch, Rng& rng) const {
  const Matrix<float> ns = obs_norm_.apply(batch.next_state);
  Matrix<float> next_action = policy(actor_t_, ns);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double clip = config_.noise_clip * max_action_;
  for (Eigen::Index i = 0; i < next_action.rows(); ++i) {
    for (Eigen::Index j = 0; j < next_action.cols(); ++j) {
      const double noise = std::clamp(
          normal(rng) * config_.policy_noise * max_action_, -clip, clip);
      next_action(i, j) = static_cast<float>(std::clamp(
          double(next_action(i, j)) + noise, -max_action_, max_action_));
    }
  }
  const Matrix<float> sa = concat(ns, next_action);
  Matrix<float> t1, t2;
  q1_t_.forward(sa, t1);
  q2_t_.forward(sa, t2);
  Matrix<float> y(t1.rows(), 1);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double q = std::min(t1(i, 0), t2(i, 0));
    y(i, 0) = static_cast<float>(batch.reward(i, 0) +
                                 config_.gamma * (1.0 - batch.done(i, 0)) * q);
  }
  return y;
}

std::vector<float> Td3Bc::actor_gradient(const Batch& batch, double* lambda,
                                         double* loss) const {
  const Matrix<float> s = obs_norm_.apply(batch.state);
  const auto n = s.rows();
  const auto ad = Eigen::Index(action_dim_);
  nn::MlpCache<float> actor_cache;
  Matrix<float> u;
  actor_.forward(s, u, actor_cache);
  const Matrix<float> th = u.array().tanh().matrix();
  const Matrix<float> pi = (th.array() * float(max_action_)).matrix();

  nn::MlpCache<float> q_cache;
  Matrix<float> q;
  q1_.forward(concat(s, pi), q, q_cache);
  const double mean_abs_q = q.cast<double>().array().abs().mean();
  const double lam = config_.alpha / std::max(mean_abs_q, config_.lambda_floor);
  std::vector<float> critic_grads;
  Matrix<float> sa_grad;
  q1_.backward(q_cache, Matrix<float>::Ones(n, 1), critic_grads, &sa_grad);

  Matrix<float> du(n, ad);
  double bc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < ad; ++j) {
      const double diff = double(pi(i, j)) - batch.action(i, j);
      bc += diff * diff;
      const double dpi = (-lam * sa_grad(i, s.cols() + j) + 2.0 * diff) / double(n);
      const double t = th(i, j);
      du(i, j) = static_cast<float>(dpi * max_action_ * (1.0 - t * t));
    }
  }
  if (lambda) *lambda = lam;
  if (loss) *loss = -lam * q.cast<double>().mean() + bc / double(n);
  std::vector<float> grads;
  actor_.backward(actor_cache, du, grads);
  return grads;
}

Td3BcLosses Td3Bc::update(const Batch& batch, Rng& rng) {
  Td3BcLosses out;
  const Matrix<float> y = critic_target(batch, rng);
  const Matrix<float> sa = concat(obs_norm_.apply(batch.state), batch.action);
  const auto n = sa.rows();
  double critic_loss = 0.0;
  for (auto [net, opt] : {std::pair{&q1_, &q1_opt_}, std::pair{&q2_, &q2_opt_}}) {
    nn::MlpCache<float> cache;
    Matrix<float> q;
    net->forward(sa, q, cache);
    critic_loss += mean_sq(q, y);
    const Matrix<float> dq = ((q - y) * (2.0f / float(n))).eval();
    std::vector<float> grads;
    net->backward(cache, dq, grads);
    nn::adam_step<float>(*opt, net->parameters(), grads, config_.lr);
  }
  out.critic_loss = critic_loss;
  ++updates_;
  if (updates_ % config_.policy_delay == 0) {
    const std::vector<float> grads =
        actor_gradient(batch, &out.lambda, &out.actor_loss);
    nn::adam_step<float>(actor_opt_, actor_.parameters(), grads, config_.lr);
    polyak(q1_t_, q1_, config_.tau);
    polyak(q2_t_, q2_, config_.tau);
    polyak(actor_t_, actor_, config_.tau);
    out.actor_updated = true;
  }
  require(std::isfinite(out.critic_loss) && std::isfinite(out.actor_loss),
          ErrorCode::kNumeric, "td3bc: non-finite loss");
  return out;
}

std::vector<float> Td3Bc::act(std::span<const float> obs, bool, Rng&) const {
  require(obs.size() == state_dim_, ErrorCode::kInvalidInput,
          "td3bc: observation size mismatch");
  const Matrix<float> a = policy(actor_, obs_norm_.apply(row_matrix(obs)));
  return {a.data(), a.data() + a.size()};
}

std::string Td3Bc::encode() const {
  io::ByteWriter w;
  write_header(w, kind(), state_dim_, action_dim_, max_action_, config_, obs_norm_);
  nn::write_mlp(w, actor_);
  nn::write_mlp(w, q1_);
  nn::write_mlp(w, q2_);
  return w.buffer();
}

std::unique_ptr<Td3Bc> Td3Bc::decode(io::ByteReader& r) {
  Header h = read_header(r);
  if (h.kind != "td3bc") r.fail("expected a td3bc agent");
  auto agent = std::make_unique<Td3Bc>(h.state_dim, h.action_dim, h.max_action,
                                       h.config, 0);
  agent->obs_norm_ = std::move(h.norm);
  agent->actor_ = nn::read_mlp(r);
  check_net(r, agent->actor_, h.state_dim, h.action_dim);
  agent->q1_ = nn::read_mlp(r);
  check_net(r, agent->q1_, h.state_dim + h.action_dim, 1);
  agent->q2_ = nn::read_mlp(r);
  check_net(r, agent->q2_, h.state_dim + h.action_dim, 1);
  agent->actor_t_ = agent->actor_;
  agent->q1_t_ = agent->q1_;
  agent->q2_t_ = agent->q2_;
  agent->actor_opt_ = nn::AdamState<float>(agent->actor_.parameter_count());
  agent->q1_opt_ = nn::AdamState<float>(agent->q1_.parameter_count());
  agent->q2_opt_ = nn::AdamState<float>(agent->q2_.parameter_count());
  return agent;
}

// ---------------------------------------------------------------- SAC

Sac::Sac(std::size_t state_dim, std::size_t action_dim, double max_action,
         const AgentConfig& config, std::uint64_t seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      max_action_(max_action),
      config_(config) {
  config_.validate();
  require(state_dim > 0 && action_dim > 0 && max_action > 0.0,
          ErrorCode::kInvalidInput, "sac: invalid dimensions");
  target_entropy_ = config_.target_entropy.value_or(-double(action_dim));
  log_alpha_ = std::log(config_.init_temperature);
  actor_ = nn::Mlp<float>(layer_sizes(state_dim, 2 * action_dim, config_),
                          stream_key(seed, 1));
  q1_ = nn::Mlp<float>(layer_sizes(state_dim + action_dim, 1, config_),
                       stream_key(seed, 2));
  q2_ = nn::Mlp<float>(layer_sizes(state_dim + action_dim, 1, config_),
                       stream_key(seed, 3));
  q1_t_ = q1_;
  q2_t_ = q2_;
  actor_opt_ = nn::AdamState<float>(actor_.parameter_count());
  q1_opt_ = nn::AdamState<float>(q1_.parameter_count());
  q2_opt_ = nn::AdamState<float>(q2_.parameter_count());
  alpha_opt_ = nn::AdamState<double>(1);
}

double Sac::temperature() const noexcept { return std::exp(log_alpha_); }

double Sac::log_prob(std::span<const float> u, std::span<const float> xi,
                     std::span<const float> log_std) {
  double lp = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double x = u[j];
    // log(1 - tanh(x)^2) = 2 (log 2 - x - softplus(-2x))
    const double softplus = std::max(-2.0 * x, 0.0) + std::log1p(std::exp(-std::abs(2.0 * x)));
    const double log_det = 2.0 * (std::numbers::ln2 - x - softplus);
    lp += -0.5 * double(xi[j]) * xi[j] - log_std[j] - kHalfLog2Pi - log_det;
  }
  return lp;
}

Sac::PolicySample Sac::sample_policy(const Matrix<float>& states, Rng& rng) const {
  const auto n = states.rows();
  const auto ad = Eigen::Index(action_dim_);
  Matrix<float> out;
  actor_.forward(states, out);
  PolicySample p;
  p.mean = out.leftCols(ad);
  p.raw_log_std = out.rightCols(ad);
  p.log_std = p.raw_log_std.cwiseMax(float(kLogStdMin)).cwiseMin(float(kLogStdMax));
  p.noise.resize(n, ad);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < ad; ++j) p.noise(i, j) = normal(rng);
  }
  p.pre_tanh = (p.mean.array() + p.log_std.array().exp() * p.noise.array()).matrix();
  p.action = (p.pre_tanh.array().tanh() * float(max_action_)).matrix();
  p.log_prob.resize(std::size_t(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    p.log_prob[std::size_t(i)] =
        log_prob({p.pre_tanh.row(i).data(), action_dim_},
                 {p.noise.row(i).data(), action_dim_},
                 {p.log_std.row(i).data(), action_dim_});
  }
  return p;
}

Matrix<float> Sac::critic_target(const Batch& batch, Rng& rng) const {
  const PolicySample next = sample_policy(batch.next_state, rng);
  const Matrix<float> sa = concat(batch.next_state, next.action);
  Matrix<float> t1, t2;
  q1_t_.forward(sa, t1);
  q2_t_.forward(sa, t2);
  const double alpha = temperature();
  Matrix<float> y(t1.rows(), 1);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double v = std::min(t1(i, 0), t2(i, 0)) - alpha * next.log_prob[std::size_t(i)];
    y(i, 0) = static_cast<float>(batch.reward(i, 0) +
                                 config_.gamma * (1.0 - batch.done(i, 0)) * v);
  }
  return y;
}

SacLosses Sac::update(const Batch& batch, Rng& rng) {
  SacLosses out;
  const auto n = batch.state.rows();
  const auto ad = Eigen::Index(action_dim_);
  const Matrix<float> y = critic_target(batch, rng);
  const Matrix<float> sa = concat(batch.state, batch.action);
  for (auto [net, opt] : {std::pair{&q1_, &q1_opt_}, std::pair{&q2_, &q2_opt_}}) {
    nn::MlpCache<float> cache;
    Matrix<float> q;
    net->forward(sa, q, cache);
    out.critic_loss += mean_sq(q, y);
    const Matrix<float> dq = ((q - y) * (2.0f / float(n))).eval();
    std::vector<float> grads;
    net->backward(cache, dq, grads);
    nn::adam_step<float>(*opt, net->parameters(), grads, config_.lr);
  }

  // Actor: mean(alpha log pi(a|s) - min(Q1, Q2)(s, a)) with a reparameterized.
  const double alpha = temperature();
  nn::MlpCache<float> actor_cache;
  Matrix<float> raw;
  actor_.forward(batch.state, raw, actor_cache);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  Matrix<float> xi(n, ad), u(n, ad), ls(n, ad), act(n, ad);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < ad; ++j) {
      xi(i, j) = normal(rng);
      ls(i, j) = std::clamp(raw(i, ad + j), float(kLogStdMin), float(kLogStdMax));
      u(i, j) = raw(i, j) + std::exp(ls(i, j)) * xi(i, j);
      act(i, j) = std::tanh(u(i, j)) * float(max_action_);
    }
  }
  const Matrix<float> sa_pi = concat(batch.state, act);
  nn::MlpCache<float> c1, c2;
  Matrix<float> q1, q2;
  q1_.forward(sa_pi, q1, c1);
  q2_.forward(sa_pi, q2, c2);
  Matrix<float> g1 = Matrix<float>::Zero(n, 1), g2 = Matrix<float>::Zero(n, 1);
  std::vector<double> logp(static_cast<std::size_t>(n));
  double actor_loss = 0.0, mean_logp = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    logp[std::size_t(i)] = log_prob({u.row(i).data(), action_dim_},
                                    {xi.row(i).data(), action_dim_},
                                    {ls.row(i).data(), action_dim_});
    mean_logp += logp[std::size_t(i)];
    const bool first = q1(i, 0) <= q2(i, 0);
    (first ? g1 : g2)(i, 0) = 1.0f;
    actor_loss += alpha * logp[std::size_t(i)] - std::min(q1(i, 0), q2(i, 0));
  }
  mean_logp /= double(n);
  out.actor_loss = actor_loss / double(n);
  std::vector<float> unused;
  Matrix<float> dq1, dq2;
  q1_.backward(c1, g1, unused, &dq1);
  q2_.backward(c2, g2, unused, &dq2);
  Matrix<float> draw(n, 2 * ad);
  const auto sd = batch.state.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < ad; ++j) {
      const double t = std::tanh(double(u(i, j)));
      const double dq_da = double(dq1(i, sd + j)) + double(dq2(i, sd + j));
      // d log pi / du = 2 tanh(u); d log pi / d log_std = -1 (direct term)
      const double du =
          (alpha * 2.0 * t - dq_da * max_action_ * (1.0 - t * t)) / double(n);
      draw(i, j) = static_cast<float>(du);
      const bool in_range = raw(i, ad + j) >= float(kLogStdMin) &&
                            raw(i, ad + j) <= float(kLogStdMax);
      const double dls = in_range
          ? du * std::exp(double(ls(i, j))) * xi(i, j) - alpha / double(n)
          : 0.0;
      draw(i, ad + j) = static_cast<float>(dls);
    }
  }
  std::vector<float> actor_grads;
  actor_.backward(actor_cache, draw, actor_grads);
  nn::adam_step<float>(actor_opt_, actor_.parameters(), actor_grads, config_.lr);

  out.entropy = -mean_logp;
  if (config_.learn_temperature) {
    // loss = -log_alpha (log pi + target_entropy)
    out.temperature_loss = -log_alpha_ * (mean_logp + target_entropy_);
    const double g = -(mean_logp + target_entropy_);
    std::vector<double> la{log_alpha_};
    nn::adam_step<double>(alpha_opt_, la, std::span<const double>(&g, 1), config_.lr);
    log_alpha_ = la[0];
  }
  out.temperature = temperature();
  polyak(q1_t_, q1_, config_.tau);
  polyak(q2_t_, q2_, config_.tau);
  require(std::isfinite(out.critic_loss) && std::isfinite(out.actor_loss),
          ErrorCode::kNumeric, "sac: non-finite loss");
  return out;
}

std::vector<float> Sac::act(std::span<const float> obs, bool deterministic,
                            Rng& rng) const {
  require(obs.size() == state_dim_, ErrorCode::kInvalidInput,
          "sac: observation size mismatch");
  const Matrix<float> s = row_matrix(obs);
  if (!deterministic) {
    const PolicySample p = sample_policy(s, rng);
    return {p.action.data(), p.action.data() + p.action.size()};
  }
  Matrix<float> out;
  actor_.forward(s, out);
  std::vector<float> a(action_dim_);
  for (std::size_t j = 0; j < action_dim_; ++j) {
    a[j] = std::tanh(out(0, Eigen::Index(j))) * float(max_action_);
  }
  return a;
}

std::string Sac::encode() const {
  io::ByteWriter w;
  write_header(w, kind(), state_dim_, action_dim_, max_action_, config_,
               StateNormalizer::identity(state_dim_));
  nn::write_mlp(w, actor_);
  nn::write_mlp(w, q1_);
  nn::write_mlp(w, q2_);
  w.f64(log_alpha_);
  return w.buffer();
}

std::unique_ptr<Sac> Sac::decode(io::ByteReader& r) {
  Header h = read_header(r);
  if (h.kind != "sac") r.fail("expected a sac agent");
  auto agent = std::make_unique<Sac>(h.state_dim, h.action_dim, h.max_action,
                                     h.config, 0);
  agent->actor_ = nn::read_mlp(r);
  check_net(r, agent->actor_, h.state_dim, 2 * h.action_dim);
  agent->q1_ = nn::read_mlp(r);
  check_net(r, agent->q1_, h.state_dim + h.action_dim, 1);
  agent->q2_ = nn::read_mlp(r);
  check_net(r, agent->q2_, h.state_dim + h.action_dim, 1);
  agent->log_alpha_ = r.f64();
  agent->q1_t_ = agent->q1_;
  agent->q2_t_ = agent->q2_;
  agent->actor_opt_ = nn::AdamState<float>(agent->actor_.parameter_count());
  agent->q1_opt_ = nn::AdamState<float>(agent->q1_.parameter_count());
  agent->q2_opt_ = nn::AdamState<float>(agent->q2_.parameter_count());
  return agent;
}

// ---------------------------------------------------------------- misc

void save_agent(const Agent& agent, const std::string& path) {
  io::write_file(path, agent.encode());
}

std::unique_ptr<Agent> decode_agent(std::string bytes, const std::string& source) {
  std::string kind;
  {
    io::ByteReader peek(bytes, source);
    peek.expect_magic(kAgentMagic);
    kind = peek.str();
  }
  io::ByteReader r(std::move(bytes), source);
  std::unique_ptr<Agent> agent;
  if (kind == "td3bc") {
    agent = Td3Bc::decode(r);
  } else if (kind == "sac") {
    agent = Sac::decode(r);
  } else {
    r.fail("unknown agent kind '" + kind + "'");
  }
  if (!r.at_end()) r.fail("trailing bytes after agent checkpoint");
  return agent;
}

std::unique_ptr<Agent> load_agent(const std::string& path) {
  return decode_agent(io::read_file(path), path);
}

EvalResult evaluate_policy(const envs::Env& env, const Agent& agent,
                           std::size_t episodes, std::uint64_t seed) {
  require(episodes > 0, ErrorCode::kInvalidInput,
          "evaluation needs at least one episode");
  EvalResult result;
  auto e = env.clone();
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    Rng rng = make_rng(seed, 0xe7a1, ep);
    auto start = e->reset(rng);
    std::vector<float> obs(start.begin(), start.end());
    double ret = 0.0;
    for (;;) {
      const std::vector<float> a = agent.act(obs, true, rng);
      const envs::StepResult step = e->step(a);
      ret += step.reward;
      if (step.terminal || step.truncated) break;
      obs = step.next_state;
    }
    result.returns.push_back(ret);
  }
  double sum = 0.0;
  for (double r : result.returns) sum += r;
  result.mean = sum / double(episodes);
  double sq = 0.0;
  for (double r : result.returns) sq += (r - result.mean) * (r - result.mean);
  result.std = std::sqrt(sq / double(episodes));
  return result;
}

envs::Policy agent_policy(std::shared_ptr<const Agent> agent,
                          const envs::EnvSpec& spec, double epsilon) {
  require(agent != nullptr, ErrorCode::kInvalidInput, "policy needs an agent");
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorCode::kInvalidInput,
          "epsilon must be in [0, 1]");
  return [agent, spec, epsilon](std::span<const float> obs, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (epsilon > 0.0 && u01(rng) < epsilon) {
      std::uniform_real_distribution<double> u(spec.action_low, spec.action_high);
      std::vector<float> a(spec.action_dim);
      for (auto& v : a) v = static_cast<float>(u(rng));
      return a;
    }
    return agent->act(obs, true, rng);
  };
}

}  // namespace synther::rl
