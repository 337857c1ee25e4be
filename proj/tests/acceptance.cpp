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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "synther/augment.hpp"
#include "synther/binary_io.hpp"
#include "synther/config.hpp"
#include "synther/dataset_io.hpp"
#include "synther/edm.hpp"
#include "synther/envs.hpp"
#include "synther/error.hpp"
#include "synther/gradcheck.hpp"
#include "synther/metrics.hpp"
#include "synther/pipeline.hpp"
#include "synther/rng.hpp"
#include "synther/training.hpp"

namespace fs = std::filesystem;
using namespace synther;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

void note(const std::string& s) {
  std::printf("    %s\n", s.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Agents and sizes shared by the offline criteria.
rl::AgentConfig offline_agent() {
  rl::AgentConfig a;
  a.hidden_width = 64;
  return a;
}

train::OfflineConfig offline_run(std::uint64_t seed) {
  train::OfflineConfig c;
  c.steps = 30'000;
  c.eval_every = 6'000;
  c.eval_episodes = 20;
  c.seed = seed;
  return c;
}

constexpr int kSeeds = 4;

double seed_mean_return(const envs::Env& env, const TransitionDataset& data,
                        const std::string& label) {
  double total = 0.0;
  std::string line = label + ":";
  for (int s = 0; s < kSeeds; ++s) {
    auto r = train::offline_train(env, offline_agent(), data, offline_run(s));
    total += r.trace.back().mean_return;
    line += fmt(" %.1f", r.trace.back().mean_return);
  }
  note(line + fmt("  mean %.2f", total / kSeeds));
  return total / kSeeds;
}

// ---------------------------------------------------------------------------

Outcome gradient_check() {
  const std::size_t dim = 12;
  nn::ResidualMLP<double> net({dim, dim, 64, 2, 16}, 3);
  std::mt19937_64 init(4);
  std::normal_distribution<double> small(0.0, 0.05);
  for (auto& p : net.parameters()) p += small(init);
  nn::Matrix<double> batch(8, Eigen::Index(dim));
  std::normal_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = unit(init);
  const edm::EdmConfig config;

  // Every evaluation replays the same sigma / noise stream.
  const Rng base = make_rng(7, 1);
  Rng rng = base;
  const auto analytic = edm::training_loss(net, config, batch, rng).grads;
  const auto numeric = nn::central_difference(net.parameters(), [&] {
    Rng r = base;
    return edm::training_loss(net, config, batch, r).loss;
  });
  const double err = nn::max_relative_error(analytic, numeric, 1e-6);
  return {err < 1e-4, fmt("%zu parameters, max relative error %.2e (< 1e-4)",
                          net.parameter_count(), err)};
}

Outcome gaussian_oracle() {
  const Eigen::Vector2d mu(1.0, -1.0);
  Eigen::Matrix2d cov;
  cov << 1.0, 0.8, 0.8, 1.0;
  const Eigen::Matrix2d chol = cov.llt().matrixL();
  Rng rng = make_rng(21, 1);
  std::normal_distribution<double> unit(0.0, 1.0);
  const Eigen::Index n = 100'000;
  nn::Matrix<float> data(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d e(unit(rng), unit(rng));
    data.row(i) = (mu + chol * e).transpose().cast<float>();
  }

  nn::ResidualMLP<float> net({2, 2, 128, 2, 16}, 5);
  const edm::EdmConfig config;
  nn::AdamState<float> adam;
  const std::size_t steps = 20'000, batch_size = 256;
  nn::Matrix<float> batch(Eigen::Index(batch_size), 2);
  for (std::size_t step = 0; step < steps; ++step) {
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
      batch.row(i) = data.row(Eigen::Index(uniform_index(rng, std::size_t(n))));
    }
    auto r = edm::training_loss(net, config, batch, rng);
    nn::adam_step<float>(adam, net.parameters(), r.grads,
                         nn::cosine_lr(step, steps, 3e-4));
  }

  const Eigen::Index samples = 50'000, block = 5'000;
  Eigen::MatrixXd out(samples, 2);
  std::normal_distribution<float> noise(0.0f, 1.0f);
  const edm::DenoiseFn<float> denoise = [&](const nn::Matrix<float>& x, double sigma,
                                            nn::Matrix<float>& o) {
    const std::vector<double> sigmas(std::size_t(x.rows()), sigma);
    edm::denoise_rows(net, config.sigma_data, x, sigmas, o);
  };
  const edm::NoiseFn<float> fill = [&](nn::Matrix<float>& eps) {
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = noise(rng);
  };
  for (Eigen::Index start = 0; start < samples; start += block) {
    nn::Matrix<float> x(block, 2);
    fill(x);
    x *= float(config.sigma_max);
    edm::run_sampler<float>(denoise, x, config, fill);
    out.middleRows(start, block) = x.cast<double>();
  }
  const Eigen::RowVector2d mean = out.colwise().mean();
  const Eigen::MatrixXd centered = out.rowwise() - mean;
  const Eigen::Matrix2d c = centered.transpose() * centered / double(samples - 1);
  const double mean_err = (mean.transpose() - mu).cwiseAbs().maxCoeff();
  const double cov_err = (c - cov).cwiseAbs().maxCoeff();
  return {mean_err <= 0.05 && cov_err <= 0.08,
          fmt("mean (%.3f, %.3f) err %.3f (<= 0.05); cov [[%.3f, %.3f], [%.3f, %.3f]] "
              "err %.3f (<= 0.08)",
              mean(0), mean(1), mean_err, c(0, 0), c(0, 1), c(1, 0), c(1, 1), cov_err)};
}

// E|W| for W ~ N(0, C) in 2-D: sqrt(pi/2) times the angular mean of
// |L u(theta)|, by the trapezoid rule.
double expected_norm(const Eigen::Matrix2d& c) {
  const Eigen::Matrix2d l = c.llt().matrixL();
  const int k = 4096;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    const double t = 2.0 * M_PI * i / k;
    total += (l * Eigen::Vector2d(std::cos(t), std::sin(t))).norm();
  }
  return std::sqrt(M_PI / 2.0) * total / k;
}

Outcome sampler_order() {
  using M = nn::Matrix<double>;
  const Eigen::Vector2d mu(1.0, -1.0);
  Eigen::Matrix2d cov;
  cov << 1.0, 0.8, 0.8, 1.0;
  // Optimal denoiser for a Gaussian: E[x | x + sigma n].
  const edm::DenoiseFn<double> denoise = [&](const M& x, double sigma, M& out) {
    const Eigen::Matrix2d k =
        cov * (cov + sigma * sigma * Eigen::Matrix2d::Identity()).inverse();
    out = ((x.rowwise() - mu.transpose()) * k.transpose()).rowwise() + mu.transpose();
  };
  // Each step is affine and fixes mu: from N(mu, cov + sigma_max^2 I) the
  // sampler yields exactly N(mu, A S A^T), with A read off from mu + e_i.
  std::vector<double> energy;
  std::string detail = "energy distance";
  for (std::size_t steps : {16, 32, 64}) {
    edm::EdmConfig c;
    c.s_churn = 0.0;
    c.steps = steps;
    M x(3, 2);
    x.row(0) = mu.transpose();
    x.row(1) = (mu + Eigen::Vector2d(1.0, 0.0)).transpose();
    x.row(2) = (mu + Eigen::Vector2d(0.0, 1.0)).transpose();
    edm::run_sampler<double>(denoise, x, c, [](M&) {});
    Eigen::Matrix2d a;
    a.col(0) = (x.row(1) - x.row(0)).transpose();
    a.col(1) = (x.row(2) - x.row(0)).transpose();
    const Eigen::Matrix2d start =
        cov + c.sigma_max * c.sigma_max * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d out = a * start * a.transpose();
    energy.push_back(2.0 * expected_norm(out + cov) - expected_norm(2.0 * out) -
                     expected_norm(2.0 * cov));
    detail += fmt(" N=%zu:%.3e", steps, energy.back());
  }
  return {energy[0] > energy[1] && energy[1] > energy[2], detail + " (decreasing)"};
}

// PointMass2D data shared by criteria 4 to 7.
struct PointMassData {
  std::unique_ptr<envs::Env> env;
  TransitionDataset real, held, synthetic;
  std::size_t model_parameters = 0;
};

std::shared_ptr<PointMassData> point_mass_data() {
  static std::shared_ptr<PointMassData> cached;
  if (cached) return cached;
  auto d = std::make_shared<PointMassData>();
  const auto t0 = Clock::now();
  d->env = envs::make_env("pointmass2d");

  // Mixed policy: a briefly trained SAC agent with 30% random actions.
  rl::AgentConfig ac;
  ac.hidden_width = 64;
  ac.batch_size = 128;
  train::PlainSacConfig pc;
  pc.total_steps = 3'000;
  pc.eval_every = 1'000;
  pc.seed = 11;
  std::shared_ptr<const rl::Agent> agent = train::plain_sac_train(*d->env, ac, pc).agent;
  const auto policy = rl::agent_policy(agent, d->env->spec(), 0.3);
  d->real = envs::collect_dataset(*d->env, policy, 50'000, 1);
  d->held = envs::collect_dataset(*d->env, policy, 50'000, 2);

  edm::DiffusionModel model(d->real.schema(), {128, 3, 16}, {}, fit_normalizer(d->real), 5);
  edm::TrainConfig tc;
  tc.steps = 20'000;
  tc.seed = 5;
  edm::train(model, d->real, tc);
  d->model_parameters = model.parameter_count();
  note(fmt("data: 2x50K mixed-policy rows, %zu-parameter model trained (%.0f s)",
           d->model_parameters, seconds_since(t0)));
  const auto t1 = Clock::now();
  d->synthetic = edm::generate(model, 500'000, 9);
  note(fmt("data: 500K synthetic rows generated (%.0f s)", seconds_since(t1)));
  cached = d;
  return d;
}

TransitionDataset head(const TransitionDataset& data, std::size_t rows) {
  TransitionDataset out(data.schema());
  for (std::size_t i = 0; i < rows; ++i) out.append_row(data.row(i));
  return out;
}

Outcome fidelity() {
  auto d = point_mass_data();
  const auto synth = head(d->synthetic, 100'000);
  metrics::ReportOptions opts;
  opts.max_rows = 100'000;
  const auto r = metrics::fidelity_report(d->held, synth, opts);
  return {r.marginal >= 0.95 && r.correlation >= 0.95,
          fmt("marginal %.4f (>= 0.95), correlation %.4f (>= 0.95), "
              "%zu held-out vs %zu synthetic rows",
              r.marginal, r.correlation, r.real_rows, r.synth_rows)};
}

double median_valid(const std::vector<double>& v) {
  std::vector<double> ok;
  for (double x : v) {
    if (!std::isnan(x)) ok.push_back(x);
  }
  return metrics::median(ok);
}

Outcome augmentation_contrast() {
  auto d = point_mass_data();
  const std::size_t rows = 10'000;
  const auto diffusion = head(d->synthetic, rows);
  // The upsampler keeps the originals first and appends augmented copies.
  const auto up = augment::upsample_with_augmentation(
      d->real, augment::AugmentationScheme::additive(0.1), d->real.count() + rows, 4);
  TransitionDataset additive(d->real.schema());
  for (std::size_t i = d->real.count(); i < up.count(); ++i) additive.append_row(up.row(i));

  const Normalizer norm = fit_normalizer(d->real);
  const double dist_diff = metrics::median(metrics::min_l2_distances(diffusion, d->real, norm));
  const double dist_add = metrics::median(metrics::min_l2_distances(additive, d->real, norm));
  const double mse_diff = median_valid(metrics::dynamics_mse(diffusion, *d->env).per_row);
  const double mse_add = median_valid(metrics::dynamics_mse(additive, *d->env).per_row);
  const double dist_held = metrics::median(
      metrics::min_l2_distances(head(d->held, rows), d->real, norm));
  note(fmt("reference: held-out real rows have median min-L2 %.4f", dist_held));
  const bool mse_ok = mse_diff < mse_add;
  const bool dist_ok = dist_diff >= dist_add;
  return {mse_ok && dist_ok,
          fmt("median dynamics MSE diffusion %.3e vs additive %.3e (%s); "
              "median min-L2 diffusion %.4f vs additive %.4f (%s)",
              mse_diff, mse_add, mse_ok ? "lower, ok" : "not lower", dist_diff,
              dist_add, dist_ok ? ">=, ok" : "smaller")};
}

double random_policy_return(const envs::Env& prototype, std::size_t episodes) {
  auto env = prototype.clone();
  const auto policy = envs::random_policy(env->spec());
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng rng = make_rng(0, 0xe7a1, e);
    auto s = env->reset(rng);
    std::vector<float> obs(s.begin(), s.end());
    while (true) {
      const auto step = env->step(policy(obs, rng));
      total += step.reward;
      obs = step.next_state;
      if (step.terminal || step.truncated) break;
    }
  }
  return total / double(episodes);
}

Outcome offline_parity() {
  auto d = point_mass_data();
  const double real = seed_mean_return(*d->env, d->real, "real 50K");
  const double synth = seed_mean_return(*d->env, d->synthetic, "synthetic 500K");
  const double random = random_policy_return(*d->env, 200);
  // 90% of the way from the random policy to the real-data agent.
  const double ratio = (synth - random) / (real - random);
  return {ratio >= 0.9,
          fmt("seed-mean return real %.2f, synthetic %.2f, random policy %.2f; "
              "normalized ratio %.3f (>= 0.9)",
              real, synth, random, ratio)};
}

Outcome small_data() {
  auto d = point_mass_data();
  const auto small = subsample(d->real, 0.1, 3);
  edm::DiffusionModel model(small.schema(), {128, 3, 16}, {}, fit_normalizer(small), 1);
  edm::TrainConfig tc;
  tc.steps = 10'000;
  tc.seed = 2;
  edm::train(model, small, tc);
  TransitionDataset synther_set = small;
  synther_set.append(edm::generate(model, 10 * small.count() - small.count(), 5));
  const auto rad = augment::upsample_with_augmentation(
      small, augment::AugmentationScheme::additive(0.1), 10 * small.count(), 7);
  const double s = seed_mean_return(*d->env, synther_set, "synther upsampled");
  const double r = seed_mean_return(*d->env, rad, "additive upsampled");
  return {s > r, fmt("%zu-row subsample upsampled to %zu: seed-mean return synther %.2f "
                     "vs additive %.2f",
                     small.count(), synther_set.count(), s, r)};
}

// Seed-mean of the evaluation traces, indexed by evaluation.
std::vector<double> seed_mean_trace(const std::vector<std::vector<train::EvalRow>>& traces) {
  std::vector<double> mean(traces.front().size(), 0.0);
  for (const auto& t : traces) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t[i].mean_return / double(traces.size());
  }
  return mean;
}

Outcome online_efficiency() {
  auto env = envs::make_env("pendulum");
  rl::AgentConfig ac;
  ac.hidden_width = 64;
  ac.batch_size = 128;
  const std::size_t eval_every = 1'000, horizon = 30'000;

  std::vector<std::vector<train::EvalRow>> sac;
  for (int s = 0; s < kSeeds; ++s) {
    train::PlainSacConfig pc;
    pc.total_steps = horizon;
    pc.eval_every = eval_every;
    pc.seed = std::uint64_t(s);
    sac.push_back(train::plain_sac_train(*env, ac, pc).trace);
  }
  const auto sac_mean = seed_mean_trace(sac);
  const double threshold = sac_mean.back();
  std::size_t first = horizon;
  for (std::size_t i = 0; i < sac_mean.size(); ++i) {
    if (sac_mean[i] >= threshold) {
      first = sac[0][i].step;
      break;
    }
  }
  note(fmt("SAC U=1: threshold %.2f is the seed-mean at %zu steps (first reached at %zu)",
           threshold, horizon, first));

  train::OnlineConfig oc;
  oc.total_steps = horizon / 2;
  oc.eval_every = eval_every;
  oc.real_ratio = 0.5;
  oc.k_real = 1'000;
  oc.diffusion_steps = 3'000;
  oc.m_synthetic = 10'000;
  oc.synthetic_capacity = 100'000;
  oc.denoiser = {128, 3, 16};
  oc.edm.steps = 32;
  rl::AgentConfig fast = ac;
  fast.utd = 20;
  std::vector<std::unique_ptr<train::OnlineTrainer>> runs;
  for (int s = 0; s < kSeeds; ++s) {
    oc.seed = std::uint64_t(s);
    runs.push_back(std::make_unique<train::OnlineTrainer>(*env, fast, oc));
  }
  std::string curve = "SAC+SynthER U=20 seed-mean:";
  while (!runs.front()->done()) {
    double mean = 0.0;
    for (auto& r : runs) {
      r->advance(eval_every);
      mean += r->trace().back().mean_return / kSeeds;
    }
    const std::size_t step = runs.front()->step();
    curve += fmt(" %zu:%.1f", step, mean);
    if (mean >= threshold) {
      note(curve);
      return {true, fmt("threshold %.2f reached at %zu env steps vs %zu for SAC U=1 "
                        "(ratio %.2f <= 0.5)",
                        threshold, step, horizon, double(step) / double(horizon))};
    }
  }
  note(curve);
  return {false, fmt("threshold %.2f not reached within %zu env steps (SAC U=1: %zu)",
                     threshold, oc.total_steps, horizon)};
}

Outcome compression() {
  const double params = 6.5e6;
  const std::vector<std::pair<double, std::string>> cases = {
      {12.6e6, "1.9"}, {42e6, "6.5"}, {84e6, "12.9"}};
  bool ok = true;
  std::string detail;
  for (const auto& [floats, want] : cases) {
    const std::string got = metrics::format_ratio(metrics::compression_ratio(floats, params));
    ok = ok && got == want;
    detail += fmt("%.1fM -> %sx (want %sx); ", floats / 1e6, got.c_str(), want.c_str());
  }
  return {ok, detail + "6.5M parameters"};
}

std::map<std::string, std::string> pipeline_chain(const fs::path& out) {
  config::RunConfig c;
  const std::map<std::string, std::string> base = {
      {"run.out", out.string()},          {"run.seed", "13"},
      {"collect.count", "5000"},          {"denoiser.width", "64"},
      {"denoiser.depth", "2"},            {"diffusion.steps", "500"},
      {"diffusion.batch", "128"},         {"diffusion.log_every", "100"},
      {"edm.steps", "32"},                {"generate.count", "5000"},
      {"generate.chunk_rows", "1000"},    {"agent.hidden_width", "32"},
      {"agent.batch", "64"},              {"offline.steps", "1000"},
      {"offline.eval_every", "500"},      {"offline.eval_episodes", "3"},
      {"online.total_steps", "1500"},     {"online.warmup", "300"},
      {"online.eval_every", "500"},       {"online.eval_episodes", "2"},
      {"online.k_real", "500"},           {"online.m_synthetic", "1000"},
      {"online.diffusion_steps", "100"},  {"online.diffusion_batch", "64"},
      {"metrics.max_rows", "5000"},       {"metrics.scatter_rows", "500"},
      {"augment.factor", "2"},
  };
  for (const auto& [k, v] : base) c.set(k, v);

  std::map<std::string, std::string> files;
  int index = 0;
  auto keep = [&](const pipeline::RunResult& r) {
    const std::string tag = std::to_string(index++) + "-" +
                            fs::path(r.run_dir).filename().string().substr(
                                0, fs::path(r.run_dir).filename().string().rfind('-'));
    for (const auto& name : r.outputs) {
      const std::string ext = fs::path(name).extension().string();
      if (ext != ".bin" && ext != ".csv" && name != "summary.txt") continue;
      files[tag + "/" + name] = io::read_file((fs::path(r.run_dir) / name).string());
    }
    return fs::path(r.run_dir);
  };
  const fs::path collect = keep(pipeline::run("collect", c));
  const std::string data = (collect / "dataset.bin").string();
  c.set("diffusion.data", data);
  const fs::path model = keep(pipeline::run("diffusion-train", c));
  c.set("generate.model", (model / "model.bin").string());
  const fs::path gen = keep(pipeline::run("generate", c));
  c.set("metrics.real", data);
  c.set("metrics.synth", (gen / "synthetic.bin").string());
  keep(pipeline::run("metrics", c));
  c.set("augment.data", data);
  keep(pipeline::run("augment", c));
  c.set("offline.data", (gen / "synthetic.bin").string());
  const fs::path offline = keep(pipeline::run("offline", c));
  c.set("collect.policy", "mixed");
  c.set("collect.checkpoint", (offline / "agent.bin").string());
  c.set("collect.fraction", "0.5");
  keep(pipeline::run("collect", c));
  keep(pipeline::run("online", c));
  c.set("report.model", (model / "model.bin").string());
  keep(pipeline::run("report", c));
  return files;
}

fs::path work_root;

Outcome determinism() {
  const auto a = pipeline_chain(work_root / "determinism-a");
  const auto b = pipeline_chain(work_root / "determinism-b");
  std::size_t bytes = 0;
  std::vector<std::string> differing;
  for (const auto& [name, content] : a) {
    bytes += content.size();
    auto it = b.find(name);
    if (it == b.end() || it->second != content) differing.push_back(name);
  }
  if (a.size() != b.size()) differing.push_back("<file set>");
  std::string detail = fmt("%zu payload files (%zu bytes) across 9 pipeline runs", a.size(), bytes);
  for (const auto& n : differing) detail += "; differs: " + n;
  return {differing.empty() && !a.empty(), differing.empty() ? detail + ", byte-identical" : detail};
}

Outcome baseline_equivalence() {
  auto env = envs::make_env("pendulum");
  rl::AgentConfig ac;
  ac.hidden_width = 64;
  ac.batch_size = 128;
  std::size_t matched = 0;
  std::string detail;
  for (std::uint64_t seed : {0, 1}) {
    train::PlainSacConfig pc;
    pc.total_steps = 5'000;
    pc.eval_every = 1'000;
    pc.eval_episodes = 3;
    pc.seed = seed;
    const auto plain = train::plain_sac_train(*env, ac, pc);

    train::OnlineConfig oc;
    oc.total_steps = pc.total_steps;
    oc.warmup = pc.warmup;
    oc.eval_every = pc.eval_every;
    oc.eval_episodes = pc.eval_episodes;
    oc.real_capacity = pc.capacity;
    oc.generation = false;
    oc.real_ratio = 1.0;
    oc.seed = seed;
    train::OnlineTrainer online(*env, ac, oc);
    online.run();

    const bool buffer = encode_dataset(online.buffers().real().snapshot()) ==
                        encode_dataset(plain.transitions);
    const bool trace = train::trace_csv(online.trace(), "temperature") ==
                       train::trace_csv(plain.trace, "temperature");
    const bool weights = online.agent().encode() == plain.agent->encode();
    detail += fmt("seed %llu: transitions %s, trace %s, agent %s; ",
                  static_cast<unsigned long long>(seed), buffer ? "identical" : "DIFFER",
                  trace ? "identical" : "DIFFER", weights ? "identical" : "DIFFER");
    if (buffer && trace && weights) ++matched;
  }
  return {matched == 2, detail + fmt("%zu env steps each", std::size_t(5'000))};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synther acceptance checks"};
  std::vector<int> only;
  std::string work = (fs::temp_directory_path() / "synther_acceptance").string();
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);
  work_root = work;
  fs::remove_all(work_root);
  fs::create_directories(work_root);

  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradient_check},
      {2, "gaussian oracle", gaussian_oracle},
      {3, "sampler order", sampler_order},
      {4, "fidelity scores", fidelity},
      {5, "diffusion vs additive noise", augmentation_contrast},
      {6, "offline parity", offline_parity},
      {7, "small-data upsampling", small_data},
      {8, "online sample efficiency", online_efficiency},
      {9, "compression report", compression},
      {10, "determinism", determinism},
      {11, "baseline equivalence", baseline_equivalence},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    ++ran;
    if (!o.pass) ++failed;
    std::printf("%s  criterion %2d  %-28s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  fs::remove_all(work_root);
  return failed == 0 ? 0 : 1;
}
