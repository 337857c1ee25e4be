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

#include "synther/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synther/augment.hpp"
#include "synther/binary_io.hpp"
#include "synther/dataset_io.hpp"
#include "synther/edm.hpp"
#include "synther/envs.hpp"
#include "synther/error.hpp"
#include "synther/metrics.hpp"

namespace synther::pipeline {
namespace {

namespace fs = std::filesystem;

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class RunDir {
 public:
  RunDir(std::string path, RunResult& result) : path_(std::move(path)), result_(result) {
    std::error_code ec;
    fs::create_directories(path_, ec);
    require(!ec, ErrorCode::kIo, "cannot create run directory " + path_ + ": " + ec.message());
    result_.run_dir = path_;
    log_.open(file("run.log"), std::ios::app);
    require(bool(log_), ErrorCode::kIo, "cannot open " + file("run.log"));
  }

  std::string file(const std::string& name) const { return (fs::path(path_) / name).string(); }

  void write(const std::string& name, const std::string& content) {
    io::write_file(file(name), content);
    result_.outputs.push_back(name);
  }
  void save_dataset(const std::string& name, const TransitionDataset& d) {
    synther::save_dataset(d, file(name));
    result_.outputs.push_back(name);
  }
  void log(const std::string& line) { log_ << timestamp() << " " << line << "\n" << std::flush; }
  void summary(const std::string& key, const std::string& value) {
    result_.summary += key + "=" + value + "\n";
  }

 private:
  std::string path_;
  RunResult& result_;
  std::ofstream log_;
};

TransitionDataset load_input(const config::RunConfig& cfg, const char* key) {
  const std::string path = cfg.get(key);
  require(!path.empty(), ErrorCode::kConfig, std::string("missing required key ") + key);
  return load_dataset(path);
}

std::unique_ptr<envs::Env> env_for(const config::RunConfig& cfg, const char* key,
                                   const TransitionSchema& schema) {
  std::string name = cfg.get(key);
  if (name.empty()) {
    name = envs::env_for_schema(schema);
    require(!name.empty(), ErrorCode::kConfig,
            std::string("no built-in env matches dataset schema ") +
                schema.describe() + "; set " + key);
  }
  auto env = envs::make_env(name);
  const TransitionSchema expected = env->spec().schema();
  require(expected == schema, ErrorCode::kConfig,
          "dataset schema " + schema.describe() + " does not match env '" + name +
              "' schema " + expected.describe());
  return env;
}

std::string fmt(double v) { return format_double(v); }

std::string fmt_count(double v) {
  if (v == std::floor(v) && std::abs(v) < 9.0e15) {
    return std::to_string(static_cast<long long>(v));
  }
  return format_double(v);
}

void run_collect(const config::RunConfig& cfg, RunDir& dir) {
  const std::uint64_t seed = cfg.get_unsigned("run.seed");
  auto env = envs::make_env(cfg.get("collect.env"));
  const std::string policy_name = cfg.get("collect.policy");
  envs::Policy policy;
  if (policy_name == "random") {
    policy = envs::random_policy(env->spec());
  } else if (policy_name == "mixed" || policy_name == "expert") {
    const std::string ckpt = cfg.get("collect.checkpoint");
    require(!ckpt.empty(), ErrorCode::kConfig,
            "collect.policy=" + policy_name + " requires collect.checkpoint");
    std::shared_ptr<const rl::Agent> agent = rl::load_agent(ckpt);
    const double eps = policy_name == "mixed" ? cfg.get_double("collect.epsilon") : 0.0;
    policy = rl::agent_policy(agent, env->spec(), eps);
  } else {
    fail(ErrorCode::kConfig, "collect.policy must be random, mixed or expert, got '" +
                                 policy_name + "'");
  }
  const double fraction = cfg.get_double("collect.fraction");
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::kConfig,
          "collect.fraction must be in (0, 1]");
  TransitionDataset data =
      envs::collect_dataset(*env, policy, cfg.get_unsigned("collect.count"), seed);
  if (fraction < 1.0) {
    dir.save_dataset("full.bin", data);
    data = subsample(data, fraction, seed);
  }
  dir.save_dataset("dataset.bin", data);
  double reward = 0.0;
  std::size_t terminals = 0;
  const auto& schema = data.schema();
  for (std::size_t i = 0; i < data.count(); ++i) {
    auto row = data.row(i);
    reward += row[schema.reward_offset()];
    if (schema.has_terminal() && row[schema.terminal_offset()] != 0.0f) ++terminals;
  }
  dir.summary("rows", std::to_string(data.count()));
  dir.summary("terminals", std::to_string(terminals));
  dir.summary("mean_reward", fmt(data.count() ? reward / double(data.count()) : 0.0));
}

void run_diffusion_train(const config::RunConfig& cfg, RunDir& dir) {
  const TransitionDataset data = load_input(cfg, "diffusion.data");
  edm::DiffusionModel model(data.schema(), config::denoiser_shape(cfg),
                            config::edm_config(cfg), fit_normalizer(data),
                            cfg.get_unsigned("run.seed"));
  const edm::TrainConfig tc = config::diffusion_train_config(cfg);
  dir.log("training " + std::to_string(model.parameter_count()) + " parameters on " +
          std::to_string(data.count()) + " rows");
  const auto trace = edm::train(model, data, tc);
  std::string csv = "step,loss\n";
  for (const auto& p : trace) csv += std::to_string(p.step) + "," + fmt(p.loss) + "\n";
  dir.write("loss.csv", csv);
  dir.write("model.bin", edm::encode_model(model));
  dir.summary("parameters", std::to_string(model.parameter_count()));
  dir.summary("final_loss", trace.empty() ? "nan" : fmt(trace.back().loss));
}

void run_generate(const config::RunConfig& cfg, RunDir& dir) {
  const std::string path = cfg.get("generate.model");
  require(!path.empty(), ErrorCode::kConfig, "missing required key generate.model");
  const edm::DiffusionModel model = edm::load_model(path);
  edm::GenerateOptions opts;
  opts.chunk_rows = cfg.get_unsigned("generate.chunk_rows");
  opts.clamp = cfg.get_bool("generate.clamp");
  require(opts.chunk_rows > 0, ErrorCode::kConfig, "generate.chunk_rows must be positive");
  const TransitionDataset out = edm::generate(model, cfg.get_unsigned("generate.count"),
                                              cfg.get_unsigned("run.seed"), opts);
  dir.save_dataset("synthetic.bin", out);
  dir.summary("rows", std::to_string(out.count()));
}

void run_metrics(const config::RunConfig& cfg, RunDir& dir) {
  const TransitionDataset real = load_input(cfg, "metrics.real");
  const TransitionDataset synth = load_input(cfg, "metrics.synth");
  require(real.schema() == synth.schema(), ErrorCode::kConfig,
          "real schema " + real.schema().describe() + " does not match synthetic schema " +
              synth.schema().describe());
  const metrics::MetricReport report =
      metrics::fidelity_report(real, synth, config::report_options(cfg));
  std::string text = metrics::report_summary(report);
  dir.write("marginal.csv", metrics::marginal_csv(report, real.schema()));
  dir.write("correlation.csv", metrics::correlation_csv(report, real.schema()));

  const std::size_t scatter_rows = cfg.get_unsigned("metrics.scatter_rows");
  const bool has_env = !cfg.get("metrics.env").empty() ||
                       !envs::env_for_schema(real.schema()).empty();
  if (scatter_rows > 0 && has_env) {
    auto env = env_for(cfg, "metrics.env", real.schema());
    const std::uint64_t seed = cfg.get_unsigned("run.seed");
    const TransitionDataset rows =
        synth.count() > scatter_rows
            ? subsample(synth, double(scatter_rows) / double(synth.count()), seed)
            : synth;
    const auto dist = metrics::min_l2_distances(rows, real, fit_normalizer(real));
    const auto dyn = metrics::dynamics_mse(rows, *env);
    dir.write("scatter.csv", metrics::scatter_csv(dist, dyn.per_row));
    std::vector<double> valid;
    for (double v : dyn.per_row) {
      if (!std::isnan(v)) valid.push_back(v);
    }
    text += "scatter_rows=" + std::to_string(rows.count()) + "\n";
    text += "median_min_l2=" + fmt(metrics::median(dist)) + "\n";
    text += "median_dynamics_mse=" + (valid.empty() ? std::string("nan") : fmt(metrics::median(valid))) + "\n";
    text += "invalid_domain_rows=" + std::to_string(dyn.invalid_rows) + "\n";
  }
  dir.write("report.txt", text);
  dir.summary("marginal", fmt(report.marginal));
  dir.summary("correlation", fmt(report.correlation));
}

void run_augment(const config::RunConfig& cfg, RunDir& dir) {
  const TransitionDataset data = load_input(cfg, "augment.data");
  const augment::AugmentationScheme scheme = config::augmentation_scheme(cfg);
  std::size_t target = cfg.get_unsigned("augment.count");
  if (target == 0) {
    const double factor = cfg.get_double("augment.factor");
    require(factor >= 1.0, ErrorCode::kConfig, "augment.factor must be >= 1");
    target = static_cast<std::size_t>(std::llround(factor * double(data.count())));
  }
  const TransitionDataset out = augment::upsample_with_augmentation(
      data, scheme, target, cfg.get_unsigned("run.seed"));
  dir.save_dataset("augmented.bin", out);
  dir.summary("rows", std::to_string(out.count()));
}

void run_offline(const config::RunConfig& cfg, RunDir& dir) {
  const TransitionDataset data = load_input(cfg, "offline.data");
  auto env = env_for(cfg, "offline.env", data.schema());
  const auto result = train::offline_train(*env, config::agent_config(cfg), data,
                                           config::offline_config(cfg));
  dir.write("trace.csv", train::trace_csv(result.trace, "lambda"));
  dir.write("agent.bin", result.agent->encode());
  dir.summary("final_return", fmt(result.trace.back().mean_return));
}

void run_online(const config::RunConfig& cfg, RunDir& dir) {
  auto env = envs::make_env(cfg.get("online.env"));
  train::OnlineTrainer trainer(*env, config::agent_config(cfg), config::online_config(cfg));
  const std::size_t chunk = cfg.get_unsigned("online.eval_every");
  while (!trainer.done()) {
    trainer.advance(chunk);
    if (!trainer.trace().empty()) {
      dir.log("step " + std::to_string(trainer.step()) + " return " +
              fmt(trainer.trace().back().mean_return));
    }
  }
  for (const auto& line : trainer.log()) dir.log(line);
  dir.write("trace.csv", train::trace_csv(trainer.trace(), "temperature"));
  dir.write("agent.bin", trainer.agent().encode());
  dir.summary("final_return", fmt(trainer.trace().back().mean_return));
  dir.summary("generation_rounds", std::to_string(trainer.generation_rounds()));
  dir.summary("fallback_rounds", std::to_string(trainer.fallback_rounds()));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(' ');
    const auto b = item.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

void run_report(const config::RunConfig& cfg, RunDir& dir) {
  double params = double(cfg.get_unsigned("report.params"));
  const std::string model_path = cfg.get("report.model");
  if (!model_path.empty()) params = double(edm::load_model(model_path).parameter_count());
  require(params > 0.0, ErrorCode::kConfig, "report.params must be positive");
  std::string csv = "dataset,floats,parameters,ratio\n";
  auto add = [&](const std::string& name, double floats) {
    const std::string ratio = metrics::format_ratio(metrics::compression_ratio(floats, params));
    csv += name + "," + fmt_count(floats) + "," + fmt_count(params) + "," + ratio + "\n";
    dir.summary(name, ratio);
  };
  for (const auto& item : split_list(cfg.get("report.floats"))) {
    double floats = 0.0;
    try {
      std::size_t used = 0;
      floats = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::kConfig, "report.floats: not a number: '" + item + "'");
    }
    add(item, floats);
  }
  for (const auto& path : split_list(cfg.get("report.data"))) {
    const TransitionDataset d = load_dataset(path);
    add(fs::path(path).filename().string(), double(d.count() * d.row_dim()));
  }
  dir.write("compression.csv", csv);
}

using Runner = void (*)(const config::RunConfig&, RunDir&);

Runner runner_for(const std::string& command) {
  if (command == "collect") return run_collect;
  if (command == "diffusion-train") return run_diffusion_train;
  if (command == "generate") return run_generate;
  if (command == "metrics") return run_metrics;
  if (command == "augment") return run_augment;
  if (command == "offline") return run_offline;
  if (command == "online") return run_online;
  if (command == "report") return run_report;
  fail(ErrorCode::kConfig, "unknown command '" + command + "'");
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {
      "collect", "diffusion-train", "generate", "metrics",
      "augment", "offline", "online", "report"};
  return names;
}

std::string run_directory(const std::string& command, const config::RunConfig& cfg) {
  runner_for(command);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : command + "\n" + cfg.resolved_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return (fs::path(cfg.get("run.out")) / (command + "-" + std::string(buf, 12))).string();
}

RunResult run(const std::string& command, const config::RunConfig& cfg) {
  const Runner runner = runner_for(command);
  RunResult result;
  RunDir dir(run_directory(command, cfg), result);
  dir.write("config.txt", "# synther " + command + "\n" + cfg.resolved_text());
  dir.write("seed.txt", cfg.get("run.seed") + "\n");
  dir.log("start " + command);
  try {
    runner(cfg, dir);
  } catch (const Error& e) {
    dir.log(std::string("error ") + error_code_name(e.code()) + ": " + e.what());
    throw;
  }
  dir.write("summary.txt", result.summary);
  dir.log("done " + command);
  return result;
}

}  // namespace synther::pipeline
