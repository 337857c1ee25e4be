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

#include <cstdio>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "synther/synther.h"

namespace {

int report_error(int status, const std::string& message) {
  std::string line = message;
  for (char& c : line) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::fprintf(stderr, "error: %s: %s\n", synther_status_name(status), line.c_str());
  return status;
}

int report_failure(int status) { return report_error(status, synther_last_error()); }

// Pulls --ns.key=value / --ns.key value pairs out of argv; CLI11 sees the rest.
std::vector<std::pair<std::string, std::string>> take_overrides(std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    const std::string body = a.substr(2);
    const auto eq = body.find('=');
    const std::string key = body.substr(0, eq);
    if (key.find('.') == std::string::npos) {
      rest.push_back(a);
      continue;
    }
    if (eq != std::string::npos) {
      out.emplace_back(key, body.substr(eq + 1));
    } else if (i + 1 < args.size()) {
      out.emplace_back(key, args[++i]);
    } else {
      throw CLI::ArgumentMismatch("--" + key + " needs a value");
    }
  }
  args = std::move(rest);
  return out;
}

struct Shortcut {
  const char* flag;
  const char* key;
  const char* help;
};

const std::vector<std::pair<const char*, std::vector<Shortcut>>> kCommands = {
    {"collect",
     {{"--env", "collect.env", "environment"},
      {"--policy", "collect.policy", "random | mixed | expert"},
      {"--checkpoint", "collect.checkpoint", "agent checkpoint"},
      {"--count", "collect.count", "transitions"},
      {"--epsilon", "collect.epsilon", "random-action probability"},
      {"--fraction", "collect.fraction", "subsample fraction"}}},
    {"diffusion-train",
     {{"--data", "diffusion.data", "training dataset"},
      {"--steps", "diffusion.steps", "gradient steps"}}},
    {"generate",
     {{"--model", "generate.model", "diffusion checkpoint"},
      {"--count", "generate.count", "rows to generate"}}},
    {"metrics",
     {{"--real", "metrics.real", "real dataset"},
      {"--synth", "metrics.synth", "synthetic dataset"},
      {"--env", "metrics.env", "env for dynamics error"}}},
    {"augment",
     {{"--data", "augment.data", "input dataset"},
      {"--kind", "augment.kind", "additive | multiplicative | dynamics"},
      {"--count", "augment.count", "target rows"},
      {"--factor", "augment.factor", "target = factor * rows"}}},
    {"offline",
     {{"--data", "offline.data", "training dataset"},
      {"--env", "offline.env", "evaluation env"},
      {"--steps", "offline.steps", "gradient steps"}}},
    {"online",
     {{"--env", "online.env", "environment"},
      {"--steps", "online.total_steps", "env steps"}}},
    {"report",
     {{"--floats", "report.floats", "comma-separated float counts"},
      {"--params", "report.params", "parameter count"},
      {"--model", "report.model", "checkpoint providing the parameter count"},
      {"--data", "report.data", "comma-separated datasets"}}},
};

std::string key_listing() {
  std::string out;
  for (std::size_t i = 0; i < synther_config_key_count(); ++i) {
    out += std::string("  ") + synther_config_key_name(i) + " = " +
           synther_config_key_default(i) + "    " + synther_config_key_help(i) + "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::pair<std::string, std::string>> overrides;
  try {
    overrides = take_overrides(args);
  } catch (const CLI::Error& e) {
    return report_error(SYNTHER_ERR_CONFIG, e.what());
  }

  CLI::App app{"synther: synthetic experience replay toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer("Any config key can be overridden as --<key>=<value>, e.g. --edm.steps=64.\n"
             "Keys (default):\n" + key_listing());

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  struct Parsed {
    CLI::App* sub;
    std::vector<std::pair<std::string, std::string>> values;
  };
  std::vector<Parsed> subs;
  subs.reserve(kCommands.size());
  for (const auto& [name, shortcuts] : kCommands) {
    Parsed p{app.add_subcommand(name, std::string("run the ") + name + " pipeline"), {}};
    p.values.resize(shortcuts.size());
    for (std::size_t i = 0; i < shortcuts.size(); ++i) {
      p.values[i].first = shortcuts[i].key;
      p.sub->add_option(shortcuts[i].flag, p.values[i].second, shortcuts[i].help);
    }
    subs.push_back(std::move(p));
  }
  app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "global seed");
  app.add_option("--out", out_dir, "base output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(SYNTHER_ERR_CONFIG, e.what());
  }

  synther_config* cfg = nullptr;
  if (int s = synther_config_create(&cfg); s != SYNTHER_OK) return report_failure(s);
  auto fail = [&](int s) {
    synther_config_destroy(cfg);
    return report_failure(s);
  };
  if (!config_path.empty()) {
    if (int s = synther_config_merge_file(cfg, config_path.c_str()); s != SYNTHER_OK) return fail(s);
  }
  if (app.count("--seed") > 0) {
    if (int s = synther_config_set(cfg, "run.seed", std::to_string(seed).c_str()); s != SYNTHER_OK) {
      return fail(s);
    }
  }
  if (!out_dir.empty()) {
    if (int s = synther_config_set(cfg, "run.out", out_dir.c_str()); s != SYNTHER_OK) return fail(s);
  }
  std::string command;
  for (const auto& p : subs) {
    if (!p.sub->parsed()) continue;
    command = p.sub->get_name();
    for (const auto& [key, value] : p.values) {
      if (value.empty()) continue;
      if (int s = synther_config_set(cfg, key.c_str(), value.c_str()); s != SYNTHER_OK) return fail(s);
    }
  }
  for (const auto& [key, value] : overrides) {
    if (int s = synther_config_set(cfg, key.c_str(), value.c_str()); s != SYNTHER_OK) return fail(s);
  }

  synther_run_result* result = nullptr;
  if (int s = synther_run(command.c_str(), cfg, &result); s != SYNTHER_OK) return fail(s);
  std::printf("run_dir=%s\n%s", synther_run_result_dir(result), synther_run_result_summary(result));
  synther_run_result_destroy(result);
  synther_config_destroy(cfg);
  return EXIT_SUCCESS;
}
