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

#include "synther/synther.h"

#include <memory>
#include <new>
#include <string>
#include <utility>

#include "synther/agents.hpp"
#include "synther/config.hpp"
#include "synther/dataset_io.hpp"
#include "synther/edm.hpp"
#include "synther/envs.hpp"
#include "synther/error.hpp"
#include "synther/metrics.hpp"
#include "synther/pipeline.hpp"

struct synther_config {
  synther::config::RunConfig cfg;
  std::string scratch;
};

struct synther_run_result {
  synther::pipeline::RunResult result;
};

struct synther_dataset {
  synther::TransitionDataset data;
};

struct synther_model {
  synther::edm::DiffusionModel model;
};

struct synther_agent {
  std::unique_ptr<synther::rl::Agent> agent;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
int guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return SYNTHER_OK;
  } catch (const synther::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SYNTHER_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SYNTHER_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  synther::require(p != nullptr, synther::ErrorCode::kInvalidInput,
                   std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* synther_version(void) { return "0.1.0"; }

const char* synther_last_error(void) { return g_last_error.c_str(); }

const char* synther_status_name(int status) {
  if (status == SYNTHER_OK) return "ok";
  if (status < 1 || status > 10) return "unknown";
  return synther::error_code_name(static_cast<synther::ErrorCode>(status));
}

int synther_config_create(synther_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new synther_config();
  });
}

void synther_config_destroy(synther_config* config) { delete config; }

int synther_config_set(synther_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->cfg.set(key, value);
  });
}

int synther_config_merge_file(synther_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    config->cfg.merge_file(path);
  });
}

int synther_config_get(synther_config* config, const char* key, const char** value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->scratch = config->cfg.get(key);
    *value = config->scratch.c_str();
  });
}

int synther_config_resolved(synther_config* config, const char** text) {
  return guarded([&] {
    need(config, "config");
    need(text, "text");
    config->scratch = config->cfg.resolved_text();
    *text = config->scratch.c_str();
  });
}

size_t synther_config_key_count(void) { return synther::config::known_keys().size(); }

const char* synther_config_key_name(size_t index) {
  const auto& keys = synther::config::known_keys();
  return index < keys.size() ? keys[index].key.data() : nullptr;
}

const char* synther_config_key_default(size_t index) {
  const auto& keys = synther::config::known_keys();
  return index < keys.size() ? keys[index].default_value.data() : nullptr;
}

const char* synther_config_key_help(size_t index) {
  const auto& keys = synther::config::known_keys();
  return index < keys.size() ? keys[index].help.data() : nullptr;
}

size_t synther_command_count(void) { return synther::pipeline::commands().size(); }

const char* synther_command_name(size_t index) {
  const auto& c = synther::pipeline::commands();
  return index < c.size() ? c[index].c_str() : nullptr;
}

int synther_run(const char* command, const synther_config* config,
                synther_run_result** out) {
  return guarded([&] {
    need(command, "command");
    need(config, "config");
    need(out, "out");
    auto r = std::make_unique<synther_run_result>();
    r->result = synther::pipeline::run(command, config->cfg);
    *out = r.release();
  });
}

const char* synther_run_result_dir(const synther_run_result* r) {
  return r ? r->result.run_dir.c_str() : nullptr;
}

const char* synther_run_result_summary(const synther_run_result* r) {
  return r ? r->result.summary.c_str() : nullptr;
}

size_t synther_run_result_output_count(const synther_run_result* r) {
  return r ? r->result.outputs.size() : 0;
}

const char* synther_run_result_output(const synther_run_result* r, size_t index) {
  if (!r || index >= r->result.outputs.size()) return nullptr;
  return r->result.outputs[index].c_str();
}

void synther_run_result_destroy(synther_run_result* r) { delete r; }

int synther_dataset_create(size_t state_dim, size_t action_dim, int has_terminal,
                           const float* rows, size_t count, synther_dataset** out) {
  return guarded([&] {
    need(out, "out");
    if (count > 0) need(rows, "rows");
    synther::TransitionSchema schema(state_dim, action_dim, has_terminal != 0);
    std::vector<float> data(rows, rows + count * schema.row_dim());
    synther::TransitionDataset d(schema, std::move(data));
    d.validate();
    *out = new synther_dataset{std::move(d)};
  });
}

int synther_dataset_load(const char* path, synther_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new synther_dataset{synther::load_dataset(path)};
  });
}

int synther_dataset_import_csv(const char* path, synther_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new synther_dataset{synther::import_csv(path)};
  });
}

int synther_dataset_save(const synther_dataset* d, const char* path) {
  return guarded([&] {
    need(d, "dataset");
    need(path, "path");
    synther::save_dataset(d->data, path);
  });
}

int synther_dataset_export_csv(const synther_dataset* d, const char* path) {
  return guarded([&] {
    need(d, "dataset");
    need(path, "path");
    synther::export_csv(d->data, path);
  });
}

int synther_dataset_shape(const synther_dataset* d, size_t* state_dim,
                          size_t* action_dim, int* has_terminal, size_t* count) {
  return guarded([&] {
    need(d, "dataset");
    const auto& s = d->data.schema();
    if (state_dim) *state_dim = s.state_dim();
    if (action_dim) *action_dim = s.action_dim();
    if (has_terminal) *has_terminal = s.has_terminal() ? 1 : 0;
    if (count) *count = d->data.count();
  });
}

int synther_dataset_copy_rows(const synther_dataset* d, size_t first, size_t n,
                              float* out) {
  return guarded([&] {
    need(d, "dataset");
    synther::require(first <= d->data.count() && n <= d->data.count() - first,
                     synther::ErrorCode::kInvalidInput, "row range out of bounds");
    if (n == 0) return;
    need(out, "out");
    const std::size_t rd = d->data.row_dim();
    const float* src = d->data.data().data() + first * rd;
    std::copy(src, src + n * rd, out);
  });
}

void synther_dataset_destroy(synther_dataset* d) { delete d; }

int synther_model_load(const char* path, synther_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new synther_model{synther::edm::load_model(path)};
  });
}

size_t synther_model_parameter_count(const synther_model* m) {
  return m ? m->model.parameter_count() : 0;
}

int synther_model_generate(const synther_model* m, size_t count, uint64_t seed,
                           int clamp, synther_dataset** out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    synther::edm::GenerateOptions opts;
    opts.clamp = clamp != 0;
    *out = new synther_dataset{synther::edm::generate(m->model, count, seed, opts)};
  });
}

void synther_model_destroy(synther_model* m) { delete m; }

int synther_agent_load(const char* path, synther_agent** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto a = std::make_unique<synther_agent>();
    a->agent = synther::rl::load_agent(path);
    a->state_dim = a->agent->state_dim();
    a->action_dim = a->agent->action_dim();
    *out = a.release();
  });
}

int synther_agent_act(const synther_agent* a, const float* obs, size_t obs_len,
                      float* action, size_t action_len) {
  return guarded([&] {
    need(a, "agent");
    need(obs, "obs");
    need(action, "action");
    synther::require(obs_len == a->state_dim && action_len == a->action_dim,
                     synther::ErrorCode::kInvalidInput,
                     "observation or action length does not match the agent");
    synther::Rng rng(0);
    const auto act = a->agent->act({obs, obs_len}, true, rng);
    std::copy(act.begin(), act.end(), action);
  });
}

int synther_agent_evaluate(const synther_agent* a, const char* env, size_t episodes,
                           uint64_t seed, double* mean, double* std) {
  return guarded([&] {
    need(a, "agent");
    need(env, "env");
    auto e = synther::envs::make_env(env);
    synther::require(e->spec().state_dim == a->state_dim &&
                         e->spec().action_dim == a->action_dim,
                     synther::ErrorCode::kConfig,
                     std::string("agent dimensions do not match env '") + env + "'");
    const auto r = synther::rl::evaluate_policy(*e, *a->agent, episodes, seed);
    if (mean) *mean = r.mean;
    if (std) *std = r.std;
  });
}

void synther_agent_destroy(synther_agent* a) { delete a; }

int synther_fidelity(const synther_dataset* real, const synther_dataset* synth,
                     size_t max_rows, uint64_t seed, double* marginal,
                     double* correlation) {
  return guarded([&] {
    need(real, "real");
    need(synth, "synth");
    synther::require(real->data.schema() == synth->data.schema(),
                     synther::ErrorCode::kConfig,
                     "real schema " + real->data.schema().describe() +
                         " does not match synthetic schema " +
                         synth->data.schema().describe());
    synther::metrics::ReportOptions opts;
    opts.max_rows = max_rows;
    opts.seed = seed;
    const auto rep = synther::metrics::fidelity_report(real->data, synth->data, opts);
    if (marginal) *marginal = rep.marginal;
    if (correlation) *correlation = rep.correlation;
  });
}

int synther_compression_ratio(double dataset_floats, double parameter_count,
                              double* ratio) {
  return guarded([&] {
    need(ratio, "ratio");
    *ratio = synther::metrics::compression_ratio(dataset_floats, parameter_count);
  });
}

}  // extern "C"
