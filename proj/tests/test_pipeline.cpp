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

#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include <unistd.h>

#include "synther/binary_io.hpp"
#include "synther/config.hpp"
#include "synther/pipeline.hpp"
#include "test_util.hpp"

namespace synther {
namespace {

namespace fs = std::filesystem;
using testing::code_of;

TEST(Config, KeysAreSortedAndDefaultsParse) {
  const auto& keys = config::known_keys();
  ASSERT_FALSE(keys.empty());
  for (std::size_t i = 1; i < keys.size(); ++i) EXPECT_LT(keys[i - 1].key, keys[i].key);
  config::RunConfig cfg;
  for (const auto& k : keys) EXPECT_NO_THROW(cfg.set(k.key, k.default_value)) << k.key;
  EXPECT_EQ(cfg.resolved_text(), config::RunConfig().resolved_text());
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  config::RunConfig cfg;
  EXPECT_EQ(code_of([&] { cfg.set("edm.stepz", "3"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { cfg.set("edm.steps", "-3"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { cfg.set("edm.s_churn", "lots"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([&] { cfg.set("online.generation", "maybe"); }), ErrorCode::kConfig);
  try {
    cfg.merge_text("edm.steps = 64\n# comment\n\nbogus=1\n", "cfg.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_NE(std::string(e.what()).find("cfg.txt:4"), std::string::npos) << e.what();
  }
  EXPECT_EQ(cfg.get_unsigned("edm.steps"), 64u);
}

TEST(Config, ResolvedTextRoundTripsAndHashes) {
  config::RunConfig a;
  a.set("edm.steps", "32");
  a.set("agent.preset", "larger");
  config::RunConfig b;
  b.merge_text(a.resolved_text(), "resolved");
  EXPECT_EQ(a.resolved_text(), b.resolved_text());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.set("edm.steps", "33");
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, BuildersApplyValues) {
  config::RunConfig cfg;
  cfg.set("edm.steps", "16");
  cfg.set("edm.s_churn", "0");
  cfg.set("denoiser.width", "64");
  cfg.set("agent.preset", "larger");
  cfg.set("agent.batch", "32");
  cfg.set("augment.kind", "dynamics");
  const auto edm = config::edm_config(cfg);
  EXPECT_EQ(edm.steps, 16u);
  EXPECT_EQ(edm.s_churn, 0.0);
  EXPECT_EQ(config::denoiser_shape(cfg).width, 64u);
  const auto agent = config::agent_config(cfg);
  EXPECT_EQ(agent.hidden_width, 512u);
  EXPECT_EQ(agent.hidden_depth, 3u);
  EXPECT_EQ(agent.batch_size, 32u);
  EXPECT_EQ(config::augmentation_scheme(cfg).kind, augment::Kind::kDynamics);
  cfg.set("agent.gamma", "1.5");
  EXPECT_EQ(code_of([&] { config::agent_config(cfg); }), ErrorCode::kConfig);
  cfg.set("edm.sigma_min", "100");
  EXPECT_EQ(code_of([&] { config::edm_config(cfg); }), ErrorCode::kConfig);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("synther_pipeline_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  config::RunConfig base(const std::string& out) const {
    config::RunConfig c;
    c.set("run.out", (root_ / out).string());
    c.set("run.seed", "3");
    c.set("collect.env", "pointmass2d");
    c.set("collect.count", "600");
    c.set("denoiser.width", "32");
    c.set("denoiser.depth", "1");
    c.set("diffusion.steps", "40");
    c.set("diffusion.batch", "32");
    c.set("diffusion.log_every", "10");
    c.set("edm.steps", "8");
    c.set("generate.count", "300");
    c.set("agent.hidden_width", "16");
    c.set("agent.batch", "32");
    c.set("offline.steps", "60");
    c.set("offline.eval_every", "30");
    c.set("offline.eval_episodes", "2");
    c.set("online.env", "pendulum");
    c.set("online.total_steps", "300");
    c.set("online.warmup", "100");
    c.set("online.eval_every", "150");
    c.set("online.eval_episodes", "1");
    c.set("online.k_real", "100");
    c.set("online.m_synthetic", "200");
    c.set("online.diffusion_steps", "10");
    c.set("online.diffusion_batch", "32");
    c.set("metrics.max_rows", "1000");
    c.set("metrics.scatter_rows", "50");
    return c;
  }

  // Runs the whole chain into `out` and returns file name -> bytes for every
  // payload file (run.log excluded).
  std::map<std::string, std::string> chain(const std::string& out) {
    config::RunConfig c = base(out);
    std::map<std::string, std::string> files;
    // Keyed by command; directory names and config.txt contain the root.
    auto keep = [&](const pipeline::RunResult& r) {
      const std::string dir = fs::path(r.run_dir).filename().string();
      const std::string command = dir.substr(0, dir.rfind('-'));
      for (const auto& name : r.outputs) {
        if (name == "config.txt") continue;
        files[command + "/" + name] = io::read_file((fs::path(r.run_dir) / name).string());
      }
      return r.run_dir;
    };
    const auto collect = keep(pipeline::run("collect", c));
    const std::string data = (fs::path(collect) / "dataset.bin").string();
    c.set("diffusion.data", data);
    const auto model = keep(pipeline::run("diffusion-train", c));
    c.set("generate.model", (fs::path(model) / "model.bin").string());
    const auto gen = keep(pipeline::run("generate", c));
    c.set("metrics.real", data);
    c.set("metrics.synth", (fs::path(gen) / "synthetic.bin").string());
    keep(pipeline::run("metrics", c));
    c.set("augment.data", data);
    c.set("augment.factor", "2");
    keep(pipeline::run("augment", c));
    c.set("offline.data", data);
    keep(pipeline::run("offline", c));
    keep(pipeline::run("online", c));
    c.set("report.floats", "12.6e6,42e6,84e6");
    c.set("report.params", "6500000");
    keep(pipeline::run("report", c));
    return files;
  }

  fs::path root_;
};

TEST_F(PipelineTest, ChainIsByteReproducible) {
  const auto a = chain("a");
  const auto b = chain("b");
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    ASSERT_NE(it, b.end()) << name;
    EXPECT_TRUE(bytes == it->second) << name;
  }
  bool has_trace = false;
  for (const auto& [name, bytes] : a) has_trace = has_trace || name.ends_with("trace.csv");
  EXPECT_TRUE(has_trace);
}

TEST_F(PipelineTest, MetricsOnIdenticalFilesAreOne) {
  config::RunConfig c = base("m");
  const auto collect = pipeline::run("collect", c);
  const std::string data = (fs::path(collect.run_dir) / "dataset.bin").string();
  c.set("metrics.real", data);
  c.set("metrics.synth", data);
  const auto r = pipeline::run("metrics", c);
  EXPECT_NE(r.summary.find("marginal=1\n"), std::string::npos) << r.summary;
  EXPECT_NE(r.summary.find("correlation=1\n"), std::string::npos) << r.summary;
}

TEST_F(PipelineTest, ReportReproducesRatios) {
  config::RunConfig c = base("r");
  c.set("report.floats", "12.6e6,42e6,84e6");
  c.set("report.params", "6500000");
  const auto r = pipeline::run("report", c);
  const std::string csv = io::read_file((fs::path(r.run_dir) / "compression.csv").string());
  EXPECT_NE(csv.find(",1.9\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find(",6.5\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find(",12.9\n"), std::string::npos) << csv;
}

TEST_F(PipelineTest, RunDirectoryIsContentAddressed) {
  config::RunConfig c = base("d");
  const std::string d1 = pipeline::run_directory("collect", c);
  EXPECT_EQ(d1, pipeline::run_directory("collect", c));
  EXPECT_NE(d1, pipeline::run_directory("generate", c));
  c.set("collect.count", "601");
  EXPECT_NE(d1, pipeline::run_directory("collect", c));
}

TEST_F(PipelineTest, SchemaMismatchNamesBothSchemas) {
  config::RunConfig c = base("s");
  const auto collect = pipeline::run("collect", c);
  c.set("offline.data", (fs::path(collect.run_dir) / "dataset.bin").string());
  c.set("offline.env", "pendulum");
  try {
    pipeline::run("offline", c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    const std::string msg = e.what();
    EXPECT_NE(msg.find(TransitionSchema(4, 2, true).describe()), std::string::npos) << msg;
    EXPECT_NE(msg.find(TransitionSchema(3, 1, false).describe()), std::string::npos) << msg;
  }
}

TEST_F(PipelineTest, MissingInputIsIoError) {
  config::RunConfig c = base("x");
  c.set("offline.data", (root_ / "nope.bin").string());
  EXPECT_EQ(code_of([&] { pipeline::run("offline", c); }), ErrorCode::kIo);
  EXPECT_EQ(code_of([&] { pipeline::run("train", c); }), ErrorCode::kConfig);
}

}  // namespace
}  // namespace synther
