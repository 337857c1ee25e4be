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

#include <string>
#include <vector>

#include "synther/config.hpp"

namespace synther::pipeline {

const std::vector<std::string>& commands();

struct RunResult {
  std::string run_dir;
  std::vector<std::string> outputs;  // file names inside run_dir
  std::string summary;               // key=value lines
};

// Runs one subcommand. Outputs go to <run.out>/<command>-<hash>, where the
// hash covers the command and the resolved config; the directory receives
// config.txt, seed.txt, the command's CSV / binary outputs, and run.log
// (the only file holding timestamps).
RunResult run(const std::string& command, const config::RunConfig& cfg);

// Directory name a run would use, without running it.
std::string run_directory(const std::string& command, const config::RunConfig& cfg);

}  // namespace synther::pipeline
