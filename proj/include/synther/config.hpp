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

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "synther/agents.hpp"
#include "synther/augment.hpp"
#include "synther/edm.hpp"
#include "synther/metrics.hpp"
#include "synther/training.hpp"

namespace synther::config {

enum class ValueType { kString, kUnsigned, kDouble, kBool };

struct KeySpec {
  std::string_view key;
  ValueType type;
  std::string_view default_value;
  std::string_view help;
};

// Every recognised key with its default.
const std::vector<KeySpec>& known_keys();

// key=value settings. Unknown keys and unparsable values are rejected at
// set() time with kConfig.
class RunConfig {
 public:
  RunConfig() = default;

  void set(std::string_view key, std::string_view value);
  // Lines of key=value; '#' starts a comment; blank lines ignored.
  void merge_text(std::string_view text, const std::string& source);
  void merge_file(const std::string& path);

  bool is_set(std::string_view key) const;
  std::string get(std::string_view key) const;
  std::uint64_t get_unsigned(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;

  // All known keys in sorted order, one key=value per line.
  std::string resolved_text() const;
  // FNV-1a 64 of the resolved text, as 16 hex digits.
  std::string hash() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

const KeySpec& key_spec(std::string_view key);

edm::EdmConfig edm_config(const RunConfig& c);
edm::DenoiserShape denoiser_shape(const RunConfig& c);
edm::TrainConfig diffusion_train_config(const RunConfig& c);
rl::AgentConfig agent_config(const RunConfig& c);
train::OfflineConfig offline_config(const RunConfig& c);
train::OnlineConfig online_config(const RunConfig& c);
augment::AugmentationScheme augmentation_scheme(const RunConfig& c);
metrics::ReportOptions report_options(const RunConfig& c);

}  // namespace synther::config
