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
#include <string_view>

#include "synther/transition.hpp"

namespace synther {

// Binary layout (little-endian):
//   "SYNTHR1\0" | state_dim u32 | action_dim u32 | has_terminal u8 |
//   count u64 | count * row_dim float32, row-major
inline constexpr std::string_view kDatasetMagic{"SYNTHR1\0", 8};
inline constexpr std::size_t kDatasetHeaderBytes = 8 + 4 + 4 + 1 + 8;

std::string encode_dataset(const TransitionDataset& dataset);
TransitionDataset decode_dataset(std::string bytes,
                                 const std::string& source = "<memory>");

void save_dataset(const TransitionDataset& dataset, const std::string& path);
TransitionDataset load_dataset(const std::string& path);

// CSV with header s0..,a0..,r,ns0..[,d]; values printed as shortest
// round-trip float32 decimals.
std::string format_csv(const TransitionDataset& dataset);
TransitionDataset parse_csv(std::string_view text,
                            const std::string& source = "<memory>");

void export_csv(const TransitionDataset& dataset, const std::string& path);
TransitionDataset import_csv(const std::string& path);

// Shortest decimal that parses back to exactly `v`.
std::string format_float(float v);
std::string format_double(double v);

}  // namespace synther
