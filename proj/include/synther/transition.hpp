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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace synther {

// Column layout of one flattened transition: [s | a | r | s' | d].
class TransitionSchema {
 public:
  TransitionSchema() = default;
  TransitionSchema(std::size_t state_dim, std::size_t action_dim,
                   bool has_terminal);

  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t action_dim() const noexcept { return action_dim_; }
  bool has_terminal() const noexcept { return has_terminal_; }

  std::size_t row_dim() const noexcept {
    return 2 * state_dim_ + action_dim_ + 1 + (has_terminal_ ? 1 : 0);
  }

  std::size_t state_offset() const noexcept { return 0; }
  std::size_t action_offset() const noexcept { return state_dim_; }
  std::size_t reward_offset() const noexcept {
    return state_dim_ + action_dim_;
  }
  std::size_t next_state_offset() const noexcept {
    return state_dim_ + action_dim_ + 1;
  }
  // Only meaningful when has_terminal().
  std::size_t terminal_offset() const noexcept {
    return 2 * state_dim_ + action_dim_ + 1;
  }

  // Column names in CSV order: s0.., a0.., r, ns0.., d.
  std::vector<std::string> column_names() const;

  std::string describe() const;

  friend bool operator==(const TransitionSchema&,
                         const TransitionSchema&) = default;

 private:
  std::size_t state_dim_ = 0;
  std::size_t action_dim_ = 0;
  bool has_terminal_ = false;
};

// Immutable-by-convention row-major table of float32 transitions.
class TransitionDataset {
 public:
  TransitionDataset() = default;
  explicit TransitionDataset(TransitionSchema schema);
  // Validates terminal values and finiteness.
  TransitionDataset(TransitionSchema schema, std::vector<float> rows);

  const TransitionSchema& schema() const noexcept { return schema_; }
  std::size_t count() const noexcept {
    return schema_.row_dim() == 0 ? 0 : rows_.size() / schema_.row_dim();
  }
  std::size_t row_dim() const noexcept { return schema_.row_dim(); }
  bool empty() const noexcept { return rows_.empty(); }

  std::span<const float> row(std::size_t i) const {
    return {rows_.data() + i * row_dim(), row_dim()};
  }
  std::span<const float> data() const noexcept { return rows_; }

  void append_row(std::span<const float> row);
  void append(const TransitionDataset& other);
  void reserve(std::size_t rows) { rows_.reserve(rows * row_dim()); }

  // Throws kInvalidInput on non-finite values or non-binary terminals.
  void validate() const;

 private:
  TransitionSchema schema_;
  std::vector<float> rows_;
};

// Per-dimension affine map to zero mean / unit std. Terminal column passes
// through unchanged. Also records the per-dimension data range.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<std::uint8_t> terminal_mask;

  std::size_t dim() const noexcept { return mean.size(); }

  static Normalizer identity(const TransitionSchema& schema);
};

inline constexpr double kStdFloor = 1e-8;

// Population statistics; std below kStdFloor is replaced by 1.
Normalizer fit_normalizer(const TransitionDataset& dataset);

std::vector<float> normalize_rows(std::span<const float> rows,
                                  const Normalizer& normalizer);
std::vector<float> denormalize_rows(std::span<const float> rows,
                                    const Normalizer& normalizer);
TransitionDataset normalize(const TransitionDataset& dataset,
                            const Normalizer& normalizer);

// Terminal entries >= 0.5 become 1, everything else in that column 0.
void threshold_terminals(std::span<float> rows, const TransitionSchema& schema);

// Uniform draw without replacement of round(fraction * count) rows.
TransitionDataset subsample(const TransitionDataset& dataset, double fraction,
                            std::uint64_t seed);

// First `count` rows of a random permutation, plus the complement. Used for
// train/held-out splits.
std::pair<TransitionDataset, TransitionDataset> split(
    const TransitionDataset& dataset, std::size_t first_count,
    std::uint64_t seed);

}  // namespace synther
