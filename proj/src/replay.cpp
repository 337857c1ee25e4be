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

#include "synther/replay.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "synther/error.hpp"

namespace synther {

RingBuffer::RingBuffer(TransitionSchema schema, std::size_t capacity)
    : schema_(schema), capacity_(capacity) {
  require(capacity > 0, ErrorCode::kInvalidInput,
          "ring buffer capacity must be positive");
}

void RingBuffer::push(std::span<const float> row) {
  const std::size_t dim = schema_.row_dim();
  require(row.size() == dim, ErrorCode::kInvalidInput, "row width mismatch");
  if (storage_.size() < capacity_ * dim && head_ * dim == storage_.size()) {
    storage_.insert(storage_.end(), row.begin(), row.end());
  } else {
    std::copy(row.begin(), row.end(), storage_.begin() + head_ * dim);
  }
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  ++pushed_;
}

void RingBuffer::push_all(const TransitionDataset& rows) {
  require(rows.schema() == schema_, ErrorCode::kInvalidInput,
          "schema mismatch pushing into ring buffer");
  for (std::size_t i = 0; i < rows.count(); ++i) push(rows.row(i));
}

void RingBuffer::clear() noexcept {
  storage_.clear();
  size_ = head_ = pushed_ = 0;
}

std::span<const float> RingBuffer::row(std::size_t i) const {
  require(i < size_, ErrorCode::kInvalidInput, "ring buffer index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  return slot((oldest + i) % capacity_);
}

TransitionDataset RingBuffer::snapshot() const {
  TransitionDataset out(schema_);
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.append_row(row(i));
  return out;
}

void sample_uniform(const RingBuffer& buffer, std::size_t n, Rng& rng,
                    std::vector<float>& out) {
  require(!buffer.empty() || n == 0, ErrorCode::kUnavailableData,
          "cannot sample from an empty buffer");
  for (std::size_t k = 0; k < n; ++k) {
    auto row = buffer.slot(uniform_index(rng, buffer.size()));
    out.insert(out.end(), row.begin(), row.end());
  }
}

ReplayPair::ReplayPair(TransitionSchema schema, std::size_t real_capacity,
                       std::size_t synthetic_capacity, double real_ratio)
    : real_(schema, real_capacity), synthetic_(schema, synthetic_capacity),
      ratio_(0.0) {
  set_real_ratio(real_ratio);
}

void ReplayPair::set_real_ratio(double r) {
  require(r >= 0.0 && r <= 1.0, ErrorCode::kInvalidInput,
          "real ratio must lie in [0, 1], got " + std::to_string(r));
  ratio_ = r;
}

std::size_t ReplayPair::real_count(std::size_t batch_size) const {
  return static_cast<std::size_t>(
      std::llround(ratio_ * static_cast<double>(batch_size)));
}

TransitionDataset mixed_sample(const ReplayPair& pair, std::size_t batch_size,
                               Rng& rng) {
  const std::size_t n_real = pair.real_count(batch_size);
  const std::size_t n_syn = batch_size - n_real;
  require(n_real == 0 || !pair.real().empty(), ErrorCode::kUnavailableData,
          "real buffer is empty");
  require(n_syn == 0 || !pair.synthetic().empty(), ErrorCode::kUnavailableData,
          "synthetic buffer is empty");
  const std::size_t dim = pair.real().schema().row_dim();
  std::vector<float> rows;
  rows.reserve(batch_size * dim);
  sample_uniform(pair.real(), n_real, rng, rows);
  sample_uniform(pair.synthetic(), n_syn, rng, rows);
  if (n_real > 0 && n_syn > 0) {
    // Fisher-Yates over whole rows.
    for (std::size_t i = batch_size - 1; i > 0; --i) {
      const std::size_t j = uniform_index(rng, i + 1);
      if (i != j) {
        std::swap_ranges(rows.begin() + i * dim, rows.begin() + (i + 1) * dim,
                         rows.begin() + j * dim);
      }
    }
  }
  TransitionDataset out(pair.real().schema());
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    out.append_row(std::span<const float>(rows).subspan(i * dim, dim));
  }
  return out;
}

TransitionDataset mixed_sample(const ReplayPair& pair, std::size_t batch_size,
                               std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x3a1);
  return mixed_sample(pair, batch_size, rng);
}

}  // namespace synther
