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
#include <vector>

#include "synther/rng.hpp"
#include "synther/transition.hpp"

namespace synther {

// Fixed-capacity FIFO of transition rows. Once full, each push overwrites the
// oldest row. Single writer; readers must not race with push.
class RingBuffer {
 public:
  RingBuffer(TransitionSchema schema, std::size_t capacity);

  const TransitionSchema& schema() const noexcept { return schema_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  std::size_t total_pushed() const noexcept { return pushed_; }

  void push(std::span<const float> row);
  void push_all(const TransitionDataset& rows);
  void clear() noexcept;

  // i = 0 is the oldest row still held.
  std::span<const float> row(std::size_t i) const;
  // Raw slot access (slot order, not age order); valid for slot < size().
  std::span<const float> slot(std::size_t s) const {
    return {storage_.data() + s * schema_.row_dim(), schema_.row_dim()};
  }

  // Copy of the held rows, oldest first.
  TransitionDataset snapshot() const;

 private:
  TransitionSchema schema_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next slot to write
  std::size_t pushed_ = 0;
  std::vector<float> storage_;
};

// Appends `n` uniformly drawn rows (with replacement) from `buffer` to `out`.
void sample_uniform(const RingBuffer& buffer, std::size_t n, Rng& rng,
                    std::vector<float>& out);

inline constexpr std::size_t kDefaultSyntheticCapacity = 1'000'000;

// Real buffer plus a finite-capacity synthetic buffer, sampled with ratio r.
class ReplayPair {
 public:
  ReplayPair(TransitionSchema schema, std::size_t real_capacity,
             std::size_t synthetic_capacity, double real_ratio);

  RingBuffer& real() noexcept { return real_; }
  RingBuffer& synthetic() noexcept { return synthetic_; }
  const RingBuffer& real() const noexcept { return real_; }
  const RingBuffer& synthetic() const noexcept { return synthetic_; }
  double real_ratio() const noexcept { return ratio_; }
  void set_real_ratio(double r);

  // round(r * batch_size) rows from the real buffer.
  std::size_t real_count(std::size_t batch_size) const;

 private:
  RingBuffer real_;
  RingBuffer synthetic_;
  double ratio_;
};

// round(r*B) real rows and B - round(r*B) synthetic rows, uniformly with
// replacement, then shuffled. When all rows come from one buffer there is no
// shuffle and the draws equal sample_uniform on that buffer.
TransitionDataset mixed_sample(const ReplayPair& pair, std::size_t batch_size,
                               Rng& rng);
TransitionDataset mixed_sample(const ReplayPair& pair, std::size_t batch_size,
                               std::uint64_t seed);

}  // namespace synther
