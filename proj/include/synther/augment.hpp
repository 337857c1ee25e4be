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
#include <span>
#include <string>

#include "synther/rng.hpp"
#include "synther/transition.hpp"

namespace synther::augment {

enum class Kind { kAdditive, kMultiplicative, kDynamics };

// Hand-designed state perturbations used as upsampling baselines. Only s and
// s' are touched; action, reward and terminal are copied verbatim.
struct AugmentationScheme {
  Kind kind = Kind::kAdditive;
  double noise_std = 0.1;        // additive: eps ~ N(0, noise_std^2 I)
  double scale_low = 0.8;        // multiplicative: one scalar ~ U[low, high]
  double scale_high = 1.2;
  double dynamics_low = 0.5;     // dynamics: s' = s + eps (s' - s)
  double dynamics_high = 1.5;

  void validate() const;
  static AugmentationScheme additive(double std = 0.1);
  static AugmentationScheme multiplicative(double low = 0.8, double high = 1.2);
  static AugmentationScheme dynamics(double low = 0.5, double high = 1.5);
};

const char* kind_name(Kind kind) noexcept;
Kind parse_kind(const std::string& name);

// Noise is applied in raw (unnormalized) units.
void augment_row(std::span<float> row, const TransitionSchema& schema,
                 const AugmentationScheme& scheme, StreamRng& rng);

// Keeps every original row, then appends target_count - count augmented
// copies of uniformly drawn originals. Appended row j draws from its own
// stream (seed, j).
TransitionDataset upsample_with_augmentation(const TransitionDataset& dataset,
                                             const AugmentationScheme& scheme,
                                             std::size_t target_count,
                                             std::uint64_t seed);

}  // namespace synther::augment
