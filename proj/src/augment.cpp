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

#include "synther/augment.hpp"

#include <cmath>
#include <random>

#include "synther/error.hpp"

namespace synther::augment {

void AugmentationScheme::validate() const {
  require(noise_std > 0, ErrorCode::kConfig, "augment: noise std must be > 0");
  require(scale_low > 0 && scale_low <= scale_high, ErrorCode::kConfig,
          "augment: multiplicative range must be positive and ordered");
  require(dynamics_low > 0 && dynamics_low <= dynamics_high, ErrorCode::kConfig,
          "augment: dynamics range must be positive and ordered");
}

AugmentationScheme AugmentationScheme::additive(double std) {
  AugmentationScheme s;
  s.kind = Kind::kAdditive;
  s.noise_std = std;
  return s;
}

AugmentationScheme AugmentationScheme::multiplicative(double low, double high) {
  AugmentationScheme s;
  s.kind = Kind::kMultiplicative;
  s.scale_low = low;
  s.scale_high = high;
  return s;
}

AugmentationScheme AugmentationScheme::dynamics(double low, double high) {
  AugmentationScheme s;
  s.kind = Kind::kDynamics;
  s.dynamics_low = low;
  s.dynamics_high = high;
  return s;
}

const char* kind_name(Kind kind) noexcept {
  switch (kind) {
    case Kind::kAdditive: return "additive";
    case Kind::kMultiplicative: return "multiplicative";
    case Kind::kDynamics: return "dynamics";
  }
  return "unknown";
}

Kind parse_kind(const std::string& name) {
  if (name == "additive") return Kind::kAdditive;
  if (name == "multiplicative") return Kind::kMultiplicative;
  if (name == "dynamics") return Kind::kDynamics;
  fail(ErrorCode::kConfig, "unknown augmentation \"" + name +
                               "\" (known: additive, multiplicative, dynamics)");
}

namespace {

double uniform(StreamRng& rng, double low, double high) {
  if (low == high) return low;
  return std::uniform_real_distribution<double>(low, high)(rng);
}

}  // namespace

void augment_row(std::span<float> row, const TransitionSchema& schema,
                 const AugmentationScheme& scheme, StreamRng& rng) {
  require(row.size() == schema.row_dim(), ErrorCode::kInvalidInput,
          "augment_row: row width mismatch");
  const std::size_t sd = schema.state_dim();
  float* s = row.data() + schema.state_offset();
  float* ns = row.data() + schema.next_state_offset();
  switch (scheme.kind) {
    case Kind::kAdditive: {
      std::normal_distribution<double> noise(0.0, scheme.noise_std);
      for (std::size_t k = 0; k < sd; ++k) s[k] = static_cast<float>(s[k] + noise(rng));
      for (std::size_t k = 0; k < sd; ++k) ns[k] = static_cast<float>(ns[k] + noise(rng));
      break;
    }
    case Kind::kMultiplicative: {
      const double eps = uniform(rng, scheme.scale_low, scheme.scale_high);
      for (std::size_t k = 0; k < sd; ++k) {
        s[k] = static_cast<float>(s[k] * eps);
        ns[k] = static_cast<float>(ns[k] * eps);
      }
      break;
    }
    case Kind::kDynamics: {
      // s' + (eps - 1)(s' - s)
      const double eps = uniform(rng, scheme.dynamics_low, scheme.dynamics_high);
      for (std::size_t k = 0; k < sd; ++k) {
        const double delta = double(ns[k]) - double(s[k]);
        ns[k] = static_cast<float>(ns[k] + (eps - 1.0) * delta);
      }
      break;
    }
  }
}

TransitionDataset upsample_with_augmentation(const TransitionDataset& dataset,
                                             const AugmentationScheme& scheme,
                                             std::size_t target_count,
                                             std::uint64_t seed) {
  scheme.validate();
  require(!dataset.empty(), ErrorCode::kInvalidInput,
          "upsample_with_augmentation: empty dataset");
  require(target_count >= dataset.count(), ErrorCode::kInvalidInput,
          "upsample target " + std::to_string(target_count) +
              " is below the dataset size " + std::to_string(dataset.count()));
  TransitionDataset out = dataset;
  out.reserve(target_count);
  std::vector<float> row(dataset.row_dim());
  for (std::size_t j = 0; j < target_count - dataset.count(); ++j) {
    StreamRng rng(stream_key(seed, j, 0xa06));
    const auto src = dataset.row(uniform_index(rng, dataset.count()));
    std::copy(src.begin(), src.end(), row.begin());
    augment_row(row, dataset.schema(), scheme, rng);
    out.append_row(row);
  }
  return out;
}

}  // namespace synther::augment
