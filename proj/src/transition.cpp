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

#include "synther/transition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synther/error.hpp"
#include "synther/rng.hpp"

namespace synther {

TransitionSchema::TransitionSchema(std::size_t state_dim,
                                   std::size_t action_dim, bool has_terminal)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      has_terminal_(has_terminal) {
  require(state_dim > 0 && action_dim > 0, ErrorCode::kInvalidInput,
          "schema dimensions must be positive");
}

std::vector<std::string> TransitionSchema::column_names() const {
  std::vector<std::string> names;
  names.reserve(row_dim());
  for (std::size_t i = 0; i < state_dim_; ++i) names.push_back("s" + std::to_string(i));
  for (std::size_t i = 0; i < action_dim_; ++i) names.push_back("a" + std::to_string(i));
  names.emplace_back("r");
  for (std::size_t i = 0; i < state_dim_; ++i) names.push_back("ns" + std::to_string(i));
  if (has_terminal_) names.emplace_back("d");
  return names;
}

std::string TransitionSchema::describe() const {
  return "state_dim=" + std::to_string(state_dim_) +
         " action_dim=" + std::to_string(action_dim_) +
         " has_terminal=" + (has_terminal_ ? "1" : "0");
}

TransitionDataset::TransitionDataset(TransitionSchema schema)
    : schema_(schema) {}

TransitionDataset::TransitionDataset(TransitionSchema schema,
                                     std::vector<float> rows)
    : schema_(schema), rows_(std::move(rows)) {
  require(schema_.row_dim() > 0, ErrorCode::kInvalidInput, "empty schema");
  require(rows_.size() % schema_.row_dim() == 0, ErrorCode::kInvalidInput,
          "row payload of " + std::to_string(rows_.size()) +
              " floats is not a multiple of row_dim " +
              std::to_string(schema_.row_dim()));
  validate();
}

void TransitionDataset::append_row(std::span<const float> row) {
  require(row.size() == row_dim(), ErrorCode::kInvalidInput,
          "row width mismatch");
  rows_.insert(rows_.end(), row.begin(), row.end());
}

void TransitionDataset::append(const TransitionDataset& other) {
  require(other.schema() == schema_, ErrorCode::kInvalidInput,
          "schema mismatch: " + schema_.describe() + " vs " +
              other.schema().describe());
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

void TransitionDataset::validate() const {
  const std::size_t dim = row_dim();
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!std::isfinite(rows_[i])) {
      fail(ErrorCode::kInvalidInput,
           "non-finite value at row " + std::to_string(i / dim) +
               " column " + std::to_string(i % dim));
    }
  }
  if (schema_.has_terminal()) {
    const std::size_t t = schema_.terminal_offset();
    for (std::size_t r = 0; r < count(); ++r) {
      const float d = rows_[r * dim + t];
      if (d != 0.0f && d != 1.0f) {
        fail(ErrorCode::kInvalidInput,
             "terminal value " + std::to_string(d) + " at row " +
                 std::to_string(r) + " is not 0 or 1");
      }
    }
  }
}

Normalizer Normalizer::identity(const TransitionSchema& schema) {
  const std::size_t dim = schema.row_dim();
  Normalizer n;
  n.mean.assign(dim, 0.0);
  n.std.assign(dim, 1.0);
  n.min.assign(dim, -std::numeric_limits<double>::infinity());
  n.max.assign(dim, std::numeric_limits<double>::infinity());
  n.terminal_mask.assign(dim, 0);
  if (schema.has_terminal()) n.terminal_mask[schema.terminal_offset()] = 1;
  return n;
}

Normalizer fit_normalizer(const TransitionDataset& dataset) {
  require(dataset.count() >= 2, ErrorCode::kInvalidInput,
          "fit_normalizer needs at least 2 rows, got " +
              std::to_string(dataset.count()));
  const std::size_t dim = dataset.row_dim();
  const std::size_t n = dataset.count();
  Normalizer out = Normalizer::identity(dataset.schema());
  std::vector<double> sum(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = dataset.row(r);
    for (std::size_t j = 0; j < dim; ++j) {
      sum[j] += row[j];
      out.min[j] = r == 0 ? row[j] : std::min<double>(out.min[j], row[j]);
      out.max[j] = r == 0 ? row[j] : std::max<double>(out.max[j], row[j]);
    }
  }
  std::vector<double> mean(dim), sq(dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) mean[j] = sum[j] / double(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = dataset.row(r);
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = row[j] - mean[j];
      sq[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (out.terminal_mask[j]) continue;
    const double sd = std::sqrt(sq[j] / double(n));
    out.mean[j] = mean[j];
    out.std[j] = sd < kStdFloor ? 1.0 : sd;
  }
  return out;
}

namespace {

void check_width(std::span<const float> rows, const Normalizer& normalizer) {
  require(normalizer.dim() > 0 && rows.size() % normalizer.dim() == 0,
          ErrorCode::kInvalidInput,
          "row payload does not match normalizer width " +
              std::to_string(normalizer.dim()));
}

}  // namespace

std::vector<float> normalize_rows(std::span<const float> rows,
                                  const Normalizer& normalizer) {
  check_width(rows, normalizer);
  const std::size_t dim = normalizer.dim();
  std::vector<float> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t j = i % dim;
    out[i] = normalizer.terminal_mask[j]
                 ? rows[i]
                 : static_cast<float>((rows[i] - normalizer.mean[j]) /
                                      normalizer.std[j]);
  }
  return out;
}

std::vector<float> denormalize_rows(std::span<const float> rows,
                                    const Normalizer& normalizer) {
  check_width(rows, normalizer);
  const std::size_t dim = normalizer.dim();
  std::vector<float> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t j = i % dim;
    out[i] = normalizer.terminal_mask[j]
                 ? rows[i]
                 : static_cast<float>(rows[i] * normalizer.std[j] +
                                      normalizer.mean[j]);
  }
  return out;
}

TransitionDataset normalize(const TransitionDataset& dataset,
                            const Normalizer& normalizer) {
  require(normalizer.dim() == dataset.row_dim(), ErrorCode::kInvalidInput,
          "normalizer width " + std::to_string(normalizer.dim()) +
              " != row_dim " + std::to_string(dataset.row_dim()));
  TransitionDataset out(dataset.schema());
  auto rows = normalize_rows(dataset.data(), normalizer);
  out.reserve(dataset.count());
  for (std::size_t r = 0; r < dataset.count(); ++r) {
    out.append_row(std::span<const float>(rows).subspan(r * dataset.row_dim(),
                                                         dataset.row_dim()));
  }
  return out;
}

void threshold_terminals(std::span<float> rows,
                         const TransitionSchema& schema) {
  if (!schema.has_terminal()) return;
  const std::size_t dim = schema.row_dim();
  for (std::size_t i = schema.terminal_offset(); i < rows.size(); i += dim) {
    rows[i] = rows[i] >= 0.5f ? 1.0f : 0.0f;
  }
}

namespace {

std::vector<std::size_t> partial_permutation(std::size_t n, std::size_t k,
                                             std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed, 0x5ab5);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

}  // namespace

TransitionDataset subsample(const TransitionDataset& dataset, double fraction,
                            std::uint64_t seed) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::kInvalidInput,
          "subsample fraction must lie in (0, 1], got " +
              std::to_string(fraction));
  const auto k = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(dataset.count())));
  require(k >= 1, ErrorCode::kInvalidInput,
          "subsample would keep zero rows");
  auto idx = partial_permutation(dataset.count(), k, seed);
  TransitionDataset out(dataset.schema());
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.append_row(dataset.row(idx[i]));
  return out;
}

std::pair<TransitionDataset, TransitionDataset> split(
    const TransitionDataset& dataset, std::size_t first_count,
    std::uint64_t seed) {
  require(first_count <= dataset.count(), ErrorCode::kInvalidInput,
          "split size exceeds dataset");
  auto idx = partial_permutation(dataset.count(), dataset.count(), seed);
  TransitionDataset a(dataset.schema()), b(dataset.schema());
  a.reserve(first_count);
  b.reserve(dataset.count() - first_count);
  for (std::size_t i = 0; i < dataset.count(); ++i) {
    (i < first_count ? a : b).append_row(dataset.row(idx[i]));
  }
  return {std::move(a), std::move(b)};
}

}  // namespace synther
