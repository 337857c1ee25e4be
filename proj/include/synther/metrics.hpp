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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synther/envs.hpp"
#include "synther/transition.hpp"

namespace synther::metrics {

enum class CorrelationMethod { kPearson, kSpearman };

const char* correlation_method_name(CorrelationMethod m) noexcept;
CorrelationMethod parse_correlation_method(const std::string& name);

// Two-sample KS distance sup |F_a - F_b|, computed by walking both sorted
// samples together. Inputs need not be sorted.
double ks_statistic(std::vector<double> a, std::vector<double> b);

double pearson(std::span<const double> x, std::span<const double> y);
// Average ranks, ties share the mean rank.
std::vector<double> ranks(std::span<const double> x);

// Per-dimension scores: 1 - KS for continuous columns, 1 - |p_real - p_synth|
// for the terminal column.
std::vector<double> marginal_scores(const TransitionDataset& real,
                                    const TransitionDataset& synth);
double marginal_score(const TransitionDataset& real,
                      const TransitionDataset& synth);

struct CorrelationDetail {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> real_rho;
  std::vector<double> synth_rho;
  std::vector<double> scores;  // 1 - |real - synth| / 2
  std::vector<std::size_t> excluded_dims;
};

// Mean over column pairs of 1 - |rho_real - rho_synth| / 2. Columns constant
// in either dataset are excluded. Throws kUndefinedMetric if fewer than two
// usable columns remain.
double correlation_score(const TransitionDataset& real,
                         const TransitionDataset& synth,
                         CorrelationMethod method = CorrelationMethod::kPearson,
                         CorrelationDetail* detail = nullptr);

struct MetricReport {
  double marginal = 0.0;
  double correlation = 0.0;
  std::vector<double> marginal_per_dim;
  CorrelationDetail correlation_detail;
  CorrelationMethod method = CorrelationMethod::kPearson;
  std::size_t real_rows = 0;
  std::size_t synth_rows = 0;
};

struct ReportOptions {
  std::size_t max_rows = 100'000;  // per side
  CorrelationMethod method = CorrelationMethod::kPearson;
  std::uint64_t seed = 0;
};

// Both scores on at most max_rows uniformly subsampled rows per side.
MetricReport fidelity_report(const TransitionDataset& real,
                             const TransitionDataset& synth,
                             const ReportOptions& options = {});

std::string report_summary(const MetricReport& report);
std::string marginal_csv(const MetricReport& report,
                         const TransitionSchema& schema);
std::string correlation_csv(const MetricReport& report,
                            const TransitionSchema& schema);

// Euclidean distance from each synthetic row to its nearest real row in the
// normalizer's space, by exhaustive search. With real_subsample set, only
// that many uniformly drawn real rows are searched.
std::vector<double> min_l2_distances(
    const TransitionDataset& synth, const TransitionDataset& real,
    const Normalizer& normalizer,
    std::optional<std::size_t> real_subsample = std::nullopt,
    std::uint64_t seed = 0, unsigned threads = 0);

struct DynamicsError {
  std::vector<double> per_row;  // NaN for rows outside the oracle's domain
  double mean = 0.0;            // over valid rows
  std::size_t invalid_rows = 0;
};

// Mean squared error of [s', r] against oracle_step(s, a), raw units.
DynamicsError dynamics_mse(const TransitionDataset& data,
                           const envs::Env& oracle);

// "distance,dynamics_mse" per row; invalid-domain rows are skipped.
std::string scatter_csv(std::span<const double> distances,
                        std::span<const double> mse);

// Float count of the dataset over the parameter count.
double compression_ratio(double dataset_floats, double parameter_count);
// One decimal, e.g. "12.9".
std::string format_ratio(double ratio);

double median(std::vector<double> values);

}  // namespace synther::metrics
