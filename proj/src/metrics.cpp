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

#include "synther/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include "synther/dataset_io.hpp"
#include "synther/error.hpp"
#include "synther/parallel.hpp"

namespace synther::metrics {

const char* correlation_method_name(CorrelationMethod m) noexcept {
  return m == CorrelationMethod::kSpearman ? "spearman" : "pearson";
}

CorrelationMethod parse_correlation_method(const std::string& name) {
  if (name == "pearson") return CorrelationMethod::kPearson;
  if (name == "spearman") return CorrelationMethod::kSpearman;
  fail(ErrorCode::kConfig, "unknown correlation method \"" + name + "\"");
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::kInvalidInput,
          "ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    worst = std::max(worst, std::abs(double(i) / na - double(j) / nb));
  }
  return worst;
}

namespace {

std::vector<double> column(const TransitionDataset& d, std::size_t j) {
  std::vector<double> out(d.count());
  for (std::size_t i = 0; i < d.count(); ++i) out[i] = d.row(i)[j];
  return out;
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
}

void check_pair(const TransitionDataset& real, const TransitionDataset& synth,
                std::size_t min_rows) {
  require(real.schema() == synth.schema(), ErrorCode::kInvalidInput,
          "schema mismatch: real " + real.schema().describe() + " vs synth " +
              synth.schema().describe());
  require(real.count() >= min_rows && synth.count() >= min_rows,
          ErrorCode::kInvalidInput,
          "metrics need at least " + std::to_string(min_rows) +
              " rows on each side");
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

std::vector<double> marginal_scores(const TransitionDataset& real,
                                    const TransitionDataset& synth) {
  check_pair(real, synth, 2);
  const auto& schema = real.schema();
  std::vector<double> scores(schema.row_dim());
  for (std::size_t j = 0; j < schema.row_dim(); ++j) {
    auto a = column(real, j), b = column(synth, j);
    if (schema.has_terminal() && j == schema.terminal_offset()) {
      const double pa = std::accumulate(a.begin(), a.end(), 0.0) / double(a.size());
      const double pb = std::accumulate(b.begin(), b.end(), 0.0) / double(b.size());
      scores[j] = 1.0 - std::abs(pa - pb);
    } else {
      scores[j] = 1.0 - ks_statistic(std::move(a), std::move(b));
    }
  }
  return scores;
}

double marginal_score(const TransitionDataset& real,
                      const TransitionDataset& synth) {
  const auto s = marginal_scores(real, synth);
  return std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
}

double correlation_score(const TransitionDataset& real,
                         const TransitionDataset& synth,
                         CorrelationMethod method, CorrelationDetail* detail) {
  check_pair(real, synth, 3);
  const std::size_t dim = real.row_dim();
  std::vector<std::vector<double>> rc, sc;
  std::vector<std::size_t> used;
  CorrelationDetail local;
  CorrelationDetail& d = detail ? *detail : local;
  d = CorrelationDetail{};
  for (std::size_t j = 0; j < dim; ++j) {
    auto a = column(real, j), b = column(synth, j);
    if (is_constant(a) || is_constant(b)) {
      d.excluded_dims.push_back(j);
      continue;
    }
    if (method == CorrelationMethod::kSpearman) {
      a = ranks(a);
      b = ranks(b);
    }
    rc.push_back(std::move(a));
    sc.push_back(std::move(b));
    used.push_back(j);
  }
  if (used.size() < 2) {
    fail(ErrorCode::kUndefinedMetric,
         "correlation undefined: fewer than two non-constant columns");
  }
  double total = 0.0;
  for (std::size_t p = 0; p < used.size(); ++p) {
    for (std::size_t q = p + 1; q < used.size(); ++q) {
      const double r = pearson(rc[p], rc[q]);
      const double s = pearson(sc[p], sc[q]);
      const double score = 1.0 - std::abs(r - s) / 2.0;
      d.pairs.emplace_back(used[p], used[q]);
      d.real_rho.push_back(r);
      d.synth_rho.push_back(s);
      d.scores.push_back(score);
      total += score;
    }
  }
  return total / double(d.scores.size());
}

MetricReport fidelity_report(const TransitionDataset& real,
                             const TransitionDataset& synth,
                             const ReportOptions& options) {
  check_pair(real, synth, 3);
  auto cap = [&](const TransitionDataset& d, std::uint64_t stream) {
    if (d.count() <= options.max_rows) return d;
    return subsample(d, double(options.max_rows) / double(d.count()),
                     stream_key(options.seed, stream));
  };
  const TransitionDataset r = cap(real, 1), s = cap(synth, 2);
  MetricReport report;
  report.method = options.method;
  report.real_rows = r.count();
  report.synth_rows = s.count();
  report.marginal_per_dim = marginal_scores(r, s);
  report.marginal = std::accumulate(report.marginal_per_dim.begin(),
                                    report.marginal_per_dim.end(), 0.0) /
                    double(report.marginal_per_dim.size());
  report.correlation =
      correlation_score(r, s, options.method, &report.correlation_detail);
  return report;
}

std::string report_summary(const MetricReport& report) {
  std::string out;
  out += "marginal=" + format_double(report.marginal) + "\n";
  out += "correlation=" + format_double(report.correlation) + "\n";
  out += "correlation_method=" + std::string(correlation_method_name(report.method)) + "\n";
  out += "real_rows=" + std::to_string(report.real_rows) + "\n";
  out += "synth_rows=" + std::to_string(report.synth_rows) + "\n";
  out += "excluded_dims=" +
         std::to_string(report.correlation_detail.excluded_dims.size()) + "\n";
  return out;
}

std::string marginal_csv(const MetricReport& report,
                         const TransitionSchema& schema) {
  const auto names = schema.column_names();
  std::string out = "column,score\n";
  for (std::size_t j = 0; j < report.marginal_per_dim.size(); ++j) {
    out += names[j] + "," + format_double(report.marginal_per_dim[j]) + "\n";
  }
  return out;
}

std::string correlation_csv(const MetricReport& report,
                            const TransitionSchema& schema) {
  const auto names = schema.column_names();
  const auto& d = report.correlation_detail;
  std::string out = "column_a,column_b,rho_real,rho_synth,score\n";
  for (std::size_t k = 0; k < d.pairs.size(); ++k) {
    out += names[d.pairs[k].first] + "," + names[d.pairs[k].second] + "," +
           format_double(d.real_rho[k]) + "," + format_double(d.synth_rho[k]) +
           "," + format_double(d.scores[k]) + "\n";
  }
  return out;
}

std::vector<double> min_l2_distances(const TransitionDataset& synth,
                                     const TransitionDataset& real,
                                     const Normalizer& normalizer,
                                     std::optional<std::size_t> real_subsample,
                                     std::uint64_t seed, unsigned threads) {
  require(real.count() > 0, ErrorCode::kInvalidInput,
          "min_l2_distances: empty real set");
  require(synth.schema() == real.schema(), ErrorCode::kInvalidInput,
          "min_l2_distances: schema mismatch");
  TransitionDataset pool = real;
  if (real_subsample && *real_subsample < real.count()) {
    require(*real_subsample > 0, ErrorCode::kInvalidInput,
            "min_l2_distances: subsample size must be positive");
    pool = subsample(real, double(*real_subsample) / double(real.count()), seed);
  }
  const std::size_t dim = real.row_dim();
  const std::vector<float> r = normalize_rows(pool.data(), normalizer);
  const std::vector<float> s = normalize_rows(synth.data(), normalizer);
  const std::size_t nr = pool.count(), ns = synth.count();
  std::vector<double> out(ns);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const float* a = s.data() + i * dim;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nr; ++j) {
        const float* b = r.data() + j * dim;
        double acc = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double diff = double(a[k]) - double(b[k]);
          acc += diff * diff;
        }
        best = std::min(best, acc);
      }
      out[i] = std::sqrt(best);
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(worker_threads(threads),
                                      static_cast<unsigned>(std::max<std::size_t>(ns, 1))));
  if (n_threads == 1) {
    work(0, ns);
  } else {
    std::vector<std::thread> pool_threads;
    const std::size_t per = (ns + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      const std::size_t b = std::min(ns, t * per), e = std::min(ns, b + per);
      pool_threads.emplace_back(work, b, e);
    }
    for (auto& t : pool_threads) t.join();
  }
  return out;
}

DynamicsError dynamics_mse(const TransitionDataset& data,
                           const envs::Env& oracle) {
  const auto& schema = data.schema();
  const auto& spec = oracle.spec();
  require(schema.state_dim() == spec.state_dim &&
              schema.action_dim() == spec.action_dim,
          ErrorCode::kConfig,
          "dataset schema " + schema.describe() + " does not match env " +
              spec.name);
  DynamicsError out;
  out.per_row.resize(data.count());
  double total = 0.0;
  std::size_t valid = 0;
  const std::size_t sd = schema.state_dim();
  for (std::size_t i = 0; i < data.count(); ++i) {
    auto row = data.row(i);
    try {
      const auto truth =
          oracle.oracle_step(row.subspan(schema.state_offset(), sd),
                             row.subspan(schema.action_offset(), schema.action_dim()));
      double acc = 0.0;
      for (std::size_t k = 0; k < sd; ++k) {
        const double d = double(row[schema.next_state_offset() + k]) -
                         double(truth.next_state[k]);
        acc += d * d;
      }
      const double dr = double(row[schema.reward_offset()]) - double(truth.reward);
      acc += dr * dr;
      out.per_row[i] = acc / double(sd + 1);
      total += out.per_row[i];
      ++valid;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidDomain) throw;
      out.per_row[i] = std::numeric_limits<double>::quiet_NaN();
      ++out.invalid_rows;
    }
  }
  out.mean = valid ? total / double(valid) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::string scatter_csv(std::span<const double> distances,
                        std::span<const double> mse) {
  require(distances.size() == mse.size(), ErrorCode::kInvalidInput,
          "scatter_csv: length mismatch");
  std::string out = "distance,dynamics_mse\n";
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (std::isnan(mse[i])) continue;
    out += format_double(distances[i]) + "," + format_double(mse[i]) + "\n";
  }
  return out;
}

double compression_ratio(double dataset_floats, double parameter_count) {
  require(parameter_count > 0, ErrorCode::kInvalidInput,
          "compression_ratio: parameter count must be positive");
  return dataset_floats / parameter_count;
}

std::string format_ratio(double ratio) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", ratio);
  return buf;
}

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  require(!values.empty(), ErrorCode::kInvalidInput, "median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = (m + *std::max_element(values.begin(), values.begin() + mid)) / 2.0;
  }
  return m;
}

}  // namespace synther::metrics
