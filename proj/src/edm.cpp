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

#include "synther/edm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

#include "synther/binary_io.hpp"
#include "synther/error.hpp"
#include "synther/parallel.hpp"
#include "synther/rng.hpp"

namespace synther::edm {

void EdmConfig::validate() const {
  require(sigma_min > 0 && sigma_min < sigma_max, ErrorCode::kConfig,
          "edm: need 0 < sigma_min < sigma_max");
  require(steps >= 2, ErrorCode::kConfig, "edm: steps must be >= 2");
  require(s_tmin < s_tmax, ErrorCode::kConfig, "edm: need s_tmin < s_tmax");
  require(sigma_data > 0, ErrorCode::kConfig, "edm: sigma_data must be > 0");
  require(rho > 0, ErrorCode::kConfig, "edm: rho must be > 0");
  require(p_std > 0, ErrorCode::kConfig, "edm: p_std must be > 0");
  require(s_churn >= 0 && s_noise >= 0, ErrorCode::kConfig,
          "edm: churn parameters must be non-negative");
}

Preconditioning precondition(double sigma, double sigma_data) {
  require(sigma > 0 && std::isfinite(sigma), ErrorCode::kInvalidInput,
          "precondition: sigma must be positive, got " + std::to_string(sigma));
  require(sigma_data > 0, ErrorCode::kInvalidInput,
          "precondition: sigma_data must be positive");
  const double s2 = sigma * sigma, d2 = sigma_data * sigma_data;
  const double root = std::sqrt(s2 + d2);
  return {d2 / (s2 + d2), sigma * sigma_data / root, 1.0 / root,
          std::log(sigma) / 4.0};
}

double loss_weight(double sigma, double sigma_data) {
  return (sigma * sigma + sigma_data * sigma_data) /
         ((sigma * sigma_data) * (sigma * sigma_data));
}

std::vector<double> sigma_schedule(const EdmConfig& config) {
  config.validate();
  const std::size_t n = config.steps;
  const double inv_rho = 1.0 / config.rho;
  const double hi = std::pow(config.sigma_max, inv_rho);
  const double lo = std::pow(config.sigma_min, inv_rho);
  std::vector<double> sigmas(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    sigmas[i] =
        std::pow(hi + double(i) / double(n - 1) * (lo - hi), config.rho);
  }
  sigmas[0] = config.sigma_max;
  sigmas[n - 1] = config.sigma_min;
  sigmas[n] = 0.0;
  return sigmas;
}

double churn_gamma(const EdmConfig& config, double sigma) {
  if (sigma < config.s_tmin || sigma > config.s_tmax) return 0.0;
  return std::min(config.s_churn / double(config.steps), std::sqrt(2.0) - 1.0);
}

template <typename T>
void sample_step(const DenoiseFn<T>& denoise, Matrix<T>& x, double sigma,
                 double sigma_next, const EdmConfig& config,
                 const NoiseFn<T>& noise) {
  require(sigma > sigma_next && sigma_next >= 0, ErrorCode::kInvalidInput,
          "sample_step: need sigma > sigma_next >= 0");
  const double gamma = churn_gamma(config, sigma);
  const double sigma_hat = sigma * (1.0 + gamma);
  if (gamma > 0) {
    Matrix<T> eps(x.rows(), x.cols());
    noise(eps);
    const double scale =
        std::sqrt(sigma_hat * sigma_hat - sigma * sigma) * config.s_noise;
    x += static_cast<T>(scale) * eps;
  }
  Matrix<T> den;
  denoise(x, sigma_hat, den);
  Matrix<T> slope = (x - den) / static_cast<T>(sigma_hat);
  const T h = static_cast<T>(sigma_next - sigma_hat);
  Matrix<T> next = x + h * slope;
  if (sigma_next > 0) {
    denoise(next, sigma_next, den);
    Matrix<T> slope2 = (next - den) / static_cast<T>(sigma_next);
    next = x + h * (T(0.5) * slope + T(0.5) * slope2);
  }
  x = std::move(next);
}

template <typename T>
void run_sampler(const DenoiseFn<T>& denoise, Matrix<T>& x,
                 const EdmConfig& config, const NoiseFn<T>& noise) {
  const auto sigmas = sigma_schedule(config);
  for (std::size_t i = 0; i + 1 < sigmas.size(); ++i) {
    sample_step(denoise, x, sigmas[i], sigmas[i + 1], config, noise);
  }
}

template <typename T>
Matrix<T> score(const DenoiseFn<T>& denoise, const Matrix<T>& x, double sigma) {
  require(sigma > 0, ErrorCode::kInvalidInput, "score: sigma must be > 0");
  Matrix<T> den;
  denoise(x, sigma, den);
  return (den - x) / static_cast<T>(sigma * sigma);
}

template <typename T>
void denoise_rows(const nn::ResidualMLP<T>& net, double sigma_data,
                  const Matrix<T>& x, std::span<const double> sigmas,
                  Matrix<T>& out) {
  require(sigmas.size() == std::size_t(x.rows()), ErrorCode::kInvalidInput,
          "denoise: one sigma per row required");
  Matrix<T> scaled(x.rows(), x.cols());
  std::vector<T> codes(sigmas.size());
  std::vector<Preconditioning> pre(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    pre[i] = precondition(sigmas[i], sigma_data);
    scaled.row(Eigen::Index(i)) = x.row(Eigen::Index(i)) * static_cast<T>(pre[i].c_in);
    codes[i] = static_cast<T>(pre[i].c_noise);
  }
  Matrix<T> f;
  net.forward(scaled, codes, f);
  out.resize(x.rows(), x.cols());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const auto r = Eigen::Index(i);
    out.row(r) = static_cast<T>(pre[i].c_skip) * x.row(r) +
                 static_cast<T>(pre[i].c_out) * f.row(r);
  }
}

template <typename T, typename Gen>
LossResult<T> training_loss(const nn::ResidualMLP<T>& net,
                            const EdmConfig& config, const Matrix<T>& batch,
                            Gen& rng) {
  const Eigen::Index rows = batch.rows(), dim = batch.cols();
  require(rows > 0, ErrorCode::kInvalidInput, "training_loss: empty batch");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Preconditioning> pre(static_cast<std::size_t>(rows));
  std::vector<double> weight(pre.size());
  std::vector<T> codes(pre.size());
  Matrix<T> noisy(rows, dim), scaled(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double sigma = std::exp(config.p_mean + config.p_std * unit(rng));
    for (Eigen::Index j = 0; j < dim; ++j) {
      noisy(i, j) = batch(i, j) + static_cast<T>(sigma * unit(rng));
    }
    const auto k = std::size_t(i);
    pre[k] = precondition(sigma, config.sigma_data);
    weight[k] = loss_weight(sigma, config.sigma_data);
    codes[k] = static_cast<T>(pre[k].c_noise);
    scaled.row(i) = noisy.row(i) * static_cast<T>(pre[k].c_in);
  }
  Matrix<T> f;
  nn::ResidualCache<T> cache;
  net.forward(scaled, codes, f, cache);
  Matrix<T> grad_f(rows, dim);
  double total = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto k = std::size_t(i);
    double row_sq = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double d = static_cast<double>(pre[k].c_skip) * noisy(i, j) +
                       pre[k].c_out * static_cast<double>(f(i, j)) -
                       static_cast<double>(batch(i, j));
      row_sq += d * d;
      grad_f(i, j) = static_cast<T>(2.0 / double(rows) * weight[k] *
                                    pre[k].c_out * d);
    }
    total += weight[k] * row_sq;
  }
  LossResult<T> result;
  result.loss = total / double(rows);
  net.backward(cache, grad_f, result.grads);
  return result;
}

DiffusionModel::DiffusionModel(TransitionSchema schema,
                               const DenoiserShape& shape, EdmConfig config,
                               Normalizer normalizer, std::uint64_t seed)
    : DiffusionModel(schema,
                     nn::ResidualMLP<float>(
                         nn::ResidualShape{schema.row_dim(), schema.row_dim(),
                                           shape.width, shape.depth,
                                           shape.rff_dim},
                         seed),
                     config, std::move(normalizer)) {}

DiffusionModel::DiffusionModel(TransitionSchema schema,
                               nn::ResidualMLP<float> net, EdmConfig config,
                               Normalizer normalizer)
    : schema_(schema), net_(std::move(net)), config_(config) {
  config_.validate();
  require(net_.shape().in_dim == schema_.row_dim() &&
              net_.shape().out_dim == schema_.row_dim(),
          ErrorCode::kInvalidInput,
          "denoiser dimensions do not match schema row_dim " +
              std::to_string(schema_.row_dim()));
  set_normalizer(std::move(normalizer));
}

void DiffusionModel::set_normalizer(Normalizer n) {
  require(n.dim() == schema_.row_dim(), ErrorCode::kInvalidInput,
          "normalizer width does not match schema");
  normalizer_ = std::move(n);
}

void DiffusionModel::denoise(const Matrix<float>& x, double sigma,
                             Matrix<float>& out) const {
  std::vector<double> sigmas(std::size_t(x.rows()), sigma);
  denoise_rows(net_, config_.sigma_data, x, sigmas, out);
}

DenoiseFn<float> DiffusionModel::denoiser() const {
  return [this](const Matrix<float>& x, double sigma, Matrix<float>& out) {
    denoise(x, sigma, out);
  };
}

std::vector<LossPoint> train(DiffusionModel& model,
                             const TransitionDataset& dataset,
                             const TrainConfig& config, TrainerState* state) {
  require(dataset.schema() == model.schema(), ErrorCode::kInvalidInput,
          "train: dataset schema " + dataset.schema().describe() +
              " does not match model schema " + model.schema().describe());
  require(!dataset.empty(), ErrorCode::kInvalidInput, "train: empty dataset");
  require(config.batch_size > 0, ErrorCode::kConfig, "train: batch_size must be > 0");
  TrainerState local;
  TrainerState& st = state ? *state : local;
  const std::vector<float> rows = normalize_rows(dataset.data(), model.normalizer());
  const std::size_t dim = dataset.row_dim(), count = dataset.count();
  Rng rng = make_rng(config.seed, 0x7a11, st.rounds);
  ++st.rounds;

  std::vector<LossPoint> trace;
  const std::size_t log_every = std::max<std::size_t>(config.log_every, 1);
  double window = 0.0;
  std::size_t window_n = 0;
  Matrix<float> batch(Eigen::Index(config.batch_size), Eigen::Index(dim));
  for (std::size_t step = 0; step < config.steps; ++step) {
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      const std::size_t src = uniform_index(rng, count);
      std::copy_n(rows.data() + src * dim, dim, batch.row(Eigen::Index(i)).data());
    }
    auto result = training_loss(model.net(), model.config(), batch, rng);
    if (!std::isfinite(result.loss)) {
      fail(ErrorCode::kNumeric,
           "diffusion training diverged: non-finite loss at step " +
               std::to_string(step));
    }
    nn::adam_step<float>(st.adam, model.net().parameters(), result.grads,
                         nn::cosine_lr(step, config.steps, config.lr));
    window += result.loss;
    ++window_n;
    if ((step + 1) % log_every == 0 || step + 1 == config.steps) {
      trace.push_back({step + 1, window / double(window_n)});
      window = 0.0;
      window_n = 0;
    }
  }
  return trace;
}

namespace {

// Per-row noise streams: row k, attempt a -> StreamRng(stream_key(seed, k, a)).
class RowNoise {
 public:
  RowNoise(std::uint64_t seed, std::span<const std::size_t> rows,
           std::uint64_t attempt) {
    gens_.reserve(rows.size());
    for (std::size_t r : rows) gens_.emplace_back(stream_key(seed, r, attempt));
    dists_.resize(rows.size());
  }

  void fill(Matrix<float>& eps) {
    for (Eigen::Index i = 0; i < eps.rows(); ++i) {
      auto& gen = gens_[std::size_t(i)];
      auto& dist = dists_[std::size_t(i)];
      for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(i, j) = dist(gen);
    }
  }

 private:
  std::vector<StreamRng> gens_;
  std::vector<std::normal_distribution<float>> dists_;
};

// Sampler block height; a short final block is padded with throwaway rows.
constexpr std::size_t kSampleBlock = 192;

Matrix<float> sample_rows(const DiffusionModel& model, std::uint64_t seed,
                          std::span<const std::size_t> rows,
                          std::uint64_t attempt) {
  const double sigma0 = sigma_schedule(model.config()).front();
  const auto dim = Eigen::Index(model.schema().row_dim());
  Matrix<float> result(Eigen::Index(rows.size()), dim);
  std::vector<std::size_t> ids(kSampleBlock);
  for (std::size_t begin = 0; begin < rows.size(); begin += kSampleBlock) {
    const std::size_t n = std::min(kSampleBlock, rows.size() - begin);
    for (std::size_t i = 0; i < kSampleBlock; ++i) {
      ids[i] = i < n ? rows[begin + i] : std::numeric_limits<std::size_t>::max() - i;
    }
    RowNoise noise(seed, ids, attempt);
    Matrix<float> x(Eigen::Index(kSampleBlock), dim);
    noise.fill(x);
    x *= static_cast<float>(sigma0);
    NoiseFn<float> fill = [&noise](Matrix<float>& eps) { noise.fill(eps); };
    run_sampler<float>(model.denoiser(), x, model.config(), fill);
    result.middleRows(Eigen::Index(begin), Eigen::Index(n)) = x.topRows(Eigen::Index(n));
  }
  return result;
}

bool row_finite(const Matrix<float>& x, Eigen::Index i) {
  return x.row(i).allFinite();
}

}  // namespace

TransitionDataset generate(const DiffusionModel& model, std::size_t count,
                           std::uint64_t seed, const GenerateOptions& options) {
  const std::size_t dim = model.schema().row_dim();
  const std::size_t chunk = std::max<std::size_t>(options.chunk_rows, 1);
  const std::size_t n_chunks = (count + chunk - 1) / chunk;
  std::vector<float> out(count * dim);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;

  auto worker = [&] {
    while (true) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        const std::size_t begin = c * chunk, end = std::min(count, begin + chunk);
        std::vector<std::size_t> rows(end - begin);
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
        Matrix<float> x = sample_rows(model, seed, rows, 0);
        std::vector<std::size_t> bad;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          if (!row_finite(x, i)) bad.push_back(rows[std::size_t(i)]);
        }
        if (!bad.empty()) {
          Matrix<float> redo = sample_rows(model, seed, bad, 1);
          for (std::size_t k = 0; k < bad.size(); ++k) {
            if (!row_finite(redo, Eigen::Index(k))) {
              fail(ErrorCode::kNumeric,
                   "generation produced non-finite values for row " +
                       std::to_string(bad[k]) + " after one retry");
            }
            x.row(Eigen::Index(bad[k] - begin)) = redo.row(Eigen::Index(k));
          }
        }
        std::copy_n(x.data(), x.size(), out.data() + begin * dim);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!error) error = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };
  const unsigned n_threads =
      std::min<unsigned>(worker_threads(options.threads),
                         static_cast<unsigned>(std::max<std::size_t>(n_chunks, 1)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<float> raw = denormalize_rows(out, model.normalizer());
  const Normalizer& norm = model.normalizer();
  if (options.clamp) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const std::size_t j = i % dim;
      if (norm.terminal_mask[j]) continue;
      raw[i] = static_cast<float>(std::clamp<double>(raw[i], norm.min[j], norm.max[j]));
    }
  }
  threshold_terminals(raw, model.schema());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      fail(ErrorCode::kNumeric, "denormalized sample overflowed float32 at row " +
                                    std::to_string(i / dim));
    }
  }
  return TransitionDataset(model.schema(), std::move(raw));
}

namespace {
constexpr std::string_view kModelMagic{"SYNTHE1\0", 8};
}

std::string encode_model(const DiffusionModel& model) {
  io::ByteWriter w;
  nn::write_residual_mlp(w, model.net());
  w.bytes(kModelMagic);
  const auto& s = model.schema();
  w.u32(static_cast<std::uint32_t>(s.state_dim()));
  w.u32(static_cast<std::uint32_t>(s.action_dim()));
  w.u8(s.has_terminal() ? 1 : 0);
  const auto& c = model.config();
  for (double v : {c.sigma_min, c.sigma_max, c.s_churn, c.s_tmin, c.s_tmax,
                   c.s_noise, c.sigma_data, c.rho, c.p_mean, c.p_std}) {
    w.f64(v);
  }
  w.u32(static_cast<std::uint32_t>(c.steps));
  const auto& n = model.normalizer();
  w.u32(static_cast<std::uint32_t>(n.dim()));
  w.f64s(n.mean);
  w.f64s(n.std);
  w.f64s(n.min);
  w.f64s(n.max);
  for (auto m : n.terminal_mask) w.u8(m);
  return w.buffer();
}

DiffusionModel decode_model(std::string bytes, const std::string& source) {
  io::ByteReader r(std::move(bytes), source);
  auto net = nn::read_residual_mlp(r);
  r.expect_magic(kModelMagic);
  const std::uint32_t sd = r.u32(), ad = r.u32();
  const std::uint8_t term = r.u8();
  if (sd == 0 || ad == 0 || term > 1) r.fail("invalid schema block");
  TransitionSchema schema(sd, ad, term == 1);
  EdmConfig c;
  for (double* v : {&c.sigma_min, &c.sigma_max, &c.s_churn, &c.s_tmin,
                    &c.s_tmax, &c.s_noise, &c.sigma_data, &c.rho, &c.p_mean,
                    &c.p_std}) {
    *v = r.f64();
  }
  c.steps = r.u32();
  const std::uint32_t dim = r.u32();
  if (dim != schema.row_dim()) {
    r.fail("dimension mismatch: normalizer width " + std::to_string(dim) +
           " vs schema row_dim " + std::to_string(schema.row_dim()));
  }
  Normalizer n;
  n.mean = r.f64s(dim);
  n.std = r.f64s(dim);
  n.min = r.f64s(dim);
  n.max = r.f64s(dim);
  n.terminal_mask.resize(dim);
  for (auto& m : n.terminal_mask) m = r.u8();
  if (!r.at_end()) r.fail("trailing bytes after model checkpoint");
  try {
    return DiffusionModel(schema, std::move(net), c, std::move(n));
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, source + ": " + e.what());
  }
}

void save_model(const DiffusionModel& model, const std::string& path) {
  io::write_file(path, encode_model(model));
}

DiffusionModel load_model(const std::string& path) {
  return decode_model(io::read_file(path), path);
}

template void sample_step<float>(const DenoiseFn<float>&, Matrix<float>&,
                                 double, double, const EdmConfig&,
                                 const NoiseFn<float>&);
template void sample_step<double>(const DenoiseFn<double>&, Matrix<double>&,
                                  double, double, const EdmConfig&,
                                  const NoiseFn<double>&);
template void run_sampler<float>(const DenoiseFn<float>&, Matrix<float>&,
                                 const EdmConfig&, const NoiseFn<float>&);
template void run_sampler<double>(const DenoiseFn<double>&, Matrix<double>&,
                                  const EdmConfig&, const NoiseFn<double>&);
template Matrix<float> score<float>(const DenoiseFn<float>&,
                                    const Matrix<float>&, double);
template Matrix<double> score<double>(const DenoiseFn<double>&,
                                      const Matrix<double>&, double);
template void denoise_rows<float>(const nn::ResidualMLP<float>&, double,
                                  const Matrix<float>&, std::span<const double>,
                                  Matrix<float>&);
template void denoise_rows<double>(const nn::ResidualMLP<double>&, double,
                                   const Matrix<double>&,
                                   std::span<const double>, Matrix<double>&);
template LossResult<float> training_loss<float, Rng>(
    const nn::ResidualMLP<float>&, const EdmConfig&, const Matrix<float>&, Rng&);
template LossResult<double> training_loss<double, Rng>(
    const nn::ResidualMLP<double>&, const EdmConfig&, const Matrix<double>&,
    Rng&);

}  // namespace synther::edm
