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

#include "synther/nn.hpp"

#include <cmath>
#include <numbers>

#include "synther/error.hpp"

namespace synther::nn {

namespace {

template <typename T>
using ConstMatMap = Eigen::Map<const Matrix<T>>;
template <typename T>
using MatMap = Eigen::Map<Matrix<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowVector<T>>;
template <typename T>
using RowMap = Eigen::Map<RowVector<T>>;

template <typename T>
ConstMatMap<T> weight(const std::vector<T>& p, const DenseLayout& l) {
  return ConstMatMap<T>(p.data() + l.offset, Eigen::Index(l.fan_in),
                        Eigen::Index(l.fan_out));
}

template <typename T>
ConstRowMap<T> bias(const std::vector<T>& p, const DenseLayout& l) {
  return ConstRowMap<T>(p.data() + l.bias_offset(), Eigen::Index(l.fan_out));
}

template <typename T>
void dense(const std::vector<T>& p, const DenseLayout& l, const Matrix<T>& in,
           Matrix<T>& out) {
  out.noalias() = in * weight(p, l);
  out.rowwise() += bias(p, l);
}

template <typename T>
void dense_grads(const DenseLayout& l, const Matrix<T>& in,
                 const Matrix<T>& out_grad, std::vector<T>& grads) {
  MatMap<T>(grads.data() + l.offset, Eigen::Index(l.fan_in),
            Eigen::Index(l.fan_out))
      .noalias() = in.transpose() * out_grad;
  RowVector<T> db = RowVector<T>::Zero(Eigen::Index(l.fan_out));
  for (Eigen::Index i = 0; i < out_grad.rows(); ++i) db += out_grad.row(i);
  RowMap<T>(grads.data() + l.bias_offset(), Eigen::Index(l.fan_out)) = db;
}

template <typename T>
void he_init(std::vector<T>& params, const std::vector<DenseLayout>& layers,
             Rng& rng) {
  for (const auto& l : layers) {
    std::normal_distribution<double> dist(0.0,
                                          std::sqrt(2.0 / double(l.fan_in)));
    for (std::size_t i = 0; i < l.weight_count(); ++i) {
      params[l.offset + i] = static_cast<T>(dist(rng));
    }
    for (std::size_t i = 0; i < l.fan_out; ++i) params[l.bias_offset() + i] = T(0);
  }
}

template <typename T>
void check_finite(const Matrix<T>& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNumeric, std::string("non-finite values in ") + what);
  }
}

}  // namespace

std::size_t ResidualShape::parameter_count() const noexcept {
  const std::size_t w = width;
  return (in_dim + rff_out()) * w + w + depth * (w * w + w) + w * out_dim +
         out_dim;
}

template <typename T>
ResidualMLP<T>::ResidualMLP(const ResidualShape& shape, std::uint64_t seed)
    : shape_(shape) {
  require(shape.in_dim > 0 && shape.out_dim > 0 && shape.width > 0,
          ErrorCode::kInvalidInput, "residual MLP dimensions must be positive");
  build_layout();
  params_.assign(layers_.back().end(), T(0));
  Rng freq_rng = make_rng(seed, 1);
  std::normal_distribution<double> unit(0.0, 1.0);
  freqs_.resize(shape.rff_dim);
  for (auto& f : freqs_) f = static_cast<T>(unit(freq_rng));
  Rng weight_rng = make_rng(seed, 2);
  he_init(params_, layers_, weight_rng);
}

template <typename T>
ResidualMLP<T>::ResidualMLP(const ResidualShape& shape,
                            std::vector<T> frequencies,
                            std::vector<T> parameters)
    : shape_(shape), freqs_(std::move(frequencies)), params_(std::move(parameters)) {
  build_layout();
  require(freqs_.size() == shape.rff_dim, ErrorCode::kInvalidInput,
          "frequency count does not match rff_dim");
  require(params_.size() == shape.parameter_count(), ErrorCode::kInvalidInput,
          "parameter count does not match shape");
}

template <typename T>
void ResidualMLP<T>::build_layout() {
  layers_.clear();
  std::size_t offset = 0;
  auto add = [&](std::size_t in, std::size_t out) {
    layers_.push_back({in, out, offset});
    offset = layers_.back().end();
  };
  add(shape_.in_dim + shape_.rff_out(), shape_.width);
  for (std::size_t l = 0; l < shape_.depth; ++l) add(shape_.width, shape_.width);
  add(shape_.width, shape_.out_dim);
}

template <typename T>
void ResidualMLP<T>::embed_noise(std::span<const T> noise_codes,
                                 Matrix<T>& out) const {
  const std::size_t r = shape_.rff_dim;
  out.resize(Eigen::Index(noise_codes.size()), Eigen::Index(2 * r));
  const T two_pi = static_cast<T>(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < noise_codes.size(); ++i) {
    for (std::size_t k = 0; k < r; ++k) {
      const T angle = two_pi * freqs_[k] * noise_codes[i];
      out(Eigen::Index(i), Eigen::Index(k)) = std::sin(angle);
      out(Eigen::Index(i), Eigen::Index(r + k)) = std::cos(angle);
    }
  }
}

template <typename T>
void ResidualMLP<T>::forward(const Matrix<T>& x, std::span<const T> noise_codes,
                             Matrix<T>& out, ResidualCache<T>& cache) const {
  const Eigen::Index batch = x.rows();
  require(x.cols() == Eigen::Index(shape_.in_dim), ErrorCode::kInvalidInput,
          "input width " + std::to_string(x.cols()) + " != in_dim " +
              std::to_string(shape_.in_dim));
  require(noise_codes.size() == std::size_t(batch), ErrorCode::kInvalidInput,
          "one noise code per row required");
  check_finite(x, "network input");
  cache.shape = shape_;
  cache.input.resize(batch, Eigen::Index(shape_.in_dim + shape_.rff_out()));
  cache.input.leftCols(x.cols()) = x;
  if (shape_.rff_dim > 0) {
    Matrix<T> emb;
    embed_noise(noise_codes, emb);
    cache.input.rightCols(emb.cols()) = emb;
  }
  cache.hidden.resize(shape_.depth + 1);
  dense(params_, input_layer(), cache.input, cache.hidden[0]);
  for (std::size_t l = 0; l < shape_.depth; ++l) {
    const Matrix<T>& h = cache.hidden[l];
    Matrix<T>& next = cache.hidden[l + 1];
    next = h;
    next.noalias() += h.cwiseMax(T(0)) * weight(params_, block(l));
    next.rowwise() += bias(params_, block(l));
  }
  dense(params_, output_layer(), cache.hidden[shape_.depth], out);
}

template <typename T>
void ResidualMLP<T>::forward(const Matrix<T>& x, std::span<const T> noise_codes,
                             Matrix<T>& out) const {
  require(x.cols() == Eigen::Index(shape_.in_dim), ErrorCode::kInvalidInput,
          "input width " + std::to_string(x.cols()) + " != in_dim " +
              std::to_string(shape_.in_dim));
  require(noise_codes.size() == std::size_t(x.rows()), ErrorCode::kInvalidInput,
          "one noise code per row required");
  check_finite(x, "network input");
  Matrix<T> input(x.rows(), Eigen::Index(shape_.in_dim + shape_.rff_out()));
  input.leftCols(x.cols()) = x;
  if (shape_.rff_dim > 0) {
    Matrix<T> emb;
    embed_noise(noise_codes, emb);
    input.rightCols(emb.cols()) = emb;
  }
  Matrix<T> h, act;
  dense(params_, input_layer(), input, h);
  for (std::size_t l = 0; l < shape_.depth; ++l) {
    act = h.cwiseMax(T(0));
    h.noalias() += act * weight(params_, block(l));
    h.rowwise() += bias(params_, block(l));
  }
  dense(params_, output_layer(), h, out);
}

template <typename T>
void ResidualMLP<T>::backward(const ResidualCache<T>& cache,
                              const Matrix<T>& output_grad,
                              std::vector<T>& grads,
                              Matrix<T>* input_grad) const {
  require(cache.shape == shape_ && cache.hidden.size() == shape_.depth + 1,
          ErrorCode::kInvalidState, "forward cache does not match network");
  require(output_grad.rows() == cache.input.rows() &&
              output_grad.cols() == Eigen::Index(shape_.out_dim),
          ErrorCode::kInvalidState, "output gradient shape mismatch");
  grads.assign(params_.size(), T(0));
  dense_grads(output_layer(), cache.hidden[shape_.depth], output_grad, grads);
  Matrix<T> dh = output_grad * weight(params_, output_layer()).transpose();
  Matrix<T> act, back;
  for (std::size_t l = shape_.depth; l-- > 0;) {
    const Matrix<T>& h = cache.hidden[l];
    act = h.cwiseMax(T(0));
    dense_grads(block(l), act, dh, grads);
    back.noalias() = dh * weight(params_, block(l)).transpose();
    dh += (h.array() > T(0)).select(back, T(0));
  }
  dense_grads(input_layer(), cache.input, dh, grads);
  if (input_grad != nullptr) {
    Matrix<T> dz = dh * weight(params_, input_layer()).transpose();
    *input_grad = dz.leftCols(Eigen::Index(shape_.in_dim));
  }
}

template <typename T>
template <typename U>
ResidualMLP<U> ResidualMLP<T>::cast() const {
  std::vector<U> f(freqs_.begin(), freqs_.end());
  std::vector<U> p(params_.begin(), params_.end());
  return ResidualMLP<U>(shape_, std::move(f), std::move(p));
}

template <typename T>
Mlp<T>::Mlp(std::vector<std::size_t> sizes, std::uint64_t seed)
    : Mlp(sizes, std::vector<T>{}) {
  Rng rng = make_rng(seed, 3);
  he_init(params_, layers_, rng);
}

template <typename T>
Mlp<T>::Mlp(std::vector<std::size_t> sizes, std::vector<T> parameters)
    : sizes_(std::move(sizes)), params_(std::move(parameters)) {
  require(sizes_.size() >= 2, ErrorCode::kInvalidInput,
          "MLP needs at least input and output sizes");
  std::size_t offset = 0;
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    require(sizes_[i] > 0 && sizes_[i + 1] > 0, ErrorCode::kInvalidInput,
            "MLP layer sizes must be positive");
    layers_.push_back({sizes_[i], sizes_[i + 1], offset});
    offset = layers_.back().end();
  }
  if (params_.empty()) {
    params_.assign(offset, T(0));
  } else {
    require(params_.size() == offset, ErrorCode::kInvalidInput,
            "MLP parameter count mismatch");
  }
}

template <typename T>
void Mlp<T>::forward(const Matrix<T>& x, Matrix<T>& out,
                     MlpCache<T>& cache) const {
  require(x.cols() == Eigen::Index(in_dim()), ErrorCode::kInvalidInput,
          "MLP input width mismatch");
  const std::size_t n = layers_.size();
  cache.inputs.resize(n);
  cache.pre.resize(n - 1);
  cache.inputs[0] = x;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 == n) {
      dense(params_, layers_[i], cache.inputs[i], out);
    } else {
      dense(params_, layers_[i], cache.inputs[i], cache.pre[i]);
      cache.inputs[i + 1] = cache.pre[i].cwiseMax(T(0));
    }
  }
}

template <typename T>
void Mlp<T>::forward(const Matrix<T>& x, Matrix<T>& out) const {
  require(x.cols() == Eigen::Index(in_dim()), ErrorCode::kInvalidInput,
          "MLP input width mismatch");
  Matrix<T> h = x, next;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (i + 1 == layers_.size()) {
      dense(params_, layers_[i], h, out);
    } else {
      dense(params_, layers_[i], h, next);
      h = next.cwiseMax(T(0));
    }
  }
}

template <typename T>
void Mlp<T>::backward(const MlpCache<T>& cache, const Matrix<T>& output_grad,
                      std::vector<T>& grads, Matrix<T>* input_grad) const {
  require(cache.inputs.size() == layers_.size() &&
              output_grad.cols() == Eigen::Index(out_dim()) &&
              output_grad.rows() == cache.inputs[0].rows(),
          ErrorCode::kInvalidState, "MLP cache does not match network");
  grads.assign(params_.size(), T(0));
  Matrix<T> d = output_grad, back;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    dense_grads(layers_[i], cache.inputs[i], d, grads);
    if (i == 0 && input_grad == nullptr) break;
    back.noalias() = d * weight(params_, layers_[i]).transpose();
    if (i == 0) {
      *input_grad = back;
    } else {
      d = (cache.pre[i - 1].array() > T(0)).select(back, T(0));
    }
  }
}

template <typename T>
void adam_step(AdamState<T>& state, std::span<T> params,
               std::span<const T> grads, double lr) {
  require(params.size() == grads.size(), ErrorCode::kInvalidInput,
          "adam: parameter / gradient size mismatch");
  if (state.m.size() != params.size()) {
    require(state.step == 0, ErrorCode::kInvalidState,
            "adam: state size does not match parameters");
    state.m.assign(params.size(), T(0));
    state.v.assign(params.size(), T(0));
  }
  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, double(state.step));
  const double bc2 = 1.0 - std::pow(b2, double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double m = b1 * state.m[i] + (1.0 - b1) * g;
    const double v = b2 * state.v[i] + (1.0 - b2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    params[i] = static_cast<T>(params[i] - lr * (m / bc1) /
                                               (std::sqrt(v / bc2) + state.epsilon));
  }
}

double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr0) {
  if (total_steps == 0 || step >= total_steps) return 0.0;
  return lr0 * (1.0 + std::cos(std::numbers::pi * double(step) /
                               double(total_steps))) /
         2.0;
}

template <typename T>
void polyak_update(std::span<T> target, std::span<const T> source,
                   double tau) {
  require(target.size() == source.size(), ErrorCode::kInvalidInput,
          "polyak: size mismatch");
  const T keep = static_cast<T>(1.0 - tau), mix = static_cast<T>(tau);
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = keep * target[i] + mix * source[i];
  }
}

void write_residual_mlp(io::ByteWriter& w, const ResidualMLP<float>& net) {
  const auto& s = net.shape();
  w.bytes(kWeightsMagic);
  for (std::size_t v : {s.in_dim, s.out_dim, s.width, s.depth, s.rff_dim}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.f32s(net.frequencies());
  w.f32s(net.parameters());
}

ResidualMLP<float> read_residual_mlp(io::ByteReader& r) {
  r.expect_magic(kWeightsMagic);
  ResidualShape s;
  s.in_dim = r.u32();
  s.out_dim = r.u32();
  s.width = r.u32();
  s.depth = r.u32();
  s.rff_dim = r.u32();
  if (s.in_dim == 0 || s.out_dim == 0 || s.width == 0) {
    r.fail("zero dimension in network header");
  }
  std::vector<float> freqs(s.rff_dim);
  r.f32s(freqs);
  std::vector<float> params(s.parameter_count());
  r.f32s(params);
  return ResidualMLP<float>(s, std::move(freqs), std::move(params));
}

void write_mlp(io::ByteWriter& w, const Mlp<float>& net) {
  const auto& sizes = net.sizes();
  require(sizes.size() >= 3, ErrorCode::kInvalidInput,
          "checkpointed MLPs need at least one hidden layer");
  for (std::size_t i = 2; i + 1 < sizes.size(); ++i) {
    require(sizes[i] == sizes[1], ErrorCode::kInvalidInput,
            "checkpointed MLPs need uniform hidden width");
  }
  w.bytes(kWeightsMagic);
  for (std::size_t v : {sizes.front(), sizes.back(), sizes[1],
                        sizes.size() - 2, std::size_t{0}}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.f32s(net.parameters());
}

Mlp<float> read_mlp(io::ByteReader& r) {
  r.expect_magic(kWeightsMagic);
  const std::uint32_t in = r.u32(), out = r.u32(), width = r.u32(),
                      depth = r.u32(), rff = r.u32();
  if (rff != 0) r.fail("plain MLP block must have rff_dim 0");
  if (in == 0 || out == 0 || width == 0 || depth == 0) {
    r.fail("zero dimension in network header");
  }
  std::vector<std::size_t> sizes{in};
  for (std::uint32_t i = 0; i < depth; ++i) sizes.push_back(width);
  sizes.push_back(out);
  Mlp<float> shape_only(sizes, std::vector<float>{});
  std::vector<float> params(shape_only.parameter_count());
  r.f32s(params);
  return Mlp<float>(std::move(sizes), std::move(params));
}

template class ResidualMLP<float>;
template class ResidualMLP<double>;
template ResidualMLP<double> ResidualMLP<float>::cast<double>() const;
template ResidualMLP<float> ResidualMLP<double>::cast<float>() const;
template ResidualMLP<float> ResidualMLP<float>::cast<float>() const;
template ResidualMLP<double> ResidualMLP<double>::cast<double>() const;
template class Mlp<float>;
template class Mlp<double>;
template void adam_step<float>(AdamState<float>&, std::span<float>,
                               std::span<const float>, double);
template void adam_step<double>(AdamState<double>&, std::span<double>,
                                std::span<const double>, double);
template void polyak_update<float>(std::span<float>, std::span<const float>,
                                   double);
template void polyak_update<double>(std::span<double>, std::span<const double>,
                                    double);

}  // namespace synther::nn
