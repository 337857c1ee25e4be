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

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "synther/binary_io.hpp"
#include "synther/rng.hpp"

namespace synther::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// Flat parameter layout used by every network here: for each dense layer, the
// weight matrix (fan_in x fan_out, row-major) followed by its bias (fan_out).
struct DenseLayout {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::size_t offset = 0;  // index of the first weight in the flat vector

  std::size_t weight_count() const noexcept { return fan_in * fan_out; }
  std::size_t bias_offset() const noexcept { return offset + weight_count(); }
  std::size_t end() const noexcept { return bias_offset() + fan_out; }
};

struct ResidualShape {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t width = 0;
  std::size_t depth = 0;
  std::size_t rff_dim = 0;

  std::size_t rff_out() const noexcept { return 2 * rff_dim; }
  // (in + 2 rff) w + w + depth (w^2 + w) + w out + out
  std::size_t parameter_count() const noexcept;

  friend bool operator==(const ResidualShape&, const ResidualShape&) = default;
};

template <typename T>
struct ResidualCache {
  Matrix<T> input;               // concat(x, rff(c)), B x (in + 2 rff)
  std::vector<Matrix<T>> hidden;  // residual stream before each block + final
  ResidualShape shape;
};

// Residual MLP denoiser body:
//   h0 = [x, rff(c)] W_in + b_in
//   h_{l+1} = relu(h_l) W_l + b_l + h_l      (l = 0 .. depth-1)
//   out = h_depth W_out + b_out
// rff(c) = [sin(2 pi f_i c)..., cos(2 pi f_i c)...] with frozen f ~ N(0, 1).
template <typename T>
class ResidualMLP {
 public:
  ResidualMLP() = default;
  ResidualMLP(const ResidualShape& shape, std::uint64_t seed);
  ResidualMLP(const ResidualShape& shape, std::vector<T> frequencies,
              std::vector<T> parameters);

  const ResidualShape& shape() const noexcept { return shape_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<T> parameters() noexcept { return params_; }
  std::span<const T> parameters() const noexcept { return params_; }
  std::span<const T> frequencies() const noexcept { return freqs_; }

  const DenseLayout& input_layer() const noexcept { return layers_.front(); }
  const DenseLayout& block(std::size_t l) const noexcept { return layers_[1 + l]; }
  const DenseLayout& output_layer() const noexcept { return layers_.back(); }

  // Writes [sin | cos] features of each noise code into `out` (B x 2 rff).
  void embed_noise(std::span<const T> noise_codes, Matrix<T>& out) const;

  void forward(const Matrix<T>& x, std::span<const T> noise_codes,
               Matrix<T>& out) const;
  void forward(const Matrix<T>& x, std::span<const T> noise_codes,
               Matrix<T>& out, ResidualCache<T>& cache) const;

  // Accumulates nothing: `grads` is overwritten. `input_grad` (optional)
  // receives d loss / d x for the x part of the input.
  void backward(const ResidualCache<T>& cache, const Matrix<T>& output_grad,
                std::vector<T>& grads, Matrix<T>* input_grad = nullptr) const;

  template <typename U>
  ResidualMLP<U> cast() const;

 private:
  void build_layout();

  ResidualShape shape_;
  std::vector<T> freqs_;
  std::vector<T> params_;
  std::vector<DenseLayout> layers_;
};

template <typename T>
struct MlpCache {
  std::vector<Matrix<T>> inputs;  // input of each dense layer
  std::vector<Matrix<T>> pre;     // pre-activation of each hidden layer
};

// Plain ReLU MLP: sizes = {in, hidden..., out}, linear output.
template <typename T>
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> sizes, std::uint64_t seed);
  Mlp(std::vector<std::size_t> sizes, std::vector<T> parameters);

  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t in_dim() const noexcept { return sizes_.front(); }
  std::size_t out_dim() const noexcept { return sizes_.back(); }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<T> parameters() noexcept { return params_; }
  std::span<const T> parameters() const noexcept { return params_; }
  const DenseLayout& layer(std::size_t i) const noexcept { return layers_[i]; }
  std::size_t layer_count() const noexcept { return layers_.size(); }

  void forward(const Matrix<T>& x, Matrix<T>& out) const;
  void forward(const Matrix<T>& x, Matrix<T>& out, MlpCache<T>& cache) const;
  void backward(const MlpCache<T>& cache, const Matrix<T>& output_grad,
                std::vector<T>& grads, Matrix<T>* input_grad = nullptr) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<T> params_;
  std::vector<DenseLayout> layers_;
};

template <typename T>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<T> m;
  std::vector<T> v;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, T(0)), v(n, T(0)) {}
};

// Bias-corrected Adam update with step size lr.
template <typename T>
void adam_step(AdamState<T>& state, std::span<T> params,
               std::span<const T> grads, double lr);

// lr0 (1 + cos(pi step / total)) / 2; steps past `total` clamp to 0.
double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr0);

// target <- (1 - tau) target + tau source
template <typename T>
void polyak_update(std::span<T> target, std::span<const T> source, double tau);

// "SYNTHW1\0" | in u32 | out u32 | width u32 | depth u32 | rff u32 |
// rff frequencies f32 | parameters f32 (layer order: W_in b_in W_0 b_0 ...
// W_out b_out). Plain MLPs use the same block with rff = 0 and depth =
// number of hidden layers.
inline constexpr std::string_view kWeightsMagic{"SYNTHW1\0", 8};

void write_residual_mlp(io::ByteWriter& w, const ResidualMLP<float>& net);
ResidualMLP<float> read_residual_mlp(io::ByteReader& r);
void write_mlp(io::ByteWriter& w, const Mlp<float>& net);
Mlp<float> read_mlp(io::ByteReader& r);

}  // namespace synther::nn
