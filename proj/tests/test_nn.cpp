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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "synther/binary_io.hpp"
#include "synther/error.hpp"
#include "synther/gradcheck.hpp"
#include "synther/nn.hpp"

namespace synther::nn {
namespace {

template <typename T>
Matrix<T> random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = T(normal(rng));
  return m;
}

std::vector<double> random_codes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(n);
  for (auto& v : c) v = normal(rng);
  return c;
}

double weighted_sum(const Matrix<double>& out, const Matrix<double>& w) {
  return out.cwiseProduct(w).sum();
}

TEST(ResidualMlp, GradientMatchesFiniteDifferences) {
  const ResidualShape shape{5, 5, 64, 2, 8};
  ResidualMLP<double> net(shape, 3);
  // Non-zero biases so every term participates.
  auto p = net.parameters();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> small(0.0, 0.1);
  for (auto& v : p) v += small(rng);
  const Matrix<double> x = random_matrix<double>(6, 5, 5);
  const Matrix<double> g = random_matrix<double>(6, 5, 6);
  const std::vector<double> c = random_codes(6, 7);

  ResidualCache<double> cache;
  Matrix<double> out;
  net.forward(x, c, out, cache);
  std::vector<double> grads;
  Matrix<double> dx;
  net.backward(cache, g, grads, &dx);

  const auto numeric = central_difference(net.parameters(), [&] {
    Matrix<double> o;
    net.forward(x, c, o);
    return weighted_sum(o, g);
  });
  EXPECT_LT(max_relative_error(grads, numeric), 1e-4);

  Matrix<double> xp = x;
  std::vector<double> flat(xp.data(), xp.data() + xp.size());
  const auto numeric_x = central_difference(std::span<double>(flat), [&] {
    Matrix<double> xi = Eigen::Map<Matrix<double>>(flat.data(), x.rows(), x.cols());
    Matrix<double> o;
    net.forward(xi, c, o);
    return weighted_sum(o, g);
  });
  std::vector<double> analytic_x(dx.data(), dx.data() + dx.size());
  EXPECT_LT(max_relative_error(analytic_x, numeric_x), 1e-4);
}

TEST(ResidualMlp, ZeroOutputGradGivesZeroGradients) {
  ResidualMLP<double> net({3, 3, 16, 2, 4}, 1);
  ResidualCache<double> cache;
  Matrix<double> out;
  const auto c = random_codes(4, 2);
  net.forward(random_matrix<double>(4, 3, 3), c, out, cache);
  std::vector<double> grads;
  net.backward(cache, Matrix<double>::Zero(4, 3), grads);
  for (double v : grads) EXPECT_EQ(v, 0.0);
}

TEST(ResidualMlp, DuplicatedRowDoublesGradient) {
  ResidualMLP<double> net({3, 2, 16, 2, 4}, 1);
  const Matrix<double> row = random_matrix<double>(1, 3, 8);
  Matrix<double> twice(2, 3);
  twice << row, row;
  const Matrix<double> g1 = random_matrix<double>(1, 2, 9);
  Matrix<double> g2(2, 2);
  g2 << g1, g1;
  ResidualCache<double> c1, c2;
  Matrix<double> out;
  net.forward(row, std::vector<double>{0.3}, out, c1);
  net.forward(twice, std::vector<double>{0.3, 0.3}, out, c2);
  std::vector<double> a, b;
  net.backward(c1, g1, a);
  net.backward(c2, g2, b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], 2.0 * a[i], 1e-12);
}

TEST(ResidualMlp, ZeroBlocksAreIdentity) {
  const ResidualShape shape{3, 2, 8, 3, 4};
  ResidualMLP<double> net(shape, 11);
  auto p = net.parameters();
  for (std::size_t l = 0; l < shape.depth; ++l) {
    const auto& b = net.block(l);
    std::fill(p.begin() + std::ptrdiff_t(b.offset), p.begin() + std::ptrdiff_t(b.end()), 0.0);
  }
  const Matrix<double> x = random_matrix<double>(5, 3, 12);
  const auto c = random_codes(5, 13);
  Matrix<double> emb;
  net.embed_noise(c, emb);
  Matrix<double> in(5, 3 + 8);
  in << x, emb;
  auto dense = [&](const DenseLayout& l, const Matrix<double>& v) {
    Eigen::Map<const Matrix<double>> w(p.data() + l.offset, Eigen::Index(l.fan_in), Eigen::Index(l.fan_out));
    Eigen::Map<const RowVector<double>> bias(p.data() + l.bias_offset(), Eigen::Index(l.fan_out));
    Matrix<double> r = v * w;
    r.rowwise() += bias;
    return r;
  };
  const Matrix<double> expected = dense(net.output_layer(), dense(net.input_layer(), in));
  Matrix<double> out;
  net.forward(x, c, out);
  EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ResidualMlp, NoiseEmbeddingAtZero) {
  ResidualMLP<float> net({2, 2, 8, 1, 6}, 1);
  Matrix<float> emb;
  net.embed_noise(std::vector<float>{0.0f, 0.0f}, emb);
  ASSERT_EQ(emb.cols(), 12);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      EXPECT_EQ(emb(i, j), 0.0f);
      EXPECT_EQ(emb(i, 6 + j), 1.0f);
    }
  }
}

TEST(ResidualMlp, OutputShape) {
  ResidualMLP<float> net({7, 7, 32, 2, 4}, 1);
  Matrix<float> out;
  net.forward(Matrix<float>::Zero(13, 7), std::vector<float>(13, 0.1f), out);
  EXPECT_EQ(out.rows(), 13);
  EXPECT_EQ(out.cols(), 7);
}

TEST(ResidualMlp, ParameterCountFormula) {
  for (auto [width, depth] : {std::pair<std::size_t, std::size_t>{64, 2}, {256, 4}, {1024, 6}}) {
    const std::size_t in = 12, out = 12, rff = 16;
    const ResidualShape shape{in, out, width, depth, rff};
    std::size_t enumerated = (in + 2 * rff) * width + width;
    for (std::size_t l = 0; l < depth; ++l) enumerated += width * width + width;
    enumerated += width * out + out;
    const ResidualMLP<float> net(shape, 1);
    EXPECT_EQ(shape.parameter_count(), enumerated);
    EXPECT_EQ(net.parameter_count(), enumerated);
  }
}

TEST(ResidualMlp, LearnsLinearMap) {
  const Matrix<float> w = random_matrix<float>(4, 4, 21);
  const Matrix<float> x = random_matrix<float>(1000, 4, 22);
  const Matrix<float> y = x * w;
  ResidualMLP<float> net({4, 4, 64, 1, 4}, 23);
  AdamState<float> adam(net.parameter_count());
  const std::vector<float> codes(1000, 0.0f);
  double mse = 1e9;
  for (int step = 0; step < 5000 && mse >= 1e-3; ++step) {
    ResidualCache<float> cache;
    Matrix<float> out;
    net.forward(x, codes, out, cache);
    const Matrix<float> diff = out - y;
    mse = diff.cast<double>().array().square().mean();
    std::vector<float> grads;
    net.backward(cache, diff * (2.0f / float(diff.size())), grads);
    adam_step<float>(adam, net.parameters(), grads, 1e-3);
  }
  EXPECT_LT(mse, 1e-3);
}

TEST(ResidualMlp, CacheMismatchIsInvalidState) {
  ResidualMLP<double> a({3, 3, 8, 1, 2}, 1), b({3, 3, 8, 2, 2}, 1);
  ResidualCache<double> cache;
  Matrix<double> out;
  a.forward(Matrix<double>::Zero(2, 3), std::vector<double>{0, 0}, out, cache);
  std::vector<double> grads;
  try {
    b.backward(cache, Matrix<double>::Zero(2, 3), grads);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidState);
  }
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  Mlp<double> net({6, 32, 32, 3}, 5);
  auto p = net.parameters();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> small(0.0, 0.1);
  for (auto& v : p) v += small(rng);
  const Matrix<double> x = random_matrix<double>(7, 6, 2);
  const Matrix<double> g = random_matrix<double>(7, 3, 3);
  MlpCache<double> cache;
  Matrix<double> out, dx;
  net.forward(x, out, cache);
  std::vector<double> grads;
  net.backward(cache, g, grads, &dx);
  const auto numeric = central_difference(net.parameters(), [&] {
    Matrix<double> o;
    net.forward(x, o);
    return weighted_sum(o, g);
  });
  EXPECT_LT(max_relative_error(grads, numeric), 1e-4);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<float> params = {1.0f, -2.0f, 0.5f};
  const std::vector<float> grads = {3.0f, -0.01f, 100.0f};
  AdamState<float> adam(3);
  adam_step<float>(adam, params, grads, 0.01);
  EXPECT_NEAR(params[0], 1.0f - 0.01f, 1e-6);
  EXPECT_NEAR(params[1], -2.0f + 0.01f, 1e-5);
  EXPECT_NEAR(params[2], 0.5f - 0.01f, 1e-6);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<float> params = {1.0f, -2.0f};
  const std::vector<float> grads = {0.0f, 0.0f};
  AdamState<float> adam(2);
  for (int i = 0; i < 100; ++i) adam_step<float>(adam, params, grads, 0.1);
  EXPECT_EQ(params[0], 1.0f);
  EXPECT_EQ(params[1], -2.0f);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    ResidualMLP<float> net({3, 3, 16, 2, 4}, 9);
    AdamState<float> adam(net.parameter_count());
    const Matrix<float> x = random_matrix<float>(8, 3, 10);
    for (int i = 0; i < 20; ++i) {
      ResidualCache<float> cache;
      Matrix<float> out;
      net.forward(x, std::vector<float>(8, 0.2f), out, cache);
      std::vector<float> grads;
      net.backward(cache, out - x, grads);
      adam_step<float>(adam, net.parameters(), grads, 1e-3);
    }
    return std::vector<float>(net.parameters().begin(), net.parameters().end());
  };
  EXPECT_EQ(run(), run());
}

TEST(CosineLr, Endpoints) {
  EXPECT_DOUBLE_EQ(cosine_lr(0, 1000, 3e-4), 3e-4);
  EXPECT_NEAR(cosine_lr(500, 1000, 3e-4), 1.5e-4, 1e-15);
  EXPECT_NEAR(cosine_lr(1000, 1000, 3e-4), 0.0, 1e-18);
  EXPECT_EQ(cosine_lr(5000, 1000, 3e-4), 0.0);
}

TEST(Polyak, BlendsElementwise) {
  std::vector<float> target = {1.0f, 2.0f}, source = {3.0f, -2.0f};
  polyak_update<float>(target, source, 0.25);
  EXPECT_FLOAT_EQ(target[0], 0.75f * 1.0f + 0.25f * 3.0f);
  EXPECT_FLOAT_EQ(target[1], 0.75f * 2.0f + 0.25f * -2.0f);
}

TEST(Checkpoint, RoundTrip) {
  const ResidualMLP<float> net({4, 4, 16, 2, 3}, 31);
  io::ByteWriter w;
  write_residual_mlp(w, net);
  const Mlp<float> mlp({5, 8, 8, 2}, 4);
  write_mlp(w, mlp);
  io::ByteReader r(w.buffer(), "mem");
  const ResidualMLP<float> back = read_residual_mlp(r);
  const Mlp<float> mlp_back = read_mlp(r);
  EXPECT_TRUE(r.at_end());
  EXPECT_EQ(back.shape(), net.shape());
  EXPECT_TRUE(std::equal(net.parameters().begin(), net.parameters().end(), back.parameters().begin()));
  EXPECT_TRUE(std::equal(net.frequencies().begin(), net.frequencies().end(), back.frequencies().begin()));
  EXPECT_EQ(mlp_back.sizes(), mlp.sizes());
  EXPECT_TRUE(std::equal(mlp.parameters().begin(), mlp.parameters().end(), mlp_back.parameters().begin()));

  io::ByteReader truncated(w.buffer().substr(0, 40), "mem");
  try {
    read_residual_mlp(truncated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
}

}  // namespace
}  // namespace synther::nn
