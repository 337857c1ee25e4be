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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <filesystem>
#include <random>
#include <set>

#include "synther/binary_io.hpp"
#include "synther/dataset_io.hpp"
#include "synther/error.hpp"
#include "synther/replay.hpp"
#include "synther/transition.hpp"
#include "test_util.hpp"

namespace synther {
namespace {

TransitionDataset random_dataset(std::size_t n, std::uint64_t seed,
                                 bool terminal = true) {
  TransitionSchema schema(3, 2, terminal);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.5f, 2.0f);
  std::vector<float> rows;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < schema.row_dim(); ++j) {
      if (terminal && j == schema.terminal_offset()) {
        rows.push_back(i % 7 == 0 ? 1.0f : 0.0f);
      } else {
        rows.push_back(normal(rng));
      }
    }
  }
  return TransitionDataset(schema, std::move(rows));
}

using testing::code_of;

TEST(Schema, RowLayout) {
  TransitionSchema s(4, 2, true);
  EXPECT_EQ(s.row_dim(), 4u + 2u + 1u + 4u + 1u);
  EXPECT_EQ(s.reward_offset(), 6u);
  EXPECT_EQ(s.next_state_offset(), 7u);
  EXPECT_EQ(s.terminal_offset(), 11u);
  const auto names = s.column_names();
  ASSERT_EQ(names.size(), s.row_dim());
  EXPECT_EQ(names.front(), "s0");
  EXPECT_EQ(names[4], "a0");
  EXPECT_EQ(names[6], "r");
  EXPECT_EQ(names[7], "ns0");
  EXPECT_EQ(names.back(), "d");
  EXPECT_EQ(TransitionSchema(3, 1, false).row_dim(), 8u);
}

TEST(Dataset, RejectsBadTerminalsAndNonFinite) {
  TransitionSchema s(1, 1, true);
  EXPECT_EQ(code_of([&] { TransitionDataset(s, {0, 0, 0, 0, 0.5f}); }),
            ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { TransitionDataset(s, {0, NAN, 0, 0, 1}); }),
            ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { TransitionDataset(s, {0, 0, 0}); }),
            ErrorCode::kInvalidInput);
}

TEST(Normalizer, ConstantDimensionUsesUnitStd) {
  TransitionSchema s(1, 1, false);
  TransitionDataset d(s, {3, 0, 1, 5, 3, 2, 3, 7});
  const Normalizer n = fit_normalizer(d);
  EXPECT_DOUBLE_EQ(n.mean[0], 3.0);
  EXPECT_DOUBLE_EQ(n.std[0], 1.0);
}

TEST(Normalizer, PopulationStd) {
  TransitionSchema s(1, 1, false);
  TransitionDataset d(s, {0, 1, 1, 1, 2, 1, 1, 1});
  const Normalizer n = fit_normalizer(d);
  // Hand-computed: mean 1, sqrt(((0-1)^2 + (2-1)^2) / 2) = 1.
  EXPECT_DOUBLE_EQ(n.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(n.std[0], 1.0);
}

TEST(Normalizer, TerminalColumnIsIdentity) {
  const TransitionDataset d = random_dataset(100, 1);
  const Normalizer n = fit_normalizer(d);
  const std::size_t t = d.schema().terminal_offset();
  EXPECT_EQ(n.mean[t], 0.0);
  EXPECT_EQ(n.std[t], 1.0);
  const TransitionDataset z = normalize(d, n);
  for (std::size_t i = 0; i < d.count(); ++i) {
    EXPECT_EQ(z.row(i)[t], d.row(i)[t]);
  }
}

TEST(Normalizer, NeedsTwoRows) {
  EXPECT_EQ(code_of([] { fit_normalizer(random_dataset(1, 1)); }),
            ErrorCode::kInvalidInput);
}

TEST(Normalizer, RoundTripAndMoments) {
  const TransitionDataset d = random_dataset(500, 2);
  const Normalizer n = fit_normalizer(d);
  const TransitionDataset z = normalize(d, n);
  const std::vector<float> back = denormalize_rows(z.data(), n);
  double max_err = 0.0;
  for (std::size_t i = 0; i < back.size(); ++i) {
    max_err = std::max(max_err, double(std::abs(back[i] - d.data()[i])));
  }
  EXPECT_LT(max_err, 1e-5);
  for (std::size_t j = 0; j + 1 < d.row_dim(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < z.count(); ++i) mean += z.row(i)[j];
    EXPECT_LT(std::abs(mean / double(z.count())), 1e-6);
  }
}

TEST(Normalizer, ShapeMismatch) {
  const Normalizer n = fit_normalizer(random_dataset(10, 3));
  std::vector<float> rows(5, 0.0f);
  EXPECT_EQ(code_of([&] { normalize_rows(rows, n); }), ErrorCode::kInvalidInput);
}

TEST(Terminals, Threshold) {
  TransitionSchema s(1, 1, true);
  std::vector<float> rows = {0, 0, 0, 0, 0.7f, 0, 0, 0, 0, 0.3f,
                             0, 0, 0, 0, 0.5f, 0, 0, 0, 0, 1.0f};
  threshold_terminals(rows, s);
  EXPECT_EQ(rows[4], 1.0f);
  EXPECT_EQ(rows[9], 0.0f);
  EXPECT_EQ(rows[14], 1.0f);
  EXPECT_EQ(rows[19], 1.0f);
  std::vector<float> again = rows;
  threshold_terminals(again, s);
  EXPECT_EQ(again, rows);
}

TEST(Subsample, CountsAndNoDuplicates) {
  TransitionSchema s(1, 1, false);
  std::vector<float> rows;
  for (int i = 0; i < 100000; ++i) {
    rows.insert(rows.end(), {float(i), 0, 0, 0});
  }
  const TransitionDataset d(s, rows);
  EXPECT_EQ(subsample(d, 0.15, 1).count(), 15000u);
  EXPECT_EQ(subsample(d, 0.03, 1).count(), 3000u);
  const TransitionDataset all = subsample(d, 1.0, 7);
  std::set<float> ids;
  for (std::size_t i = 0; i < all.count(); ++i) ids.insert(all.row(i)[0]);
  EXPECT_EQ(ids.size(), d.count());
  const TransitionDataset a = subsample(d, 0.1, 42), b = subsample(d, 0.1, 42);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  std::set<float> sub;
  for (std::size_t i = 0; i < a.count(); ++i) sub.insert(a.row(i)[0]);
  EXPECT_EQ(sub.size(), a.count());
}

TEST(Subsample, RejectsBadFraction) {
  const TransitionDataset d = random_dataset(10, 1);
  EXPECT_EQ(code_of([&] { subsample(d, 0.0, 1); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { subsample(d, 1.5, 1); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { subsample(d, 0.01, 1); }), ErrorCode::kInvalidInput);
}

TEST(RingBuffer, EvictsOldest) {
  TransitionSchema s(1, 1, false);
  RingBuffer buf(s, 5);
  for (int i = 0; i < 8; ++i) {
    const float row[4] = {float(i), 0, 0, 0};
    buf.push(row);
  }
  EXPECT_EQ(buf.size(), 5u);
  EXPECT_EQ(buf.total_pushed(), 8u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(buf.row(i)[0], float(i + 3));
  const TransitionDataset snap = buf.snapshot();
  EXPECT_EQ(snap.row(0)[0], 3.0f);
  EXPECT_EQ(snap.row(4)[0], 7.0f);
}

ReplayPair tagged_pair(double r) {
  TransitionSchema s(1, 1, false);
  ReplayPair pair(s, 100, 100, r);
  for (int i = 0; i < 50; ++i) {
    const float real[4] = {1, 0, 0, 0};
    const float syn[4] = {-1, 0, 0, 0};
    pair.real().push(real);
    pair.synthetic().push(syn);
  }
  return pair;
}

TEST(MixedSample, Composition) {
  for (double r : {0.0, 0.25, 0.5, 1.0}) {
    for (std::size_t b : {1u, 7u, 256u}) {
      const ReplayPair pair = tagged_pair(r);
      const TransitionDataset batch = mixed_sample(pair, b, std::uint64_t(3));
      std::size_t real = 0;
      for (std::size_t i = 0; i < batch.count(); ++i) real += batch.row(i)[0] > 0;
      EXPECT_EQ(batch.count(), b);
      EXPECT_EQ(real, std::size_t(std::llround(r * double(b)))) << r << " " << b;
    }
  }
  EXPECT_EQ(tagged_pair(0.5).real_count(256), 128u);
}

TEST(MixedSample, ShufflesMixedBatches) {
  const TransitionDataset batch = mixed_sample(tagged_pair(0.5), 64, std::uint64_t(5));
  bool interleaved = false;
  for (std::size_t i = 0; i < 32; ++i) interleaved |= batch.row(i)[0] < 0;
  EXPECT_TRUE(interleaved);
}

TEST(MixedSample, EmptyBufferIsUnavailable) {
  TransitionSchema s(1, 1, false);
  ReplayPair pair(s, 10, 10, 0.5);
  const float row[4] = {1, 0, 0, 0};
  pair.real().push(row);
  EXPECT_EQ(code_of([&] { mixed_sample(pair, 4, std::uint64_t(1)); }),
            ErrorCode::kUnavailableData);
  pair.set_real_ratio(1.0);
  EXPECT_EQ(mixed_sample(pair, 4, std::uint64_t(1)).count(), 4u);
}

TEST(MixedSample, RealOnlyMatchesUniformDraws) {
  ReplayPair pair = tagged_pair(1.0);
  for (int i = 0; i < 20; ++i) {
    const float row[4] = {float(i), 1, 0, 0};
    pair.real().push(row);
  }
  Rng a(9), b(9);
  const TransitionDataset batch = mixed_sample(pair, 32, a);
  std::vector<float> direct;
  sample_uniform(pair.real(), 32, b, direct);
  EXPECT_TRUE(std::equal(direct.begin(), direct.end(), batch.data().begin()));
}

TEST(DatasetIo, BinaryRoundTripIsBitExact) {
  const TransitionDataset d = random_dataset(33, 4);
  const std::string bytes = encode_dataset(d);
  EXPECT_EQ(bytes.substr(0, 8), std::string("SYNTHR1\0", 8));
  io::ByteReader header(bytes, "x");
  header.expect_magic(kDatasetMagic);
  EXPECT_EQ(header.u32(), 3u);
  EXPECT_EQ(header.u32(), 2u);
  EXPECT_EQ(header.u8(), 1u);
  EXPECT_EQ(header.u64(), 33u);
  EXPECT_EQ(bytes.size(), kDatasetHeaderBytes + 33 * d.row_dim() * 4);
  const TransitionDataset back = decode_dataset(bytes);
  EXPECT_EQ(back.schema(), d.schema());
  EXPECT_EQ(0, std::memcmp(back.data().data(), d.data().data(), d.data().size_bytes()));
}

TEST(DatasetIo, FormatErrors) {
  const std::string bytes = encode_dataset(random_dataset(4, 5));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of([&] { decode_dataset(bad_magic); }), ErrorCode::kFormat);
  EXPECT_EQ(code_of([&] { decode_dataset(bytes.substr(0, bytes.size() - 3)); }),
            ErrorCode::kFormat);
  EXPECT_EQ(code_of([&] { decode_dataset(bytes.substr(0, 10)); }), ErrorCode::kFormat);
  EXPECT_EQ(code_of([&] { decode_dataset(bytes + "xx"); }), ErrorCode::kFormat);
  try {
    decode_dataset(bytes.substr(0, bytes.size() - 3), "f.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("f.bin"), std::string::npos);
  }
}

TEST(DatasetIo, CsvRoundTrip) {
  const TransitionDataset d = random_dataset(20, 6);
  const std::string csv = format_csv(d);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "s0,s1,s2,a0,a1,r,ns0,ns1,ns2,d");
  const TransitionDataset back = parse_csv(csv);
  EXPECT_EQ(back.schema(), d.schema());
  EXPECT_TRUE(std::equal(back.data().begin(), back.data().end(), d.data().begin()));
  const TransitionDataset no_term = random_dataset(3, 7, false);
  EXPECT_EQ(parse_csv(format_csv(no_term)).schema(), no_term.schema());
}

TEST(DatasetIo, CsvErrorsNameTheLine) {
  try {
    parse_csv("s0,a0,r,ns0\n1,2,3,4\n1,2,x,4\n", "in.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse_csv("s0,b0,r,ns0\n"); }), ErrorCode::kFormat);
  EXPECT_EQ(code_of([] { parse_csv("s0,a0,r,ns0\n1,2,3\n"); }), ErrorCode::kFormat);
}

TEST(DatasetIo, Files) {
  const auto dir = std::filesystem::temp_directory_path() / "synther_io_test";
  std::filesystem::create_directories(dir);
  const TransitionDataset d = random_dataset(9, 8);
  save_dataset(d, (dir / "d.bin").string());
  export_csv(d, (dir / "d.csv").string());
  EXPECT_EQ(encode_dataset(load_dataset((dir / "d.bin").string())), encode_dataset(d));
  EXPECT_EQ(encode_dataset(import_csv((dir / "d.csv").string())), encode_dataset(d));
  EXPECT_EQ(code_of([&] { load_dataset((dir / "missing.bin").string()); }), ErrorCode::kIo);
  std::filesystem::remove_all(dir);
}

TEST(FloatFormat, ShortestRoundTrip) {
  for (float v : {0.1f, -3.25f, 1e-30f, 123456.78f, 0.0f}) {
    EXPECT_EQ(std::stof(format_float(v)), v);
  }
  EXPECT_EQ(format_float(0.5f), "0.5");
}

}  // namespace
}  // namespace synther
