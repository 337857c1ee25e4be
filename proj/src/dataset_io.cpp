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

#include "synther/dataset_io.hpp"

#include <charconv>
#include <cstring>

#include "synther/binary_io.hpp"
#include "synther/error.hpp"

namespace synther {

std::string encode_dataset(const TransitionDataset& dataset) {
  io::ByteWriter w;
  w.bytes(kDatasetMagic);
  const auto& s = dataset.schema();
  w.u32(static_cast<std::uint32_t>(s.state_dim()));
  w.u32(static_cast<std::uint32_t>(s.action_dim()));
  w.u8(s.has_terminal() ? 1 : 0);
  w.u64(dataset.count());
  w.f32s(dataset.data());
  return w.buffer();
}

TransitionDataset decode_dataset(std::string bytes, const std::string& source) {
  io::ByteReader r(std::move(bytes), source);
  r.expect_magic(kDatasetMagic);
  const std::uint32_t state_dim = r.u32();
  const std::uint32_t action_dim = r.u32();
  if (state_dim == 0 || action_dim == 0) r.fail("zero dimension in header");
  const std::uint8_t term = r.u8();
  if (term > 1) r.fail("has_terminal flag must be 0 or 1");
  const std::uint64_t count = r.u64();
  TransitionSchema schema(state_dim, action_dim, term == 1);
  const std::size_t floats = count * schema.row_dim();
  if (count != 0 && floats / count != schema.row_dim()) r.fail("row count overflow");
  r.need(floats * sizeof(float), "row payload");
  std::vector<float> rows(floats);
  r.f32s(rows);
  if (!r.at_end()) {
    r.fail("dimension mismatch: " + std::to_string(r.remaining()) +
           " trailing bytes after " + std::to_string(count) + " rows");
  }
  try {
    return TransitionDataset(schema, std::move(rows));
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, source + ": " + e.what());
  }
}

void save_dataset(const TransitionDataset& dataset, const std::string& path) {
  io::write_file(path, encode_dataset(dataset));
}

TransitionDataset load_dataset(const std::string& path) {
  return decode_dataset(io::read_file(path), path);
}

std::string format_float(float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_csv(const TransitionDataset& dataset) {
  std::string out;
  const auto names = dataset.schema().column_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) out += ',';
    out += names[j];
  }
  out += '\n';
  const std::size_t dim = dataset.row_dim();
  for (std::size_t i = 0; i < dataset.count(); ++i) {
    auto row = dataset.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      if (j) out += ',';
      out += format_float(row[j]);
    }
    out += '\n';
  }
  return out;
}

namespace {

[[noreturn]] void csv_fail(const std::string& source, std::size_t line,
                           const std::string& what) {
  throw Error(ErrorCode::kFormat,
              source + ": " + what + " at line " + std::to_string(line));
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

TransitionSchema schema_from_header(const std::vector<std::string_view>& names,
                                    const std::string& source) {
  std::size_t s = 0, a = 0;
  while (s < names.size() && names[s] == "s" + std::to_string(s)) ++s;
  while (s + a < names.size() && names[s + a] == "a" + std::to_string(a)) ++a;
  const bool has_terminal = !names.empty() && names.back() == "d";
  if (s == 0 || a == 0) csv_fail(source, 1, "header must start with s0.. then a0..");
  TransitionSchema schema(s, a, has_terminal);
  const auto expected = schema.column_names();
  if (expected.size() != names.size()) {
    csv_fail(source, 1, "header has " + std::to_string(names.size()) +
                            " columns, expected " +
                            std::to_string(expected.size()));
  }
  for (std::size_t j = 0; j < expected.size(); ++j) {
    if (names[j] != expected[j]) {
      csv_fail(source, 1, "unexpected column \"" + std::string(names[j]) +
                              "\", expected \"" + expected[j] + "\"");
    }
  }
  return schema;
}

}  // namespace

TransitionDataset parse_csv(std::string_view text, const std::string& source) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) return true;
    }
    return false;
  };
  std::string_view line;
  if (!next_line(line)) csv_fail(source, 1, "missing header");
  const TransitionSchema schema = schema_from_header(split_fields(line), source);
  const std::size_t dim = schema.row_dim();
  std::vector<float> rows;
  while (next_line(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != dim) {
      csv_fail(source, line_no, "dimension mismatch: " +
                                    std::to_string(fields.size()) +
                                    " fields, expected " + std::to_string(dim));
    }
    for (auto f : fields) {
      float v = 0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        csv_fail(source, line_no, "cannot parse \"" + std::string(f) + "\"");
      }
      rows.push_back(v);
    }
  }
  try {
    return TransitionDataset(schema, std::move(rows));
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, source + ": " + e.what());
  }
}

void export_csv(const TransitionDataset& dataset, const std::string& path) {
  io::write_file(path, format_csv(dataset));
}

TransitionDataset import_csv(const std::string& path) {
  return parse_csv(io::read_file(path), path);
}

}  // namespace synther
