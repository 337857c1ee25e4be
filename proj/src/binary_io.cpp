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

#include "synther/binary_io.hpp"

#include <fstream>
#include <sstream>

#include "synther/error.hpp"

namespace synther::io {

void ByteWriter::f32s(std::span<const float> v) {
  if constexpr (std::endian::native == std::endian::little) {
    buf_.append(reinterpret_cast<const char*>(v.data()), v.size_bytes());
  } else {
    for (float x : v) f32(x);
  }
}

void ByteReader::fail(const std::string& what) const {
  throw Error(ErrorCode::kFormat, source_ + ": " + what + " at offset " +
                                      std::to_string(pos_));
}

void ByteReader::need(std::size_t n, const char* what) const {
  if (remaining() < n) {
    fail(std::string("truncated file: expected ") + std::to_string(n) +
         " more bytes for " + what + ", found " + std::to_string(remaining()));
  }
}

void ByteReader::expect_magic(std::string_view magic) {
  need(magic.size(), "magic");
  if (std::string_view(data_).substr(pos_, magic.size()) != magic) {
    fail("bad magic, expected \"" +
         std::string(magic.substr(0, magic.find('\0'))) + "\"");
  }
  pos_ += magic.size();
}

std::uint8_t ByteReader::u8() {
  need(1, "byte");
  return static_cast<std::uint8_t>(data_[pos_++]);
}

void ByteReader::f32s(std::span<float> out) {
  need(out.size_bytes(), "float payload");
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), data_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  } else {
    for (float& x : out) x = f32();
  }
}

std::vector<double> ByteReader::f64s(std::size_t n) {
  need(n * 8, "double payload");
  std::vector<double> out(n);
  for (double& x : out) x = f64();
  return out;
}

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n, "string");
  std::string s = data_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace synther::io
