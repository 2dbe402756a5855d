/*
 * Copyright 2026 The HHE-FL Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Little-endian byte writer/reader shared by every wire format.

#ifndef HHEFL_BYTES_HPP_
#define HHEFL_BYTES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hhefl/error.hpp"

namespace hhefl {

using Bytes = std::vector<std::uint8_t>;
using Seed = std::array<std::uint8_t, 32>;

class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f64(double v);
  void raw(std::span<const std::uint8_t> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
  }
  // u32 length prefix followed by the bytes.
  void blob(std::span<const std::uint8_t> data) {
    u32(static_cast<std::uint32_t>(data.size()));
    raw(data);
  }
  void str(std::string_view s) {
    blob({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  }

  std::size_t size() const { return buf_.size(); }
  Bytes take() && { return std::move(buf_); }
  const Bytes& bytes() const { return buf_; }

 private:
  void put_le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  double f64();
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  Bytes blob() {
    auto n = u32();
    auto s = raw(n);
    return {s.begin(), s.end()};
  }
  std::string str() {
    auto b = blob();
    return {b.begin(), b.end()};
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void expect_end() const {
    if (remaining() != 0) throw ParseError("trailing bytes after message");
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw ParseError("unexpected end of input");
  }
  std::uint64_t get_le(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// First 8 bytes of SHA-256, read little-endian. Used as a parameter-set tag.
std::uint64_t short_hash(std::span<const std::uint8_t> data);

// SHA-256 digest.
std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

// Derive an independent 32-byte seed from a parent seed and a label.
Seed derive_seed(const Seed& parent, std::string_view label, std::uint64_t index = 0);

// Expand a 64-bit integer into a seed (CLI and config convenience).
Seed seed_from_u64(std::uint64_t v);

std::string to_hex(std::span<const std::uint8_t> data);

}  // namespace hhefl

#endif  // HHEFL_BYTES_HPP_
