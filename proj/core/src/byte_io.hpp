// Copyright 2026 The Segfuse Authors.
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

#ifndef SEGFUSE_SRC_BYTE_IO_HPP_
#define SEGFUSE_SRC_BYTE_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segfuse/error.hpp"

namespace segfuse::internal {

// Little-endian primitive encoder on top of an ostream.
class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  void Bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed after " + std::to_string(count_) +
                             " bytes");
    count_ += n;
  }
  void U8(std::uint8_t v) { Bytes(&v, 1); }
  void U16(std::uint16_t v) {
    const std::uint8_t b[2] = {static_cast<std::uint8_t>(v),
                               static_cast<std::uint8_t>(v >> 8)};
    Bytes(b, 2);
  }
  void U32(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    Bytes(b, 4);
  }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void String(const std::string& s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }
  void F32Array(std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
      Bytes(values.data(), values.size_bytes());
    } else {
      for (float v : values) F32(v);
    }
  }
  void U16Array(std::span<const std::uint16_t> values) {
    if constexpr (std::endian::native == std::endian::little) {
      Bytes(values.data(), values.size_bytes());
    } else {
      for (std::uint16_t v : values) U16(v);
    }
  }

  std::uint64_t count() const { return count_; }

 private:
  std::ostream& out_;
  std::uint64_t count_ = 0;
};

// Bounds-checked little-endian decoder over an in-memory buffer. Every
// length is checked against the remaining bytes before anything is
// allocated, so corrupt headers cannot trigger huge allocations.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void Require(std::uint64_t n, const char* what) const {
    if (n > remaining()) {
      throw IoError(std::string("truncated ") + what + ": expected " +
                    std::to_string(n) + " bytes at offset " +
                    std::to_string(pos_) + ", received " +
                    std::to_string(remaining()));
    }
  }
  std::span<const std::uint8_t> Take(std::uint64_t n, const char* what) {
    Require(n, what);
    auto out = bytes_.subspan(pos_, static_cast<std::size_t>(n));
    pos_ += static_cast<std::size_t>(n);
    return out;
  }
  std::uint8_t U8(const char* what) { return Take(1, what)[0]; }
  std::uint16_t U16(const char* what) {
    auto b = Take(2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t U32(const char* what) {
    auto b = Take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  float F32(const char* what) { return std::bit_cast<float>(U32(what)); }
  std::string String(const char* what) {
    const std::uint32_t n = U32(what);
    auto b = Take(n, what);
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
  }
  std::vector<float> F32Array(std::uint64_t count, const char* what) {
    Require(count * 4, what);
    auto b = Take(count * 4, what);
    std::vector<float> out(static_cast<std::size_t>(count));
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), b.data(), b.size());
    } else {
      for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t v = 0;
        for (int k = 3; k >= 0; --k) v = (v << 8) | b[4 * i + k];
        out[i] = std::bit_cast<float>(v);
      }
    }
    return out;
  }
  std::vector<std::uint16_t> U16Array(std::uint64_t count, const char* what) {
    Require(count * 2, what);
    auto b = Take(count * 2, what);
    std::vector<std::uint16_t> out(static_cast<std::size_t>(count));
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), b.data(), b.size());
    } else {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint16_t>(b[2 * i] | (b[2 * i + 1] << 8));
      }
    }
    return out;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

bool IsValidUtf8(std::string_view text);

std::vector<std::uint8_t> ReadAll(std::istream& in);
std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
std::string ReadFileText(const std::filesystem::path& path);

}  // namespace segfuse::internal

#endif  // SEGFUSE_SRC_BYTE_IO_HPP_
