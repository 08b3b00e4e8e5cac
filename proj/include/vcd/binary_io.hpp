// Copyright 2026 The vcd Authors
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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/error.hpp"

namespace vcd::binary {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

// Little-endian append-only byte buffer.
class Writer {
 public:
  void magic(std::string_view tag) { bytes_.append(tag.data(), tag.size()); }
  void u16(std::uint16_t v) { raw(&v, sizeof v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void f32s(std::span<const float> v) { raw(v.data(), v.size_bytes()); }
  void bytes(std::string_view s) { bytes_.append(s.data(), s.size()); }

  const std::string& data() const { return bytes_; }

 private:
  void raw(const void* p, std::size_t n) {
    bytes_.append(static_cast<const char*>(p), n);
  }
  std::string bytes_;
};

// Cursor over a loaded file. Any read past the end raises kTruncatedPayload.
class Reader {
 public:
  Reader(std::string bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  void expect_magic(std::string_view tag) {
    if (bytes_.size() < tag.size() ||
        std::memcmp(bytes_.data(), tag.data(), tag.size()) != 0) {
      fail(ErrorCode::kBadMagic, source_ + ": expected '" + std::string(tag) + "'");
    }
    pos_ = tag.size();
  }
  std::uint16_t u16() { return scalar<std::uint16_t>(); }
  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  float f32() { return scalar<float>(); }
  void f32s(std::span<float> out) { take(out.data(), out.size_bytes()); }
  std::string str(std::size_t n) {
    std::string s(n, '\0');
    take(s.data(), n);
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& source() const { return source_; }

 private:
  template <typename T>
  T scalar() {
    T v;
    take(&v, sizeof v);
    return v;
  }
  void take(void* out, std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      fail(ErrorCode::kTruncatedPayload,
           source_ + ": needed " + std::to_string(n) + " bytes at offset " +
               std::to_string(pos_) + ", file has " +
               std::to_string(bytes_.size()));
    }
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::string bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::kIo, "read failed for '" + path + "'");
  return bytes;
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  require(out.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace vcd::binary
