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

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vcd/binary_io.hpp"
#include "vcd/descriptor.hpp"

// VDSC: "VDSC" | version u32 | d u32 | count u32 | per video:
//   id_len u16 | id bytes | n u32 | n x f32 timestamps | n*d x f32 row-major
// All little-endian, no padding.
namespace vcd {

inline constexpr char kVdscMagic[] = "VDSC";
inline constexpr std::uint32_t kVdscVersion = 1;

inline std::string encode_vdsc(std::span<const DescriptorSet> sets) {
  int d = sets.empty() ? 1 : sets.front().dim();
  for (const auto& s : sets) {
    validate(s);
    require(s.dim() == d, ErrorCode::kDimensionMismatch,
            "video '" + s.video_id + "' has d=" + std::to_string(s.dim()) +
                " but the file holds d=" + std::to_string(d));
    require(s.video_id.size() <= std::numeric_limits<std::uint16_t>::max(),
            ErrorCode::kInvariant, "video id longer than 65535 bytes");
  }
  binary::Writer w;
  w.magic({kVdscMagic, 4});
  w.u32(kVdscVersion);
  w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(sets.size()));
  for (const auto& s : sets) {
    w.u16(static_cast<std::uint16_t>(s.video_id.size()));
    w.bytes(s.video_id);
    w.u32(static_cast<std::uint32_t>(s.frames()));
    w.f32s(s.timestamps);
    w.f32s({s.matrix.data(), static_cast<std::size_t>(s.matrix.size())});
  }
  return w.data();
}

inline std::string encode_vdsc(const Corpus& corpus) {
  std::vector<DescriptorSet> sets;
  sets.reserve(corpus.size());
  for (const auto& [_, s] : corpus) sets.push_back(s);
  return encode_vdsc(sets);
}

inline Corpus decode_vdsc(std::string bytes, const std::string& source,
                          CorpusRole role) {
  binary::Reader r(std::move(bytes), source);
  r.expect_magic({kVdscMagic, 4});
  const auto version = r.u32();
  require(version == kVdscVersion, ErrorCode::kVersionMismatch,
          source + ": version " + std::to_string(version) + ", expected " +
              std::to_string(kVdscVersion));
  const auto d = r.u32();
  require(d >= 1 && d <= kMaxDim, ErrorCode::kInvariant,
          source + ": d=" + std::to_string(d) + " outside [1, 512]");
  const auto count = r.u32();
  Corpus corpus(role);
  for (std::uint32_t v = 0; v < count; ++v) {
    DescriptorSet s;
    s.video_id = r.str(r.u16());
    const auto n = r.u32();
    // Check the declared size against the bytes left before allocating.
    const auto need = (static_cast<std::uint64_t>(n) * (d + 1)) * sizeof(float);
    require(need <= r.remaining(), ErrorCode::kTruncatedPayload,
            source + ": video '" + s.video_id + "' declares " + std::to_string(n) +
                " frames, file ends early");
    s.timestamps.resize(n);
    r.f32s(s.timestamps);
    s.matrix.resize(n, d);
    r.f32s({s.matrix.data(), static_cast<std::size_t>(s.matrix.size())});
    corpus.add(std::move(s));
  }
  require(r.at_end(), ErrorCode::kInvariant, source + ": trailing bytes after last video");
  return corpus;
}

inline void write_corpus(const Corpus& corpus, const std::string& path) {
  binary::write_file(path, encode_vdsc(corpus));
}

inline Corpus read_corpus(const std::string& path,
                          CorpusRole role = CorpusRole::kQuery) {
  return decode_vdsc(binary::read_file(path), path, role);
}

}  // namespace vcd
