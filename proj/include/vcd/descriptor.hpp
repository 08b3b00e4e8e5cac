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

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vcd/error.hpp"

namespace vcd {

inline constexpr int kMaxDim = 512;

using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXf;

// One video's frame descriptors. Rows of `matrix` are frames; rows sharing a
// timestamp are alternative views of the same frame.
struct DescriptorSet {
  std::string video_id;
  std::vector<float> timestamps;
  Matrix matrix;

  std::size_t frames() const { return static_cast<std::size_t>(matrix.rows()); }
  int dim() const { return static_cast<int>(matrix.cols()); }

  bool operator==(const DescriptorSet& other) const {
    return video_id == other.video_id && timestamps == other.timestamps &&
           matrix.rows() == other.matrix.rows() &&
           matrix.cols() == other.matrix.cols() && matrix == other.matrix;
  }
};

inline void validate(const DescriptorSet& set) {
  const auto who = "video '" + set.video_id + "'";
  require(!set.video_id.empty(), ErrorCode::kInvariant, "empty video id");
  require(set.matrix.rows() >= 1, ErrorCode::kInvariant, who + " has no frames");
  require(set.matrix.cols() >= 1 && set.matrix.cols() <= kMaxDim,
          ErrorCode::kInvariant,
          who + " dimension " + std::to_string(set.matrix.cols()) +
              " outside [1, 512]");
  require(set.timestamps.size() == set.frames(), ErrorCode::kInvariant,
          who + " timestamp count does not match row count");
  for (std::size_t i = 0; i < set.timestamps.size(); ++i) {
    require(std::isfinite(set.timestamps[i]), ErrorCode::kNonFinite,
            who + " timestamp " + std::to_string(i));
    if (i > 0) {
      require(set.timestamps[i] >= set.timestamps[i - 1], ErrorCode::kInvariant,
              who + " timestamps decrease at frame " + std::to_string(i));
    }
  }
  for (Eigen::Index r = 0; r < set.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < set.matrix.cols(); ++c) {
      require(std::isfinite(set.matrix(r, c)), ErrorCode::kNonFinite,
              who + " frame " + std::to_string(r));
    }
  }
}

enum class CorpusRole { kQuery, kReference, kNoise };

inline std::string_view to_string(CorpusRole role) {
  switch (role) {
    case CorpusRole::kQuery: return "query";
    case CorpusRole::kReference: return "reference";
    case CorpusRole::kNoise: return "noise";
  }
  return "unknown";
}

// Videos keyed by id; iteration order is ascending id, which every consumer
// relies on for deterministic output.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(CorpusRole role) : role_(role) {}

  CorpusRole role() const { return role_; }
  void set_role(CorpusRole role) { role_ = role; }

  // 0 when empty.
  int dim() const { return sets_.empty() ? 0 : sets_.begin()->second.dim(); }
  std::size_t size() const { return sets_.size(); }
  bool empty() const { return sets_.empty(); }

  void add(DescriptorSet set) {
    validate(set);
    if (!sets_.empty()) {
      require(set.dim() == dim(), ErrorCode::kDimensionMismatch,
              "video '" + set.video_id + "' has d=" + std::to_string(set.dim()) +
                  ", corpus has d=" + std::to_string(dim()));
    }
    auto id = set.video_id;
    auto [it, inserted] = sets_.emplace(std::move(id), std::move(set));
    require(inserted, ErrorCode::kInvariant,
            "duplicate video id '" + it->first + "'");
  }

  bool contains(const std::string& id) const { return sets_.count(id) != 0; }

  const DescriptorSet& at(const std::string& id) const {
    auto it = sets_.find(id);
    require(it != sets_.end(), ErrorCode::kInvariant,
            "unknown video id '" + id + "'");
    return it->second;
  }

  auto begin() const { return sets_.begin(); }
  auto end() const { return sets_.end(); }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(sets_.size());
    for (const auto& [id, _] : sets_) out.push_back(id);
    return out;
  }

  std::size_t total_frames() const {
    std::size_t n = 0;
    for (const auto& [_, s] : sets_) n += s.frames();
    return n;
  }

  bool operator==(const Corpus& other) const {
    return role_ == other.role_ && sets_ == other.sets_;
  }

 private:
  CorpusRole role_ = CorpusRole::kQuery;
  std::map<std::string, DescriptorSet> sets_;
};

// Applies `fn` to every set and rebuilds a corpus with the same role.
template <typename Fn>
Corpus transform_corpus(const Corpus& corpus, Fn&& fn) {
  Corpus out(corpus.role());
  for (const auto& [_, set] : corpus) out.add(fn(set));
  return out;
}

}  // namespace vcd
