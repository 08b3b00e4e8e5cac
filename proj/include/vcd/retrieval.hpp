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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/csv.hpp"
#include "vcd/descriptor.hpp"
#include "vcd/parallel.hpp"

namespace vcd {

struct CandidatePair {
  std::string query_id;
  std::string ref_id;
  double score = 0.0;

  bool operator==(const CandidatePair&) const = default;
};

enum class Aggregation { kMaxPair, kSumTopkPairs };

inline std::string_view to_string(Aggregation a) {
  return a == Aggregation::kMaxPair ? "max_pair" : "sum_topk_pairs";
}

inline Aggregation parse_aggregation(std::string_view s) {
  if (s == "max_pair") return Aggregation::kMaxPair;
  if (s == "sum_topk_pairs") return Aggregation::kSumTopkPairs;
  fail(ErrorCode::kParse, "unknown aggregation '" + std::string(s) + "'");
}

struct SearchConfig {
  int top_k = 1200;
  Aggregation aggregation = Aggregation::kMaxPair;
  int agg_k = 5;
};

inline void validate(const SearchConfig& cfg) {
  require(cfg.top_k >= 1, ErrorCode::kInvariant, "top_k must be >= 1");
  require(cfg.agg_k >= 1, ErrorCode::kInvariant, "agg_k must be >= 1");
}

// Ranked candidates of one query.
struct QueryCandidates {
  std::string query_id;
  std::vector<CandidatePair> ranked;
};

// Higher score first, then ascending ref id.
inline bool candidate_rank_less(const CandidatePair& a, const CandidatePair& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.ref_id < b.ref_id;
}

// All reference frames stacked into one matrix with per-video row ranges.
class ReferenceIndex {
 public:
  explicit ReferenceIndex(const Corpus& refs) {
    require(!refs.empty(), ErrorCode::kEmptyInput, "reference corpus is empty");
    frames_.resize(static_cast<Eigen::Index>(refs.total_frames()), refs.dim());
    Eigen::Index row = 0;
    for (const auto& [id, set] : refs) {
      ids_.push_back(id);
      offsets_.push_back(row);
      frames_.middleRows(row, set.matrix.rows()) = set.matrix;
      row += set.matrix.rows();
    }
    offsets_.push_back(row);
  }

  std::size_t videos() const { return ids_.size(); }
  const std::string& id(std::size_t v) const { return ids_[v]; }
  Eigen::Index begin(std::size_t v) const { return offsets_[v]; }
  Eigen::Index end(std::size_t v) const { return offsets_[v + 1]; }
  const Matrix& frames() const { return frames_; }
  int dim() const { return static_cast<int>(frames_.cols()); }

 private:
  std::vector<std::string> ids_;
  std::vector<Eigen::Index> offsets_;
  Matrix frames_;
};

// Video-level scores of one query against every reference, in index order.
// Frame products are evaluated a block of reference videos at a time so the
// similarity buffer stays bounded.
inline std::vector<double> score_references(const DescriptorSet& query,
                                            const ReferenceIndex& index,
                                            const SearchConfig& cfg) {
  require(query.dim() == index.dim(), ErrorCode::kDimensionMismatch,
          "query '" + query.video_id + "' d=" + std::to_string(query.dim()) +
              ", references d=" + std::to_string(index.dim()));
  constexpr Eigen::Index kBlockRows = 4096;
  std::vector<double> scores(index.videos());
  std::vector<float> buf;
  std::size_t v = 0;
  while (v < index.videos()) {
    std::size_t last = v + 1;
    while (last < index.videos() && index.end(last) - index.begin(v) <= kBlockRows) ++last;
    const Eigen::Index start = index.begin(v);
    const Eigen::Index len = index.end(last - 1) - start;
    const Matrix sims = query.matrix * index.frames().middleRows(start, len).transpose();
    for (std::size_t r = v; r < last; ++r) {
      const auto block = sims.middleCols(index.begin(r) - start, index.end(r) - index.begin(r));
      if (cfg.aggregation == Aggregation::kMaxPair) {
        scores[r] = static_cast<double>(block.maxCoeff());
      } else {
        buf.resize(static_cast<std::size_t>(block.size()));
        Eigen::Map<Matrix>(buf.data(), block.rows(), block.cols()) = block;
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(cfg.agg_k), buf.size());
        std::partial_sort(buf.begin(), buf.begin() + static_cast<long>(k), buf.end(),
                          std::greater<>());
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += buf[i];
        scores[r] = sum;
      }
    }
    v = last;
  }
  return scores;
}

inline std::vector<CandidatePair> rank_candidates(const std::string& query_id,
                                                  const ReferenceIndex& index,
                                                  const std::vector<double>& scores, int top_k) {
  std::vector<CandidatePair> all;
  all.reserve(scores.size());
  for (std::size_t r = 0; r < scores.size(); ++r) all.push_back({query_id, index.id(r), scores[r]});
  const auto keep = std::min(all.size(), static_cast<std::size_t>(top_k));
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(keep), all.end(),
                    candidate_rank_less);
  all.resize(keep);
  return all;
}

// Exhaustive frame-level inner-product search. Results are in ascending
// query-id order regardless of `threads`.
inline std::vector<QueryCandidates> exhaustive_search(const Corpus& queries, const Corpus& refs,
                                                      const SearchConfig& cfg,
                                                      unsigned threads = 1) {
  validate(cfg);
  require(!queries.empty(), ErrorCode::kEmptyInput, "query corpus is empty");
  require(queries.dim() == refs.dim() || refs.empty(), ErrorCode::kDimensionMismatch,
          "queries d=" + std::to_string(queries.dim()) + ", references d=" +
              std::to_string(refs.dim()));
  const ReferenceIndex index(refs);
  std::vector<const DescriptorSet*> qs;
  for (const auto& [_, set] : queries) qs.push_back(&set);
  std::vector<QueryCandidates> out(qs.size());
  parallel_for(qs.size(), threads, [&](std::size_t i) {
    const auto scores = score_references(*qs[i], index, cfg);
    out[i] = {qs[i]->video_id, rank_candidates(qs[i]->video_id, index, scores, cfg.top_k)};
  });
  return out;
}

inline std::vector<CandidatePair> flatten(const std::vector<QueryCandidates>& per_query) {
  std::vector<CandidatePair> out;
  for (const auto& q : per_query) out.insert(out.end(), q.ranked.begin(), q.ranked.end());
  return out;
}

// Candidate CSV: header `query_id,ref_id,score`, 6 decimals, grouped by query
// in rank order.
inline std::string format_candidates(const std::vector<QueryCandidates>& per_query) {
  std::string out = "query_id,ref_id,score\n";
  for (const auto& q : per_query) {
    for (const auto& c : q.ranked) {
      out += csv::check_field(c.query_id);
      out += ',';
      out += csv::check_field(c.ref_id);
      out += ',';
      out += csv::fixed(c.score, 6);
      out += '\n';
    }
  }
  return out;
}

inline std::vector<QueryCandidates> parse_candidates(std::istream& in, const std::string& source) {
  const auto rows = csv::read_table(in, source, {"query_id", "ref_id", "score"});
  std::vector<QueryCandidates> out;
  std::set<std::string> seen_queries;
  std::set<std::string> seen_refs;
  for (const auto& row : rows) {
    CandidatePair c{row.fields[0], row.fields[1], csv::to_double(row.fields[2], row.where)};
    if (out.empty() || out.back().query_id != c.query_id) {
      require(seen_queries.insert(c.query_id).second, ErrorCode::kParse,
              row.where + ": rows of query '" + c.query_id + "' are not contiguous");
      out.push_back({c.query_id, {}});
      seen_refs.clear();
    }
    require(seen_refs.insert(c.ref_id).second, ErrorCode::kParse,
            row.where + ": duplicate pair (" + c.query_id + ", " + c.ref_id + ")");
    out.back().ranked.push_back(std::move(c));
  }
  return out;
}

inline std::vector<QueryCandidates> read_candidates(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  return parse_candidates(in, path);
}

}  // namespace vcd
