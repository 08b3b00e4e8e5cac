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
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/csv.hpp"
#include "vcd/descriptor.hpp"
#include "vcd/parallel.hpp"
#include "vcd/postproc.hpp"
#include "vcd/retrieval.hpp"

namespace vcd {

struct SimilarityMatrix {
  std::string query_id;
  std::string ref_id;
  std::vector<float> q_times;
  std::vector<float> r_times;
  Matrix values;  // q rows x r columns
};

inline SimilarityMatrix similarity_matrix(const DescriptorSet& q, const DescriptorSet& r) {
  require(q.dim() == r.dim(), ErrorCode::kDimensionMismatch,
          "'" + q.video_id + "' d=" + std::to_string(q.dim()) + ", '" + r.video_id +
              "' d=" + std::to_string(r.dim()));
  return {q.video_id, r.video_id, q.timestamps, r.timestamps, q.matrix * r.matrix.transpose()};
}

// Folds rows (and columns) that share a timestamp into one, keeping the
// maximum. Used when query frames carry several crop views.
inline SimilarityMatrix collapse_views(const SimilarityMatrix& sim) {
  auto groups_of = [](const std::vector<float>& t) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> g;  // start, length
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i > 0 && t[i] == t[i - 1]) {
        ++g.back().second;
      } else {
        g.emplace_back(static_cast<Eigen::Index>(i), 1);
      }
    }
    return g;
  };
  const auto qg = groups_of(sim.q_times);
  const auto rg = groups_of(sim.r_times);
  if (qg.size() == sim.q_times.size() && rg.size() == sim.r_times.size()) return sim;
  SimilarityMatrix out{sim.query_id, sim.ref_id, {}, {}, {}};
  out.values.resize(static_cast<Eigen::Index>(qg.size()), static_cast<Eigen::Index>(rg.size()));
  for (std::size_t a = 0; a < qg.size(); ++a) {
    out.q_times.push_back(sim.q_times[static_cast<std::size_t>(qg[a].first)]);
    for (std::size_t b = 0; b < rg.size(); ++b) {
      out.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          sim.values.block(qg[a].first, rg[b].first, qg[a].second, rg[b].second).maxCoeff();
    }
  }
  for (const auto& g : rg) out.r_times.push_back(sim.r_times[static_cast<std::size_t>(g.first)]);
  return out;
}

enum class SegmentScore { kPathSum, kPathMean };

struct TnConfig {
  double sim_threshold = 0.25;
  int max_step = 5;
  int min_nodes = 3;
  int max_segments = 4;
  double min_path_score = 1.0;
  SegmentScore score_mode = SegmentScore::kPathSum;
};

inline void validate(const TnConfig& cfg) {
  require(std::isfinite(cfg.sim_threshold), ErrorCode::kInvariant, "sim_threshold must be finite");
  require(cfg.max_step >= 1, ErrorCode::kInvariant, "max_step must be >= 1");
  require(cfg.min_nodes >= 2, ErrorCode::kInvariant, "min_nodes must be >= 2");
  require(cfg.max_segments >= 1, ErrorCode::kInvariant, "max_segments must be >= 1");
  require(std::isfinite(cfg.min_path_score), ErrorCode::kInvariant,
          "min_path_score must be finite");
}

struct SegmentMatch {
  std::string query_id;
  std::string ref_id;
  double q_start = 0.0, q_end = 0.0;
  double r_start = 0.0, r_end = 0.0;
  double score = 0.0;

  bool operator==(const SegmentMatch&) const = default;
};

struct GridNode {
  int q = 0;
  int r = 0;
  bool operator==(const GridNode&) const = default;
};

struct TnPath {
  std::vector<GridNode> nodes;  // strictly increasing on both axes
  double weight = 0.0;
};

// Maximum-weight path through the temporal network of `values`. Nodes are the
// cells with value >= threshold whose row and column are still `active`; an
// edge joins (i, j) -> (i', j') when 0 < i'-i <= max_step and
// 0 < j'-j <= max_step; a path's weight is the sum of its node values. Ties
// go to the lexicographically smallest predecessor / end node.
inline TnPath tn_best_path(const Matrix& values, double threshold, int max_step,
                           const std::vector<char>& row_active,
                           const std::vector<char>& col_active) {
  const auto nq = static_cast<int>(values.rows());
  const auto nr = static_cast<int>(values.cols());
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(nq) * nr, kNone);
  std::vector<int> pred(static_cast<std::size_t>(nq) * nr, -1);
  auto at = [nr](int i, int j) { return static_cast<std::size_t>(i) * nr + j; };
  int best_end = -1;
  double best_weight = kNone;
  for (int i = 0; i < nq; ++i) {
    if (!row_active[static_cast<std::size_t>(i)]) continue;
    for (int j = 0; j < nr; ++j) {
      if (!col_active[static_cast<std::size_t>(j)]) continue;
      const double v = values(i, j);
      if (!(v >= threshold)) continue;
      double pred_best = kNone;
      int pred_idx = -1;
      for (int pi = std::max(0, i - max_step); pi < i; ++pi) {
        for (int pj = std::max(0, j - max_step); pj < j; ++pj) {
          const double b = best[at(pi, pj)];
          if (b > pred_best) {
            pred_best = b;
            pred_idx = static_cast<int>(at(pi, pj));
          }
        }
      }
      double w = v;
      if (pred_idx >= 0 && pred_best > 0.0) {
        w += pred_best;
        pred[at(i, j)] = pred_idx;
      }
      best[at(i, j)] = w;
      if (w > best_weight) {
        best_weight = w;
        best_end = static_cast<int>(at(i, j));
      }
    }
  }
  TnPath path;
  if (best_end < 0) return path;
  path.weight = best_weight;
  for (int cur = best_end; cur >= 0; cur = pred[static_cast<std::size_t>(cur)]) {
    path.nodes.push_back({cur / nr, cur % nr});
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  return path;
}

// Repeatedly extracts the best path, reporting it when long and heavy enough,
// then retires the query and reference index ranges it spans.
inline std::vector<SegmentMatch> tn_align(const SimilarityMatrix& sim, const TnConfig& cfg) {
  validate(cfg);
  require(sim.values.rows() == static_cast<Eigen::Index>(sim.q_times.size()) &&
              sim.values.cols() == static_cast<Eigen::Index>(sim.r_times.size()),
          ErrorCode::kDimensionMismatch, "similarity matrix shape does not match its time axes");
  std::vector<char> rows(sim.q_times.size(), 1), cols(sim.r_times.size(), 1);
  std::vector<SegmentMatch> out;
  for (int round = 0; round < cfg.max_segments; ++round) {
    const auto path = tn_best_path(sim.values, cfg.sim_threshold, cfg.max_step, rows, cols);
    if (path.nodes.empty()) break;
    const auto& first = path.nodes.front();
    const auto& last = path.nodes.back();
    if (static_cast<int>(path.nodes.size()) >= cfg.min_nodes &&
        path.weight >= cfg.min_path_score) {
      const double score = cfg.score_mode == SegmentScore::kPathSum
                               ? path.weight
                               : path.weight / static_cast<double>(path.nodes.size());
      out.push_back({sim.query_id, sim.ref_id,
                     sim.q_times[static_cast<std::size_t>(first.q)],
                     sim.q_times[static_cast<std::size_t>(last.q)],
                     sim.r_times[static_cast<std::size_t>(first.r)],
                     sim.r_times[static_cast<std::size_t>(last.r)], score});
    }
    for (int i = first.q; i <= last.q; ++i) rows[static_cast<std::size_t>(i)] = 0;
    for (int j = first.r; j <= last.r; ++j) cols[static_cast<std::size_t>(j)] = 0;
  }
  return out;
}

// Descending score, then ids and interval starts for a total order.
inline bool segment_rank_less(const SegmentMatch& a, const SegmentMatch& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.query_id != b.query_id) return a.query_id < b.query_id;
  if (a.ref_id != b.ref_id) return a.ref_id < b.ref_id;
  if (a.q_start != b.q_start) return a.q_start < b.q_start;
  return a.r_start < b.r_start;
}

struct MatchConfig {
  TnConfig tn;
  // Re-normalize rows before building similarity matrices, so per-video
  // scalings applied for retrieval do not shift node admission.
  bool cosine = true;
  // Fold crop views of one timestamp into a single row by max.
  bool collapse_views = true;
};

inline std::vector<SegmentMatch> pipeline_matching_track(
    const std::vector<CandidatePair>& candidates, const Corpus& queries, const Corpus& refs,
    const MatchConfig& cfg, unsigned threads = 1) {
  validate(cfg.tn);
  if (candidates.empty()) return {};
  const Corpus q = cfg.cosine ? l2_normalize(queries) : queries;
  const Corpus r = cfg.cosine ? l2_normalize(refs) : refs;
  std::vector<std::vector<SegmentMatch>> per_pair(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    const auto& c = candidates[i];
    auto sim = similarity_matrix(q.at(c.query_id), r.at(c.ref_id));
    if (cfg.collapse_views) sim = collapse_views(sim);
    per_pair[i] = tn_align(sim, cfg.tn);
  });
  std::vector<SegmentMatch> out;
  for (auto& p : per_pair) out.insert(out.end(), p.begin(), p.end());
  std::sort(out.begin(), out.end(), segment_rank_less);
  return out;
}

// Matches CSV: seconds with 3 decimals, score with 6.
inline std::string format_matches(const std::vector<SegmentMatch>& matches) {
  std::string out = "query_id,ref_id,query_start,query_end,ref_start,ref_end,score\n";
  for (const auto& m : matches) {
    out += csv::check_field(m.query_id) + ',' + csv::check_field(m.ref_id) + ',' +
           csv::fixed(m.q_start, 3) + ',' + csv::fixed(m.q_end, 3) + ',' +
           csv::fixed(m.r_start, 3) + ',' + csv::fixed(m.r_end, 3) + ',' +
           csv::fixed(m.score, 6) + '\n';
  }
  return out;
}

inline std::vector<SegmentMatch> parse_matches(std::istream& in, const std::string& source) {
  const auto rows = csv::read_table(
      in, source, {"query_id", "ref_id", "query_start", "query_end", "ref_start", "ref_end", "score"});
  std::vector<SegmentMatch> out;
  for (const auto& row : rows) {
    const auto& f = row.fields;
    SegmentMatch m{f[0], f[1],
                   csv::to_double(f[2], row.where), csv::to_double(f[3], row.where),
                   csv::to_double(f[4], row.where), csv::to_double(f[5], row.where),
                   csv::to_double(f[6], row.where)};
    require(m.q_start <= m.q_end && m.r_start <= m.r_end, ErrorCode::kParse,
            row.where + ": interval end before start");
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<SegmentMatch> read_matches(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  return parse_matches(in, path);
}

}  // namespace vcd
