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
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vcd/alignment.hpp"
#include "vcd/csv.hpp"
#include "vcd/retrieval.hpp"

namespace vcd {

using VideoPair = std::pair<std::string, std::string>;  // (query, reference)

class GroundTruth {
 public:
  GroundTruth() = default;
  explicit GroundTruth(std::vector<SegmentMatch> records) : records_(std::move(records)) {
    std::set<std::tuple<std::string, std::string, double, double, double, double>> seen;
    for (auto& r : records_) {
      r.score = 0.0;
      require(r.q_start <= r.q_end && r.r_start <= r.r_end, ErrorCode::kInvariant,
              "ground truth interval for (" + r.query_id + ", " + r.ref_id + ") ends before it starts");
      require(seen.emplace(r.query_id, r.ref_id, r.q_start, r.q_end, r.r_start, r.r_end).second,
              ErrorCode::kInvariant,
              "duplicate ground truth record for (" + r.query_id + ", " + r.ref_id + ")");
      pairs_.emplace(r.query_id, r.ref_id);
    }
  }

  const std::vector<SegmentMatch>& records() const { return records_; }
  const std::set<VideoPair>& pair_set() const { return pairs_; }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<SegmentMatch> records_;
  std::set<VideoPair> pairs_;
};

inline std::string format_ground_truth(const GroundTruth& gt) {
  std::string out = "query_id,ref_id,query_start,query_end,ref_start,ref_end\n";
  for (const auto& m : gt.records()) {
    out += csv::check_field(m.query_id) + ',' + csv::check_field(m.ref_id) + ',' +
           csv::fixed(m.q_start, 3) + ',' + csv::fixed(m.q_end, 3) + ',' +
           csv::fixed(m.r_start, 3) + ',' + csv::fixed(m.r_end, 3) + '\n';
  }
  return out;
}

inline GroundTruth parse_ground_truth(std::istream& in, const std::string& source) {
  const auto rows = csv::read_table(
      in, source, {"query_id", "ref_id", "query_start", "query_end", "ref_start", "ref_end"});
  std::vector<SegmentMatch> records;
  for (const auto& row : rows) {
    const auto& f = row.fields;
    records.push_back({f[0], f[1], csv::to_double(f[2], row.where),
                       csv::to_double(f[3], row.where), csv::to_double(f[4], row.where),
                       csv::to_double(f[5], row.where), 0.0});
  }
  return GroundTruth(std::move(records));
}

inline GroundTruth read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  return parse_ground_truth(in, path);
}

// ---------------------------------------------------------------------------
// Descriptor track: micro AP over one global ranking of (query, ref) pairs.
// Positives that were never retrieved still count in the denominator.
inline double descriptor_muap(std::vector<CandidatePair> ranked, const GroundTruth& gt) {
  require(!gt.pair_set().empty(), ErrorCode::kEmptyInput, "ground truth is empty");
  std::set<VideoPair> seen;
  for (const auto& c : ranked) {
    require(std::isfinite(c.score), ErrorCode::kNonFinite,
            "score of (" + c.query_id + ", " + c.ref_id + ")");
    require(seen.emplace(c.query_id, c.ref_id).second, ErrorCode::kInvariant,
            "duplicate candidate (" + c.query_id + ", " + c.ref_id + ")");
  }
  std::sort(ranked.begin(), ranked.end(), [](const CandidatePair& a, const CandidatePair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.query_id != b.query_id) return a.query_id < b.query_id;
    return a.ref_id < b.ref_id;
  });
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    if (gt.pair_set().count({ranked[rank].query_id, ranked[rank].ref_id})) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return ap / static_cast<double>(gt.pair_set().size());
}

// ---------------------------------------------------------------------------
// Matching track.

struct Rect {
  double x0, x1;  // query time
  double y0, y1;  // reference time
};

inline Rect rect_of(const SegmentMatch& m) { return {m.q_start, m.q_end, m.r_start, m.r_end}; }

struct UnionAreas {
  double a = 0.0;     // area of the union of `a`
  double both = 0.0;  // area of (union of a) intersected with (union of b)
};

// Exact areas by coordinate compression: every elementary cell of the grid
// spanned by all rectangle edges is either fully inside a rectangle or not.
inline UnionAreas union_areas(const std::vector<Rect>& a, const std::vector<Rect>& b) {
  std::vector<double> xs, ys;
  for (const auto* set : {&a, &b}) {
    for (const auto& r : *set) {
      xs.insert(xs.end(), {r.x0, r.x1});
      ys.insert(ys.end(), {r.y0, r.y1});
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  auto covered = [](const std::vector<Rect>& rs, double cx, double cy) {
    for (const auto& r : rs) {
      if (r.x0 < cx && cx < r.x1 && r.y0 < cy && cy < r.y1) return true;
    }
    return false;
  };
  UnionAreas out;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double cx = 0.5 * (xs[i] + xs[i + 1]);
    const double w = xs[i + 1] - xs[i];
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      if (!covered(a, cx, cy)) continue;
      const double area = w * (ys[j + 1] - ys[j]);
      out.a += area;
      if (covered(b, cx, cy)) out.both += area;
    }
  }
  return out;
}

inline double union_area(const std::vector<Rect>& rects) { return union_areas(rects, {}).a; }

// Predictions are walked in descending score. After each step precision is
// (covered GT area) / (predicted area) and recall is (covered GT area) /
// (total GT area), with areas taken per (query, ref) pair and summed; the
// result is sum(precision * delta recall).
inline double matching_muap(std::vector<SegmentMatch> pred, const GroundTruth& gt) {
  std::map<VideoPair, std::vector<Rect>> gt_rects;
  for (const auto& r : gt.records()) gt_rects[{r.query_id, r.ref_id}].push_back(rect_of(r));
  double gt_total = 0.0;
  for (const auto& [_, rs] : gt_rects) gt_total += union_area(rs);
  require(gt_total > 0.0, ErrorCode::kEmptyInput, "ground truth has zero total area");

  std::sort(pred.begin(), pred.end(), segment_rank_less);
  static const std::vector<Rect> kNoRects;
  std::map<VideoPair, std::vector<Rect>> pred_rects;
  std::map<VideoPair, UnionAreas> pair_areas;
  double pred_total = 0.0, hit_total = 0.0;
  double recall = 0.0, ap = 0.0;
  for (const auto& p : pred) {
    require(std::isfinite(p.score), ErrorCode::kNonFinite, "prediction score");
    const VideoPair key{p.query_id, p.ref_id};
    auto& rects = pred_rects[key];
    rects.push_back(rect_of(p));
    const auto git = gt_rects.find(key);
    const auto areas = union_areas(rects, git == gt_rects.end() ? kNoRects : git->second);
    auto& prev = pair_areas[key];
    pred_total += areas.a - prev.a;
    hit_total += areas.both - prev.both;
    prev = areas;
    const double precision = pred_total > 0.0 ? hit_total / pred_total : 0.0;
    const double new_recall = hit_total / gt_total;
    ap += precision * (new_recall - recall);
    recall = new_recall;
  }
  return ap;
}

}  // namespace vcd
