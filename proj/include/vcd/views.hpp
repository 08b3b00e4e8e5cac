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
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/descriptor.hpp"

namespace vcd {

// Multi-crop layouts. Box order is fixed and defines view order in merged
// descriptor sets.
enum class CropScheme {
  kFullOnly,
  kTwoViewVertical,    // top, bottom
  kTwoViewHorizontal,  // left, right
  kFourView,           // TL, TR, BL, BR
  kFiveView,           // full, TL, TR, BL, BR
};

inline std::string_view to_string(CropScheme s) {
  switch (s) {
    case CropScheme::kFullOnly: return "full_only";
    case CropScheme::kTwoViewVertical: return "two_view_vertical";
    case CropScheme::kTwoViewHorizontal: return "two_view_horizontal";
    case CropScheme::kFourView: return "four_view";
    case CropScheme::kFiveView: return "five_view";
  }
  return "unknown";
}

inline int view_count(CropScheme s) {
  switch (s) {
    case CropScheme::kFullOnly: return 1;
    case CropScheme::kTwoViewVertical:
    case CropScheme::kTwoViewHorizontal: return 2;
    case CropScheme::kFourView: return 4;
    case CropScheme::kFiveView: return 5;
  }
  return 1;
}

struct Box {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const Box&) const = default;
};

// The five-view partial crops default to quadrants; kOverlapping grows each
// partial crop to 2/3 of the frame anchored at its corner so the crops overlap.
enum class FiveViewGeometry { kQuadrants, kOverlapping };

inline std::vector<Box> crop_boxes(CropScheme scheme, int frame_w, int frame_h,
                                   FiveViewGeometry five = FiveViewGeometry::kQuadrants) {
  require(frame_w >= 2 && frame_h >= 2, ErrorCode::kInvariant,
          "degenerate frame " + std::to_string(frame_w) + "x" + std::to_string(frame_h));
  const int sx = frame_w / 2, sy = frame_h / 2;
  const Box full{0, 0, frame_w, frame_h};
  auto quadrants = [&] {
    return std::vector<Box>{{0, 0, sx, sy},
                            {sx, 0, frame_w - sx, sy},
                            {0, sy, sx, frame_h - sy},
                            {sx, sy, frame_w - sx, frame_h - sy}};
  };
  switch (scheme) {
    case CropScheme::kFullOnly: return {full};
    case CropScheme::kTwoViewVertical:
      return {{0, 0, frame_w, sy}, {0, sy, frame_w, frame_h - sy}};
    case CropScheme::kTwoViewHorizontal:
      return {{0, 0, sx, frame_h}, {sx, 0, frame_w - sx, frame_h}};
    case CropScheme::kFourView: return quadrants();
    case CropScheme::kFiveView: {
      std::vector<Box> out{full};
      if (five == FiveViewGeometry::kQuadrants) {
        for (const auto& b : quadrants()) out.push_back(b);
      } else {
        const int cw = std::max(1, frame_w * 2 / 3), ch = std::max(1, frame_h * 2 / 3);
        out.push_back({0, 0, cw, ch});
        out.push_back({frame_w - cw, 0, cw, ch});
        out.push_back({0, frame_h - ch, cw, ch});
        out.push_back({frame_w - cw, frame_h - ch, cw, ch});
      }
      return out;
    }
  }
  return {full};
}

// Interleaves V per-view sequences of the same video: for every frame time the
// V view rows appear consecutively, in input order.
inline DescriptorSet merge_views(const std::vector<DescriptorSet>& views) {
  require(!views.empty(), ErrorCode::kEmptyInput, "merge_views needs at least one view");
  const auto& first = views.front();
  for (const auto& v : views) {
    validate(v);
    require(v.video_id == first.video_id, ErrorCode::kInvariant,
            "views belong to different videos: '" + first.video_id + "' vs '" +
                v.video_id + "'");
    require(v.dim() == first.dim(), ErrorCode::kDimensionMismatch,
            "view dims differ for '" + first.video_id + "'");
    require(v.timestamps == first.timestamps, ErrorCode::kInvariant,
            "view timestamps differ for '" + first.video_id + "'");
  }
  const auto n = static_cast<Eigen::Index>(first.frames());
  const auto nv = static_cast<Eigen::Index>(views.size());
  DescriptorSet out;
  out.video_id = first.video_id;
  out.matrix.resize(n * nv, first.dim());
  out.timestamps.reserve(static_cast<std::size_t>(n * nv));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index v = 0; v < nv; ++v) {
      out.matrix.row(i * nv + v) = views[static_cast<std::size_t>(v)].matrix.row(i);
      out.timestamps.push_back(first.timestamps[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

// Inverse of merge_views for a known view count.
inline std::vector<DescriptorSet> split_views(const DescriptorSet& merged, int num_views) {
  require(num_views >= 1, ErrorCode::kInvariant, "view count must be >= 1");
  const auto rows = static_cast<Eigen::Index>(merged.frames());
  require(rows % num_views == 0, ErrorCode::kInvariant,
          "row count " + std::to_string(rows) + " not divisible by view count");
  const auto n = rows / num_views;
  std::vector<DescriptorSet> views(static_cast<std::size_t>(num_views));
  for (int v = 0; v < num_views; ++v) {
    auto& out = views[static_cast<std::size_t>(v)];
    out.video_id = merged.video_id;
    out.matrix.resize(n, merged.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
      out.matrix.row(i) = merged.matrix.row(i * num_views + v);
      out.timestamps.push_back(merged.timestamps[static_cast<std::size_t>(i * num_views + v)]);
    }
  }
  return views;
}

// Lengths of runs of equal consecutive timestamps.
inline std::vector<int> timestamp_groups(const DescriptorSet& set) {
  std::vector<int> groups;
  for (std::size_t i = 0; i < set.timestamps.size(); ++i) {
    if (i > 0 && set.timestamps[i] == set.timestamps[i - 1]) {
      ++groups.back();
    } else {
      groups.push_back(1);
    }
  }
  return groups;
}

enum class EditLabel { kStackVertical, kStackHorizontal, kStackGrid, kOverlay, kOther, kNone };

inline std::string_view to_string(EditLabel l) {
  switch (l) {
    case EditLabel::kStackVertical: return "stack_vertical";
    case EditLabel::kStackHorizontal: return "stack_horizontal";
    case EditLabel::kStackGrid: return "stack_grid";
    case EditLabel::kOverlay: return "overlay";
    case EditLabel::kOther: return "other";
    case EditLabel::kNone: return "none";
  }
  return "unknown";
}

inline std::optional<EditLabel> parse_edit_label(std::string_view s) {
  for (auto l : {EditLabel::kStackVertical, EditLabel::kStackHorizontal,
                 EditLabel::kStackGrid, EditLabel::kOverlay, EditLabel::kOther,
                 EditLabel::kNone}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

struct EditLabels {
  std::string video_id;
  std::set<EditLabel> labels;

  bool operator==(const EditLabels&) const = default;
};

inline void validate(const EditLabels& e) {
  require(!e.labels.empty(), ErrorCode::kInvariant,
          "video '" + e.video_id + "' has no edit labels");
  require(!e.labels.count(EditLabel::kNone) || e.labels.size() == 1,
          ErrorCode::kInvariant,
          "video '" + e.video_id + "': 'none' cannot be combined with other labels");
}

// Most specific geometry wins when several labels are present.
inline CropScheme route_scheme(const EditLabels& e) {
  const auto& l = e.labels;
  if (l.count(EditLabel::kStackGrid)) return CropScheme::kFourView;
  if (l.count(EditLabel::kStackVertical)) return CropScheme::kTwoViewVertical;
  if (l.count(EditLabel::kStackHorizontal)) return CropScheme::kTwoViewHorizontal;
  if (l.count(EditLabel::kOverlay) || l.count(EditLabel::kOther)) return CropScheme::kFiveView;
  return CropScheme::kFullOnly;
}

// Stand-in for the editing classifier: every query is treated as "other".
inline EditLabels stub_edit_labels(const std::string& video_id) {
  return {video_id, {EditLabel::kOther}};
}

using EditLabelMap = std::map<std::string, EditLabels>;

// `video_id,label1|label2|...`, one row per video, no header.
inline EditLabelMap parse_edit_labels(std::istream& in, const std::string& source) {
  EditLabelMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(lineno);
    const auto comma = line.find(',');
    require(comma != std::string::npos && comma > 0, ErrorCode::kParse,
            where + ": expected 'video_id,labels'");
    EditLabels e;
    e.video_id = line.substr(0, comma);
    std::stringstream labels(line.substr(comma + 1));
    std::string tok;
    while (std::getline(labels, tok, '|')) {
      auto l = parse_edit_label(tok);
      require(l.has_value(), ErrorCode::kParse, where + ": unknown label '" + tok + "'");
      e.labels.insert(*l);
    }
    try {
      validate(e);
    } catch (const Error& err) {
      fail(ErrorCode::kParse, where + ": " + err.what());
    }
    require(out.emplace(e.video_id, e).second, ErrorCode::kParse,
            where + ": duplicate video id '" + e.video_id + "'");
  }
  return out;
}

inline EditLabelMap read_edit_labels(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  return parse_edit_labels(in, path);
}

inline std::string format_edit_labels(const EditLabelMap& labels) {
  std::string out;
  for (const auto& [id, e] : labels) {
    out += id;
    out += ',';
    bool first = true;
    for (auto l : e.labels) {
      if (!first) out += '|';
      out += to_string(l);
      first = false;
    }
    out += '\n';
  }
  return out;
}

}  // namespace vcd
