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

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vcd/alignment.hpp"
#include "vcd/csv.hpp"
#include "vcd/pipeline.hpp"
#include "vcd/simgen.hpp"

// key=value text used for config files and run manifests. Lines starting with
// '#' are comments; keys are written in sorted order.
namespace vcd {

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::kParse,
            source + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

inline KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  return parse_key_values(in, path);
}

inline std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

namespace kv {

inline std::string str(bool b) { return b ? "true" : "false"; }
inline std::string str(int v) { return std::to_string(v); }
inline std::string str(double v) { return csv::exact(v); }

inline void get(const KeyValues& m, const std::string& key, bool& out) {
  auto it = m.find(key);
  if (it == m.end()) return;
  require(it->second == "true" || it->second == "false", ErrorCode::kParse,
          key + ": expected true/false, got '" + it->second + "'");
  out = it->second == "true";
}

inline void get(const KeyValues& m, const std::string& key, int& out) {
  auto it = m.find(key);
  if (it == m.end()) return;
  std::size_t used = 0;
  try {
    out = std::stoi(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == it->second.size() && used > 0, ErrorCode::kParse,
          key + ": expected an integer, got '" + it->second + "'");
}

inline void get(const KeyValues& m, const std::string& key, double& out) {
  auto it = m.find(key);
  if (it == m.end()) return;
  out = csv::to_double(it->second, key);
}

inline std::string str(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + csv::exact(v[i]);
  return out;
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : csv::split(s)) out.push_back(csv::to_double(tok, key));
  return out;
}

}  // namespace kv

inline void put_config(KeyValues& m, const DescriptorTrackConfig& c) {
  m["descriptor.multi_view"] = kv::str(c.multi_view);
  m["descriptor.consistency_weight"] = kv::str(c.consistency_weight);
  m["descriptor.temporal_concat"] = kv::str(c.temporal_concat);
  m["descriptor.score_norm"] = kv::str(c.score_norm);
  m["descriptor.weight_refs"] = kv::str(c.weight_refs);
  m["descriptor.order"] = std::string(to_string(c.order));
  m["consistency.floor"] = kv::str(c.consistency_floor);
  m["temporal_concat.window"] = kv::str(c.tc.window);
  m["temporal_concat.weights"] = kv::str(c.tc.weights);
  m["temporal_concat.output_dim"] = kv::str(c.tc.output_dim);
  m["score_norm.rank_k"] = kv::str(c.sn.rank_k);
  m["score_norm.beta"] = kv::str(c.sn.beta);
  m["search.top_k"] = kv::str(c.search.top_k);
  m["search.aggregation"] = std::string(to_string(c.search.aggregation));
  m["search.agg_k"] = kv::str(c.search.agg_k);
}

inline void get_config(const KeyValues& m, DescriptorTrackConfig& c) {
  kv::get(m, "descriptor.multi_view", c.multi_view);
  kv::get(m, "descriptor.consistency_weight", c.consistency_weight);
  kv::get(m, "descriptor.temporal_concat", c.temporal_concat);
  kv::get(m, "descriptor.score_norm", c.score_norm);
  kv::get(m, "descriptor.weight_refs", c.weight_refs);
  if (auto it = m.find("descriptor.order"); it != m.end()) c.order = parse_weighting_order(it->second);
  kv::get(m, "consistency.floor", c.consistency_floor);
  kv::get(m, "temporal_concat.window", c.tc.window);
  if (auto it = m.find("temporal_concat.weights"); it != m.end()) {
    c.tc.weights = kv::parse_doubles(it->second, it->first);
  }
  kv::get(m, "temporal_concat.output_dim", c.tc.output_dim);
  kv::get(m, "score_norm.rank_k", c.sn.rank_k);
  kv::get(m, "score_norm.beta", c.sn.beta);
  kv::get(m, "search.top_k", c.search.top_k);
  if (auto it = m.find("search.aggregation"); it != m.end()) {
    c.search.aggregation = parse_aggregation(it->second);
  }
  kv::get(m, "search.agg_k", c.search.agg_k);
}

inline void put_config(KeyValues& m, const MatchConfig& c) {
  m["tn.sim_threshold"] = kv::str(c.tn.sim_threshold);
  m["tn.max_step"] = kv::str(c.tn.max_step);
  m["tn.min_nodes"] = kv::str(c.tn.min_nodes);
  m["tn.max_segments"] = kv::str(c.tn.max_segments);
  m["tn.min_path_score"] = kv::str(c.tn.min_path_score);
  m["tn.score_mode"] = c.tn.score_mode == SegmentScore::kPathSum ? "sum" : "mean";
  m["match.cosine"] = kv::str(c.cosine);
  m["match.collapse_views"] = kv::str(c.collapse_views);
}

inline SegmentScore parse_segment_score(const std::string& s) {
  if (s == "sum") return SegmentScore::kPathSum;
  if (s == "mean") return SegmentScore::kPathMean;
  fail(ErrorCode::kParse, "unknown segment score mode '" + s + "'");
}

inline void get_config(const KeyValues& m, MatchConfig& c) {
  kv::get(m, "tn.sim_threshold", c.tn.sim_threshold);
  kv::get(m, "tn.max_step", c.tn.max_step);
  kv::get(m, "tn.min_nodes", c.tn.min_nodes);
  kv::get(m, "tn.max_segments", c.tn.max_segments);
  kv::get(m, "tn.min_path_score", c.tn.min_path_score);
  if (auto it = m.find("tn.score_mode"); it != m.end()) c.tn.score_mode = parse_segment_score(it->second);
  kv::get(m, "match.cosine", c.cosine);
  kv::get(m, "match.collapse_views", c.collapse_views);
}

inline void put_config(KeyValues& m, const SimConfig& c) {
  m["sim.seed"] = std::to_string(c.seed);
  m["sim.n_refs"] = kv::str(c.n_refs);
  m["sim.n_queries"] = kv::str(c.n_queries);
  m["sim.n_noise"] = kv::str(c.n_noise);
  m["sim.d"] = kv::str(c.d);
  m["sim.frames_min"] = kv::str(c.frames_min);
  m["sim.frames_max"] = kv::str(c.frames_max);
  m["sim.fps"] = kv::str(c.fps);
  m["sim.copy_fraction"] = kv::str(c.copy_fraction);
  m["sim.noise_sigma"] = kv::str(c.noise_sigma);
  m["sim.distractor_mode"] = std::string(to_string(c.distractor_mode));
  m["sim.stack_fraction"] = kv::str(c.stack_fraction);
  m["sim.walk_step"] = kv::str(c.walk_step);
  m["sim.segment_min"] = kv::str(c.segment_min);
  m["sim.segment_max"] = kv::str(c.segment_max);
  m["sim.near_dup_min"] = kv::str(c.near_dup_min);
  m["sim.near_dup_max"] = kv::str(c.near_dup_max);
  m["sim.crop_sigma"] = kv::str(c.crop_sigma);
  m["sim.stack_weight"] = kv::str(c.stack_weight);
}

inline void get_config(const KeyValues& m, SimConfig& c) {
  if (auto it = m.find("sim.seed"); it != m.end()) {
    std::size_t used = 0;
    try {
      c.seed = std::stoull(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == it->second.size() && used > 0, ErrorCode::kParse,
            "sim.seed: expected an unsigned integer");
  }
  kv::get(m, "sim.n_refs", c.n_refs);
  kv::get(m, "sim.n_queries", c.n_queries);
  kv::get(m, "sim.n_noise", c.n_noise);
  kv::get(m, "sim.d", c.d);
  kv::get(m, "sim.frames_min", c.frames_min);
  kv::get(m, "sim.frames_max", c.frames_max);
  kv::get(m, "sim.fps", c.fps);
  kv::get(m, "sim.copy_fraction", c.copy_fraction);
  kv::get(m, "sim.noise_sigma", c.noise_sigma);
  if (auto it = m.find("sim.distractor_mode"); it != m.end()) {
    c.distractor_mode = parse_distractor_mode(it->second);
  }
  kv::get(m, "sim.stack_fraction", c.stack_fraction);
  kv::get(m, "sim.walk_step", c.walk_step);
  kv::get(m, "sim.segment_min", c.segment_min);
  kv::get(m, "sim.segment_max", c.segment_max);
  kv::get(m, "sim.near_dup_min", c.near_dup_min);
  kv::get(m, "sim.near_dup_max", c.near_dup_max);
  kv::get(m, "sim.crop_sigma", c.crop_sigma);
  kv::get(m, "sim.stack_weight", c.stack_weight);
}

}  // namespace vcd
