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

#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/alignment.hpp"
#include "vcd/evaluation.hpp"
#include "vcd/postproc.hpp"
#include "vcd/retrieval.hpp"
#include "vcd/views.hpp"

namespace vcd {

// Where the consistency statistics are taken. Temporal concat re-normalizes
// its output, so in kBeforeTemporalConcat the divisor is measured on the
// pre-concat rows and applied to the final rows.
enum class WeightingOrder { kAfterTemporalConcat, kBeforeTemporalConcat };

inline std::string_view to_string(WeightingOrder o) {
  return o == WeightingOrder::kAfterTemporalConcat ? "tc_then_cw" : "cw_then_tc";
}

inline WeightingOrder parse_weighting_order(std::string_view s) {
  if (s == "tc_then_cw") return WeightingOrder::kAfterTemporalConcat;
  if (s == "cw_then_tc") return WeightingOrder::kBeforeTemporalConcat;
  fail(ErrorCode::kParse, "unknown weighting order '" + std::string(s) + "'");
}

struct DescriptorTrackConfig {
  bool multi_view = false;
  bool consistency_weight = false;
  bool temporal_concat = false;
  bool score_norm = false;
  bool weight_refs = false;
  WeightingOrder order = WeightingOrder::kAfterTemporalConcat;
  double consistency_floor = kConsistencyFloor;
  TemporalConcatConfig tc;
  ScoreNormConfig sn;
  SearchConfig search;
};

struct DescriptorTrackInputs {
  const Corpus* queries = nullptr;      // full-frame descriptors
  const Corpus* query_views = nullptr;  // merged crop views; needed for multi_view
  const EditLabelMap* labels = nullptr; // missing entries fall back to the stub
  const Corpus* refs = nullptr;
  const Corpus* noise = nullptr;        // needed for score_norm
};

struct DescriptorTrackResult {
  Corpus queries{CorpusRole::kQuery};
  Corpus refs{CorpusRole::kReference};
  std::vector<QueryCandidates> candidates;
  std::optional<PcaModel> pca;
  std::vector<std::string> warnings;
};

// Checks that each query's merged views match the crop scheme its labels
// route to.
inline void check_view_layout(const Corpus& views, const EditLabelMap* labels) {
  for (const auto& [id, set] : views) {
    EditLabels e = stub_edit_labels(id);
    if (labels) {
      if (auto it = labels->find(id); it != labels->end()) e = it->second;
    }
    const int expected = view_count(route_scheme(e));
    for (int g : timestamp_groups(set)) {
      require(g == expected, ErrorCode::kInvariant,
              "query '" + id + "' has " + std::to_string(g) + " views per frame but its labels route to " +
                  std::string(to_string(route_scheme(e))) + " (" + std::to_string(expected) + " views)");
    }
  }
}

namespace detail {

// Runs a stage and prefixes any failure with the stage name.
template <typename Fn>
auto stage(std::string_view name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.message());
  }
}

inline Corpus parallel_transform(const Corpus& corpus, unsigned threads,
                                 const std::function<DescriptorSet(const DescriptorSet&)>& fn) {
  std::vector<const DescriptorSet*> in;
  for (const auto& [_, s] : corpus) in.push_back(&s);
  std::vector<DescriptorSet> out(in.size());
  parallel_for(in.size(), threads, [&](std::size_t i) { out[i] = fn(*in[i]); });
  Corpus result(corpus.role());
  for (auto& s : out) result.add(std::move(s));
  return result;
}

}  // namespace detail

// normalize -> temporal concat -> consistency weighting -> search -> score
// normalization, each stage behind its flag.
inline DescriptorTrackResult pipeline_descriptor_track(const DescriptorTrackInputs& in,
                                                       const DescriptorTrackConfig& cfg,
                                                       unsigned threads = 1) {
  require(in.queries && in.refs, ErrorCode::kEmptyInput, "queries and references are required");
  DescriptorTrackResult res;
  const Corpus* query_src = in.queries;
  if (cfg.multi_view) {
    require(in.query_views != nullptr, ErrorCode::kEmptyInput,
            "multi-view: no query view corpus supplied");
    detail::stage("multi-view", [&] { check_view_layout(*in.query_views, in.labels); });
    query_src = in.query_views;
  }
  auto normalize = [](const DescriptorSet& s) { return l2_normalize(s); };
  Corpus queries = detail::stage("normalize", [&] {
    return detail::parallel_transform(*query_src, threads, normalize);
  });
  Corpus refs = detail::stage("normalize", [&] {
    return detail::parallel_transform(*in.refs, threads, normalize);
  });
  std::optional<Corpus> noise;
  if (cfg.score_norm) {
    require(in.noise != nullptr && !in.noise->empty(), ErrorCode::kEmptyInput,
            "score-norm: noise corpus is empty");
    noise = detail::stage("normalize", [&] {
      return detail::parallel_transform(*in.noise, threads, normalize);
    });
  }

  std::map<std::string, double> pre_divisors;
  auto weigh = [&](const DescriptorSet& s) {
    auto w = consistency_weight(s, cfg.consistency_floor);
    if (w.stats.clamped) {
      res.warnings.push_back("consistency-weight: video '" + s.video_id + "' gram mean " +
                             csv::exact(w.stats.gram_mean) + " clamped to " +
                             csv::exact(cfg.consistency_floor));
    }
    return w;
  };
  const bool weigh_early = cfg.consistency_weight && cfg.temporal_concat &&
                           cfg.order == WeightingOrder::kBeforeTemporalConcat;
  if (weigh_early) {
    for (const auto& [id, s] : queries) pre_divisors[id] = weigh(s).stats.divisor;
    if (cfg.weight_refs) {
      for (const auto& [id, s] : refs) pre_divisors[id] = weigh(s).stats.divisor;
    }
  }

  if (cfg.temporal_concat) {
    detail::stage("temporal-concat", [&] {
      validate(cfg.tc);
      res.pca = fit_temporal_pca(refs, cfg.tc);
      auto apply = [&](const DescriptorSet& s) { return temporal_concat(s, cfg.tc, *res.pca); };
      queries = detail::parallel_transform(queries, threads, apply);
      refs = detail::parallel_transform(refs, threads, apply);
      if (noise) noise = detail::parallel_transform(*noise, threads, apply);
    });
  }

  if (cfg.consistency_weight) {
    detail::stage("consistency-weight", [&] {
      auto apply = [&](const Corpus& c) {
        Corpus out(c.role());
        for (const auto& [id, s] : c) {
          if (weigh_early) {
            DescriptorSet w = s;
            w.matrix = (s.matrix.cast<double>() / pre_divisors.at(id)).cast<float>();
            out.add(std::move(w));
          } else {
            out.add(weigh(s).set);
          }
        }
        return out;
      };
      queries = apply(queries);
      if (cfg.weight_refs) refs = apply(refs);
    });
  }

  res.candidates = detail::stage("search", [&] {
    return exhaustive_search(queries, refs, cfg.search, threads);
  });

  if (cfg.score_norm) {
    detail::stage("score-norm", [&] {
      validate(cfg.sn);
      const NoisePool pool(*noise);
      parallel_for(res.candidates.size(), threads, [&](std::size_t i) {
        auto& qc = res.candidates[i];
        std::vector<double> scores;
        for (const auto& c : qc.ranked) scores.push_back(c.score);
        const auto adjusted = score_normalize(scores, queries.at(qc.query_id), pool, cfg.sn);
        for (std::size_t j = 0; j < qc.ranked.size(); ++j) qc.ranked[j].score = adjusted[j];
      });
    });
  }
  res.queries = std::move(queries);
  res.refs = std::move(refs);
  return res;
}

// ---------------------------------------------------------------------------
// Ablation over pipeline configurations.

struct AblationConfig {
  std::string name;
  DescriptorTrackConfig descriptor;
  MatchConfig match;
};

struct AblationRow {
  std::string name;
  bool multi_view = false;
  bool consistency_weight = false;
  bool temporal_concat = false;
  double descriptor_muap = 0.0;
  double matching_muap = 0.0;

  bool operator==(const AblationRow&) const = default;
};

// The cumulative rows: baseline, +multi-view, +consistency weighting,
// +temporal concat. Score normalization is part of the baseline.
inline std::vector<AblationConfig> standard_ablation(const DescriptorTrackConfig& base,
                                                     const MatchConfig& match) {
  std::vector<AblationConfig> out;
  DescriptorTrackConfig c = base;
  c.score_norm = true;
  c.multi_view = c.consistency_weight = c.temporal_concat = false;
  out.push_back({"baseline", c, match});
  c.multi_view = true;
  out.push_back({"+multi-view", c, match});
  c.consistency_weight = true;
  out.push_back({"+consistency-weight", c, match});
  c.temporal_concat = true;
  out.push_back({"+temporal-concat", c, match});
  return out;
}

struct EvalData {
  const Corpus* queries = nullptr;
  const Corpus* query_views = nullptr;
  const EditLabelMap* labels = nullptr;
  const Corpus* refs = nullptr;
  const Corpus* noise = nullptr;
  const GroundTruth* gt = nullptr;
};

inline AblationRow run_ablation_config(const EvalData& data, const AblationConfig& cfg,
                                       unsigned threads = 1) {
  const auto track = pipeline_descriptor_track(
      {data.queries, data.query_views, data.labels, data.refs, data.noise}, cfg.descriptor, threads);
  const auto pairs = flatten(track.candidates);
  const auto matches =
      pipeline_matching_track(pairs, track.queries, track.refs, cfg.match, threads);
  return {cfg.name,
          cfg.descriptor.multi_view,
          cfg.descriptor.consistency_weight,
          cfg.descriptor.temporal_concat,
          descriptor_muap(pairs, *data.gt),
          matching_muap(matches, *data.gt)};
}

inline std::vector<AblationRow> ablation_report(const EvalData& data,
                                                const std::vector<AblationConfig>& configs,
                                                unsigned threads = 1) {
  std::vector<AblationRow> rows;
  for (const auto& c : configs) rows.push_back(run_ablation_config(data, c, threads));
  return rows;
}

inline constexpr std::string_view kMatchingMetricNote =
    "matching uAP: area overlap in the query-time x ref-time plane, unions per (query, ref) pair, "
    "summed globally";

inline std::string format_ablation_text(const std::vector<AblationRow>& rows) {
  std::string out = "# " + std::string(kMatchingMetricNote) + "\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-22s %-10s %-18s %-15s %-16s %-14s\n", "config", "multi-crop",
                "consistency-weight", "temporal-concat", "uAP(descriptor)", "uAP(matching)");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-22s %-10s %-18s %-15s %-16.4f %-14.4f\n", r.name.c_str(),
                  r.multi_view ? "x" : "", r.consistency_weight ? "x" : "",
                  r.temporal_concat ? "x" : "", r.descriptor_muap, r.matching_muap);
    out += buf;
  }
  return out;
}

inline std::string format_ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "config,multi_crop,consistency_weight,temporal_concat,descriptor_muap,matching_muap\n";
  for (const auto& r : rows) {
    out += csv::check_field(r.name) + ',' + (r.multi_view ? "1" : "0") + ',' +
           (r.consistency_weight ? "1" : "0") + ',' + (r.temporal_concat ? "1" : "0") + ',' +
           csv::exact(r.descriptor_muap) + ',' + csv::exact(r.matching_muap) + '\n';
  }
  return out;
}

inline std::vector<AblationRow> parse_ablation_csv(std::istream& in, const std::string& source) {
  const auto rows = csv::read_table(in, source,
                                    {"config", "multi_crop", "consistency_weight",
                                     "temporal_concat", "descriptor_muap", "matching_muap"});
  auto flag = [](const std::string& s, const std::string& where) {
    require(s == "0" || s == "1", ErrorCode::kParse, where + ": expected 0 or 1, got '" + s + "'");
    return s == "1";
  };
  std::vector<AblationRow> out;
  for (const auto& r : rows) {
    const auto& f = r.fields;
    out.push_back({f[0], flag(f[1], r.where), flag(f[2], r.where), flag(f[3], r.where),
                   csv::to_double(f[4], r.where), csv::to_double(f[5], r.where)});
  }
  return out;
}

}  // namespace vcd
