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
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/descriptor.hpp"
#include "vcd/evaluation.hpp"
#include "vcd/views.hpp"

// Synthetic corpora in descriptor space.
//
// References are spherical random walks, so neighbouring frames are strongly
// correlated. Queries come in four kinds:
//   * plain copy: a query-specific walk with a reference segment spliced in,
//     each copied frame perturbed by noise_sigma;
//   * stacked copy: as above, but the spliced timeline occupies one cell of a
//     2- or 4-cell stack, so the full-frame descriptor is a blend dominated by
//     unrelated content while the matching crop view is clean;
//   * near duplicate (unedited): tracks a reference trajectory through a fixed
//     offset, i.e. similar content that is not a copy, with no scene change;
//   * random (unedited): an unrelated walk.
namespace vcd {

enum class DistractorMode { kRandom, kNearDuplicate };

inline std::string_view to_string(DistractorMode m) {
  return m == DistractorMode::kRandom ? "random" : "near_duplicate";
}

inline DistractorMode parse_distractor_mode(std::string_view s) {
  if (s == "random") return DistractorMode::kRandom;
  if (s == "near_duplicate") return DistractorMode::kNearDuplicate;
  fail(ErrorCode::kParse, "unknown distractor mode '" + std::string(s) + "'");
}

struct SimConfig {
  std::uint64_t seed = 7;
  int n_refs = 200;
  int n_queries = 60;
  int n_noise = 100;
  int d = 128;
  int frames_min = 60;
  int frames_max = 120;
  double fps = 1.0;
  double copy_fraction = 0.5;
  double noise_sigma = 0.35;
  DistractorMode distractor_mode = DistractorMode::kNearDuplicate;
  double stack_fraction = 0.3;

  // Shape of the simulation; the defaults are what the bundled experiments use.
  double walk_step = 0.5;        // per-frame random-walk step (relative norm)
  double segment_min = 0.2;      // copied segment length, fraction of query length
  double segment_max = 0.6;
  double near_dup_min = 0.3;     // offset norm range for near duplicates
  double near_dup_max = 0.8;
  double crop_sigma = 0.2;       // extra noise of partial crops of a frame
  double stack_weight = 0.5;     // weight of the copied cell in a stacked full frame
};

inline void validate(const SimConfig& c) {
  require(c.n_refs >= 1 && c.n_queries >= 1 && c.n_noise >= 1, ErrorCode::kInvariant,
          "corpus sizes must be >= 1");
  require(c.d >= 1 && c.d <= kMaxDim, ErrorCode::kInvariant, "d must be in [1, 512]");
  require(c.frames_min >= 1 && c.frames_max >= c.frames_min, ErrorCode::kInvariant,
          "frames range must satisfy 1 <= min <= max");
  require(c.fps > 0.0, ErrorCode::kInvariant, "fps must be positive");
  require(c.copy_fraction >= 0.0 && c.copy_fraction <= 1.0, ErrorCode::kInvariant,
          "copy_fraction must be in [0, 1]");
  require(c.stack_fraction >= 0.0 && c.stack_fraction <= 1.0, ErrorCode::kInvariant,
          "stack_fraction must be in [0, 1]");
  require(c.noise_sigma >= 0.0 && c.walk_step >= 0.0 && c.crop_sigma >= 0.0,
          ErrorCode::kInvariant, "noise scales must be >= 0");
  require(0.0 < c.segment_min && c.segment_min <= c.segment_max && c.segment_max <= 1.0,
          ErrorCode::kInvariant, "segment fractions must satisfy 0 < min <= max <= 1");
  require(0.0 <= c.near_dup_min && c.near_dup_min <= c.near_dup_max, ErrorCode::kInvariant,
          "near-duplicate offset range is empty");
  require(c.stack_weight > 0.0, ErrorCode::kInvariant, "stack_weight must be positive");
}

struct SimData {
  Corpus queries{CorpusRole::kQuery};      // full-frame view only
  Corpus query_views{CorpusRole::kQuery};  // all crop views, merged per frame
  Corpus refs{CorpusRole::kReference};
  Corpus noise{CorpusRole::kNoise};
  GroundTruth gt;
  EditLabelMap labels;
};

namespace detail {

class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : gen_(seed) {}

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  Eigen::VectorXd gaussian(int d, double scale) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = n(gen_) * scale;
    return v;
  }
  Eigen::VectorXd unit(int d) { return gaussian(d, 1.0).normalized(); }
  template <typename It>
  void shuffle(It first, It last) { std::shuffle(first, last, gen_); }

 private:
  std::mt19937_64 gen_;
};

// n x d, row t = normalize(row t-1 + step-sized Gaussian kick)
inline Eigen::MatrixXd random_walk(SimRng& rng, int n, int d, double step) {
  Eigen::MatrixXd out(n, d);
  Eigen::VectorXd x = rng.unit(d);
  const double scale = step / std::sqrt(static_cast<double>(d));
  for (int t = 0; t < n; ++t) {
    if (t > 0) x = (x + rng.gaussian(d, scale)).normalized();
    out.row(t) = x.transpose();
  }
  return out;
}

// normalize(x + sigma-sized noise); exact copy when sigma is 0.
inline Eigen::VectorXd perturb(SimRng& rng, const Eigen::VectorXd& x, double sigma) {
  if (sigma == 0.0) return x;
  return (x + rng.gaussian(static_cast<int>(x.size()), sigma / std::sqrt(double(x.size()))))
      .normalized();
}

inline DescriptorSet make_set(const std::string& id, const Eigen::MatrixXd& m, double fps) {
  DescriptorSet s;
  s.video_id = id;
  s.matrix = m.cast<float>();
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    s.timestamps.push_back(static_cast<float>(static_cast<double>(t) / fps));
  }
  return s;
}

inline std::string make_id(char prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05d", prefix, i);
  return buf;
}

inline int min_segment(const SimConfig& c, int n) {
  return std::max(2, static_cast<int>(std::ceil(c.segment_min * n - 1e-9)));
}

}  // namespace detail

inline SimData generate(const SimConfig& cfg) {
  validate(cfg);
  using detail::SimRng;
  const int d = cfg.d;
  if (cfg.copy_fraction > 0.0) {
    const int need = detail::min_segment(cfg, cfg.frames_max);
    require(need <= cfg.frames_min, ErrorCode::kInfeasible,
            "a copied segment of a " + std::to_string(cfg.frames_max) +
                "-frame query needs " + std::to_string(need) +
                " frames but videos can be as short as " + std::to_string(cfg.frames_min));
  }
  SimRng rng(cfg.seed);
  SimData out;
  std::vector<Eigen::MatrixXd> refs;
  for (int i = 0; i < cfg.n_refs; ++i) {
    refs.push_back(detail::random_walk(rng, rng.uniform_int(cfg.frames_min, cfg.frames_max), d,
                                       cfg.walk_step));
    out.refs.add(detail::make_set(detail::make_id('R', i), refs.back(), cfg.fps));
  }
  for (int i = 0; i < cfg.n_noise; ++i) {
    const auto walk = detail::random_walk(rng, rng.uniform_int(cfg.frames_min, cfg.frames_max), d,
                                          cfg.walk_step);
    out.noise.add(detail::make_set(detail::make_id('N', i), walk, cfg.fps));
  }

  std::vector<int> order(static_cast<std::size_t>(cfg.n_queries));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  const int n_edit = static_cast<int>(std::lround(cfg.copy_fraction * cfg.n_queries));
  const int n_stack = static_cast<int>(std::lround(cfg.stack_fraction * n_edit));
  enum class Kind { kCopy, kStacked, kUnedited };
  std::vector<Kind> kind(static_cast<std::size_t>(cfg.n_queries), Kind::kUnedited);
  for (int k = 0; k < n_edit; ++k) {
    kind[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] =
        k < n_stack ? Kind::kStacked : Kind::kCopy;
  }

  std::vector<SegmentMatch> gt;
  for (int qi = 0; qi < cfg.n_queries; ++qi) {
    const auto id = detail::make_id('Q', qi);
    const Kind k = kind[static_cast<std::size_t>(qi)];
    int n = rng.uniform_int(cfg.frames_min, cfg.frames_max);
    Eigen::MatrixXd full;
    std::vector<Eigen::MatrixXd> views;
    EditLabels labels{id, {EditLabel::kNone}};

    if (k == Kind::kUnedited) {
      if (cfg.distractor_mode == DistractorMode::kRandom) {
        full = detail::random_walk(rng, n, d, cfg.walk_step);
      } else {
        const auto& ref = refs[static_cast<std::size_t>(rng.uniform_int(0, cfg.n_refs - 1))];
        n = std::min<int>(n, static_cast<int>(ref.rows()));
        const int start = rng.uniform_int(0, static_cast<int>(ref.rows()) - n);
        const Eigen::VectorXd offset =
            rng.unit(d) * rng.uniform(cfg.near_dup_min, cfg.near_dup_max);
        full.resize(n, d);
        for (int t = 0; t < n; ++t) {
          const Eigen::VectorXd shifted = (ref.row(start + t).transpose() + offset).normalized();
          full.row(t) = detail::perturb(rng, shifted, cfg.noise_sigma).transpose();
        }
      }
      views = {full};
    } else {
      // Copied timeline: own walk with a perturbed reference segment inside.
      Eigen::MatrixXd timeline = detail::random_walk(rng, n, d, cfg.walk_step);
      const int ref_idx = rng.uniform_int(0, cfg.n_refs - 1);
      const auto& ref = refs[static_cast<std::size_t>(ref_idx)];
      const int ref_n = static_cast<int>(ref.rows());
      const int lo = detail::min_segment(cfg, n);
      const int hi = std::min(ref_n, std::max(lo, static_cast<int>(std::floor(cfg.segment_max * n))));
      require(lo <= hi, ErrorCode::kInfeasible, "copied segment longer than the reference");
      const int len = rng.uniform_int(lo, hi);
      const int ro = rng.uniform_int(0, ref_n - len);
      const int qo = rng.uniform_int(0, n - len);
      for (int t = 0; t < len; ++t) {
        timeline.row(qo + t) =
            detail::perturb(rng, ref.row(ro + t).transpose(), cfg.noise_sigma).transpose();
      }
      gt.push_back({id, detail::make_id('R', ref_idx), qo / cfg.fps, (qo + len - 1) / cfg.fps,
                    ro / cfg.fps, (ro + len - 1) / cfg.fps, 0.0});

      if (k == Kind::kCopy) {
        labels.labels = {rng.uniform_int(0, 1) == 0 ? EditLabel::kOverlay : EditLabel::kOther};
        full = timeline;
        views.push_back(full);
        for (int v = 1; v < view_count(CropScheme::kFiveView); ++v) {
          Eigen::MatrixXd crop(n, d);
          for (int t = 0; t < n; ++t) {
            crop.row(t) =
                detail::perturb(rng, timeline.row(t).transpose(), cfg.crop_sigma).transpose();
          }
          views.push_back(std::move(crop));
        }
      } else {
        const int pick = rng.uniform_int(0, 2);
        const EditLabel label = pick == 0   ? EditLabel::kStackVertical
                                : pick == 1 ? EditLabel::kStackHorizontal
                                            : EditLabel::kStackGrid;
        labels.labels = {label};
        const int cells = view_count(route_scheme(labels));
        const int slot = rng.uniform_int(0, cells - 1);
        Eigen::MatrixXd blend = cfg.stack_weight * timeline;
        for (int v = 0; v < cells; ++v) {
          if (v == slot) {
            views.push_back(timeline);
          } else {
            views.push_back(detail::random_walk(rng, n, d, cfg.walk_step));
            blend += views.back();
          }
        }
        blend.rowwise().normalize();
        full = std::move(blend);
      }
    }
    out.queries.add(detail::make_set(id, full, cfg.fps));
    std::vector<DescriptorSet> view_sets;
    for (const auto& v : views) view_sets.push_back(detail::make_set(id, v, cfg.fps));
    out.query_views.add(merge_views(view_sets));
    out.labels.emplace(id, labels);
  }
  out.gt = GroundTruth(std::move(gt));
  return out;
}

}  // namespace vcd
