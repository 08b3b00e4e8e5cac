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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vcd/descriptor.hpp"
#include "vcd/pca.hpp"
#include "vcd/views.hpp"

namespace vcd {

inline DescriptorSet l2_normalize(const DescriptorSet& set) {
  DescriptorSet out = set;
  for (Eigen::Index r = 0; r < out.matrix.rows(); ++r) {
    const double norm = out.matrix.row(r).cast<double>().norm();
    require(norm > 0.0, ErrorCode::kZeroRow,
            "video '" + set.video_id + "' frame " + std::to_string(r));
    out.matrix.row(r) = (out.matrix.row(r).cast<double>() / norm).cast<float>();
  }
  return out;
}

inline Corpus l2_normalize(const Corpus& corpus) {
  return transform_corpus(corpus, [](const DescriptorSet& s) { return l2_normalize(s); });
}

// ---------------------------------------------------------------------------
// Consistency weighting
//
// X' = X / g  with  g = (1/n^2) * sum_ij (X X^T)_ij = |sum_i x_i|^2 / n^2.
// Videos whose frames disagree with each other (e.g. a clip spliced into an
// unrelated video) have small g and get their similarities boosted.

inline constexpr double kConsistencyFloor = 0.05;

struct ConsistencyStats {
  double gram_mean = 0.0;  // as computed, before clamping
  double divisor = 0.0;    // what X was divided by
  bool clamped = false;
};

inline double gram_mean(const Matrix& x) {
  const Eigen::VectorXd col_sum = x.cast<double>().colwise().sum().transpose();
  const double n = static_cast<double>(x.rows());
  return col_sum.squaredNorm() / (n * n);
}

struct WeightedSet {
  DescriptorSet set;
  ConsistencyStats stats;
};

inline WeightedSet consistency_weight(const DescriptorSet& set,
                                      double floor = kConsistencyFloor) {
  WeightedSet out{set, {}};
  out.stats.gram_mean = gram_mean(set.matrix);
  out.stats.divisor = out.stats.gram_mean;
  if (!(out.stats.gram_mean > floor)) {
    out.stats.divisor = floor;
    out.stats.clamped = true;
  }
  out.set.matrix = (set.matrix.cast<double>() / out.stats.divisor).cast<float>();
  return out;
}

// ---------------------------------------------------------------------------
// Temporal concat

struct TemporalConcatConfig {
  int window = 3;
  std::vector<double> weights{0.5, 1.0, 0.5};
  int output_dim = 0;  // 0: keep the input descriptor dimension
};

inline void validate(const TemporalConcatConfig& cfg) {
  require(cfg.window >= 1 && cfg.window % 2 == 1, ErrorCode::kInvariant,
          "temporal concat window must be odd and >= 1, got " + std::to_string(cfg.window));
  require(static_cast<int>(cfg.weights.size()) == cfg.window, ErrorCode::kInvariant,
          "temporal concat needs one weight per window slot");
  const int c = cfg.window / 2;
  for (int i = 0; i < cfg.window; ++i) {
    const double w = cfg.weights[static_cast<std::size_t>(i)];
    require(std::isfinite(w) && w > 0.0, ErrorCode::kInvariant,
            "temporal concat weights must be positive");
    require(w == cfg.weights[static_cast<std::size_t>(cfg.window - 1 - i)],
            ErrorCode::kInvariant, "temporal concat weights must be symmetric");
    require(w <= cfg.weights[static_cast<std::size_t>(c)], ErrorCode::kInvariant,
            "temporal concat weights must peak at the center");
  }
  require(cfg.output_dim >= 0 && cfg.output_dim <= kMaxDim, ErrorCode::kInvariant,
          "temporal concat output_dim must be <= 512");
}

inline int resolved_output_dim(const TemporalConcatConfig& cfg, int input_dim) {
  return cfg.output_dim == 0 ? input_dim : cfg.output_dim;
}

// Weighted sliding-window concatenation, one row per input row. Neighbours are
// found along time: rows sharing a timestamp are views of one frame, and a
// row's neighbour is the row in the same view slot of the adjacent timestamp.
// Ends are edge-replicated.
inline Matrix concat_windows(const DescriptorSet& set, const TemporalConcatConfig& cfg) {
  validate(cfg);
  const int d = set.dim();
  const int half = cfg.window / 2;
  const auto groups = timestamp_groups(set);
  std::vector<Eigen::Index> group_start(groups.size());
  Eigen::Index acc = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    group_start[g] = acc;
    acc += groups[g];
  }
  const auto num_groups = static_cast<long>(groups.size());
  Matrix out(set.matrix.rows(), static_cast<Eigen::Index>(d) * cfg.window);
  Eigen::Index row = 0;
  for (long g = 0; g < num_groups; ++g) {
    for (int slot = 0; slot < groups[static_cast<std::size_t>(g)]; ++slot, ++row) {
      for (int o = -half; o <= half; ++o) {
        const auto ng = static_cast<std::size_t>(std::clamp(g + o, 0L, num_groups - 1));
        const int nslot = std::min(slot, groups[ng] - 1);
        const auto w = static_cast<float>(cfg.weights[static_cast<std::size_t>(o + half)]);
        out.block(row, static_cast<Eigen::Index>(o + half) * d, 1, d) =
            w * set.matrix.row(group_start[ng] + nslot);
      }
    }
  }
  return out;
}

// PCA for temporal concat, fit on the windows of every video in `corpus`
// (normally the references).
inline PcaModel fit_temporal_pca(const Corpus& corpus, const TemporalConcatConfig& cfg) {
  validate(cfg);
  require(!corpus.empty(), ErrorCode::kEmptyInput, "temporal PCA needs a non-empty corpus");
  const int d = corpus.dim();
  Matrix all(static_cast<Eigen::Index>(corpus.total_frames()),
             static_cast<Eigen::Index>(d) * cfg.window);
  Eigen::Index row = 0;
  for (const auto& [_, set] : corpus) {
    const Matrix w = concat_windows(set, cfg);
    all.middleRows(row, w.rows()) = w;
    row += w.rows();
  }
  return pca_fit(all, resolved_output_dim(cfg, d));
}

inline DescriptorSet temporal_concat(const DescriptorSet& set, const TemporalConcatConfig& cfg,
                                     const PcaModel& pca) {
  validate(cfg);
  require(pca.input_dim() == set.dim() * cfg.window, ErrorCode::kDimensionMismatch,
          "PCA input dim " + std::to_string(pca.input_dim()) + " != window " +
              std::to_string(cfg.window) + " x d " + std::to_string(set.dim()));
  require(pca.output_dim() == resolved_output_dim(cfg, set.dim()),
          ErrorCode::kDimensionMismatch,
          "PCA output dim " + std::to_string(pca.output_dim()) +
              " does not match the configured output_dim");
  DescriptorSet out;
  out.video_id = set.video_id;
  out.timestamps = set.timestamps;
  out.matrix = pca.transform_rows(concat_windows(set, cfg));
  return l2_normalize(out);
}

// ---------------------------------------------------------------------------
// Score normalization against a background ("noise") pool of frames.

struct ScoreNormConfig {
  int rank_k = 10;
  double beta = 1.0;
};

inline void validate(const ScoreNormConfig& cfg) {
  require(cfg.rank_k >= 1, ErrorCode::kInvariant, "score-norm rank_k must be >= 1");
  require(std::isfinite(cfg.beta) && cfg.beta >= 0.0, ErrorCode::kInvariant,
          "score-norm beta must be >= 0");
}

// All noise frames stacked into one matrix.
class NoisePool {
 public:
  NoisePool() = default;
  explicit NoisePool(const Corpus& noise) {
    require(!noise.empty(), ErrorCode::kEmptyInput, "noise corpus is empty");
    frames_.resize(static_cast<Eigen::Index>(noise.total_frames()), noise.dim());
    Eigen::Index row = 0;
    for (const auto& [_, set] : noise) {
      frames_.middleRows(row, set.matrix.rows()) = set.matrix;
      row += set.matrix.rows();
    }
  }

  const Matrix& frames() const { return frames_; }
  std::size_t size() const { return static_cast<std::size_t>(frames_.rows()); }
  int dim() const { return static_cast<int>(frames_.cols()); }

 private:
  Matrix frames_;
};

// The rank_k-th largest inner product between any query row and any noise row.
inline double noise_baseline(const DescriptorSet& query, const NoisePool& pool, int rank_k) {
  require(pool.size() > 0, ErrorCode::kEmptyInput, "noise corpus is empty");
  require(query.dim() == pool.dim(), ErrorCode::kDimensionMismatch,
          "query d=" + std::to_string(query.dim()) + ", noise d=" + std::to_string(pool.dim()));
  require(rank_k >= 1 && static_cast<std::size_t>(rank_k) <= pool.size(),
          ErrorCode::kInvariant,
          "rank_k=" + std::to_string(rank_k) + " exceeds the noise pool size " +
              std::to_string(pool.size()));
  constexpr Eigen::Index kBlock = 2048;
  const auto k = static_cast<std::size_t>(rank_k);
  std::vector<float> best;  // running top-k, unordered
  best.reserve(k + static_cast<std::size_t>(query.matrix.rows() * kBlock));
  for (Eigen::Index start = 0; start < pool.frames().rows(); start += kBlock) {
    const auto len = std::min(kBlock, pool.frames().rows() - start);
    const Matrix sims = query.matrix * pool.frames().middleRows(start, len).transpose();
    best.insert(best.end(), sims.data(), sims.data() + sims.size());
    if (best.size() > k) {
      std::nth_element(best.begin(), best.begin() + static_cast<long>(k - 1), best.end(),
                       std::greater<>());
      best.resize(k);
    }
  }
  std::nth_element(best.begin(), best.begin() + static_cast<long>(k - 1), best.end(),
                   std::greater<>());
  return best[k - 1];
}

// s - beta * b(q): a uniform per-query shift, so within-query order is kept.
inline std::vector<double> score_normalize(std::span<const double> scores,
                                           const DescriptorSet& query, const NoisePool& pool,
                                           const ScoreNormConfig& cfg) {
  validate(cfg);
  const double shift = cfg.beta == 0.0 ? 0.0 : cfg.beta * noise_baseline(query, pool, cfg.rank_k);
  std::vector<double> out(scores.begin(), scores.end());
  for (auto& s : out) s -= shift;
  return out;
}

inline std::vector<double> score_normalize(std::span<const double> scores,
                                           const DescriptorSet& query, const Corpus& noise,
                                           const ScoreNormConfig& cfg) {
  return score_normalize(scores, query, NoisePool(noise), cfg);
}

}  // namespace vcd
