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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vcd/vcd.hpp"

namespace {

using testutil::code_of;

void expect_same(const std::vector<vcd::QueryCandidates>& got,
                 const std::vector<vcd::QueryCandidates>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t q = 0; q < got.size(); ++q) {
    ASSERT_EQ(got[q].query_id, want[q].query_id);
    ASSERT_EQ(got[q].ranked.size(), want[q].ranked.size()) << got[q].query_id;
    for (std::size_t k = 0; k < got[q].ranked.size(); ++k) {
      EXPECT_EQ(got[q].ranked[k].ref_id, want[q].ranked[k].ref_id) << got[q].query_id << " #" << k;
      EXPECT_NEAR(got[q].ranked[k].score, want[q].ranked[k].score, tol);
    }
  }
}

TEST(Search, MatchesNaiveOracle) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(1, 32), nq(1, 10), nr(1, 30), topk(1, 40);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = dim(rng);
    const auto queries = testutil::random_corpus(rng, 'q', nq(rng), 8, d);
    const auto refs = testutil::random_corpus(rng, 'r', nr(rng), 8, d, vcd::CorpusRole::kReference);
    vcd::SearchConfig cfg;
    cfg.top_k = topk(rng);
    cfg.aggregation = trial % 2 ? vcd::Aggregation::kSumTopkPairs : vcd::Aggregation::kMaxPair;
    cfg.agg_k = 1 + trial % 7;
    expect_same(vcd::exhaustive_search(queries, refs, cfg), oracle::naive_search(queries, refs, cfg),
                1e-5);
  }
}

TEST(Search, PlantedCopyRanksFirst) {
  std::mt19937_64 rng(5);
  const auto refs = testutil::random_corpus(rng, 'r', 30, 10, 32, vcd::CorpusRole::kReference);
  vcd::Corpus queries;
  for (const auto& [id, set] : refs) {
    auto q = set;
    q.video_id = "q_" + id;
    queries.add(q);
  }
  for (const auto& qc : vcd::exhaustive_search(queries, refs, {})) {
    ASSERT_FALSE(qc.ranked.empty());
    EXPECT_EQ("q_" + qc.ranked.front().ref_id, qc.query_id);
    EXPECT_NEAR(qc.ranked.front().score, 1.0, 1e-5);
  }
}

TEST(Search, TopKIsClampedToReferenceCount) {
  std::mt19937_64 rng(5);
  const auto q = testutil::random_corpus(rng, 'q', 2, 4, 8);
  const auto r = testutil::random_corpus(rng, 'r', 7, 4, 8, vcd::CorpusRole::kReference);
  for (const auto& qc : vcd::exhaustive_search(q, r, {})) EXPECT_EQ(qc.ranked.size(), 7u);
  vcd::SearchConfig cfg;
  cfg.top_k = 3;
  for (const auto& qc : vcd::exhaustive_search(q, r, cfg)) EXPECT_EQ(qc.ranked.size(), 3u);
  EXPECT_EQ(code_of([&] { vcd::exhaustive_search(q, vcd::Corpus{}, cfg); }),
            vcd::ErrorCode::kEmptyInput);
}

TEST(Search, TiesBreakByReferenceId) {
  vcd::DescriptorSet s{"x", {0.0f}, vcd::Matrix::Identity(1, 4)};
  vcd::Corpus refs;
  for (const char* id : {"c", "a", "b"}) {
    s.video_id = id;
    refs.add(s);
  }
  s.video_id = "q";
  vcd::Corpus q;
  q.add(s);
  const auto got = vcd::exhaustive_search(q, refs, {}).front().ranked;
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].ref_id, "a");
  EXPECT_EQ(got[1].ref_id, "b");
  EXPECT_EQ(got[2].ref_id, "c");
}

TEST(Search, FramePermutationDoesNotChangeScores) {
  std::mt19937_64 rng(17);
  const auto queries = testutil::random_corpus(rng, 'q', 4, 9, 16);
  const auto refs = testutil::random_corpus(rng, 'r', 12, 9, 16, vcd::CorpusRole::kReference);
  vcd::Corpus shuffled(vcd::CorpusRole::kReference);
  for (const auto& [id, set] : refs) {
    auto p = set;
    std::vector<int> order(std::size_t(set.matrix.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i) p.matrix.row(Eigen::Index(i)) = set.matrix.row(order[i]);
    shuffled.add(p);
  }
  for (auto agg : {vcd::Aggregation::kMaxPair, vcd::Aggregation::kSumTopkPairs}) {
    vcd::SearchConfig cfg;
    cfg.aggregation = agg;
    expect_same(vcd::exhaustive_search(queries, shuffled, cfg),
                vcd::exhaustive_search(queries, refs, cfg), 1e-5);
  }
}

TEST(Search, ScoresAreSymmetric) {
  std::mt19937_64 rng(19);
  const auto a = testutil::random_corpus(rng, 'a', 5, 6, 8);
  const auto b = testutil::random_corpus(rng, 'b', 6, 6, 8);
  const auto ab = vcd::flatten(vcd::exhaustive_search(a, b, {}));
  const auto ba = vcd::flatten(vcd::exhaustive_search(b, a, {}));
  ASSERT_EQ(ab.size(), ba.size());
  for (const auto& x : ab) {
    auto it = std::find_if(ba.begin(), ba.end(), [&](const auto& y) {
      return y.query_id == x.ref_id && y.ref_id == x.query_id;
    });
    ASSERT_NE(it, ba.end());
    EXPECT_NEAR(it->score, x.score, 1e-5);
  }
}

TEST(Search, ThreadCountDoesNotChangeResults) {
  std::mt19937_64 rng(23);
  const auto q = testutil::random_corpus(rng, 'q', 25, 12, 16);
  const auto r = testutil::random_corpus(rng, 'r', 40, 12, 16, vcd::CorpusRole::kReference);
  const auto one = vcd::format_candidates(vcd::exhaustive_search(q, r, {}, 1));
  for (unsigned t : {2u, 4u, 0u}) EXPECT_EQ(vcd::format_candidates(vcd::exhaustive_search(q, r, {}, t)), one);
}

TEST(Search, Errors) {
  std::mt19937_64 rng(1);
  const auto q = testutil::random_corpus(rng, 'q', 2, 4, 8);
  const auto r = testutil::random_corpus(rng, 'r', 2, 4, 4);
  EXPECT_EQ(code_of([&] { vcd::exhaustive_search(q, r, {}); }), vcd::ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { vcd::exhaustive_search(vcd::Corpus{}, r, {}); }),
            vcd::ErrorCode::kEmptyInput);
  vcd::SearchConfig bad;
  bad.top_k = 0;
  EXPECT_EQ(code_of([&] { vcd::exhaustive_search(q, q, bad); }), vcd::ErrorCode::kInvariant);
}

TEST(CandidatesCsv, RoundTrip) {
  std::mt19937_64 rng(2);
  const auto q = testutil::random_corpus(rng, 'q', 3, 4, 8);
  const auto r = testutil::random_corpus(rng, 'r', 5, 4, 8);
  const auto res = vcd::exhaustive_search(q, r, {});
  const auto text = vcd::format_candidates(res);
  EXPECT_EQ(text.substr(0, 22), "query_id,ref_id,score\n");
  std::istringstream in(text);
  const auto back = vcd::parse_candidates(in, "c.csv");
  expect_same(back, res, 5e-7);
  EXPECT_EQ(vcd::format_candidates(back), text);
}

TEST(CandidatesCsv, ParseErrors) {
  for (const char* text : {"query,ref,score\n", "query_id,ref_id,score\nq,r\n",
                           "query_id,ref_id,score\nq,r,abc\n",
                           "query_id,ref_id,score\nq,r,1\nq,r,0.5\n",
                           "query_id,ref_id,score\nq,r,1\np,r,1\nq,s,1\n"}) {
    std::istringstream in(text);
    EXPECT_EQ(code_of([&] { vcd::parse_candidates(in, "c.csv"); }), vcd::ErrorCode::kParse) << text;
  }
}

}  // namespace
