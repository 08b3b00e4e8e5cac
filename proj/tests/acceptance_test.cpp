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

// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Usage: vcd_acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli_util.hpp"
#include "oracles.hpp"
#include "vcd/vcd.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

vcd::Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  vcd::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

vcd::DescriptorSet random_set(std::mt19937_64& rng, const std::string& id, int n, int d) {
  vcd::DescriptorSet s{id, {}, random_matrix(rng, n, d)};
  s.matrix.rowwise().normalize();
  for (int t = 0; t < n; ++t) s.timestamps.push_back(float(t));
  return s;
}

vcd::Corpus random_corpus(std::mt19937_64& rng, char prefix, int videos, int max_frames, int d) {
  std::uniform_int_distribution<int> frames(1, max_frames);
  vcd::Corpus c;
  for (int v = 0; v < videos; ++v) {
    char id[16];
    std::snprintf(id, sizeof id, "%c%03d", prefix, v);
    c.add(random_set(rng, id, frames(rng), d));
  }
  return c;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1. exhaustive search against the double loop.
Outcome search_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 32), nq(1, 10), nr(1, 30), topk(1, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = dim(rng);
    const auto q = random_corpus(rng, 'q', nq(rng), 10, d);
    const auto r = random_corpus(rng, 'r', nr(rng), 10, d);
    vcd::SearchConfig cfg;
    cfg.top_k = topk(rng);
    if (trial % 2) cfg.aggregation = vcd::Aggregation::kSumTopkPairs;
    const auto got = vcd::flatten(vcd::exhaustive_search(q, r, cfg));
    const auto want = vcd::flatten(oracle::naive_search(q, r, cfg));
    o.check(got.size() == want.size(), "trial " + std::to_string(trial) + ": length differs");
    for (std::size_t k = 0; k < std::min(got.size(), want.size()); ++k) {
      o.check(got[k].query_id == want[k].query_id && got[k].ref_id == want[k].ref_id,
              "trial " + std::to_string(trial) + ": order differs");
      o.check(std::abs(got[k].score - want[k].score) <= 1e-5,
              "trial " + std::to_string(trial) + ": score differs");
    }
  }
  const double s = seconds_since(t0);
  o.check(s < 10.0, fmt("runtime %.2fs", s));
  if (o.pass) o.detail = fmt("50 instances, %.2fs", s);
  return o;
}

// 2. best temporal-network path against full enumeration.
Outcome alignment_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> side(1, 8), step(1, 3);
  std::uniform_real_distribution<float> val(-0.3f, 1.0f);
  std::uniform_real_distribution<double> thr(0.0, 0.6);
  for (int trial = 0; trial < 100; ++trial) {
    vcd::Matrix v(side(rng), side(rng));
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = val(rng);
    const double t = thr(rng);
    const int s = step(rng);
    const auto got = vcd::tn_best_path(v, t, s, std::vector<char>(std::size_t(v.rows()), 1),
                                       std::vector<char>(std::size_t(v.cols()), 1));
    const auto want = oracle::best_path_enumerated(v, t, s);
    const auto tag = "trial " + std::to_string(trial);
    if (want.nodes.empty()) {
      o.check(got.nodes.empty(), tag + ": found a path where none exists");
      continue;
    }
    o.check(std::abs(got.weight - want.weight) <= 1e-6, tag + ": weight differs");
    o.check(got.nodes == want.nodes, tag + ": node set differs");
  }
  const double s = seconds_since(t0);
  o.check(s < 30.0, fmt("runtime %.2fs", s));
  if (o.pass) o.detail = fmt("100 matrices, %.2fs", s);
  return o;
}

// 3. both metrics against their oracles.
Outcome metric_oracles() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(103);
  double worst_ap = 0.0, worst_grid = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> nq(1, 8), nr(1, 12), level(0, 20);
    std::bernoulli_distribution pos(0.2), keep(0.8);
    std::vector<vcd::CandidatePair> ranked;
    std::set<vcd::VideoPair> positives;
    const int q = nq(rng), r = nr(rng);
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < r; ++j) {
        const std::string qi = "q" + std::to_string(i), rj = "r" + std::to_string(j);
        if (pos(rng)) positives.insert({qi, rj});
        if (keep(rng)) ranked.push_back({qi, rj, level(rng) / 10.0});
      }
    }
    if (positives.empty()) positives.insert({"q0", "r0"});
    std::vector<vcd::SegmentMatch> records;
    for (const auto& [a, b] : positives) records.push_back({a, b, 0, 1, 0, 1, 0});
    const double got = vcd::descriptor_muap(ranked, vcd::GroundTruth(records));
    worst_ap = std::max(worst_ap, std::abs(got - oracle::rank_walk_ap(ranked, positives)));
  }
  o.check(worst_ap <= 1e-9, fmt("descriptor uAP off by %.3g", worst_ap));

  // Segment ends are frame timestamps; a 10 fps lattice keeps them on grid-cell edges.
  auto segment = [&rng](const std::string& q, const std::string& r) {
    std::uniform_int_distribution<int> start(0, 40), len(2, 25);
    std::uniform_real_distribution<double> score(0.0, 5.0);
    const int qs = start(rng), rs = start(rng);
    return vcd::SegmentMatch{q, r, qs / 10.0, (qs + len(rng)) / 10.0, rs / 10.0,
                             (rs + len(rng)) / 10.0, score(rng)};
  };
  std::uniform_int_distribution<int> id(0, 2), count(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<vcd::SegmentMatch> gt, pred;
    for (int i = count(rng); i > 0; --i) {
      gt.push_back(segment("q" + std::to_string(id(rng)), "r" + std::to_string(id(rng))));
    }
    for (int i = count(rng) + 2; i > 0; --i) {
      pred.push_back(segment("q" + std::to_string(id(rng)), "r" + std::to_string(id(rng))));
    }
    // Overlapping a ground-truth box on purpose gives non-trivial precision.
    auto near = gt.front();
    near.q_start = std::min(near.q_end, near.q_start + 0.3);
    near.r_end += 0.4;
    near.score = 2.5;
    pred.push_back(near);
    const vcd::GroundTruth truth(gt);
    worst_grid = std::max(worst_grid, std::abs(vcd::matching_muap(pred, truth) -
                                               oracle::grid_matching_ap(pred, truth.records(), 0.1)));
  }
  o.check(worst_grid <= 2e-2, fmt("matching uAP off by %.3g", worst_grid));
  const double s = seconds_since(t0);
  o.check(s < 30.0, fmt("runtime %.2fs", s));
  if (o.pass) {
    o.detail = fmt("max |diff| %.2g (AP), %.2g (grid), %.2fs", worst_ap, worst_grid, s);
  }
  return o;
}

// 4. consistency weighting scalars and argmax preservation.
Outcome consistency_exact() {
  Outcome o;
  auto set_of = [](const vcd::Matrix& m) {
    vcd::DescriptorSet s{"v", {}, m};
    for (Eigen::Index t = 0; t < m.rows(); ++t) s.timestamps.push_back(float(t));
    return s;
  };
  vcd::Matrix one(1, 4);
  one << 0.5f, 0.5f, 0.5f, 0.5f;
  auto w = vcd::consistency_weight(set_of(one));
  o.check(w.stats.divisor == 1.0 && w.set.matrix == one, "n=1 case");
  const vcd::Matrix same = one.replicate(5, 1);
  w = vcd::consistency_weight(set_of(same));
  o.check(w.stats.divisor == 1.0 && w.set.matrix == same, "identical rows case");
  const vcd::Matrix pair = vcd::Matrix::Identity(2, 4);
  w = vcd::consistency_weight(set_of(pair));
  o.check(w.stats.divisor == 0.5 && w.set.matrix == vcd::Matrix(2.0f * pair),
          "orthonormal pair case");

  std::mt19937_64 rng(104);
  const auto refs = random_matrix(rng, 64, 16);
  std::uniform_int_distribution<int> frames(1, 20);
  int broken = 0;
  for (int v = 0; v < 1000; ++v) {
    const auto s = random_set(rng, "q", frames(rng), 16);
    const vcd::Matrix before = s.matrix * refs.transpose();
    const vcd::Matrix after = vcd::consistency_weight(s).set.matrix * refs.transpose();
    Eigen::Index bi, bj, ai, aj;
    before.maxCoeff(&bi, &bj);
    after.maxCoeff(&ai, &aj);
    broken += (bi != ai || bj != aj);
  }
  o.check(broken == 0, std::to_string(broken) + " of 1000 videos changed argmax");
  if (o.pass) o.detail = "3 exact cases, argmax kept on 1000 videos";
  return o;
}

// 5. PCA numerics.
Outcome pca_numerics() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(105);
  double worst_orth = 0.0, worst_var = 0.0, worst_rec = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = std::uniform_int_distribution<int>(2, 64)(rng);
    const int m = std::uniform_int_distribution<int>(d + 1, 1000)(rng);
    vcd::Matrix x = random_matrix(rng, m, d);
    for (int j = 0; j < d; ++j) x.col(j) *= float(1 + j % 5);
    const auto model = vcd::pca_fit(x, d);
    const Eigen::MatrixXd c = model.components().cast<double>();
    worst_orth = std::max(
        worst_orth, (c * c.transpose() - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd xd = x.cast<double>();
    const Eigen::MatrixXd centered = xd.rowwise() - xd.colwise().mean();
    const double total = centered.squaredNorm() / double(m - 1);
    worst_var = std::max(
        worst_var, std::abs(model.explained_variance().cast<double>().sum() - total) / total);

    const int k = std::uniform_int_distribution<int>(1, std::min(d, 8))(rng);
    vcd::Matrix low = random_matrix(rng, m, k) * random_matrix(rng, k, d);
    const vcd::Matrix shift = random_matrix(rng, 1, d);
    low.rowwise() += shift.row(0);
    low /= low.cwiseAbs().maxCoeff();
    const auto lm = vcd::pca_fit(low, k);
    const vcd::Matrix proj = lm.transform_rows(low);
    for (Eigen::Index i = 0; i < low.rows(); ++i) {
      const Eigen::VectorXf back = lm.reconstruct(proj.row(i).transpose());
      worst_rec = std::max(worst_rec, double((back - low.row(i).transpose()).cwiseAbs().maxCoeff()));
    }
  }
  o.check(worst_orth <= 1e-5, fmt("orthonormality error %.3g", worst_orth));
  o.check(worst_var <= 1e-4, fmt("variance error %.3g", worst_var));
  o.check(worst_rec <= 1e-4, fmt("reconstruction error %.3g", worst_rec));
  const double s = seconds_since(t0);
  o.check(s < 10.0, fmt("runtime %.2fs", s));
  if (o.pass) {
    o.detail = fmt("orth %.1e, var %.1e, recon %.1e", worst_orth, worst_var, worst_rec) +
               fmt(", %.2fs", s);
  }
  return o;
}

vcd::SimConfig standard_sim() {
  vcd::SimConfig c;
  c.seed = 7;
  c.n_refs = 200;
  c.n_queries = 60;
  c.d = 128;
  c.noise_sigma = 0.35;
  c.stack_fraction = 0.3;
  return c;
}

// 6. ablation trend on the standard synthetic corpus.
Outcome ablation_trend() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto data = vcd::generate(standard_sim());
  const vcd::EvalData ev{&data.queries, &data.query_views, &data.labels,
                         &data.refs,    &data.noise,       &data.gt};
  const auto rows = vcd::ablation_report(ev, vcd::standard_ablation({}, {}), 0);
  std::string table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table += fmt(" %.4f/%.4f", rows[i].descriptor_muap, rows[i].matching_muap);
    if (i > 0) {
      o.check(rows[i].descriptor_muap >= rows[i - 1].descriptor_muap,
              rows[i].name + " lowers descriptor uAP");
    }
  }
  o.check(rows.back().descriptor_muap - rows.front().descriptor_muap >= 0.05,
          fmt("full - baseline = %.4f < 0.05",
              rows.back().descriptor_muap - rows.front().descriptor_muap));
  o.check(rows.back().matching_muap > rows.front().matching_muap,
          fmt("matching uAP full %.4f <= baseline %.4f", rows.back().matching_muap,
              rows.front().matching_muap));
  const double s = seconds_since(t0);
  o.check(s < 120.0, fmt("runtime %.1fs", s));
  o.detail = (o.pass ? "" : o.detail + ";") + " descriptor/matching uAP:" + table +
             fmt(", %.1fs", s);
  return o;
}

double jaccard(double a0, double a1, double b0, double b1) {
  const double inter = std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
  const double uni = std::max(a1, b1) - std::min(a0, b0);
  return uni > 0.0 ? inter / uni : 1.0;
}

// 7. localization of retrieved planted segments.
Outcome localization() {
  Outcome o;
  std::string summary;
  for (double sigma : {0.2, 0.1, 0.0}) {
    auto sim = standard_sim();
    sim.noise_sigma = sigma;
    const auto data = vcd::generate(sim);
    vcd::DescriptorTrackConfig dc;
    dc.multi_view = dc.consistency_weight = dc.temporal_concat = dc.score_norm = true;
    const auto track = vcd::pipeline_descriptor_track(
        {&data.queries, &data.query_views, &data.labels, &data.refs, &data.noise}, dc, 0);
    const auto pairs = vcd::flatten(track.candidates);
    const auto matches = vcd::pipeline_matching_track(pairs, track.queries, track.refs, {}, 0);
    std::set<vcd::VideoPair> retrieved;
    for (const auto& p : pairs) retrieved.emplace(p.query_id, p.ref_id);
    int checked = 0, bad = 0;
    for (const auto& g : data.gt.records()) {
      if (!retrieved.count({g.query_id, g.ref_id})) continue;
      ++checked;
      bool ok = false;
      for (const auto& m : matches) {
        if (m.query_id == g.query_id && m.ref_id == g.ref_id &&
            jaccard(m.q_start, m.q_end, g.q_start, g.q_end) >= 0.7 &&
            jaccard(m.r_start, m.r_end, g.r_start, g.r_end) >= 0.7) {
          ok = true;
          break;
        }
      }
      bad += !ok;
    }
    summary += fmt(" sigma=%.1f: %.0f/%.0f", sigma, checked - bad, checked);
    o.check(bad == 0, fmt("sigma=%.1f: %.0f of %.0f segments not localized", sigma, bad, checked));
  }
  o.detail = (o.pass ? "" : o.detail + ";") + summary;
  return o;
}

// 8. CLI determinism across thread counts and manifest replays.
Outcome cli_determinism(const std::string& work) {
  Outcome o;
  const auto root = (fs::path(work) / "determinism").string();
  fs::remove_all(root);
  fs::create_directories(root);
  auto dir = [&](const std::string& run, const std::string& step) {
    return (fs::path(root) / run / step).string();
  };
  auto file = [](const std::string& d, const std::string& name) {
    return (fs::path(d) / name).string();
  };
  const std::vector<std::string> runs{"t1", "t4", "replay"};
  const std::string gen_args[] = {"--refs", "25", "--queries", "12", "--noise-videos", "6",
                                  "--dim", "48", "--frames-min", "20", "--frames-max", "40"};
  for (const auto& run : runs) {
    const std::string threads = run == "t1" ? "1" : "4";
    const auto g = dir(run, "gen"), d = dir(run, "desc"), m = dir(run, "match"),
               e = dir(run, "eval"), a = dir(run, "ablation");
    const auto log = file(root, run + ".log");
    int rc;
    if (run == "replay") {
      rc = cliutil::run({"--threads", threads, "gen", "--config", file(dir("t1", "gen"), "manifest.txt"),
                         "--out", g},
                        log);
    } else {
      rc = cliutil::run({"--threads", threads, "gen", "--out", g, gen_args[0], gen_args[1],
                         gen_args[2], gen_args[3], gen_args[4], gen_args[5], gen_args[6],
                         gen_args[7], gen_args[8], gen_args[9], gen_args[10], gen_args[11]},
                        log);
    }
    o.check(rc == 0, run + ": gen exited " + std::to_string(rc));
    const std::string desc_cfg =
        run == "replay" ? file(dir("t1", "desc"), "manifest.txt") : std::string();
    std::vector<std::string> desc_args{"--threads", threads, "descriptor",
                                       "--queries", file(g, "queries.vdsc"),
                                       "--query-views", file(g, "query_views.vdsc"),
                                       "--labels", file(g, "edit_labels.csv"),
                                       "--refs", file(g, "refs.vdsc"),
                                       "--noise", file(g, "noise.vdsc"),
                                       "--out", d};
    if (run == "replay") {
      desc_args.insert(desc_args.end(), {"--config", desc_cfg});
    } else {
      desc_args.insert(desc_args.end(), {"--multi-view", "--consistency-weight",
                                         "--temporal-concat", "--score-norm", "--sn-rank", "5"});
    }
    std::string cmd = cliutil::quote(cliutil::cli_path());
    for (const auto& x : desc_args) cmd += " " + cliutil::quote(x);
    rc = std::system((cmd + " > " + cliutil::quote(log) + " 2>&1").c_str());
    o.check(rc == 0, run + ": descriptor failed");

    if (run == "replay") {
      rc = cliutil::run({"--threads", threads, "match", "--config",
                         file(dir("t1", "match"), "manifest.txt"), "--candidates",
                         file(d, "candidates.csv"), "--queries", file(d, "queries_processed.vdsc"),
                         "--refs", file(d, "refs_processed.vdsc"), "--out", m},
                        log);
    } else {
      rc = cliutil::run({"--threads", threads, "match", "--candidates", file(d, "candidates.csv"),
                         "--queries", file(d, "queries_processed.vdsc"), "--refs",
                         file(d, "refs_processed.vdsc"), "--out", m, "--max-step", "4"},
                        log);
    }
    o.check(rc == 0, run + ": match exited " + std::to_string(rc));
    rc = cliutil::run({"--threads", threads, "eval", "--gt", file(g, "ground_truth.csv"),
                       "--candidates", file(d, "candidates.csv"), "--matches",
                       file(m, "matches.csv"), "--out", e},
                      log);
    o.check(rc == 0, run + ": eval exited " + std::to_string(rc));
    if (run == "replay") {
      rc = cliutil::run({"--threads", threads, "eval", "--config",
                         file(dir("t1", "ablation"), "manifest.txt"), "--gt",
                         file(g, "ground_truth.csv"), "--ablation", "--data", g, "--out", a},
                        log);
    } else {
      rc = cliutil::run({"--threads", threads, "eval", "--gt", file(g, "ground_truth.csv"),
                         "--ablation", "--data", g, "--out", a, "--sn-rank", "5"},
                        log);
    }
    o.check(rc == 0, run + ": eval --ablation exited " + std::to_string(rc));
  }

  // Manifests record paths, which legitimately differ per run; everything else must match.
  auto without_paths = [](const std::string& path) {
    auto kv = vcd::read_key_values(path);
    for (auto it = kv.begin(); it != kv.end();) {
      const bool is_path = it->first.rfind("input.", 0) == 0 || it->first.rfind("output.", 0) == 0;
      it = is_path ? kv.erase(it) : std::next(it);
    }
    return vcd::format_key_values(kv);
  };
  int compared = 0;
  for (const char* step : {"gen", "desc", "match", "eval", "ablation"}) {
    if (!fs::exists(dir("t1", step))) continue;
    for (const auto& entry : fs::directory_iterator(dir("t1", step))) {
      const auto name = entry.path().filename().string();
      for (const auto& other : {"t4", "replay"}) {
        const auto there = file(dir(other, step), name);
        bool same;
        if (name == "manifest.txt") {
          same = fs::exists(there) && without_paths(entry.path().string()) == without_paths(there);
        } else {
          same = cliutil::slurp(entry.path().string()) == cliutil::slurp(there) && fs::exists(there);
        }
        o.check(same, std::string(step) + "/" + name + " differs in run " + other);
        ++compared;
      }
    }
  }
  o.check(compared >= 30, "only " + std::to_string(compared) + " files compared");
  if (o.pass) o.detail = std::to_string(compared) + " file comparisons identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string work =
      argc > 1 ? argv[1] : (fs::temp_directory_path() / "vcd_acceptance").string();
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "search matches naive oracle", search_oracle},
      {2, "alignment matches path enumeration", alignment_oracle},
      {3, "metrics match their oracles", metric_oracles},
      {4, "consistency weighting exact cases", consistency_exact},
      {5, "PCA numerics", pca_numerics},
      {6, "synthetic ablation trend", ablation_trend},
      {7, "localization Jaccard >= 0.7", localization},
      {8, "CLI determinism", [&] { return cli_determinism(work); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
