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

// Command-line front end: gen | descriptor | match | eval.

#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vcd/vcd.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Options that override a --config file only when given explicitly. Values
// land in a holder first; apply() copies the ones that were set.
class Overrides {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& target, const std::string& desc) {
    auto holder = std::make_shared<T>(target);
    auto* opt = app->add_option(name, *holder, desc)->capture_default_str();
    apply_.push_back([opt, holder, &target] {
      if (opt->count() > 0) target = *holder;
    });
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, bool& target, const std::string& desc) {
    auto holder = std::make_shared<bool>(target);
    auto* opt = app->add_flag(name, *holder, desc);
    apply_.push_back([opt, holder, &target] {
      if (opt->count() > 0) target = *holder;
    });
    return opt;
  }

  template <typename T, typename Parse>
  CLI::Option* parsed(CLI::App* app, const std::string& name, T& target, std::string shown,
                      Parse parse, const std::string& desc) {
    auto holder = std::make_shared<std::string>(std::move(shown));
    auto* opt = app->add_option(name, *holder, desc)->capture_default_str();
    apply_.push_back([opt, holder, &target, parse] {
      if (opt->count() > 0) target = parse(*holder);
    });
    return opt;
  }

  void apply() const {
    for (const auto& fn : apply_) fn();
  }

 private:
  std::vector<std::function<void()>> apply_;
};

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  vcd::require(!ec, vcd::ErrorCode::kIo, "cannot create directory '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  vcd::binary::write_file(path, text);
}

vcd::KeyValues base_manifest(const std::string& command) {
  return {{"command", command}, {"tool_version", vcd::kVersion}};
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

vcd::KeyValues load_config(const std::string& path) {
  return path.empty() ? vcd::KeyValues{} : vcd::read_key_values(path);
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  vcd::SimConfig sim;
  std::string config;
  std::string out;
};

void setup_gen(CLI::App& app, GenArgs& a, Overrides& ov) {
  app.add_option("--config", a.config, "key=value file with sim.* settings (flags override it)");
  app.add_option("--out", a.out, "output directory")->required();
  ov.add(&app, "--seed", a.sim.seed, "random seed");
  ov.add(&app, "--refs", a.sim.n_refs, "number of reference videos");
  ov.add(&app, "--queries", a.sim.n_queries, "number of query videos");
  ov.add(&app, "--noise-videos", a.sim.n_noise, "number of noise (background) videos");
  ov.add(&app, "--dim", a.sim.d, "descriptor dimension (<= 512)");
  ov.add(&app, "--frames-min", a.sim.frames_min, "minimum frames per video");
  ov.add(&app, "--frames-max", a.sim.frames_max, "maximum frames per video");
  ov.add(&app, "--fps", a.sim.fps, "frames per second of the timestamps");
  ov.add(&app, "--copy-fraction", a.sim.copy_fraction, "fraction of queries containing a copy");
  ov.add(&app, "--noise-sigma", a.sim.noise_sigma, "perturbation of copied descriptors");
  ov.parsed(&app, "--distractor-mode", a.sim.distractor_mode,
            std::string(vcd::to_string(a.sim.distractor_mode)),
            [](const std::string& s) { return vcd::parse_distractor_mode(s); },
            "unedited queries: random | near_duplicate");
  ov.add(&app, "--stack-fraction", a.sim.stack_fraction, "fraction of copies that are stacked");
  ov.add(&app, "--walk-step", a.sim.walk_step, "per-frame random-walk step");
  ov.add(&app, "--segment-min", a.sim.segment_min, "shortest copied segment (fraction of query)");
  ov.add(&app, "--segment-max", a.sim.segment_max, "longest copied segment (fraction of query)");
  ov.add(&app, "--near-dup-min", a.sim.near_dup_min, "smallest near-duplicate offset");
  ov.add(&app, "--near-dup-max", a.sim.near_dup_max, "largest near-duplicate offset");
  ov.add(&app, "--crop-sigma", a.sim.crop_sigma, "extra noise of partial crop views");
  ov.add(&app, "--stack-weight", a.sim.stack_weight, "weight of the copied cell in a stack");
}

void run_gen(GenArgs& a, const Overrides& ov) {
  vcd::get_config(load_config(a.config), a.sim);
  ov.apply();
  const auto data = vcd::generate(a.sim);
  ensure_dir(a.out);
  const std::vector<std::pair<std::string, std::string>> files = {
      {"output.queries", "queries.vdsc"},       {"output.query_views", "query_views.vdsc"},
      {"output.refs", "refs.vdsc"},             {"output.noise", "noise.vdsc"},
      {"output.ground_truth", "ground_truth.csv"}, {"output.labels", "edit_labels.csv"}};
  vcd::write_corpus(data.queries, join(a.out, "queries.vdsc"));
  vcd::write_corpus(data.query_views, join(a.out, "query_views.vdsc"));
  vcd::write_corpus(data.refs, join(a.out, "refs.vdsc"));
  vcd::write_corpus(data.noise, join(a.out, "noise.vdsc"));
  write_text(join(a.out, "ground_truth.csv"), vcd::format_ground_truth(data.gt));
  write_text(join(a.out, "edit_labels.csv"), vcd::format_edit_labels(data.labels));
  auto manifest = base_manifest("gen");
  vcd::put_config(manifest, a.sim);
  for (const auto& [key, name] : files) manifest[key] = join(a.out, name);
  write_text(join(a.out, "manifest.txt"), vcd::format_key_values(manifest));
  std::cout << "wrote " << data.queries.size() << " queries, " << data.refs.size()
            << " references, " << data.noise.size() << " noise videos, " << data.gt.records().size()
            << " ground-truth segments to " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// descriptor

struct DescriptorArgs {
  vcd::DescriptorTrackConfig cfg;
  std::string config;
  std::string queries, query_views, labels, refs, noise, out;
};

void setup_descriptor_options(CLI::App& app, vcd::DescriptorTrackConfig& c, Overrides& ov) {
  ov.flag(&app, "--multi-view,!--no-multi-view", c.multi_view,
          "use the crop-view query corpus routed by edit labels");
  ov.flag(&app, "--consistency-weight,!--no-consistency-weight", c.consistency_weight,
          "divide query descriptors by their mean frame Gram value");
  ov.flag(&app, "--temporal-concat,!--no-temporal-concat", c.temporal_concat,
          "weighted sliding-window concat + PCA");
  ov.flag(&app, "--score-norm,!--no-score-norm", c.score_norm,
          "subtract a per-query baseline from the noise corpus");
  ov.flag(&app, "--weight-refs,!--no-weight-refs", c.weight_refs,
          "also apply consistency weighting to references");
  ov.parsed(&app, "--weight-order", c.order, std::string(vcd::to_string(c.order)),
            [](const std::string& s) { return vcd::parse_weighting_order(s); },
            "tc_then_cw | cw_then_tc");
  ov.add(&app, "--cw-floor", c.consistency_floor, "lower clamp of the Gram mean");
  ov.add(&app, "--tc-window", c.tc.window, "temporal concat window (odd)");
  ov.parsed(&app, "--tc-weights", c.tc.weights, vcd::kv::str(c.tc.weights),
            [](const std::string& s) { return vcd::kv::parse_doubles(s, "--tc-weights"); },
            "comma-separated window weights");
  ov.add(&app, "--tc-dim", c.tc.output_dim, "temporal concat output dim (0 = input dim)");
  ov.add(&app, "--sn-rank", c.sn.rank_k, "noise neighbour rank used as the baseline");
  ov.add(&app, "--sn-beta", c.sn.beta, "baseline subtraction strength");
  ov.add(&app, "--top-k", c.search.top_k, "candidates kept per query");
  ov.parsed(&app, "--aggregation", c.search.aggregation,
            std::string(vcd::to_string(c.search.aggregation)),
            [](const std::string& s) { return vcd::parse_aggregation(s); },
            "max_pair | sum_topk_pairs");
  ov.add(&app, "--agg-k", c.search.agg_k, "pairs summed by sum_topk_pairs");
}

void setup_descriptor(CLI::App& app, DescriptorArgs& a, Overrides& ov) {
  app.add_option("--config", a.config, "key=value config file (flags override it)");
  app.add_option("--queries", a.queries, "query VDSC (full-frame view)")->required();
  app.add_option("--query-views", a.query_views, "query crop views VDSC (for --multi-view)");
  app.add_option("--labels", a.labels, "edit labels CSV (default: every query 'other')");
  app.add_option("--refs", a.refs, "reference VDSC")->required();
  app.add_option("--noise", a.noise, "noise VDSC (for --score-norm)");
  app.add_option("--out", a.out, "output directory")->required();
  setup_descriptor_options(app, a.cfg, ov);
}

void run_descriptor(DescriptorArgs& a, const Overrides& ov, unsigned threads) {
  vcd::get_config(load_config(a.config), a.cfg);
  ov.apply();
  const auto queries = vcd::read_corpus(a.queries, vcd::CorpusRole::kQuery);
  const auto refs = vcd::read_corpus(a.refs, vcd::CorpusRole::kReference);
  std::optional<vcd::Corpus> views, noise;
  std::optional<vcd::EditLabelMap> labels;
  if (a.cfg.multi_view) {
    vcd::require(!a.query_views.empty(), vcd::ErrorCode::kEmptyInput,
                 "--multi-view needs --query-views");
    views = vcd::read_corpus(a.query_views, vcd::CorpusRole::kQuery);
    if (!a.labels.empty()) labels = vcd::read_edit_labels(a.labels);
  }
  if (a.cfg.score_norm) {
    vcd::require(!a.noise.empty(), vcd::ErrorCode::kEmptyInput, "--score-norm needs --noise");
    noise = vcd::read_corpus(a.noise, vcd::CorpusRole::kNoise);
  }
  const auto res = vcd::pipeline_descriptor_track(
      {&queries, views ? &*views : nullptr, labels ? &*labels : nullptr, &refs,
       noise ? &*noise : nullptr},
      a.cfg, threads);
  print_warnings(res.warnings);
  ensure_dir(a.out);
  vcd::write_corpus(res.queries, join(a.out, "queries_processed.vdsc"));
  vcd::write_corpus(res.refs, join(a.out, "refs_processed.vdsc"));
  write_text(join(a.out, "candidates.csv"), vcd::format_candidates(res.candidates));
  auto manifest = base_manifest("descriptor");
  vcd::put_config(manifest, a.cfg);
  manifest["input.queries"] = a.queries;
  manifest["input.query_views"] = a.query_views;
  manifest["input.labels"] = a.labels;
  manifest["input.refs"] = a.refs;
  manifest["input.noise"] = a.noise;
  manifest["output.queries"] = join(a.out, "queries_processed.vdsc");
  manifest["output.refs"] = join(a.out, "refs_processed.vdsc");
  manifest["output.candidates"] = join(a.out, "candidates.csv");
  if (res.pca) {
    vcd::write_pca(*res.pca, join(a.out, "temporal_pca.vpca"));
    manifest["output.pca"] = join(a.out, "temporal_pca.vpca");
  }
  write_text(join(a.out, "manifest.txt"), vcd::format_key_values(manifest));
  std::size_t pairs = 0;
  for (const auto& q : res.candidates) pairs += q.ranked.size();
  std::cout << "wrote " << pairs << " candidates for " << res.candidates.size() << " queries to "
            << a.out << "\n";
}

// ---------------------------------------------------------------------------
// match

struct MatchArgs {
  vcd::MatchConfig cfg;
  std::string config, candidates, queries, refs, out;
};

void setup_match_options(CLI::App& app, vcd::MatchConfig& c, Overrides& ov) {
  ov.add(&app, "--sim-threshold", c.tn.sim_threshold, "node admission threshold");
  ov.add(&app, "--max-step", c.tn.max_step, "largest frame-index gap of an edge, per axis");
  ov.add(&app, "--min-nodes", c.tn.min_nodes, "shortest path reported");
  ov.add(&app, "--max-segments", c.tn.max_segments, "segments extracted per pair");
  ov.add(&app, "--min-path-score", c.tn.min_path_score, "lightest path reported");
  ov.parsed(&app, "--segment-score", c.tn.score_mode,
            c.tn.score_mode == vcd::SegmentScore::kPathSum ? "sum" : "mean",
            [](const std::string& s) { return vcd::parse_segment_score(s); },
            "sum | mean of path node weights");
  ov.flag(&app, "--cosine,!--no-cosine", c.cosine,
          "re-normalize rows before building similarity matrices (default on)");
  ov.flag(&app, "--collapse-views,!--no-collapse-views", c.collapse_views,
          "max-pool crop views sharing a timestamp (default on)");
}

void setup_match(CLI::App& app, MatchArgs& a, Overrides& ov) {
  app.add_option("--config", a.config, "key=value config file (flags override it)");
  app.add_option("--candidates", a.candidates, "candidate CSV")->required();
  app.add_option("--queries", a.queries, "processed query VDSC")->required();
  app.add_option("--refs", a.refs, "processed reference VDSC")->required();
  app.add_option("--out", a.out, "output directory")->required();
  setup_match_options(app, a.cfg, ov);
}

void run_match(MatchArgs& a, const Overrides& ov, unsigned threads) {
  vcd::get_config(load_config(a.config), a.cfg);
  ov.apply();
  const auto candidates = vcd::flatten(vcd::read_candidates(a.candidates));
  vcd::Corpus queries, refs;
  if (!candidates.empty()) {
    queries = vcd::read_corpus(a.queries, vcd::CorpusRole::kQuery);
    refs = vcd::read_corpus(a.refs, vcd::CorpusRole::kReference);
  }
  const auto matches = vcd::pipeline_matching_track(candidates, queries, refs, a.cfg, threads);
  ensure_dir(a.out);
  write_text(join(a.out, "matches.csv"), vcd::format_matches(matches));
  auto manifest = base_manifest("match");
  vcd::put_config(manifest, a.cfg);
  manifest["input.candidates"] = a.candidates;
  manifest["input.queries"] = a.queries;
  manifest["input.refs"] = a.refs;
  manifest["output.matches"] = join(a.out, "matches.csv");
  write_text(join(a.out, "manifest.txt"), vcd::format_key_values(manifest));
  std::cout << "wrote " << matches.size() << " segment matches to " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  vcd::DescriptorTrackConfig descriptor;
  vcd::MatchConfig match;
  std::string config, gt, candidates, matches, data, out;
  bool ablation = false;
};

void setup_eval(CLI::App& app, EvalArgs& a, Overrides& ov) {
  app.add_option("--config", a.config, "key=value config file (flags override it)");
  app.add_option("--gt", a.gt, "ground-truth CSV")->required();
  app.add_option("--candidates", a.candidates, "candidate CSV to score (descriptor track)");
  app.add_option("--matches", a.matches, "matches CSV to score (matching track)");
  app.add_flag("--ablation", a.ablation,
               "run baseline, +multi-view, +consistency-weight, +temporal-concat on --data");
  app.add_option("--data", a.data,
                 "directory with queries.vdsc, query_views.vdsc, edit_labels.csv, refs.vdsc, "
                 "noise.vdsc (for --ablation)");
  app.add_option("--out", a.out, "output directory")->required();
  auto* opts = app.add_option_group("pipeline", "pipeline settings used by --ablation");
  // Stage toggles are fixed by the ablation rows; only parameters apply.
  ov.add(opts, "--tc-window", a.descriptor.tc.window, "temporal concat window (odd)");
  ov.parsed(opts, "--tc-weights", a.descriptor.tc.weights, vcd::kv::str(a.descriptor.tc.weights),
            [](const std::string& s) { return vcd::kv::parse_doubles(s, "--tc-weights"); },
            "comma-separated window weights");
  ov.add(opts, "--tc-dim", a.descriptor.tc.output_dim, "temporal concat output dim (0 = input)");
  ov.add(opts, "--sn-rank", a.descriptor.sn.rank_k, "noise neighbour rank used as the baseline");
  ov.add(opts, "--sn-beta", a.descriptor.sn.beta, "baseline subtraction strength");
  ov.add(opts, "--top-k", a.descriptor.search.top_k, "candidates kept per query");
  ov.add(opts, "--cw-floor", a.descriptor.consistency_floor, "lower clamp of the Gram mean");
  ov.add(opts, "--sim-threshold", a.match.tn.sim_threshold, "node admission threshold");
  ov.add(opts, "--max-step", a.match.tn.max_step, "largest frame-index gap of an edge");
  ov.add(opts, "--min-nodes", a.match.tn.min_nodes, "shortest path reported");
  ov.add(opts, "--max-segments", a.match.tn.max_segments, "segments extracted per pair");
  ov.add(opts, "--min-path-score", a.match.tn.min_path_score, "lightest path reported");
}

void run_eval(EvalArgs& a, const Overrides& ov, unsigned threads) {
  const auto kv = load_config(a.config);
  vcd::get_config(kv, a.descriptor);
  vcd::get_config(kv, a.match);
  ov.apply();
  const auto gt = vcd::read_ground_truth(a.gt);
  ensure_dir(a.out);
  auto manifest = base_manifest("eval");
  manifest["input.gt"] = a.gt;
  std::string text, table;
  if (a.ablation) {
    vcd::require(!a.data.empty(), vcd::ErrorCode::kEmptyInput, "--ablation needs --data");
    const auto queries = vcd::read_corpus(join(a.data, "queries.vdsc"), vcd::CorpusRole::kQuery);
    const auto views = vcd::read_corpus(join(a.data, "query_views.vdsc"), vcd::CorpusRole::kQuery);
    const auto labels = vcd::read_edit_labels(join(a.data, "edit_labels.csv"));
    const auto refs = vcd::read_corpus(join(a.data, "refs.vdsc"), vcd::CorpusRole::kReference);
    const auto noise = vcd::read_corpus(join(a.data, "noise.vdsc"), vcd::CorpusRole::kNoise);
    const auto configs = vcd::standard_ablation(a.descriptor, a.match);
    const auto rows = vcd::ablation_report({&queries, &views, &labels, &refs, &noise, &gt},
                                           configs, threads);
    text = vcd::format_ablation_text(rows);
    table = vcd::format_ablation_csv(rows);
    manifest["input.data"] = a.data;
    vcd::put_config(manifest, configs.back().descriptor);
    for (const auto* key : {"descriptor.multi_view", "descriptor.consistency_weight",
                            "descriptor.temporal_concat", "descriptor.score_norm"}) {
      manifest.erase(key);
    }
    vcd::put_config(manifest, a.match);
  } else {
    vcd::require(!a.candidates.empty() || !a.matches.empty(), vcd::ErrorCode::kEmptyInput,
                 "eval needs --candidates, --matches or --ablation");
    table = "metric,value\n";
    text = "# " + std::string(vcd::kMatchingMetricNote) + "\n";
    if (!a.candidates.empty()) {
      const double v = vcd::descriptor_muap(vcd::flatten(vcd::read_candidates(a.candidates)), gt);
      table += "descriptor_muap," + vcd::csv::exact(v) + "\n";
      text += "uAP(descriptor) " + vcd::csv::fixed(v, 4) + "\n";
      manifest["input.candidates"] = a.candidates;
    }
    if (!a.matches.empty()) {
      const double v = vcd::matching_muap(vcd::read_matches(a.matches), gt);
      table += "matching_muap," + vcd::csv::exact(v) + "\n";
      text += "uAP(matching)   " + vcd::csv::fixed(v, 4) + "\n";
      manifest["input.matches"] = a.matches;
    }
  }
  write_text(join(a.out, "report.txt"), text);
  write_text(join(a.out, "report.csv"), table);
  manifest["output.report_text"] = join(a.out, "report.txt");
  manifest["output.report_csv"] = join(a.out, "report.csv");
  write_text(join(a.out, "manifest.txt"), vcd::format_key_values(manifest));
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video copy detection: descriptor post-processing, retrieval, alignment, evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vcd::kVersion);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores); output does not depend on it")
      ->capture_default_str();

  Overrides gen_ov, desc_ov, match_ov, eval_ov;
  GenArgs gen;
  DescriptorArgs desc;
  MatchArgs match;
  EvalArgs eval;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic corpus with planted copies");
  setup_gen(*gen_cmd, gen, gen_ov);
  auto* desc_cmd = app.add_subcommand("descriptor", "post-process descriptors and retrieve candidates");
  setup_descriptor(*desc_cmd, desc, desc_ov);
  auto* match_cmd = app.add_subcommand("match", "localize copied segments for candidate pairs");
  setup_match(*match_cmd, match, match_ov);
  auto* eval_cmd = app.add_subcommand("eval", "score candidates / matches, or run the ablation");
  setup_eval(*eval_cmd, eval, eval_ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) run_gen(gen, gen_ov);
    if (desc_cmd->parsed()) run_descriptor(desc, desc_ov, threads);
    if (match_cmd->parsed()) run_match(match, match_ov, threads);
    if (eval_cmd->parsed()) run_eval(eval, eval_ov, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
