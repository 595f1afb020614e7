#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "zrk/abx.hpp"
#include "zrk/common.hpp"
#include "zrk/embedding.hpp"
#include "zrk/io.hpp"
#include "zrk/lexical.hpp"
#include "zrk/quantize.hpp"
#include "zrk/repr.hpp"
#include "zrk/segment.hpp"
#include "zrk/semantic.hpp"
#include "zrk/synth.hpp"
#include "zrk/syntactic.hpp"

namespace fs = std::filesystem;
using namespace zrk;

namespace {

const std::vector<std::string> kSubcommands = {
    "train-classifier", "nullspace", "project",       "probe",     "kmeans",    "quantize",
    "centroid-avg",     "abx",       "lexical",       "segment-train", "segment-apply",
    "w2v-train",        "semantic",  "syntactic",     "length-bias",   "synth-data"};

void result(const std::string& name, double value, int decimals = 4) {
  std::printf("%s\t%.*f\n", name.c_str(), decimals, value);
}

void result(const std::string& name, std::size_t value) {
  std::printf("%s\t%zu\n", name.c_str(), value);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Config file: `key=value` lines; keys are `stage.option` for subcommand
// options and bare (or `global.`) for top-level options. Blank lines and
// lines starting with # or ; are ignored.
struct ConfigEntries {
  std::vector<std::string> global;
  std::vector<std::string> stage;
};

ConfigEntries read_config(const fs::path& path, const std::string& stage) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  ConfigEntries out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string::npos || key.substr(0, dot) == "global") {
      if (dot != std::string::npos) key = key.substr(dot + 1);
      out.global.push_back("--" + key + "=" + value);
    } else if (key.substr(0, dot) == stage) {
      out.stage.push_back("--" + key.substr(dot + 1) + "=" + value);
    } else if (std::find(kSubcommands.begin(), kSubcommands.end(), key.substr(0, dot)) ==
               kSubcommands.end()) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": unknown stage '" +
                  key.substr(0, dot) + "'");
    }
  }
  return out;
}

// Splices config entries into argv: global keys before the subcommand, stage
// keys right after it, so explicit flags (later on the line) win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> config;
  std::size_t sub = args.size();
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (sub == args.size() &&
        std::find(kSubcommands.begin(), kSubcommands.end(), args[i]) != kSubcommands.end())
      sub = i;
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    }
  }
  if (!config || sub == args.size()) return args;
  const auto entries = read_config(*config, args[sub]);
  std::vector<std::string> out(args.begin(), args.begin() + std::ptrdiff_t(sub));
  out.insert(out.begin() + 1, entries.global.begin(), entries.global.end());
  out.push_back(args[sub]);
  out.insert(out.end(), entries.stage.begin(), entries.stage.end());
  out.insert(out.end(), args.begin() + std::ptrdiff_t(sub) + 1, args.end());
  return out;
}

SymbolString collapsed(const SymbolString& s) { return block_symbols(collapse_runs({"", s})); }

std::vector<SymbolString> strings_of(std::span<const SymbolSequence> corpus) {
  std::vector<SymbolString> out;
  for (const auto& s : corpus) out.push_back(s.symbols);
  return out;
}

// Block strings of a quantized corpus, optionally relabeled by a unify map.
std::vector<SymbolSequence> block_corpus(std::span<const SymbolSequence> corpus,
                                         const UnifyMap* map) {
  std::vector<BlockSequence> blocks;
  for (const auto& s : corpus) blocks.push_back(collapse_runs(s));
  if (map) blocks = apply_unify_map(blocks, *map);
  std::vector<SymbolSequence> out;
  for (const auto& b : blocks) out.push_back({b.utt_id, block_symbols(b)});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-resource speech evaluation and baseline toolkit", "zrk"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string("zrk ") + kToolkitVersion + "\nmatrix format " +
                                        kMatrixFormatVersion);

  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::string config_path;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("--seed", seed, "Master seed; each stage derives its own");
  app.add_option("--config", config_path, "key=value file with stage.key entries")
      ->check(CLI::ExistingFile);

  const auto stage_seed = [&](const char* stage) { return derive_seed(seed, stage); };
  std::map<CLI::App*, std::function<void()>> actions;

  // --- repr -------------------------------------------------------------------
  struct {
    std::string embeddings, labels, out;
    std::size_t d_inb = 64;
    SgdOptions sgd;
  } tc;
  auto* train_cls = app.add_subcommand("train-classifier", "Train a bottleneck speaker classifier");
  train_cls->add_option("--embeddings", tc.embeddings, "Directory of .zrk files")->required()->check(CLI::ExistingDirectory);
  train_cls->add_option("--labels", tc.labels, "Alignment TSV with speaker labels")->required()->check(CLI::ExistingFile);
  train_cls->add_option("--d-inb", tc.d_inb, "Bottleneck width")->check(CLI::PositiveNumber);
  train_cls->add_option("--epochs", tc.sgd.epochs)->check(CLI::PositiveNumber);
  train_cls->add_option("--lr", tc.sgd.lr)->check(CLI::PositiveNumber);
  train_cls->add_option("--batch", tc.sgd.batch)->check(CLI::PositiveNumber);
  train_cls->add_option("--out", tc.out, "Output directory (a.zrk, b.zrk, bias.zrk, labels.txt)")->required();
  actions[train_cls] = [&] {
    const auto utts = read_zrk1_dir(tc.embeddings);
    const auto data = gather_labeled_frames(utts, read_alignment(tc.labels));
    tc.sgd.seed = stage_seed("train-classifier");
    const auto clf = train_factorized_classifier(data, tc.d_inb, tc.sgd);
    const auto to_matrix = [](const std::string& id, const Eigen::MatrixXd& m) {
      std::vector<float> v;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(static_cast<float>(m(r, c)));
      return EmbeddingMatrix(id, std::size_t(m.rows()), std::size_t(m.cols()), std::move(v));
    };
    fs::create_directories(tc.out);
    write_zrk1(fs::path(tc.out) / "a.zrk", to_matrix("a", clf.a));
    write_zrk1(fs::path(tc.out) / "b.zrk", to_matrix("b", clf.b));
    write_zrk1(fs::path(tc.out) / "bias.zrk", to_matrix("bias", clf.bias.transpose()));
    auto labels = open_out(fs::path(tc.out) / "labels.txt");
    for (const auto& l : clf.label_names) labels << l << '\n';
    result("train_accuracy", clf.train_accuracy);
  };

  struct {
    std::string classifier, out;
    double rel_tol = kDefaultNullspaceRelTol;
  } ns;
  auto* nullspace = app.add_subcommand("nullspace", "Nullspace basis of a classifier bottleneck");
  nullspace->add_option("--classifier", ns.classifier, "Classifier directory, or a ZRK1 matrix A")->required()->check(CLI::ExistingPath);
  nullspace->add_option("--rel-tol", ns.rel_tol)->check(CLI::PositiveNumber);
  nullspace->add_option("--out", ns.out, "Basis matrix (ZRK1)")->required();
  actions[nullspace] = [&] {
    const fs::path src = fs::is_directory(ns.classifier) ? fs::path(ns.classifier) / "a.zrk" : fs::path(ns.classifier);
    const auto a = read_zrk1(src);
    Eigen::MatrixXd m(Eigen::Index(a.frames()), Eigen::Index(a.dim()));
    for (std::size_t r = 0; r < a.frames(); ++r)
      for (std::size_t c = 0; c < a.dim(); ++c) m(Eigen::Index(r), Eigen::Index(c)) = a.row(r)[c];
    const auto proj = compute_nullspace(m, ns.rel_tol);
    std::vector<float> v;
    for (Eigen::Index r = 0; r < proj.basis.rows(); ++r)
      for (Eigen::Index c = 0; c < proj.basis.cols(); ++c) v.push_back(static_cast<float>(proj.basis(r, c)));
    write_zrk1(ns.out, EmbeddingMatrix("basis", proj.output_dim(), proj.input_dim(), std::move(v)));
    result("nullspace_dim", proj.output_dim());
    result("source_rank", proj.source_rank);
    result("rank_deficient", std::size_t(proj.rank_deficient));
  };

  struct {
    std::string embeddings, basis, out;
  } pj;
  auto* project_cmd = app.add_subcommand("project", "Project embeddings onto a nullspace basis");
  project_cmd->add_option("--embeddings", pj.embeddings)->required()->check(CLI::ExistingDirectory);
  project_cmd->add_option("--basis", pj.basis)->required()->check(CLI::ExistingFile);
  project_cmd->add_option("--out", pj.out, "Output directory")->required();
  actions[project_cmd] = [&] {
    const auto basis = read_zrk1(pj.basis);
    NullspaceProjector proj;
    proj.basis.resize(Eigen::Index(basis.frames()), Eigen::Index(basis.dim()));
    for (std::size_t r = 0; r < basis.frames(); ++r)
      for (std::size_t c = 0; c < basis.dim(); ++c) proj.basis(Eigen::Index(r), Eigen::Index(c)) = basis.row(r)[c];
    std::vector<EmbeddingMatrix> out;
    for (const auto& u : read_zrk1_dir(pj.embeddings)) out.push_back(project(u, proj));
    write_zrk1_dir(pj.out, out);
    result("utterances", out.size());
    result("dim", proj.output_dim());
  };

  struct {
    std::string embeddings, labels;
    double split = 0.8;
    SgdOptions sgd;
  } pr;
  auto* probe = app.add_subcommand("probe", "Held-out accuracy of a linear probe");
  probe->add_option("--embeddings", pr.embeddings)->required()->check(CLI::ExistingDirectory);
  probe->add_option("--labels", pr.labels)->required()->check(CLI::ExistingFile);
  probe->add_option("--split", pr.split, "Training fraction")->check(CLI::Range(0.0, 1.0));
  probe->add_option("--epochs", pr.sgd.epochs)->check(CLI::PositiveNumber);
  probe->add_option("--lr", pr.sgd.lr)->check(CLI::PositiveNumber);
  probe->add_option("--batch", pr.sgd.batch)->check(CLI::PositiveNumber);
  actions[probe] = [&] {
    const auto utts = read_zrk1_dir(pr.embeddings);
    const auto data = gather_labeled_frames(utts, read_alignment(pr.labels));
    pr.sgd.seed = stage_seed("probe");
    result("probe_accuracy", linear_probe(data, pr.split, pr.sgd));
  };

  // --- quantize ---------------------------------------------------------------
  struct {
    std::string embeddings, metric = "cosine", out;
    std::size_t k = kDefaultPseudoPhones;
    KMeansOptions opts;
  } km;
  auto* kmeans = app.add_subcommand("kmeans", "Fit a k-means codebook");
  kmeans->add_option("--embeddings", km.embeddings)->required()->check(CLI::ExistingDirectory);
  kmeans->add_option("--k", km.k)->check(CLI::PositiveNumber);
  kmeans->add_option("--metric", km.metric)->check(CLI::IsMember({"euclidean", "cosine"}));
  kmeans->add_option("--restarts", km.opts.restarts)->check(CLI::PositiveNumber);
  kmeans->add_option("--max-iters", km.opts.max_iters)->check(CLI::PositiveNumber);
  kmeans->add_option("--out", km.out, "Codebook path (ZRK1 plus .tsv sidecar)")->required();
  actions[kmeans] = [&] {
    const auto utts = read_zrk1_dir(km.embeddings);
    km.opts.seed = stage_seed("kmeans");
    const auto cb = kmeans_fit(stack_frames(utts), km.k, parse_metric(km.metric), km.opts);
    write_codebook(km.out, cb);
    result("inertia", cb.inertia, 6);
  };

  struct {
    std::string embeddings, codebook, out;
  } qz;
  auto* quantize = app.add_subcommand("quantize", "Assign frames to their nearest centroid");
  quantize->add_option("--embeddings", qz.embeddings)->required()->check(CLI::ExistingDirectory);
  quantize->add_option("--codebook", qz.codebook)->required()->check(CLI::ExistingFile);
  quantize->add_option("--out", qz.out, "Quantized corpus")->required();
  actions[quantize] = [&] {
    const auto cb = read_codebook(qz.codebook);
    const auto utts = read_zrk1_dir(qz.embeddings);
    std::vector<SymbolSequence> out(utts.size());
    parallel_for(utts.size(), [&](std::size_t i) { out[i] = assign(utts[i], cb); });
    write_quantized(qz.out, out);
    result("utterances", out.size());
  };

  struct {
    std::string embeddings, codebook, out;
    double alpha = 0.4;
  } ca;
  auto* centroid_avg = app.add_subcommand("centroid-avg", "Pull frames toward their centroid");
  centroid_avg->add_option("--embeddings", ca.embeddings)->required()->check(CLI::ExistingDirectory);
  centroid_avg->add_option("--codebook", ca.codebook)->required()->check(CLI::ExistingFile);
  centroid_avg->add_option("--alpha", ca.alpha)->check(CLI::Range(0.0, 1.0));
  centroid_avg->add_option("--out", ca.out, "Output directory")->required();
  actions[centroid_avg] = [&] {
    const auto cb = read_codebook(ca.codebook);
    const auto utts = read_zrk1_dir(ca.embeddings);
    std::vector<EmbeddingMatrix> out(utts.size());
    parallel_for(utts.size(), [&](std::size_t i) { out[i] = centroid_average(utts[i], cb, ca.alpha); });
    write_zrk1_dir(ca.out, out);
    result("utterances", out.size());
  };

  // --- abx --------------------------------------------------------------------
  struct {
    std::string embeddings, items, mode = "both", frame_metric = "cosine";
  } ax;
  auto* abx = app.add_subcommand("abx", "ABX phone discriminability error");
  abx->add_option("--embeddings", ax.embeddings)->required()->check(CLI::ExistingDirectory);
  abx->add_option("--items", ax.items)->required()->check(CLI::ExistingFile);
  abx->add_option("--mode", ax.mode)->check(CLI::IsMember({"within", "across", "both"}));
  abx->add_option("--frame-metric", ax.frame_metric)->check(CLI::IsMember({"cosine", "angular"}));
  actions[abx] = [&] {
    const auto utts = read_zrk1_dir(ax.embeddings);
    const auto store = make_store(utts);
    const auto items = read_abx_items(ax.items);
    const auto metric = parse_frame_metric(ax.frame_metric);
    std::vector<AbxMode> modes;
    if (ax.mode != "across") modes.push_back(AbxMode::kWithin);
    if (ax.mode != "within") modes.push_back(AbxMode::kAcross);
    for (AbxMode m : modes) result(abx_mode_name(m), abx_error(items, store, m, metric).error_rate);
  };

  // --- lexical ----------------------------------------------------------------
  struct {
    std::string corpus, queries, pairs, codebook, metric = "codebook", out;
    std::optional<double> gamma;
    bool normalize_mean = true;
    bool collapse = false;
  } lx;
  auto* lexical = app.add_subcommand("lexical", "Spot-the-word scoring by subsequence DTW lookup");
  lexical->add_option("--corpus", lx.corpus, "Quantized corpus")->required()->check(CLI::ExistingFile);
  lexical->add_option("--queries", lx.queries, "Quantized queries")->required()->check(CLI::ExistingFile);
  lexical->add_option("--pairs", lx.pairs)->required()->check(CLI::ExistingFile);
  lexical->add_option("--codebook", lx.codebook, "Needed unless --metric constant")->check(CLI::ExistingFile);
  lexical->add_option("--metric", lx.metric)->check(CLI::IsMember({"codebook", "euclidean", "cosine", "constant"}));
  lexical->add_option("--gamma", lx.gamma, "Sharpening exponent (default by metric)")->check(CLI::PositiveNumber);
  lexical->add_flag("--normalize-mean,!--no-normalize-mean", lx.normalize_mean);
  lexical->add_flag("--collapse", lx.collapse, "Collapse repeated symbols first");
  lexical->add_option("--out", lx.out, "Per-pair scores TSV");
  actions[lexical] = [&] {
    SymbolDistanceTable table;
    if (lx.metric == "constant") {
      std::size_t k = 0;
      for (const auto* path : {&lx.corpus, &lx.queries})
        for (const auto& s : read_quantized(*path))
          for (Symbol x : s.symbols) k = std::max(k, std::size_t(x) + 1);
      if (lx.codebook.size()) k = std::max(k, read_codebook(lx.codebook).k);
      table = constant_distance_table(k);
    } else {
      if (lx.codebook.empty()) throw Error("--codebook is required with --metric " + lx.metric);
      const auto cb = read_codebook(lx.codebook);
      const Metric m = lx.metric == "codebook" ? cb.metric : parse_metric(lx.metric);
      table = build_distance_table(cb, lx.gamma.value_or(default_gamma(m)), m);
    }
    auto corpus = read_quantized(lx.corpus);
    auto queries = read_quantized(lx.queries);
    if (lx.collapse) {
      for (auto& s : corpus) s.symbols = collapsed(s.symbols);
      for (auto& s : queries) s.symbols = collapsed(s.symbols);
    }
    const auto qmap = quantized_map(queries);
    const CorpusIndex index(std::move(corpus));
    const auto pairs = read_pairs(lx.pairs);
    std::map<std::string, double> score;
    for (const auto& p : pairs)
      for (const auto* id : {&p.utt_a, &p.utt_b}) {
        if (score.count(*id)) continue;
        const auto it = qmap.find(*id);
        if (it == qmap.end()) throw Error("pair " + p.pair_id + ": unknown query '" + *id + "'");
        score[*id] = lookup_score(lookup(it->second, index, table), lx.normalize_mean);
      }
    std::optional<std::ofstream> out;
    if (!lx.out.empty()) {
      out = open_out(lx.out);
      out->precision(17);
    }
    std::size_t gold = 0, hits = 0;
    for (const auto& p : pairs) {
      const double a = score[p.utt_a], b = score[p.utt_b];
      const PairChoice c = classify_pair(a, b);
      if (out) *out << p.pair_id << '\t' << a << '\t' << b << '\t' << choice_name(c) << '\n';
      if (p.gold) {
        ++gold;
        hits += c == *p.gold;
      }
    }
    result("pairs", pairs.size());
    if (gold) result("accuracy", double(hits) / double(gold));
  };

  // --- segment ----------------------------------------------------------------
  struct {
    std::string corpus, out, unify_out;
    double unify_threshold = 0.0;
    UnigramOptions opts;
  } st;
  auto* seg_train = app.add_subcommand("segment-train", "Learn a unigram pseudo-word vocabulary");
  seg_train->add_option("--corpus", st.corpus, "Quantized corpus")->required()->check(CLI::ExistingFile);
  seg_train->add_option("--vocab", st.opts.target_vocab)->check(CLI::PositiveNumber);
  seg_train->add_option("--seed-multiplier", st.opts.seed_multiplier)->check(CLI::PositiveNumber);
  seg_train->add_option("--max-piece-len", st.opts.max_piece_len)->check(CLI::PositiveNumber);
  seg_train->add_option("--em-iters", st.opts.em_iters)->check(CLI::PositiveNumber);
  seg_train->add_option("--prune-fraction", st.opts.prune_fraction)->check(CLI::Range(0.0, 1.0));
  seg_train->add_option("--unify-threshold", st.unify_threshold, "Context cosine for block unification (0 = off)")
      ->check(CLI::Range(0.0, 1.0));
  seg_train->add_option("--unify-out", st.unify_out, "Where to write the unify map");
  seg_train->add_option("--out", st.out, "Model TSV")->required();
  actions[seg_train] = [&] {
    const auto corpus = read_quantized(st.corpus);
    std::vector<SymbolSequence> blocks;
    if (st.unify_threshold > 0.0) {
      std::vector<BlockSequence> b;
      for (const auto& s : corpus) b.push_back(collapse_runs(s));
      const auto u = unify_similar_blocks(b, st.unify_threshold);
      for (const auto& s : u.corpus) blocks.push_back({s.utt_id, block_symbols(s)});
      if (!st.unify_out.empty()) write_unify_map(st.unify_out, u.map);
      result("unify_rounds", u.map.rounds.size());
    } else {
      if (!st.unify_out.empty()) throw Error("--unify-out needs --unify-threshold > 0");
      blocks = block_corpus(corpus, nullptr);
    }
    const auto strings = strings_of(blocks);
    UnigramTrace trace;
    const auto lm = train_unigram(strings, st.opts, &trace);
    write_unigram(st.out, lm);
    result("vocab_size", lm.size());
    result("loglik", corpus_loglik(lm, strings), 6);
  };

  struct {
    std::string corpus, model, unify_map, out;
  } sa;
  auto* seg_apply = app.add_subcommand("segment-apply", "Viterbi-segment a quantized corpus");
  seg_apply->add_option("--corpus", sa.corpus, "Quantized corpus")->required()->check(CLI::ExistingFile);
  seg_apply->add_option("--model", sa.model)->required()->check(CLI::ExistingFile);
  seg_apply->add_option("--unify-map", sa.unify_map)->check(CLI::ExistingFile);
  seg_apply->add_option("--out", sa.out, "Segmented corpus")->required();
  actions[seg_apply] = [&] {
    const auto lm = read_unigram(sa.model);
    std::optional<UnifyMap> map;
    if (!sa.unify_map.empty()) map = read_unify_map(sa.unify_map);
    const auto blocks = block_corpus(read_quantized(sa.corpus), map ? &*map : nullptr);
    SegmentStats stats;
    const auto segs = segment_corpus(blocks, lm, &stats);
    std::vector<SegmentedUtterance> out;
    for (const auto& s : segs) out.push_back({s.utt_id, segmentation_pieces(s, lm)});
    write_segmented(sa.out, out);
    result("utterances", stats.utterances);
    result("mean_pieces", stats.mean_pieces);
    result("mean_piece_length", stats.mean_piece_length);
  };

  // --- semantic ---------------------------------------------------------------
  struct {
    std::string corpus, out;
    SkipGramOptions opts;
  } wv;
  auto* w2v = app.add_subcommand("w2v-train", "Skip-gram embeddings of pseudo-words");
  w2v->add_option("--corpus", wv.corpus, "Segmented corpus")->required()->check(CLI::ExistingFile);
  w2v->add_option("--dim", wv.opts.dim)->check(CLI::PositiveNumber);
  w2v->add_option("--window", wv.opts.window)->check(CLI::PositiveNumber);
  w2v->add_option("--negatives", wv.opts.negatives)->check(CLI::PositiveNumber);
  w2v->add_option("--epochs", wv.opts.epochs)->check(CLI::PositiveNumber);
  w2v->add_option("--lr", wv.opts.lr)->check(CLI::PositiveNumber);
  w2v->add_option("--min-count", wv.opts.min_count)->check(CLI::PositiveNumber);
  w2v->add_option("--out", wv.out, "Embedding TSV")->required();
  actions[w2v] = [&] {
    std::vector<std::vector<Piece>> sentences;
    for (auto& u : read_segmented(wv.corpus)) sentences.push_back(std::move(u.pieces));
    wv.opts.seed = stage_seed("w2v-train");
    const auto emb = train_skipgram(sentences, wv.opts);
    write_embeddings(wv.out, emb);
    result("vocab_size", emb.vocab.size());
  };

  struct {
    std::string embeddings, queries, dataset, out;
    std::size_t n_matches = 5;
  } sm;
  auto* semantic = app.add_subcommand("semantic", "Similarity correlation of embedded query pairs");
  semantic->add_option("--embeddings", sm.embeddings)->required()->check(CLI::ExistingFile);
  semantic->add_option("--queries", sm.queries, "Quantized queries")->required()->check(CLI::ExistingFile);
  semantic->add_option("--dataset", sm.dataset)->required()->check(CLI::ExistingFile);
  semantic->add_option("--n-matches", sm.n_matches)->check(CLI::PositiveNumber);
  semantic->add_option("--out", sm.out, "Per-pair predicted similarities");
  actions[semantic] = [&] {
    const auto emb = read_embeddings(sm.embeddings);
    const auto dataset = read_similarity_dataset(sm.dataset);
    const auto qmap = quantized_map(read_quantized(sm.queries));
    std::vector<double> pred;
    const double score = evaluate_ssimi(dataset, emb, qmap, sm.n_matches, &pred);
    if (!sm.out.empty()) {
      auto out = open_out(sm.out);
      out.precision(17);
      for (std::size_t i = 0; i < dataset.size(); ++i)
        out << dataset[i].utt_a << '\t' << dataset[i].utt_b << '\t' << pred[i] << '\n';
    }
    result("ssimi", score);
  };

  // --- syntactic --------------------------------------------------------------
  struct {
    std::string train, sentences, pairs, out;
    std::size_t order = kDefaultNGramOrder;
    double k = kDefaultNGramK;
    bool per_symbol = false;
  } sy;
  auto* syntactic = app.add_subcommand("syntactic", "n-gram acceptability judgments");
  syntactic->add_option("--train", sy.train, "Quantized training corpus")->required()->check(CLI::ExistingFile);
  syntactic->add_option("--sentences", sy.sentences, "Quantized test sentences")->required()->check(CLI::ExistingFile);
  syntactic->add_option("--pairs", sy.pairs)->required()->check(CLI::ExistingFile);
  syntactic->add_option("--order", sy.order)->check(CLI::PositiveNumber);
  syntactic->add_option("--k", sy.k)->check(CLI::PositiveNumber);
  syntactic->add_flag("--per-symbol", sy.per_symbol, "Length-normalized log-probability");
  syntactic->add_option("--out", sy.out, "Per-pair choices TSV");
  actions[syntactic] = [&] {
    const auto lm = train_ngram(read_quantized(sy.train), sy.order, sy.k);
    const auto sentences = quantized_map(read_quantized(sy.sentences));
    const auto pairs = read_pairs(sy.pairs);
    std::optional<std::ofstream> out;
    if (!sy.out.empty()) {
      out = open_out(sy.out);
      out->precision(17);
    }
    std::size_t gold = 0, hits = 0;
    for (const auto& p : pairs) {
      const auto a = sentences.find(p.utt_a), b = sentences.find(p.utt_b);
      if (a == sentences.end()) throw Error("pair " + p.pair_id + ": unknown sentence '" + p.utt_a + "'");
      if (b == sentences.end()) throw Error("pair " + p.pair_id + ": unknown sentence '" + p.utt_b + "'");
      const double la = sentence_logprob(lm, a->second, sy.per_symbol);
      const double lb = sentence_logprob(lm, b->second, sy.per_symbol);
      const PairChoice c = classify_pair(la, lb);
      if (out) *out << p.pair_id << '\t' << la << '\t' << lb << '\t' << choice_name(c) << '\n';
      if (p.gold) {
        ++gold;
        hits += c == *p.gold;
      }
    }
    result("pairs", pairs.size());
    if (gold) result("accuracy", double(hits) / double(gold));
  };

  struct {
    std::string sentences, pairs;
  } lb;
  auto* length_bias = app.add_subcommand("length-bias", "Length statistics of labeled pairs");
  length_bias->add_option("--sentences", lb.sentences)->required()->check(CLI::ExistingFile);
  length_bias->add_option("--pairs", lb.pairs)->required()->check(CLI::ExistingFile);
  actions[length_bias] = [&] {
    const auto sentences = quantized_map(read_quantized(lb.sentences));
    const auto r = length_bias_report(synth::labeled_pairs(read_pairs(lb.pairs), sentences));
    result("pairs", r.pairs);
    result("mean_len_correct", r.mean_len_correct);
    result("mean_len_incorrect", r.mean_len_incorrect);
    result("length_baseline_accuracy", r.length_baseline_accuracy);
  };

  // --- synth-data -------------------------------------------------------------
  struct {
    std::string kind, out, layout = "gaussian";
    std::optional<std::size_t> speakers, phones, contexts, tokens, dim, speaker_dims, words,
        utterances, groups, per_group, sentences, pairs, alphabet, train;
    std::optional<double> noise, speaker_scale, oov_rate, longer_rate;
  } sd;
  auto* synth_data = app.add_subcommand("synth-data", "Write a deterministic synthetic fixture");
  synth_data->add_option("--kind", sd.kind)->required()->check(CLI::IsMember({"abx", "swuggy", "ssimi", "sblimp"}));
  synth_data->add_option("--out", sd.out, "Output directory")->required();
  synth_data->add_option("--layout", sd.layout, "abx phone means")->check(CLI::IsMember({"gaussian", "orthogonal", "identical"}));
  synth_data->add_option("--speakers", sd.speakers);
  synth_data->add_option("--phones", sd.phones);
  synth_data->add_option("--contexts", sd.contexts);
  synth_data->add_option("--tokens", sd.tokens);
  synth_data->add_option("--dim", sd.dim);
  synth_data->add_option("--speaker-dims", sd.speaker_dims);
  synth_data->add_option("--speaker-scale", sd.speaker_scale);
  synth_data->add_option("--noise", sd.noise, "abx frame noise or swuggy substitution rate");
  synth_data->add_option("--words", sd.words);
  synth_data->add_option("--utterances", sd.utterances);
  synth_data->add_option("--groups", sd.groups);
  synth_data->add_option("--per-group", sd.per_group);
  synth_data->add_option("--sentences", sd.sentences);
  synth_data->add_option("--pairs", sd.pairs);
  synth_data->add_option("--alphabet", sd.alphabet);
  synth_data->add_option("--train", sd.train, "sblimp training sentences");
  synth_data->add_option("--oov-rate", sd.oov_rate);
  synth_data->add_option("--longer-rate", sd.longer_rate);
  actions[synth_data] = [&] {
    const auto set = [](auto& field, const auto& opt) {
      if (opt) field = *opt;
    };
    if (sd.kind == "abx") {
      synth::AbxParams p;
      p.seed = seed;
      p.layout = sd.layout == "orthogonal"  ? synth::PhoneLayout::kOrthogonal
                 : sd.layout == "identical" ? synth::PhoneLayout::kIdentical
                                            : synth::PhoneLayout::kGaussian;
      set(p.speakers, sd.speakers);
      set(p.phones, sd.phones);
      set(p.contexts, sd.contexts);
      set(p.tokens, sd.tokens);
      set(p.dim, sd.dim);
      set(p.speaker_dims, sd.speaker_dims);
      set(p.speaker_scale, sd.speaker_scale);
      set(p.noise, sd.noise);
      const auto f = synth::make_abx(p);
      synth::write_abx(sd.out, f);
      result("items", f.items.size());
    } else if (sd.kind == "swuggy") {
      synth::SwuggyParams p;
      p.seed = seed;
      set(p.groups, sd.groups);
      set(p.per_group, sd.per_group);
      set(p.dim, sd.dim);
      set(p.words, sd.words);
      set(p.utterances, sd.utterances);
      set(p.noise, sd.noise);
      const auto f = synth::make_swuggy(p);
      synth::write_swuggy(sd.out, f);
      result("pairs", f.pairs.size());
    } else if (sd.kind == "ssimi") {
      synth::SsimiParams p;
      p.seed = seed;
      set(p.words, sd.words);
      set(p.alphabet, sd.alphabet);
      set(p.sentences, sd.sentences);
      set(p.pairs, sd.pairs);
      set(p.oov_rate, sd.oov_rate);
      const auto f = synth::make_ssimi(p);
      synth::write_ssimi(sd.out, f);
      result("pairs", f.dataset.size());
    } else {
      synth::SblimpParams p;
      p.seed = seed;
      set(p.alphabet, sd.alphabet);
      set(p.train_sentences, sd.train);
      set(p.pairs, sd.pairs);
      set(p.longer_rate, sd.longer_rate);
      const auto f = synth::make_sblimp(p);
      synth::write_sblimp(sd.out, f);
      result("pairs", f.pairs.size());
    }
  };

  const auto stage_name = [&]() -> std::string {
    for (auto* sub : app.get_subcommands()) return " " + sub->get_name();
    return std::string();
  };

  std::vector<std::string> args(argv, argv + argc);
  // First bare word is the subcommand; values of top-level options are skipped.
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--threads" || a == "--seed" || a == "--config") {
      ++i;
    } else if (a.empty() || a[0] != '-') {
      if (std::find(kSubcommands.begin(), kSubcommands.end(), a) == kSubcommands.end()) {
        std::cerr << "zrk: unknown subcommand '" << a << "'\n\n" << app.help();
        return 2;
      }
      break;
    }
  }
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "zrk: config: " << e.what() << '\n';
    return 2;
  }
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());

  CLI::App* sub = nullptr;
  try {
    app.parse(int(cargs.size()), cargs.data());
    sub = app.get_subcommands().front();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "zrk" << stage_name() << ": " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() ? e.get_exit_code() : 2;
  }
  try {
    set_num_threads(threads ? threads : std::max(1u, std::thread::hardware_concurrency()));
    actions.at(sub)();
  } catch (const std::exception& e) {
    std::cerr << "zrk " << sub->get_name() << ": error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
