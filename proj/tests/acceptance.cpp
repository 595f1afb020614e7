// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "test_util.hpp"
#include "zrk/abx.hpp"
#include "zrk/lexical.hpp"
#include "zrk/quantize.hpp"
#include "zrk/repr.hpp"
#include "zrk/segment.hpp"
#include "zrk/semantic.hpp"
#include "zrk/synth.hpp"
#include "zrk/syntactic.hpp"

using namespace zrk;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

// --- 1 ----------------------------------------------------------------------

Outcome nullspace_algebra() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst_null = 0.0, worst_orth = 0.0;
  for (int d_inb : {48, 64, 96, 192, 256}) {
    const Eigen::MatrixXd a = gaussian(rng, d_inb, 512);
    const auto p = compute_nullspace(a);
    if (p.basis.rows() != 512 - d_inb) return {false, "basis has wrong row count for D_inb " + std::to_string(d_inb)};
    worst_null = std::max(worst_null, (a * p.basis.transpose()).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd gram = p.basis * p.basis.transpose();
    worst_orth = std::max(
        worst_orth, (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {worst_null < 1e-4 && worst_orth < 1e-5 && secs < 5.0,
          "max|A B^T| " + fmt("%.2e", worst_null) + ", orthonormality " + fmt("%.2e", worst_orth) + ", " +
              fmt("%.2f s", secs)};
}

// --- 2 ----------------------------------------------------------------------

Outcome voronoi_invariance() {
  std::mt19937_64 rng(102);
  const auto points = testing::random_embedding(rng, 1000, 16, "pts");
  std::size_t changed = 0, errors = 0, checks = 0;
  for (Metric m : {Metric::kEuclidean, Metric::kCosine}) {
    const auto cb = kmeans_fit(points, 50, m);
    const auto before = assign(points, cb);
    for (double alpha : {0.2, 0.3, 0.4, 0.5, 0.6}) {
      ++checks;
      try {
        const auto after = assign(centroid_average(points, cb, alpha), cb);
        for (std::size_t i = 0; i < before.symbols.size(); ++i) changed += after.symbols[i] != before.symbols[i];
      } catch (const std::exception&) {
        ++errors;
      }
    }
  }
  return {changed == 0 && errors == 0, std::to_string(checks) + " (metric, alpha) runs, " +
                                           std::to_string(changed) + " changed assignments, " +
                                           std::to_string(errors) + " exceptions"};
}

// --- 3 ----------------------------------------------------------------------

Outcome kmeans_oracle() {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  std::uniform_real_distribution<float> value(-10.0f, 10.0f);
  std::size_t exact = 0, exact_default = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = size(rng);
    std::vector<float> xs(n);
    for (auto& x : xs) x = value(rng);
    const EmbeddingMatrix m("x", n, 1, xs);
    const std::vector<double> pts(xs.begin(), xs.end());
    const double best = oracle::kmeans_two_partition_optimum(pts);
    KMeansOptions opts;
    opts.seed = std::uint64_t(inst);
    exact_default += kmeans_fit(m, 2, Metric::kEuclidean, opts).inertia == best;
    opts.restarts = 20;
    exact += kmeans_fit(m, 2, Metric::kEuclidean, opts).inertia == best;
  }
  return {exact == 20, std::to_string(exact) + "/20 instances equal the exhaustive optimum with 20 restarts (" +
                           std::to_string(exact_default) + "/20 with the default 5)"};
}

// --- 4 ----------------------------------------------------------------------

// Minimum-cost path search from every start column. Costs are nonnegative,
// so a branch whose running cost already reaches the best total is cut.
struct PathSearch {
  const Symbol* q;
  std::size_t nq;
  const Symbol* u;
  std::size_t nu;
  const SymbolDistanceTable* t;
  double best;

  void visit(std::size_t i, std::size_t j, double cost) {
    cost += (*t)(q[i], u[j]);
    if (cost >= best) return;
    if (i + 1 == nq) {
      best = cost;
      return;
    }
    if (j + 1 < nu) visit(i + 1, j + 1, cost);
    visit(i + 1, j, cost);
    if (j + 1 < nu) visit(i, j + 1, cost);
  }

  double run() {
    best = std::numeric_limits<double>::infinity();
    for (std::size_t j0 = 0; j0 < nu; ++j0) visit(0, j0, 0.0);
    return best;
  }
};

void decode(std::size_t code, std::size_t len, SymbolString& out) {
  out.resize(len);
  for (std::size_t i = 0; i < len; ++i, code >>= 2) out[i] = Symbol(code & 3u);
}

Outcome subsequence_dtw_oracle() {
  constexpr double kBudget = 55.0;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(104);
  SymbolDistanceTable table;
  table.k = 4;
  table.dist.assign(16, 0.0);
  std::uniform_real_distribution<double> u01(0.05, 2.0);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) table.dist[a * 4 + b] = table.dist[b * 4 + a] = u01(rng);

  // Length classes in order of size, so every finished class is complete.
  std::vector<std::pair<std::size_t, std::size_t>> classes;
  for (std::size_t lq = 1; lq <= 5; ++lq)
    for (std::size_t lu = 1; lu <= 8; ++lu) classes.push_back({lq, lu});
  std::stable_sort(classes.begin(), classes.end(),
                   [](const auto& a, const auto& b) { return a.first + a.second < b.first + b.second; });
  std::size_t total = 0;
  for (const auto& [lq, lu] : classes) total += std::size_t(1) << (2 * (lq + lu));

  std::size_t checked = 0, mismatches = 0, done_classes = 0;
  std::size_t max_complete_sum = 0;
  std::atomic<bool> out_of_time{false};
  // Queries are independent, so they are spread over every hardware thread.
  const unsigned saved_threads = num_threads();
  set_num_threads(std::max(1u, std::thread::hardware_concurrency()));
  for (const auto& [lq, lu] : classes) {
    const std::size_t nq = std::size_t(1) << (2 * lq), nu = std::size_t(1) << (2 * lu);
    std::vector<std::size_t> slot_checked(nq, 0), slot_bad(nq, 0);
    parallel_for(nq, [&, lq = lq, lu = lu](std::size_t cq) {
      if (out_of_time) return;
      SymbolString q, u;
      decode(cq, lq, q);
      for (std::size_t cu = 0; cu < nu; ++cu) {
        decode(cu, lu, u);
        PathSearch s{q.data(), lq, u.data(), lu, &table, 0.0};
        const double brute = s.run();
        slot_bad[cq] += std::abs(subsequence_dtw(q, u, table).cost - brute) >= 1e-9;
        ++slot_checked[cq];
      }
      if (seconds_since(t0) > kBudget) out_of_time = true;
    });
    for (std::size_t i = 0; i < nq; ++i) {
      checked += slot_checked[i];
      mismatches += slot_bad[i];
    }
    if (out_of_time) break;
    ++done_classes;
    max_complete_sum = lq + lu;
  }
  set_num_threads(saved_threads);
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(checked) + "/" + std::to_string(total) + " (query, utterance) pairs in " +
                       fmt("%.1f s", secs) + " on " + std::to_string(std::max(1u, std::thread::hardware_concurrency())) +
                       " threads, " + std::to_string(mismatches) + " mismatches; " +
                       std::to_string(done_classes) + "/40 length classes complete";
  if (out_of_time) detail += " (every class with |q|+|u| < " + std::to_string(max_complete_sum + 1) + " done)";
  return {mismatches == 0 && checked == total && secs < 60.0, detail};
}

// --- 5 ----------------------------------------------------------------------

double swuggy_accuracy(const synth::SwuggyFixture& f, double gamma) {
  const auto table = build_distance_table(f.codebook, gamma);
  const CorpusIndex corpus(f.corpus);
  std::map<std::string, SymbolString> q;
  for (const auto& s : f.queries) q[s.utt_id] = s.symbols;
  std::size_t hits = 0;
  for (const auto& p : f.pairs) {
    const double a = lookup_score(lookup(q.at(p.utt_a), corpus, table));
    const double b = lookup_score(lookup(q.at(p.utt_b), corpus, table));
    hits += classify_pair(a, b) == *p.gold;
  }
  return double(hits) / double(f.pairs.size());
}

Outcome synthetic_swuggy() {
  double worst_clean = 1.0;
  std::size_t ordered = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synth::SwuggyParams p;
    p.words = 500;
    p.utterances = 200;
    p.seed = seed;
    const double clean = swuggy_accuracy(synth::make_swuggy(p), default_gamma(Metric::kCosine));
    p.noise = 0.1;
    const auto noisy = synth::make_swuggy(p);
    const double g16 = swuggy_accuracy(noisy, 1.6), g10 = swuggy_accuracy(noisy, 1.0);
    worst_clean = std::min(worst_clean, clean);
    ordered += g16 >= g10;
    d << (seed > 1 ? "; " : "") << "seed " << seed << ": clean " << fmt("%.3f", clean) << ", noisy g1.6 "
      << fmt("%.3f", g16) << " vs g1.0 " << fmt("%.3f", g10);
  }
  return {worst_clean >= 0.99 && ordered == 5, d.str()};
}

// --- 6 ----------------------------------------------------------------------

Outcome unigram_lm() {
  std::mt19937_64 rng(106);
  std::size_t em_steps = 0, em_drops = 0, viterbi_cases = 0, viterbi_diffs = 0;
  for (int c = 0; c < 5; ++c) {
    std::uniform_int_distribution<Symbol> sym(0, Symbol(2 + c));
    std::uniform_int_distribution<std::size_t> len(3, 20);
    std::vector<SymbolString> corpus(100);
    for (auto& s : corpus) {
      s.resize(len(rng));
      for (auto& x : s) x = sym(rng);
    }
    UnigramOptions opts;
    opts.target_vocab = 1000;
    opts.em_iters = 1;
    auto lm = train_unigram(corpus, opts);
    double prev = corpus_loglik(lm, corpus);
    for (int it = 0; it < 8; ++it) {
      em_step(lm, corpus);
      const double cur = corpus_loglik(lm, corpus);
      ++em_steps;
      em_drops += cur < prev - 1e-9;
      prev = cur;
    }
    opts.target_vocab = 12 + std::size_t(c);
    const auto small = train_unigram(corpus, opts);
    for (const UnigramLM* m : std::array<const UnigramLM*, 2>{&lm, &small}) {
      const auto piece_of = [m](std::span<const Symbol> s) -> long {
        auto idx = m->find(s);
        return idx ? long(*idx) : -1;
      };
      const auto logprob = [m](std::size_t i) { return m->logprob()[i]; };
      std::uniform_int_distribution<std::size_t> short_len(1, 10);
      for (int t = 0; t < 100; ++t) {
        SymbolString s(short_len(rng));
        for (auto& x : s) x = sym(rng);
        const auto seg = viterbi_segment(s, *m);
        const auto brute = oracle::segment_enumerated(s, piece_of, logprob);
        ++viterbi_cases;
        viterbi_diffs += !brute.found || brute.pieces != seg.pieces;
      }
    }
  }
  return {em_drops == 0 && viterbi_diffs == 0,
          std::to_string(em_steps) + " EM steps with " + std::to_string(em_drops) + " decreases; " +
              std::to_string(viterbi_cases) + " Viterbi cases with " + std::to_string(viterbi_diffs) +
              " disagreements"};
}

// --- 7 ----------------------------------------------------------------------

double topic_gap(const WordEmbeddings& emb, std::size_t per_topic) {
  double intra = 0, inter = 0;
  std::size_t ni = 0, nx = 0;
  for (std::size_t i = 0; i < emb.vocab.size(); ++i) {
    for (std::size_t j = i + 1; j < emb.vocab.size(); ++j) {
      std::vector<double> a(emb.row(i).begin(), emb.row(i).end()), b(emb.row(j).begin(), emb.row(j).end());
      const double c = cosine_similarity(a, b);
      if ((std::size_t(emb.vocab[i][0]) < per_topic) == (std::size_t(emb.vocab[j][0]) < per_topic)) {
        intra += c;
        ++ni;
      } else {
        inter += c;
        ++nx;
      }
    }
  }
  return intra / double(ni) - inter / double(nx);
}

Outcome skipgram() {
  std::size_t separated = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SkipGramOptions opts;
    opts.dim = 20;
    opts.seed = seed;
    const auto emb = train_skipgram(synth::two_topic_corpus(5, 2000, 8, seed), opts);
    separated += topic_gap(emb, 5) > 0.0;
  }
  synth::SsimiParams p;
  p.seed = 7;
  const auto f = synth::make_ssimi(p);
  std::vector<std::vector<Piece>> corpus;
  for (const auto& u : f.corpus) corpus.push_back(u.pieces);
  const auto emb = train_skipgram(corpus, {});
  std::map<std::string, SymbolString> q;
  for (const auto& s : f.queries) q[s.utt_id] = s.symbols;
  const double score = evaluate_ssimi(f.dataset, emb, q);
  return {separated == 5 && score >= 90.0,
          "topics separated in " + std::to_string(separated) + "/5 seeds; sSIMI " + fmt("%.2f", score)};
}

// --- 8 ----------------------------------------------------------------------

Outcome spearman_oracle() {
  std::mt19937_64 rng(108);
  std::size_t agree = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<std::size_t> len(2, 40);
    const std::size_t n = len(rng);
    std::vector<double> a(n), b(n);
    // Even lists draw from a few levels (many ties); odd lists are continuous.
    const bool tied = t % 2 == 0;
    do {
      std::uniform_int_distribution<int> lvl(0, 4);
      std::normal_distribution<double> g;
      for (auto& x : a) x = tied ? lvl(rng) : g(rng);
      for (auto& x : b) x = tied ? lvl(rng) : g(rng);
    } while (std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; }) ||
             std::all_of(b.begin(), b.end(), [&](double x) { return x == b[0]; }));
    const double diff = std::abs(spearman(a, b) - oracle::spearman_oracle(a, b));
    worst = std::max(worst, diff);
    agree += diff < 1e-12;
  }
  return {agree == 100, std::to_string(agree) + "/100 lists, max difference " + fmt("%.2e", worst)};
}

// --- 9 ----------------------------------------------------------------------

Outcome synthetic_abx() {
  std::ostringstream d;
  synth::AbxParams sep;
  sep.layout = synth::PhoneLayout::kOrthogonal;
  sep.phones = 2;
  sep.noise = 0.0;
  sep.seed = 1;
  const auto fs_ = synth::make_abx(sep);
  const auto r_sep = abx_error(fs_.items, make_store(fs_.utterances), AbxMode::kWithin);
  d << "separable " << fmt("%.4f", r_sep.error_rate);

  synth::AbxParams same;
  same.layout = synth::PhoneLayout::kIdentical;
  same.seed = 2;
  const auto fi = synth::make_abx(same);
  const auto r_id = abx_error(fi.items, make_store(fi.utterances), AbxMode::kWithin);
  d << "; identical " << fmt("%.4f", r_id.error_rate) << " over " << r_id.n_triplets << " triplets";
  bool ok = r_sep.error_rate == 0.0 && r_id.n_triplets >= 200 && std::abs(r_id.error_rate - 0.5) <= 0.05;

  std::size_t improved = 0;
  d << "; speaker offsets before/after:";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synth::AbxParams p;
    p.speakers = 8;
    p.phones = 6;
    p.dim = 32;
    p.speaker_dims = 8;
    p.speaker_scale = 2.0;
    p.seed = seed;
    const auto f = synth::make_abx(p);
    const double before = abx_error(f.items, make_store(f.utterances), AbxMode::kAcross).error_rate;
    SgdOptions sgd;
    sgd.epochs = 50;
    sgd.lr = 0.05;
    sgd.seed = seed;
    const auto clf = train_factorized_classifier(gather_labeled_frames(f.utterances, f.speaker_labels), 8, sgd);
    const auto proj = compute_nullspace(clf);
    std::vector<EmbeddingMatrix> projected;
    for (const auto& u : f.utterances) projected.push_back(project(u, proj));
    const double after = abx_error(f.items, make_store(projected), AbxMode::kAcross).error_rate;
    improved += after <= before;
    d << " " << fmt("%.4f", before) << "/" << fmt("%.4f", after);
  }
  ok = ok && improved == 5;
  return {ok, d.str()};
}

// --- 10 ---------------------------------------------------------------------

Outcome length_bias() {
  std::mt19937_64 rng(110);
  std::bernoulli_distribution longer(0.8), gold_a(0.5);
  std::uniform_int_distribution<std::size_t> len(5, 12);
  std::vector<LabeledPair> pairs;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = len(rng);
    SymbolString good(n, 0), bad(longer(rng) ? n + 1 : n - 1, 1);
    pairs.push_back(gold_a(rng) ? LabeledPair{good, bad, PairChoice::kA} : LabeledPair{bad, good, PairChoice::kB});
  }
  const double baseline = length_bias_report(pairs).length_baseline_accuracy;

  std::size_t above = 0;
  std::ostringstream d;
  d << "baseline " << fmt("%.4f", baseline) << "; n-gram accuracy:";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synth::SblimpParams p;
    p.seed = seed;
    const auto f = synth::make_sblimp(p);
    const auto lm = train_ngram(f.train);
    std::map<std::string, SymbolString> sentences;
    for (const auto& s : f.sentences) sentences[s.utt_id] = s.symbols;
    std::size_t hits = 0;
    const auto labeled = synth::labeled_pairs(f.pairs, sentences);
    for (const auto& lp : labeled) hits += classify_sentence_pair(lm, lp.a, lp.b) == lp.gold;
    const double acc = double(hits) / double(labeled.size());
    above += acc > 0.5;
    d << " " << fmt("%.3f", acc);
  }
  return {std::abs(baseline - 0.8) <= 0.02 && above == 5, d.str()};
}

// --- 11 ---------------------------------------------------------------------

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + ZRK_CLI_PATH + "\" --threads 1 " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> pipeline(const std::string& d) {
  const std::string a = d + "/abx", s = d + "/sw", m = d + "/ss", b = d + "/sb";
  return {
      "--seed 5 synth-data --kind abx --speakers 4 --phones 4 --dim 16 --speaker-dims 4 --out " + a,
      "train-classifier --embeddings " + a + "/embeddings --labels " + a +
          "/speakers.tsv --d-inb 4 --epochs 5 --out " + d + "/clf",
      "nullspace --classifier " + d + "/clf --out " + d + "/basis.zrk",
      "project --embeddings " + a + "/embeddings --basis " + d + "/basis.zrk --out " + d + "/proj",
      "probe --embeddings " + a + "/embeddings --labels " + a + "/phones.tsv --epochs 3",
      "kmeans --embeddings " + a + "/embeddings --k 8 --restarts 2 --out " + d + "/cb.zrk",
      "quantize --embeddings " + a + "/embeddings --codebook " + d + "/cb.zrk --out " + d + "/q.txt",
      "centroid-avg --embeddings " + a + "/embeddings --codebook " + d + "/cb.zrk --alpha 0.4 --out " + d + "/avg",
      "abx --embeddings " + a + "/embeddings --items " + a + "/items.item --mode both",
      "synth-data --kind swuggy --words 60 --utterances 30 --noise 0.1 --out " + s,
      "lexical --corpus " + s + "/corpus.txt --queries " + s + "/queries.txt --pairs " + s +
          "/pairs.tsv --codebook " + s + "/codebook.zrk --out " + d + "/lex.tsv",
      "segment-train --corpus " + s + "/corpus.txt --vocab 100 --unify-threshold 0.9 --unify-out " + d +
          "/unify.tsv --out " + d + "/lm.tsv",
      "segment-apply --corpus " + s + "/corpus.txt --model " + d + "/lm.tsv --unify-map " + d +
          "/unify.tsv --out " + d + "/seg.txt",
      "w2v-train --corpus " + d + "/seg.txt --dim 8 --epochs 2 --min-count 1 --out " + d + "/w2v.tsv",
      "synth-data --kind ssimi --sentences 300 --out " + m,
      "w2v-train --corpus " + m + "/corpus.seg --dim 16 --epochs 2 --out " + d + "/sim.tsv",
      "semantic --embeddings " + d + "/sim.tsv --queries " + m + "/queries.txt --dataset " + m +
          "/dataset.tsv --out " + d + "/sem.tsv",
      "synth-data --kind sblimp --train 200 --pairs 100 --out " + b,
      "syntactic --train " + b + "/train.txt --sentences " + b + "/sentences.txt --pairs " + b +
          "/pairs.tsv --order 3 --out " + d + "/syn.tsv",
      "length-bias --sentences " + b + "/sentences.txt --pairs " + b + "/pairs.tsv",
  };
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testing::slurp(e.path());
  return out;
}

Outcome determinism() {
  testing::TempDir d1("acc"), d2("acc");
  const auto c1 = pipeline(d1.path().string()), c2 = pipeline(d2.path().string());
  std::vector<std::string> bad;
  std::size_t covered = 0;
  const std::string p1 = d1.path().string(), p2 = d2.path().string();
  for (std::size_t i = 0; i < c1.size(); ++i) {
    const auto r1 = run_cli(c1[i]), r2 = run_cli(c2[i]);
    std::string o2 = r2.out;
    // Output paths differ between the two runs; nothing else may.
    for (std::size_t pos = 0; (pos = o2.find(p2, pos)) != std::string::npos; pos += p1.size())
      o2.replace(pos, p2.size(), p1);
    std::istringstream name(c1[i]);
    std::string sub;
    do name >> sub;
    while (sub.rfind("--", 0) == 0 || std::all_of(sub.begin(), sub.end(), ::isdigit));
    if (r1.code != 0 || r2.code != 0) bad.push_back(sub + " exited " + std::to_string(r1.code));
    else if (r1.out != o2) bad.push_back(sub + " stdout differs");
    else ++covered;
  }
  const auto t1 = tree(d1.path()), t2 = tree(d2.path());
  std::size_t differing = 0;
  for (const auto& [k, v] : t1) {
    auto it = t2.find(k);
    if (it == t2.end() || it->second != v) ++differing;
  }
  differing += t2.size() > t1.size() ? t2.size() - t1.size() : 0;
  std::string detail = std::to_string(covered) + "/" + std::to_string(c1.size()) + " invocations identical, " +
                       std::to_string(t1.size()) + " files, " + std::to_string(differing) + " differing";
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty() && differing == 0 && !t1.empty(), detail};
}

}  // namespace

int main() {
  set_num_threads(1);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"nullspace algebra", nullspace_algebra},
      {"Voronoi invariance of centroid averaging", voronoi_invariance},
      {"k-means vs exhaustive partitions", kmeans_oracle},
      {"subsequence DTW vs exhaustive alignment search", subsequence_dtw_oracle},
      {"synthetic sWUGGY", synthetic_swuggy},
      {"unigram LM EM and Viterbi", unigram_lm},
      {"skip-gram topics and sSIMI", skipgram},
      {"Spearman vs rank-then-Pearson", spearman_oracle},
      {"synthetic ABX", synthetic_abx},
      {"length bias and n-gram sBLIMP", length_bias},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu: %s  %s (%s) [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
