#include "zrk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "zrk/embedding.hpp"

namespace zrk::synth {

namespace fs = std::filesystem;

namespace {

using Rng = std::mt19937_64;

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

Eigen::VectorXd gaussian_vector(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(rng);
  return v;
}

Eigen::VectorXd unit_vector(Rng& rng, std::size_t dim) {
  Eigen::VectorXd v = gaussian_vector(rng, dim);
  while (v.norm() == 0.0) v = gaussian_vector(rng, dim);
  return v / v.norm();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error("synth-data: " + what);
}

std::string numbered(const std::string& prefix, std::size_t i, std::size_t width = 4) {
  std::string n = std::to_string(i);
  if (n.size() < width) n.insert(0, width - n.size(), '0');
  return prefix + n;
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

// --- ABX ----------------------------------------------------------------------

AbxFixture make_abx(const AbxParams& p) {
  require(p.speakers >= 1 && p.phones >= 2 && p.contexts >= 1 && p.tokens >= 1,
          "abx needs >= 1 speaker, >= 2 phones, >= 1 context and >= 1 token");
  require(p.min_frames >= 1 && p.min_frames <= p.max_frames, "abx frame range is empty");
  require(p.dim >= 1, "abx dim must be >= 1");
  require(p.speaker_dims <= p.dim, "speaker subspace larger than dim");
  require(p.layout != PhoneLayout::kOrthogonal || p.phones <= p.dim,
          "orthogonal layout needs phones <= dim");
  require(p.noise >= 0.0 && p.speaker_scale >= 0.0 && p.phone_scale > 0.0,
          "abx scales must be non-negative");

  Rng rng(derive_seed(p.seed, "synth-abx"));
  const auto dim = static_cast<Eigen::Index>(p.dim);

  std::vector<Eigen::VectorXd> means;
  const Eigen::VectorXd shared = unit_vector(rng, p.dim);
  for (std::size_t ph = 0; ph < p.phones; ++ph) {
    switch (p.layout) {
      case PhoneLayout::kGaussian:
        means.push_back(p.phone_scale * unit_vector(rng, p.dim));
        break;
      case PhoneLayout::kOrthogonal:
        means.push_back(p.phone_scale * Eigen::VectorXd::Unit(dim, Eigen::Index(ph)));
        break;
      case PhoneLayout::kIdentical:
        means.push_back(p.phone_scale * shared);
        break;
    }
  }

  AbxFixture f;
  f.speaker_subspace = Eigen::MatrixXd(Eigen::Index(p.speaker_dims), dim);
  if (p.speaker_dims > 0) {
    Eigen::MatrixXd g(dim, Eigen::Index(p.speaker_dims));
    for (Eigen::Index c = 0; c < g.cols(); ++c) g.col(c) = gaussian_vector(rng, p.dim);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, g.cols());
    f.speaker_subspace = q.transpose();
  }

  std::vector<Eigen::VectorXd> offsets;
  for (std::size_t s = 0; s < p.speakers; ++s) {
    if (p.speaker_dims == 0) {
      offsets.push_back(Eigen::VectorXd::Zero(dim));
    } else {
      const Eigen::VectorXd coef = unit_vector(rng, p.speaker_dims);
      offsets.push_back(p.speaker_scale * f.speaker_subspace.transpose() * coef);
    }
  }

  std::normal_distribution<double> noise(0.0, p.noise / std::sqrt(double(p.dim)));
  for (std::size_t s = 0; s < p.speakers; ++s) {
    const std::string utt = numbered("spk", s, 2);
    const std::string speaker = utt;
    std::vector<float> data;
    std::size_t frame = 0;
    for (std::size_t c = 0; c < p.contexts; ++c) {
      const std::string ctx = numbered("c", c, 2);
      for (std::size_t ph = 0; ph < p.phones; ++ph) {
        const std::string phone = numbered("p", ph, 2);
        for (std::size_t t = 0; t < p.tokens; ++t) {
          const std::size_t len = uniform_between(rng, p.min_frames, p.max_frames);
          f.items.push_back({utt, frame, frame + len, phone, ctx, ctx, speaker});
          for (std::size_t i = 0; i < len; ++i, ++frame) {
            for (Eigen::Index d = 0; d < dim; ++d) {
              const double v = means[ph][d] + offsets[s][d] + (p.noise > 0.0 ? noise(rng) : 0.0);
              data.push_back(static_cast<float>(v));
            }
            f.speaker_labels.push_back({utt, frame, speaker});
            f.phone_labels.push_back({utt, frame, phone});
          }
        }
      }
    }
    f.utterances.emplace_back(utt, frame, p.dim, std::move(data));
  }
  return f;
}

// --- sWUGGY -------------------------------------------------------------------

SwuggyFixture make_swuggy(const SwuggyParams& p) {
  require(p.groups >= 2 && p.per_group >= 1, "swuggy needs >= 2 groups of >= 1 centroid");
  require(p.dim >= 2, "swuggy dim must be >= 2");
  require(p.words >= 1 && p.utterances >= 1, "swuggy needs words and utterances");
  require(p.min_word_len >= 2 && p.min_word_len <= p.max_word_len, "swuggy word length range");
  require(p.noise >= 0.0 && p.noise <= 1.0, "swuggy noise must be in [0, 1]");
  require(p.group_spread >= 0.0, "swuggy group spread must be non-negative");

  Rng rng(derive_seed(p.seed, "synth-swuggy"));
  const std::size_t k = p.groups * p.per_group;

  SwuggyFixture f;
  f.codebook.k = k;
  f.codebook.dim = p.dim;
  f.codebook.metric = Metric::kCosine;
  for (std::size_t g = 0; g < p.groups; ++g) {
    const Eigen::VectorXd anchor = unit_vector(rng, p.dim);
    for (std::size_t j = 0; j < p.per_group; ++j) {
      Eigen::VectorXd c = anchor + p.group_spread * gaussian_vector(rng, p.dim) / std::sqrt(double(p.dim));
      c /= c.norm();
      for (Eigen::Index d = 0; d < c.size(); ++d) f.codebook.centroids.push_back(c[d]);
    }
  }

  const auto group_of = [&](Symbol s) { return std::size_t(s) / p.per_group; };
  const auto random_symbol = [&] { return Symbol(uniform_index(rng, k)); };
  const auto in_group = [&](Symbol s) {
    if (p.per_group == 1) return s;
    Symbol t = s;
    while (t == s) t = Symbol(group_of(s) * p.per_group + uniform_index(rng, p.per_group));
    return t;
  };
  const auto out_of_group = [&](Symbol s) {
    Symbol t = s;
    while (group_of(t) == group_of(s)) t = random_symbol();
    return t;
  };
  const auto noisy = [&](SymbolString w) {
    if (p.noise > 0.0)
      for (auto& s : w)
        if (coin(rng, p.noise)) s = in_group(s);
    return w;
  };

  std::set<SymbolString> used;
  std::vector<SymbolString> words, pseudo;
  while (words.size() < p.words) {
    SymbolString w(uniform_between(rng, p.min_word_len, p.max_word_len));
    for (auto& s : w) s = random_symbol();
    if (!used.insert(w).second) continue;
    SymbolString q = w;
    std::vector<std::size_t> pos(w.size());
    std::iota(pos.begin(), pos.end(), 0);
    std::shuffle(pos.begin(), pos.end(), rng);
    const std::size_t subs = std::max<std::size_t>(1, w.size() / 4);
    for (std::size_t i = 0; i < subs; ++i) q[pos[i]] = out_of_group(q[pos[i]]);
    if (used.count(q)) {
      used.erase(w);
      continue;
    }
    used.insert(q);
    words.push_back(std::move(w));
    pseudo.push_back(std::move(q));
  }

  std::vector<std::size_t> order(words.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  f.corpus.resize(p.utterances);
  for (std::size_t u = 0; u < p.utterances; ++u) f.corpus[u].utt_id = numbered("utt", u);
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& syms = f.corpus[i % p.utterances].symbols;
    for (std::size_t n = uniform_between(rng, 0, p.max_filler); n > 0; --n) syms.push_back(random_symbol());
    const SymbolString w = noisy(words[order[i]]);
    syms.insert(syms.end(), w.begin(), w.end());
  }
  for (auto& u : f.corpus) {
    for (std::size_t n = uniform_between(rng, 1, p.max_filler + 1); n > 0; --n)
      u.symbols.push_back(random_symbol());
  }

  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string real_id = numbered("real", i), fake_id = numbered("pseudo", i);
    f.queries.push_back({real_id, noisy(words[i])});
    f.queries.push_back({fake_id, noisy(pseudo[i])});
    const bool swap = coin(rng, 0.5);
    f.pairs.push_back({numbered("pair", i), swap ? fake_id : real_id, swap ? real_id : fake_id,
                       swap ? PairChoice::kB : PairChoice::kA});
  }
  return f;
}

// --- sSIMI --------------------------------------------------------------------

SsimiFixture make_ssimi(const SsimiParams& p) {
  require(p.words >= 2 && p.alphabet >= 2, "ssimi needs >= 2 words and >= 2 symbols");
  require(p.min_word_len >= 1 && p.min_word_len <= p.max_word_len, "ssimi word length range");
  require(p.sentences >= 1 && p.sentence_len >= 2, "ssimi needs sentences of >= 2 words");
  require(p.topic_width > 0.0, "ssimi topic width must be positive");
  require(p.max_pair_gap > 0.0 && p.max_pair_gap <= 1.0, "ssimi max pair gap must be in (0, 1]");
  require(p.oov_rate >= 0.0 && p.oov_rate <= 1.0, "ssimi oov rate must be in [0, 1]");

  Rng rng(derive_seed(p.seed, "synth-ssimi"));

  std::set<Piece> used;
  std::vector<Piece> words;
  while (words.size() < p.words) {
    Piece w(uniform_between(rng, p.min_word_len, p.max_word_len));
    for (auto& s : w) s = Symbol(uniform_index(rng, p.alphabet));
    if (used.insert(w).second) words.push_back(std::move(w));
  }
  // Word i sits at position i / (words - 1) on a line; sentences draw words
  // near a random topic centre.
  const auto position = [&](std::size_t i) { return double(i) / double(p.words - 1); };

  SsimiFixture f;
  std::vector<double> weights(p.words);
  for (std::size_t s = 0; s < p.sentences; ++s) {
    const double centre = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t i = 0; i < p.words; ++i) {
      const double z = (position(i) - centre) / p.topic_width;
      weights[i] = std::exp(-0.5 * z * z);
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    SegmentedUtterance u{numbered("sent", s, 5), {}};
    for (std::size_t t = 0; t < p.sentence_len; ++t) u.pieces.push_back(words[pick(rng)]);
    f.corpus.push_back(std::move(u));
  }

  const auto query_for = [&](std::size_t i) {
    Piece q = words[i];
    if (coin(rng, p.oov_rate)) {
      for (int tries = 0; tries < 100; ++tries) {
        Piece c = q;
        c.push_back(Symbol(uniform_index(rng, p.alphabet)));
        if (!used.count(c)) return c;
      }
    }
    return q;
  };

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::size_t attempts = 0;
  while (f.dataset.size() < p.pairs && attempts++ < p.pairs * 1000) {
    const std::size_t a = uniform_index(rng, p.words), b = uniform_index(rng, p.words);
    if (a == b || !seen.insert({std::min(a, b), std::max(a, b)}).second) continue;
    const double gap = std::abs(position(a) - position(b));
    if (gap > p.max_pair_gap) continue;
    const std::size_t n = f.dataset.size();
    const std::string qa = numbered("qa", n), qb = numbered("qb", n);
    f.queries.push_back({qa, query_for(a)});
    f.queries.push_back({qb, query_for(b)});
    const double planted = 1.0 - gap / p.max_pair_gap;
    f.planted_similarity.push_back(planted);
    f.dataset.push_back({qa, qb, 10.0 * planted * planted});
  }
  require(f.dataset.size() == p.pairs, "ssimi could not draw enough distinct pairs");
  return f;
}

std::vector<std::vector<Piece>> two_topic_corpus(std::size_t words_per_topic, std::size_t sentences,
                                                 std::size_t sentence_len, std::uint64_t seed) {
  require(words_per_topic >= 2 && sentences >= 2 && sentence_len >= 2,
          "two-topic corpus needs >= 2 words per topic, >= 2 sentences of >= 2 words");
  Rng rng(derive_seed(seed, "synth-two-topic"));
  std::vector<std::vector<Piece>> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    const Symbol base = (s % 2 == 0) ? 0 : Symbol(words_per_topic);
    std::vector<Piece> sent;
    for (std::size_t t = 0; t < sentence_len; ++t)
      sent.push_back({base + Symbol(uniform_index(rng, words_per_topic))});
    out.push_back(std::move(sent));
  }
  return out;
}

// --- sBLIMP -------------------------------------------------------------------

SblimpFixture make_sblimp(const SblimpParams& p) {
  require(p.alphabet >= 3, "sblimp alphabet must be >= 3");
  require(p.successors >= 1 && p.successors < p.alphabet, "sblimp successors must be in [1, alphabet)");
  require(p.min_len >= 3 && p.min_len <= p.max_len, "sblimp length range (min >= 3)");
  require(p.train_sentences >= 1 && p.pairs >= 1, "sblimp needs training sentences and pairs");
  require(p.longer_rate >= 0.0 && p.longer_rate <= 1.0, "sblimp longer rate must be in [0, 1]");

  Rng rng(derive_seed(p.seed, "synth-sblimp"));
  std::vector<std::vector<Symbol>> next(p.alphabet);
  for (std::size_t s = 0; s < p.alphabet; ++s) {
    std::vector<Symbol> all(p.alphabet);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    next[s].assign(all.begin(), all.begin() + std::ptrdiff_t(p.successors));
  }
  const auto sentence = [&] {
    SymbolString out{Symbol(uniform_index(rng, p.alphabet))};
    const std::size_t len = uniform_between(rng, p.min_len, p.max_len);
    while (out.size() < len) out.push_back(next[std::size_t(out.back())][uniform_index(rng, p.successors)]);
    return out;
  };
  const auto allowed = [&](Symbol a, Symbol b) {
    const auto& n = next[std::size_t(a)];
    return std::find(n.begin(), n.end(), b) != n.end();
  };

  SblimpFixture f;
  for (std::size_t i = 0; i < p.train_sentences; ++i) f.train.push_back({numbered("train", i, 5), sentence()});

  for (std::size_t i = 0; i < p.pairs; ++i) {
    const SymbolString good = sentence();
    SymbolString bad = good;
    if (coin(rng, p.longer_rate)) {
      // Insert a symbol that breaks the transition into it.
      for (;;) {
        const std::size_t pos = uniform_between(rng, 1, bad.size() - 1);
        const Symbol s = Symbol(uniform_index(rng, p.alphabet));
        if (!allowed(bad[pos - 1], s)) {
          bad.insert(bad.begin() + std::ptrdiff_t(pos), s);
          break;
        }
      }
    } else {
      // Delete an interior symbol whose neighbours cannot follow each other.
      std::vector<std::size_t> cand;
      for (std::size_t j = 1; j + 1 < bad.size(); ++j)
        if (!allowed(bad[j - 1], bad[j + 1])) cand.push_back(j);
      const std::size_t pos = cand.empty() ? 1 : cand[uniform_index(rng, cand.size())];
      bad.erase(bad.begin() + std::ptrdiff_t(pos));
    }
    const std::string g = numbered("good", i, 5), b = numbered("bad", i, 5);
    f.sentences.push_back({g, good});
    f.sentences.push_back({b, bad});
    const bool swap = coin(rng, 0.5);
    f.pairs.push_back({numbered("pair", i, 5), swap ? b : g, swap ? g : b,
                       swap ? PairChoice::kB : PairChoice::kA});
  }
  return f;
}

std::vector<LabeledPair> labeled_pairs(std::span<const PairRecord> pairs,
                                       const std::map<std::string, SymbolString>& sentences) {
  std::vector<LabeledPair> out;
  for (const auto& r : pairs) {
    if (!r.gold) throw Error("pair " + r.pair_id + " has no gold label");
    const auto a = sentences.find(r.utt_a), b = sentences.find(r.utt_b);
    if (a == sentences.end()) throw Error("pair " + r.pair_id + ": unknown utterance '" + r.utt_a + "'");
    if (b == sentences.end()) throw Error("pair " + r.pair_id + ": unknown utterance '" + r.utt_b + "'");
    out.push_back({a->second, b->second, *r.gold});
  }
  return out;
}

// --- on disk ------------------------------------------------------------------

void write_abx(const fs::path& dir, const AbxFixture& f) {
  write_zrk1_dir(dir / "embeddings", f.utterances);
  write_abx_items(dir / "items.item", f.items);
  write_alignment(dir / "speakers.tsv", f.speaker_labels);
  write_alignment(dir / "phones.tsv", f.phone_labels);
  auto meta = open_out(dir / "meta.tsv");
  meta << "speaker_subspace_dims\t" << f.speaker_subspace.rows() << '\n';
  if (f.speaker_subspace.rows() > 0) {
    const auto rows = std::size_t(f.speaker_subspace.rows()), cols = std::size_t(f.speaker_subspace.cols());
    std::vector<float> data;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        data.push_back(static_cast<float>(f.speaker_subspace(Eigen::Index(r), Eigen::Index(c))));
    write_zrk1(dir / "speaker_subspace.zrk", EmbeddingMatrix("speaker_subspace", rows, cols, std::move(data)));
    meta << "speaker_subspace\tspeaker_subspace.zrk\n";
  }
}

void write_swuggy(const fs::path& dir, const SwuggyFixture& f) {
  write_codebook(dir / "codebook.zrk", f.codebook);
  write_quantized(dir / "corpus.txt", f.corpus);
  write_quantized(dir / "queries.txt", f.queries);
  write_pairs(dir / "pairs.tsv", f.pairs);
}

void write_ssimi(const fs::path& dir, const SsimiFixture& f) {
  write_segmented(dir / "corpus.seg", f.corpus);
  write_quantized(dir / "queries.txt", f.queries);
  auto out = open_out(dir / "dataset.tsv");
  out << "utt_a\tutt_b\tscore\n";
  out.precision(17);
  for (const auto& r : f.dataset) out << r.utt_a << '\t' << r.utt_b << '\t' << r.human_score << '\n';
}

void write_sblimp(const fs::path& dir, const SblimpFixture& f) {
  write_quantized(dir / "train.txt", f.train);
  write_quantized(dir / "sentences.txt", f.sentences);
  write_pairs(dir / "pairs.tsv", f.pairs);
}

}  // namespace zrk::synth
