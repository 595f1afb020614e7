#include "zrk/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace zrk {

std::optional<std::size_t> WordEmbeddings::find(std::span<const Symbol> piece) const {
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (std::equal(vocab[i].begin(), vocab[i].end(), piece.begin(), piece.end())) return i;
  return std::nullopt;
}

WordEmbeddings train_skipgram(std::span<const std::vector<Piece>> corpus,
                              const SkipGramOptions& opts) {
  if (opts.dim == 0) throw Error("skip-gram: dim must be >= 1");
  std::map<Piece, std::size_t> freq;
  for (const auto& sent : corpus)
    for (const auto& tok : sent) ++freq[tok];

  std::vector<std::pair<Piece, std::size_t>> kept;
  for (auto& [p, c] : freq)
    if (c >= opts.min_count) kept.emplace_back(p, c);
  if (kept.empty())
    throw Error("skip-gram: no piece occurs at least min_count=" + std::to_string(opts.min_count) +
                " times");
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  WordEmbeddings emb;
  emb.dim = opts.dim;
  std::map<Piece, std::size_t> index;
  for (auto& [p, c] : kept) {
    index[p] = emb.vocab.size();
    emb.vocab.push_back(p);
    emb.counts.push_back(c);
  }
  const std::size_t V = emb.vocab.size(), D = opts.dim;

  std::vector<std::vector<std::size_t>> sents;
  std::size_t n_tokens = 0;
  for (const auto& sent : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& tok : sent) {
      auto it = index.find(tok);
      if (it != index.end()) ids.push_back(it->second);
    }
    n_tokens += ids.size();
    if (ids.size() > 1) sents.push_back(std::move(ids));
  }

  std::vector<double> noise_cdf(V);
  double acc = 0.0;
  for (std::size_t i = 0; i < V; ++i) {
    acc += std::pow(double(emb.counts[i]), 0.75);
    noise_cdf[i] = acc;
  }

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<float> init(-0.5f / float(D), 0.5f / float(D));
  emb.vectors.resize(V * D);
  for (float& v : emb.vectors) v = init(rng);
  std::vector<float> out(V * D, 0.0f);
  std::vector<float> grad(D);
  std::uniform_real_distribution<double> unit(0.0, acc);
  const std::size_t window = std::max<std::size_t>(1, opts.window);
  std::uniform_int_distribution<std::size_t> shrink(0, window - 1);

  const double total = double(std::max<std::size_t>(1, n_tokens * opts.epochs));
  double seen = 0.0;
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    for (const auto& sent : sents) {
      for (std::size_t pos = 0; pos < sent.size(); ++pos, seen += 1.0) {
        const double lr = opts.lr * std::max(1e-4, 1.0 - seen / total);
        const std::size_t w = window - shrink(rng);
        const std::size_t lo = pos >= w ? pos - w : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + w);
        const std::size_t target = sent[pos];
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          float* in = emb.vectors.data() + sent[c] * D;
          std::fill(grad.begin(), grad.end(), 0.0f);
          for (std::size_t d = 0; d <= opts.negatives; ++d) {
            std::size_t word = target;
            double label = 1.0;
            if (d > 0) {
              word = std::size_t(std::upper_bound(noise_cdf.begin(), noise_cdf.end(), unit(rng)) -
                                 noise_cdf.begin());
              word = std::min(word, V - 1);
              if (word == target) continue;
              label = 0.0;
            }
            float* o = out.data() + word * D;
            double f = 0.0;
            for (std::size_t k = 0; k < D; ++k) f += double(in[k]) * double(o[k]);
            const float g = float((label - sigmoid(f)) * lr);
            for (std::size_t k = 0; k < D; ++k) grad[k] += g * o[k];
            for (std::size_t k = 0; k < D; ++k) o[k] += g * in[k];
          }
          for (std::size_t k = 0; k < D; ++k) in[k] += grad[k];
        }
      }
    }
  }
  return emb;
}

std::size_t edit_distance(std::span<const Symbol> a, std::span<const Symbol> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<double> embed_query(std::span<const Symbol> query, const WordEmbeddings& emb,
                                std::size_t n_matches) {
  if (emb.vocab.empty()) throw Error("embed_query: empty embedding table");
  if (n_matches == 0) throw Error("embed_query: n_matches must be >= 1");
  std::vector<double> v(emb.dim, 0.0);
  if (auto hit = emb.find(query)) {
    const auto r = emb.row(*hit);
    std::copy(r.begin(), r.end(), v.begin());
    return v;
  }
  struct Match {
    std::size_t dist, count, index;
  };
  std::vector<Match> matches(emb.vocab.size());
  for (std::size_t i = 0; i < emb.vocab.size(); ++i)
    matches[i] = {edit_distance(query, emb.vocab[i]), emb.counts.empty() ? 0 : emb.counts[i], i};
  const std::size_t n = std::min(n_matches, matches.size());
  std::partial_sort(matches.begin(), matches.begin() + std::ptrdiff_t(n), matches.end(),
                    [](const Match& a, const Match& b) {
                      if (a.dist != b.dist) return a.dist < b.dist;
                      if (a.count != b.count) return a.count > b.count;
                      return a.index < b.index;
                    });
  for (std::size_t m = 0; m < n; ++m) {
    const auto r = emb.row(matches[m].index);
    for (std::size_t k = 0; k < emb.dim; ++k) v[k] += double(r[k]);
  }
  for (double& x : v) x /= double(n);
  return v;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error("cosine_similarity: length mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

namespace {

std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) throw Error("spearman: length mismatch");
  if (pred.size() < 2) throw Error("spearman: need at least 2 values");
  const auto rp = mid_ranks(pred);
  const auto rg = mid_ranks(gold);
  const double n = double(rp.size());
  const double mp = std::accumulate(rp.begin(), rp.end(), 0.0) / n;
  const double mg = std::accumulate(rg.begin(), rg.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    sxy += (rp[i] - mp) * (rg[i] - mg);
    sxx += (rp[i] - mp) * (rp[i] - mp);
    syy += (rg[i] - mg) * (rg[i] - mg);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("spearman: constant input list");
  return sxy / std::sqrt(sxx * syy);
}

double evaluate_ssimi(std::span<const SimilarityRecord> dataset, const WordEmbeddings& emb,
                      const std::map<std::string, SymbolString>& query_map, std::size_t n_matches,
                      std::vector<double>* predictions) {
  if (dataset.size() < 2) throw Error("sSIMI evaluation needs at least 2 records");
  auto resolve = [&](std::size_t r, const std::string& id) {
    if (!query_map.count(id))
      throw Error("similarity record " + std::to_string(r) + " (" + dataset[r].utt_a + ", " +
                  dataset[r].utt_b + "): unknown utterance '" + id + "'");
  };
  std::vector<double> pred(dataset.size()), gold(dataset.size());
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    resolve(r, dataset[r].utt_a);
    resolve(r, dataset[r].utt_b);
    gold[r] = dataset[r].human_score;
  }
  parallel_for(dataset.size(), [&](std::size_t r) {
    const auto va = embed_query(query_map.at(dataset[r].utt_a), emb, n_matches);
    const auto vb = embed_query(query_map.at(dataset[r].utt_b), emb, n_matches);
    pred[r] = cosine_similarity(va, vb);
  });
  if (predictions) *predictions = pred;
  return 100.0 * spearman(pred, gold);
}

void write_embeddings(const std::filesystem::path& path, const WordEmbeddings& emb) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(9);
  out << "dim\t" << emb.dim << '\n';
  for (std::size_t i = 0; i < emb.vocab.size(); ++i) {
    out << format_piece(emb.vocab[i]) << '\t';
    const auto r = emb.row(i);
    for (std::size_t k = 0; k < emb.dim; ++k) out << (k ? "," : "") << r[k];
    out << '\n';
  }
}

WordEmbeddings read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  WordEmbeddings emb;
  std::string line;
  if (!std::getline(in, line) || line.rfind("dim\t", 0) != 0)
    throw Error(path.string() + ": missing `dim<TAB>N` header");
  emb.dim = std::stoul(line.substr(4));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected piece<TAB>vector");
    emb.vocab.push_back(parse_piece(line.substr(0, tab)));
    std::istringstream vals(line.substr(tab + 1));
    std::string tok;
    std::size_t n = 0;
    while (std::getline(vals, tok, ',')) {
      emb.vectors.push_back(std::stof(tok));
      ++n;
    }
    if (n != emb.dim)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                  std::to_string(emb.dim) + " values, got " + std::to_string(n));
  }
  return emb;
}

std::vector<SimilarityRecord> read_similarity_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<SimilarityRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.rfind("utt_a\t", 0) == 0) continue;
    std::istringstream f(line);
    SimilarityRecord r;
    std::string score;
    if (!std::getline(f, r.utt_a, '\t') || !std::getline(f, r.utt_b, '\t') ||
        !std::getline(f, score))
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected utt_a<TAB>utt_b<TAB>score");
    r.human_score = std::stod(score);
    if (!std::isfinite(r.human_score))
      throw Error(path.string() + ":" + std::to_string(lineno) + ": non-finite score");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace zrk
