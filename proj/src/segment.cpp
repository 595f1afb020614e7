#include "zrk/segment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace zrk {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}
}  // namespace

std::size_t PieceHash::operator()(const Piece& p) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (Symbol s : p) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(s));
    h *= 1099511628211ULL;
  }
  return h;
}

// --- block unification ------------------------------------------------------

int run_length_bucket(std::size_t run_length) {
  if (run_length <= 1) return 0;
  if (run_length <= 3) return 1;
  if (run_length <= 7) return 2;
  return 3;
}

namespace {

using BlockType = std::pair<Symbol, int>;
// Context dimension: (0, prev symbol) or (1, next symbol); -1 marks an edge.
using ContextKey = std::pair<int, Symbol>;

struct TypeStats {
  long count = 0;
  std::map<ContextKey, long> context;
};

std::map<BlockType, TypeStats> collect_types(std::span<const BlockSequence> corpus) {
  std::map<BlockType, TypeStats> types;
  for (const auto& seq : corpus) {
    const auto& b = seq.blocks;
    for (std::size_t i = 0; i < b.size(); ++i) {
      auto& st = types[{b[i].symbol, run_length_bucket(b[i].run_length)}];
      ++st.count;
      ++st.context[{0, i > 0 ? b[i - 1].symbol : -1}];
      ++st.context[{1, i + 1 < b.size() ? b[i + 1].symbol : -1}];
    }
  }
  return types;
}

// cos(u, v) >= threshold, decided without rounding for threshold 1.
bool similar(const TypeStats& u, const TypeStats& v, double threshold, double* sim) {
  long double dot = 0, nu = 0, nv = 0;
  for (const auto& [key, c] : u.context) {
    nu += (long double)c * c;
    auto it = v.context.find(key);
    if (it != v.context.end()) dot += (long double)c * it->second;
  }
  for (const auto& [key, c] : v.context) nv += (long double)c * c;
  if (dot <= 0) return false;
  // Integer counts keep dot^2 and nu*nv exact well past any realistic corpus.
  const long double lhs = dot * dot;
  const long double rhs = nu * nv;
  *sim = double(dot / std::sqrt(rhs));
  return lhs >= (long double)threshold * threshold * rhs;
}

std::vector<BlockSequence> relabel(std::span<const BlockSequence> corpus, const UnifyRound& round) {
  std::vector<BlockSequence> out;
  out.reserve(corpus.size());
  for (const auto& seq : corpus) {
    BlockSequence next{seq.utt_id, {}};
    for (const auto& b : seq.blocks) {
      Symbol s = b.symbol;
      auto it = round.find({b.symbol, run_length_bucket(b.run_length)});
      if (it != round.end()) s = it->second;
      if (!next.blocks.empty() && next.blocks.back().symbol == s)
        next.blocks.back().run_length += b.run_length;
      else
        next.blocks.push_back({s, b.run_length});
    }
    out.push_back(std::move(next));
  }
  return out;
}

constexpr std::size_t kMaxUnifyRounds = 1000;

}  // namespace

UnifyResult unify_similar_blocks(std::span<const BlockSequence> corpus, double sim_threshold) {
  if (!(sim_threshold > 0.0 && sim_threshold <= 1.0))
    throw Error("unify threshold must lie in (0, 1]");
  UnifyResult result{std::vector<BlockSequence>(corpus.begin(), corpus.end()), {}};
  for (std::size_t round = 0; round < kMaxUnifyRounds; ++round) {
    const auto types = collect_types(result.corpus);
    std::vector<const std::pair<const BlockType, TypeStats>*> list;
    for (const auto& entry : types) list.push_back(&entry);

    struct Candidate {
      double sim;
      std::size_t i, j;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        if (list[i]->first.first == list[j]->first.first) continue;
        double sim = 0.0;
        if (similar(list[i]->second, list[j]->second, sim_threshold, &sim))
          cands.push_back({sim, i, j});
      }
    }
    if (cands.empty()) break;
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.sim > b.sim; });

    UnifyRound merges;
    std::vector<bool> used(list.size(), false);
    for (const auto& c : cands) {
      if (used[c.i] || used[c.j]) continue;
      used[c.i] = used[c.j] = true;
      // Frequency ties keep the type that sorts first.
      const bool i_wins = list[c.i]->second.count >= list[c.j]->second.count;
      const auto& keep = i_wins ? list[c.i]->first : list[c.j]->first;
      const auto& drop = i_wins ? list[c.j]->first : list[c.i]->first;
      merges[drop] = keep.first;
    }
    result.corpus = relabel(result.corpus, merges);
    result.map.rounds.push_back(std::move(merges));
  }
  return result;
}

std::vector<BlockSequence> apply_unify_map(std::span<const BlockSequence> corpus,
                                           const UnifyMap& map) {
  std::vector<BlockSequence> cur(corpus.begin(), corpus.end());
  for (const auto& round : map.rounds) cur = relabel(cur, round);
  return cur;
}

void write_unify_map(const std::filesystem::path& path, const UnifyMap& map) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "round\tsymbol\tbucket\tnew_symbol\n";
  for (std::size_t r = 0; r < map.rounds.size(); ++r)
    for (const auto& [type, sym] : map.rounds[r])
      out << r << '\t' << type.first << '\t' << type.second << '\t' << sym << '\n';
}

UnifyMap read_unify_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  UnifyMap map;
  std::string line;
  std::getline(in, line);  // header
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream f(line);
    std::size_t r;
    Symbol s, t;
    int bucket;
    if (!(f >> r >> s >> bucket >> t))
      throw Error(path.string() + ":" + std::to_string(lineno) + ": malformed unify row");
    if (map.rounds.size() <= r) map.rounds.resize(r + 1);
    map.rounds[r][{s, bucket}] = t;
  }
  return map;
}

// --- unigram LM -------------------------------------------------------------

UnigramLM::UnigramLM(std::vector<Piece> pieces, std::vector<double> logprob,
                     std::size_t target_size)
    : pieces_(std::move(pieces)), logprob_(std::move(logprob)), target_size_(target_size) {
  if (pieces_.empty()) throw Error("unigram LM: empty vocabulary");
  if (pieces_.size() != logprob_.size()) throw Error("unigram LM: pieces/logprob size mismatch");
  double total = 0.0;
  std::set<Symbol> alphabet;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].empty()) throw Error("unigram LM: empty piece");
    if (!(logprob_[i] <= 0.0) || !std::isfinite(logprob_[i]))
      throw Error("unigram LM: invalid logprob for piece " + format_piece(pieces_[i]));
    if (!index_.emplace(pieces_[i], i).second)
      throw Error("unigram LM: duplicate piece " + format_piece(pieces_[i]));
    total += std::exp(logprob_[i]);
    max_len_ = std::max(max_len_, pieces_[i].size());
    alphabet.insert(pieces_[i].begin(), pieces_[i].end());
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw Error("unigram LM: probabilities sum to " + std::to_string(total));
  for (Symbol s : alphabet)
    if (!index_.count(Piece{s}))
      throw Error("unigram LM: symbol " + std::to_string(s) + " has no single-symbol piece");
}

std::optional<std::size_t> UnigramLM::find(std::span<const Symbol> piece) const {
  auto it = index_.find(Piece(piece.begin(), piece.end()));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

struct Arc {
  std::size_t start, end, piece;
};

std::vector<Arc> lattice(std::span<const Symbol> s, const UnigramLM& lm) {
  std::vector<Arc> arcs;
  for (std::size_t end = 1; end <= s.size(); ++end) {
    const std::size_t max_len = std::min(lm.max_piece_len(), end);
    for (std::size_t len = 1; len <= max_len; ++len) {
      if (auto idx = lm.find(s.subspan(end - len, len))) arcs.push_back({end - len, end, *idx});
    }
  }
  return arcs;  // sorted by end
}

// Forward-backward over one utterance. Adds expected piece counts to
// `counts` and returns log P(x).
double expected_counts(std::span<const Symbol> s, const UnigramLM& lm, std::vector<double>* counts) {
  const auto arcs = lattice(s, lm);
  const auto& lp = lm.logprob();
  const std::size_t n = s.size();
  std::vector<double> alpha(n + 1, kNegInf), beta(n + 1, kNegInf);
  alpha[0] = 0.0;
  for (const auto& a : arcs) alpha[a.end] = log_add(alpha[a.end], alpha[a.start] + lp[a.piece]);
  if (alpha[n] == kNegInf) throw Error("utterance cannot be segmented with this vocabulary");
  if (!counts) return alpha[n];
  beta[n] = 0.0;
  for (auto it = arcs.rbegin(); it != arcs.rend(); ++it)
    beta[it->start] = log_add(beta[it->start], lp[it->piece] + beta[it->end]);
  for (const auto& a : arcs)
    (*counts)[a.piece] += std::exp(alpha[a.start] + lp[a.piece] + beta[a.end] - alpha[n]);
  return alpha[n];
}

// E-step over the corpus in fixed chunks, reduced in chunk order so that
// the totals do not depend on the worker count.
double corpus_counts(const UnigramLM& lm, std::span<const SymbolString> corpus,
                     std::vector<double>* counts) {
  constexpr std::size_t kChunks = 64;
  const std::size_t chunk = std::max<std::size_t>(1, (corpus.size() + kChunks - 1) / kChunks);
  const std::size_t n_chunks = (corpus.size() + chunk - 1) / chunk;
  std::vector<std::vector<double>> part(n_chunks);
  std::vector<double> ll(n_chunks, 0.0);
  parallel_for(n_chunks, [&](std::size_t c) {
    if (counts) part[c].assign(lm.size(), 0.0);
    const std::size_t hi = std::min(corpus.size(), (c + 1) * chunk);
    for (std::size_t u = c * chunk; u < hi; ++u) {
      if (corpus[u].empty()) continue;
      ll[c] += expected_counts(corpus[u], lm, counts ? &part[c] : nullptr);
    }
  });
  double total = 0.0;
  if (counts) counts->assign(lm.size(), 0.0);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    total += ll[c];
    if (counts)
      for (std::size_t i = 0; i < lm.size(); ++i) (*counts)[i] += part[c][i];
  }
  return total;
}

UnigramLM from_counts(const UnigramLM& lm, const std::vector<double>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  std::vector<Piece> pieces;
  std::vector<double> kept;
  for (std::size_t i = 0; i < lm.size(); ++i) {
    const bool single = lm.pieces()[i].size() == 1;
    // Pieces whose share underflows count as unused. Unseen single symbols
    // keep a vanishing share so coverage holds.
    const bool used = counts[i] > 0.0 && std::isfinite(std::log(counts[i] / total));
    if (used || single) {
      pieces.push_back(lm.pieces()[i]);
      kept.push_back(used ? counts[i] : 1e-12 * total);
    }
  }
  const double sum = std::accumulate(kept.begin(), kept.end(), 0.0);
  for (double& c : kept) c = std::log(c / sum);
  return UnigramLM(std::move(pieces), std::move(kept), lm.target_size());
}

// Best segmentation score of `s`, optionally forbidding one piece index.
struct Best {
  double score = kNegInf;
  std::size_t n = 0;
  std::size_t piece = 0;
  std::size_t prev = 0;
};

std::vector<Best> viterbi_table(std::span<const Symbol> s, const UnigramLM& lm,
                                std::optional<std::size_t> forbid) {
  const std::size_t n = s.size();
  std::vector<Best> best(n + 1);
  best[0].score = 0.0;
  auto sequence = [&](std::size_t last_piece, std::size_t last_start) {
    std::vector<std::size_t> seq{last_piece};
    for (std::size_t t = last_start; t > 0; t = best[t].prev) seq.push_back(best[t].piece);
    std::reverse(seq.begin(), seq.end());
    return seq;
  };
  const auto& lp = lm.logprob();
  for (std::size_t end = 1; end <= n; ++end) {
    const std::size_t max_len = std::min(lm.max_piece_len(), end);
    for (std::size_t len = 1; len <= max_len; ++len) {
      const std::size_t start = end - len;
      if (best[start].score == kNegInf) continue;
      auto idx = lm.find(s.subspan(start, len));
      if (!idx || (forbid && *idx == *forbid)) continue;
      const double score = best[start].score + lp[*idx];
      const std::size_t count = best[start].n + 1;
      Best& cur = best[end];
      bool take = score > cur.score;
      if (!take && score == cur.score) {
        if (count != cur.n)
          take = count < cur.n;
        else
          take = sequence(*idx, start) < sequence(cur.piece, cur.prev);
      }
      if (take) cur = {score, count, *idx, start};
    }
  }
  return best;
}

}  // namespace

double corpus_loglik(const UnigramLM& lm, std::span<const SymbolString> corpus) {
  return corpus_counts(lm, corpus, nullptr);
}

double em_step(UnigramLM& lm, std::span<const SymbolString> corpus) {
  std::vector<double> counts;
  const double ll = corpus_counts(lm, corpus, &counts);
  lm = from_counts(lm, counts);
  return ll;
}

UnigramLM train_unigram(std::span<const SymbolString> corpus, const UnigramOptions& opts,
                        UnigramTrace* trace) {
  std::map<Symbol, double> alphabet;
  std::size_t n_utts = 0;
  for (const auto& u : corpus) {
    for (Symbol s : u) alphabet[s] += 1.0;
    n_utts += !u.empty();
  }
  if (n_utts == 0) throw Error("train_unigram: empty corpus");
  if (opts.target_vocab < alphabet.size())
    throw Error("train_unigram: target vocabulary " + std::to_string(opts.target_vocab) +
                " is below the alphabet size " + std::to_string(alphabet.size()));
  if (!(opts.prune_fraction > 0.0 && opts.prune_fraction < 1.0))
    throw Error("train_unigram: prune_fraction must lie in (0, 1)");
  const std::size_t max_len = std::max<std::size_t>(1, opts.max_piece_len);

  std::unordered_map<Piece, double, PieceHash> substr;
  for (const auto& u : corpus) {
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t len = 2; len <= max_len && i + len <= u.size(); ++len)
        substr[Piece(u.begin() + std::ptrdiff_t(i), u.begin() + std::ptrdiff_t(i + len))] += 1.0;
  }
  std::vector<std::pair<Piece, double>> cands(substr.begin(), substr.end());
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t n_seed = std::min(cands.size(), opts.seed_multiplier * opts.target_vocab);
  cands.resize(n_seed);

  std::vector<Piece> pieces;
  std::vector<double> weight;
  for (const auto& [s, c] : alphabet) {
    pieces.push_back({s});
    weight.push_back(c);
  }
  for (auto& [p, c] : cands) {
    pieces.push_back(std::move(p));
    weight.push_back(c);
  }
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  for (double& w : weight) w = std::log(w / total);
  UnigramLM lm(std::move(pieces), std::move(weight), opts.target_vocab);

  const std::size_t em_iters = std::max<std::size_t>(1, opts.em_iters);
  for (;;) {
    std::vector<double> counts;
    for (std::size_t it = 0; it < em_iters; ++it) {
      const std::size_t size_before = lm.size();
      const double ll = em_step(lm, corpus);
      if (trace) {
        trace->loglik.push_back(ll);
        trace->vocab_size.push_back(size_before);
      }
    }
    if (lm.size() <= opts.target_vocab) break;

    // Expected counts under the current model drive the pruning loss: the
    // log-likelihood lost when each piece's occurrences fall back to their
    // best segmentation without it.
    corpus_counts(lm, corpus, &counts);
    struct Loss {
      double loss;
      std::size_t index;
    };
    std::vector<Loss> losses;
    for (std::size_t i = 0; i < lm.size(); ++i) {
      const Piece& p = lm.pieces()[i];
      if (p.size() == 1) continue;
      const auto table = viterbi_table(p, lm, i);
      const double alt = table.back().score;
      const double loss = alt == kNegInf ? std::numeric_limits<double>::infinity()
                                         : counts[i] * (lm.logprob()[i] - alt);
      losses.push_back({loss, i});
    }
    std::stable_sort(losses.begin(), losses.end(),
                     [](const Loss& a, const Loss& b) { return a.loss < b.loss; });
    const std::size_t excess = lm.size() - opts.target_vocab;
    const auto by_fraction =
        std::max<std::size_t>(1, std::size_t(opts.prune_fraction * double(lm.size())));
    const std::size_t n_remove = std::min({excess, by_fraction, losses.size()});
    std::vector<bool> drop(lm.size(), false);
    for (std::size_t r = 0; r < n_remove; ++r) drop[losses[r].index] = true;

    std::vector<Piece> kept;
    std::vector<double> kept_lp;
    double mass = 0.0;
    for (std::size_t i = 0; i < lm.size(); ++i) {
      if (drop[i]) continue;
      kept.push_back(lm.pieces()[i]);
      kept_lp.push_back(lm.logprob()[i]);
      mass += std::exp(lm.logprob()[i]);
    }
    const double log_mass = std::log(mass);
    for (double& v : kept_lp) v -= log_mass;
    lm = UnigramLM(std::move(kept), std::move(kept_lp), opts.target_vocab);
  }
  return lm;
}

Segmentation viterbi_segment(std::span<const Symbol> utt, const UnigramLM& lm, std::string utt_id) {
  for (std::size_t i = 0; i < utt.size(); ++i) {
    if (!lm.find(utt.subspan(i, 1)))
      throw Error("utterance '" + utt_id + "': symbol " + std::to_string(utt[i]) +
                  " at position " + std::to_string(i) + " is not covered by the vocabulary");
  }
  Segmentation seg{std::move(utt_id), {}, 0.0};
  if (utt.empty()) return seg;
  const auto best = viterbi_table(utt, lm, std::nullopt);
  seg.logprob = best.back().score;
  for (std::size_t t = utt.size(); t > 0; t = best[t].prev) seg.pieces.push_back(best[t].piece);
  std::reverse(seg.pieces.begin(), seg.pieces.end());
  return seg;
}

std::vector<Segmentation> segment_corpus(std::span<const SymbolSequence> corpus,
                                         const UnigramLM& lm, SegmentStats* stats) {
  std::vector<Segmentation> out(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t u) {
    out[u] = viterbi_segment(corpus[u].symbols, lm, corpus[u].utt_id);
  });
  if (stats) {
    std::size_t n_pieces = 0, n_symbols = 0;
    for (std::size_t u = 0; u < corpus.size(); ++u) {
      n_pieces += out[u].pieces.size();
      n_symbols += corpus[u].symbols.size();
    }
    stats->utterances = corpus.size();
    stats->mean_pieces = corpus.empty() ? 0.0 : double(n_pieces) / double(corpus.size());
    stats->mean_piece_length = n_pieces == 0 ? 0.0 : double(n_symbols) / double(n_pieces);
  }
  return out;
}

std::vector<Piece> segmentation_pieces(const Segmentation& seg, const UnigramLM& lm) {
  std::vector<Piece> out;
  out.reserve(seg.pieces.size());
  for (std::size_t i : seg.pieces) out.push_back(lm.pieces().at(i));
  return out;
}

std::string format_piece(std::span<const Symbol> piece) {
  std::string s;
  for (std::size_t i = 0; i < piece.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(piece[i]);
  }
  return s;
}

Piece parse_piece(const std::string& text) {
  Piece p;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string tok = text.substr(pos, comma - pos);
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size() || v < 0)
      throw Error("malformed symbol '" + tok + "' in '" + text + "'");
    p.push_back(static_cast<Symbol>(v));
    pos = comma + 1;
  }
  return p;
}

void write_unigram(const std::filesystem::path& path, const UnigramLM& lm) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < lm.size(); ++i)
    out << format_piece(lm.pieces()[i]) << '\t' << lm.logprob()[i] << '\n';
}

UnigramLM read_unigram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Piece> pieces;
  std::vector<double> lp;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected piece<TAB>logprob");
    pieces.push_back(parse_piece(line.substr(0, tab)));
    lp.push_back(std::stod(line.substr(tab + 1)));
  }
  return UnigramLM(std::move(pieces), std::move(lp));
}

}  // namespace zrk
