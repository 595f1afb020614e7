#include "zrk/lexical.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace zrk {

SymbolDistanceTable build_distance_table(const Codebook& cb, double gamma) {
  return build_distance_table(cb, gamma, cb.metric);
}

SymbolDistanceTable build_distance_table(const Codebook& cb, double gamma, Metric metric) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error("gamma must be a positive number");
  SymbolDistanceTable t;
  t.k = cb.k;
  t.gamma = gamma;
  t.base_metric = metric;
  t.dist.assign(cb.k * cb.k, 0.0);

  std::vector<double> norms(cb.k, 0.0);
  for (std::size_t i = 0; i < cb.k; ++i) {
    for (double v : cb.centroid(i)) norms[i] += v * v;
    norms[i] = std::sqrt(norms[i]);
  }
  for (std::size_t i = 0; i < cb.k; ++i) {
    const auto ci = cb.centroid(i);
    for (std::size_t j = i + 1; j < cb.k; ++j) {
      const auto cj = cb.centroid(j);
      double d = 0.0;
      if (metric == Metric::kEuclidean) {
        for (std::size_t r = 0; r < cb.dim; ++r) d += (ci[r] - cj[r]) * (ci[r] - cj[r]);
        d = std::sqrt(d);
      } else {
        double dot = 0.0;
        for (std::size_t r = 0; r < cb.dim; ++r) dot += ci[r] * cj[r];
        const double denom = norms[i] * norms[j];
        d = denom == 0.0 ? 1.0 : 1.0 - dot / denom;
      }
      d = std::pow(std::max(d, 0.0), gamma);
      t.dist[i * cb.k + j] = d;
      t.dist[j * cb.k + i] = d;
    }
  }
  return t;
}

SymbolDistanceTable constant_distance_table(std::size_t k) {
  SymbolDistanceTable t;
  t.k = k;
  t.constant = true;
  t.dist.assign(k * k, 1.0);
  for (std::size_t i = 0; i < k; ++i) t.dist[i * k + i] = 0.0;
  return t;
}

namespace {

void check_symbols(std::span<const Symbol> seq, std::size_t k, const char* what) {
  if (seq.empty()) throw Error(std::string("subsequence_dtw: empty ") + what);
  for (Symbol s : seq) {
    if (s < 0 || std::size_t(s) >= k)
      throw Error(std::string("subsequence_dtw: ") + what + " symbol " + std::to_string(s) +
                  " out of range for a table of " + std::to_string(k) + " symbols");
  }
}

}  // namespace

SubsequenceMatch subsequence_dtw(std::span<const Symbol> query, std::span<const Symbol> utt,
                                 const SymbolDistanceTable& table) {
  check_symbols(query, table.k, "query");
  check_symbols(utt, table.k, "utterance");
  const std::size_t m = utt.size();
  // Rows are reused across calls; lookups run this once per utterance.
  thread_local std::vector<double> prev, cur;
  thread_local std::vector<std::size_t> prev_start, cur_start;
  prev.resize(m);
  cur.resize(m);
  prev_start.resize(m);
  cur_start.resize(m);

  // First query row: a path may begin at any utterance position.
  for (std::size_t j = 0; j < m; ++j) {
    prev[j] = table(query[0], utt[j]);
    prev_start[j] = j;
  }
  for (std::size_t i = 1; i < query.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double best = prev[j];
      std::size_t start = prev_start[j];
      auto offer = [&](double c, std::size_t s) {
        if (c < best || (c == best && s > start)) {
          best = c;
          start = s;
        }
      };
      if (j > 0) {
        offer(prev[j - 1], prev_start[j - 1]);
        offer(cur[j - 1], cur_start[j - 1]);
      }
      cur[j] = best + table(query[i], utt[j]);
      cur_start[j] = start;
    }
    std::swap(prev, cur);
    std::swap(prev_start, cur_start);
  }

  SubsequenceMatch match{prev[0], prev_start[0], 1};
  for (std::size_t j = 1; j < m; ++j) {
    if (prev[j] < match.cost) match = {prev[j], prev_start[j], j + 1};
  }
  return match;
}

CorpusIndex::CorpusIndex(std::vector<SymbolSequence> utterances) : utts_(std::move(utterances)) {
  if (utts_.empty()) throw Error("corpus index is empty");
  std::set<std::string> ids;
  for (const auto& u : utts_) {
    if (u.symbols.empty()) throw Error("corpus utterance '" + u.utt_id + "' is empty");
    if (!ids.insert(u.utt_id).second) throw Error("duplicate corpus utterance id '" + u.utt_id + "'");
    total_ += u.symbols.size();
  }
}

LookupResult lookup(std::span<const Symbol> query, const CorpusIndex& corpus,
                    const SymbolDistanceTable& table) {
  const auto& utts = corpus.utterances();
  std::vector<SubsequenceMatch> best(utts.size());
  parallel_for(utts.size(),
               [&](std::size_t u) { best[u] = subsequence_dtw(query, utts[u].symbols, table); });

  LookupResult r;
  std::size_t arg = 0;
  double sum = 0.0;
  for (std::size_t u = 0; u < best.size(); ++u) {
    sum += best[u].cost;
    if (best[u].cost < best[arg].cost) arg = u;
  }
  r.min_cost = best[arg].cost;
  r.mean_cost = sum / double(best.size());
  r.argmin_utt = utts[arg].utt_id;
  r.argmin_start = best[arg].start;
  r.argmin_end = best[arg].end;
  if (r.mean_cost == 0.0) {
    r.degenerate = true;
    r.pseudo_logprob = -1.0;
  } else {
    r.pseudo_logprob = r.min_cost == 0.0 ? 0.0 : -r.min_cost / r.mean_cost;
  }
  return r;
}

}  // namespace zrk
