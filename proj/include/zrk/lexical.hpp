#pragma once

#include <span>
#include <string>
#include <vector>

#include "zrk/quantize.hpp"

namespace zrk {

/// Soft mismatch costs between pseudo-phones: pairwise centroid distances
/// raised to the sharpening exponent gamma.
struct SymbolDistanceTable {
  std::size_t k = 0;
  std::vector<double> dist;  // k x k, row-major
  double gamma = 1.0;
  Metric base_metric = Metric::kEuclidean;
  bool constant = false;  // 0/1 mismatch table, no centroid geometry

  double operator()(Symbol a, Symbol b) const {
    return dist[std::size_t(a) * k + std::size_t(b)];
  }
};

inline constexpr double kDefaultGammaCosine = 1.6;
inline constexpr double kDefaultGammaEuclidean = 2.0;
inline double default_gamma(Metric m) {
  return m == Metric::kCosine ? kDefaultGammaCosine : kDefaultGammaEuclidean;
}

SymbolDistanceTable build_distance_table(const Codebook& cb, double gamma);
/// Same, with the pairwise distance computed under `metric` instead of the
/// codebook's own.
SymbolDistanceTable build_distance_table(const Codebook& cb, double gamma, Metric metric);
/// 0 on the diagonal, 1 elsewhere.
SymbolDistanceTable constant_distance_table(std::size_t k);

struct SubsequenceMatch {
  double cost = 0.0;
  std::size_t start = 0;  // matched span [start, end) of the utterance
  std::size_t end = 0;
};

/// Cheapest DTW alignment of the whole query against any contiguous span of
/// the utterance (free start and end on the utterance axis), steps (1,0),
/// (0,1), (1,1), unweighted. Ties prefer the earliest end, then the latest
/// start.
SubsequenceMatch subsequence_dtw(std::span<const Symbol> query, std::span<const Symbol> utt,
                                 const SymbolDistanceTable& table);

/// Quantized corpus searched by `lookup`.
class CorpusIndex {
 public:
  explicit CorpusIndex(std::vector<SymbolSequence> utterances);

  const std::vector<SymbolSequence>& utterances() const { return utts_; }
  std::size_t total_symbols() const { return total_; }

 private:
  std::vector<SymbolSequence> utts_;
  std::size_t total_ = 0;
};

struct LookupResult {
  double min_cost = 0.0;
  double mean_cost = 0.0;
  double pseudo_logprob = 0.0;  // -min_cost / mean_cost
  std::string argmin_utt;
  std::size_t argmin_start = 0;
  std::size_t argmin_end = 0;
  bool degenerate = false;  // mean_cost == 0; pseudo_logprob fixed at -1
};

/// Per-utterance best subsequence costs; the score is their minimum divided
/// by their mean, negated.
LookupResult lookup(std::span<const Symbol> query, const CorpusIndex& corpus,
                    const SymbolDistanceTable& table);

/// Word score for pair judgments: pseudo_logprob, or -min_cost when mean
/// normalization is off.
inline double lookup_score(const LookupResult& r, bool normalize_mean = true) {
  return normalize_mean ? r.pseudo_logprob : -r.min_cost;
}

enum class PairChoice { kA, kB };

/// Higher score wins; ties go to a.
inline PairChoice classify_pair(double score_a, double score_b) {
  return score_b > score_a ? PairChoice::kB : PairChoice::kA;
}

}  // namespace zrk
