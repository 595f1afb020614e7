#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "zrk/lexical.hpp"
#include "zrk/quantize.hpp"

namespace zrk {

/// Add-k smoothed n-gram model over pseudo-phones with begin/end sentinels.
/// Every context distributes its mass over the training vocabulary plus the
/// end sentinel (vocab_size + 1 outcomes).
class NGramLM {
 public:
  static constexpr Symbol kBegin = -1;
  static constexpr Symbol kEnd = -2;

  NGramLM(std::size_t order, double k);

  void add_sentence(std::span<const Symbol> sentence);

  std::size_t order() const { return order_; }
  double k() const { return k_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  std::size_t outcomes() const { return vocab_.size() + 1; }

  /// p(next | history), history being the n-1 preceding symbols (begin
  /// sentinels fill the left edge).
  double prob(std::span<const Symbol> history, Symbol next) const;

  std::vector<SymbolString> seen_contexts() const;
  const std::vector<Symbol>& vocab() const { return vocab_; }

 private:
  struct ContextCounts {
    double total = 0.0;
    std::map<Symbol, double> next;
  };
  std::size_t order_;
  double k_;
  std::vector<Symbol> vocab_;  // sorted
  std::map<SymbolString, ContextCounts> counts_;
};

inline constexpr std::size_t kDefaultNGramOrder = 5;
inline constexpr double kDefaultNGramK = 0.1;

NGramLM train_ngram(std::span<const SymbolSequence> corpus, std::size_t order = kDefaultNGramOrder,
                    double k = kDefaultNGramK);

/// Sum of conditional log-probabilities of every symbol and of the final
/// end-sentinel transition. `per_symbol` divides by the number of
/// transitions (length + 1).
double sentence_logprob(const NGramLM& lm, std::span<const Symbol> sentence,
                        bool per_symbol = false);

/// Log-probability of the symbols alone, without the end transition.
/// Strictly decreasing as the sentence is extended.
double prefix_logprob(const NGramLM& lm, std::span<const Symbol> sentence);

PairChoice classify_sentence_pair(const NGramLM& lm, std::span<const Symbol> a,
                                  std::span<const Symbol> b, bool per_symbol = false);

struct LabeledPair {
  SymbolString a;
  SymbolString b;
  PairChoice gold = PairChoice::kA;
};

struct LengthBiasReport {
  double mean_len_correct = 0.0;
  double mean_len_incorrect = 0.0;
  double length_baseline_accuracy = 0.0;  // "the shorter one is correct", ties -> a
  std::size_t pairs = 0;
};

LengthBiasReport length_bias_report(std::span<const LabeledPair> pairs);

}  // namespace zrk
