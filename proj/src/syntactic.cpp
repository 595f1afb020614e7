#include "zrk/syntactic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace zrk {

NGramLM::NGramLM(std::size_t order, double k) : order_(order), k_(k) {
  if (order_ == 0) throw Error("n-gram order must be >= 1");
  if (!(k_ > 0.0) || !std::isfinite(k_)) throw Error("add-k constant must be positive");
}

namespace {

SymbolString context_of(std::span<const Symbol> history, std::size_t order) {
  const std::size_t need = order - 1;
  SymbolString ctx(need, NGramLM::kBegin);
  const std::size_t have = std::min(need, history.size());
  std::copy(history.end() - std::ptrdiff_t(have), history.end(),
            ctx.end() - std::ptrdiff_t(have));
  return ctx;
}

}  // namespace

void NGramLM::add_sentence(std::span<const Symbol> sentence) {
  for (Symbol s : sentence) {
    if (s < 0) throw Error("n-gram: negative symbol " + std::to_string(s));
    auto it = std::lower_bound(vocab_.begin(), vocab_.end(), s);
    if (it == vocab_.end() || *it != s) vocab_.insert(it, s);
  }
  for (std::size_t i = 0; i <= sentence.size(); ++i) {
    const Symbol next = i < sentence.size() ? sentence[i] : kEnd;
    auto& c = counts_[context_of(sentence.first(i), order_)];
    c.total += 1.0;
    c.next[next] += 1.0;
  }
}

double NGramLM::prob(std::span<const Symbol> history, Symbol next) const {
  const double denom_extra = k_ * double(outcomes());
  auto it = counts_.find(context_of(history, order_));
  if (it == counts_.end()) return k_ / denom_extra;
  auto n = it->second.next.find(next);
  const double c = n == it->second.next.end() ? 0.0 : n->second;
  return (c + k_) / (it->second.total + denom_extra);
}

std::vector<SymbolString> NGramLM::seen_contexts() const {
  std::vector<SymbolString> out;
  for (const auto& [ctx, c] : counts_) out.push_back(ctx);
  return out;
}

NGramLM train_ngram(std::span<const SymbolSequence> corpus, std::size_t order, double k) {
  NGramLM lm(order, k);
  if (corpus.empty()) throw Error("n-gram: empty training corpus");
  for (const auto& s : corpus) lm.add_sentence(s.symbols);
  return lm;
}

double prefix_logprob(const NGramLM& lm, std::span<const Symbol> sentence) {
  double lp = 0.0;
  for (std::size_t i = 0; i < sentence.size(); ++i)
    lp += std::log(lm.prob(sentence.first(i), sentence[i]));
  return lp;
}

double sentence_logprob(const NGramLM& lm, std::span<const Symbol> sentence, bool per_symbol) {
  if (sentence.empty()) throw Error("sentence_logprob: empty sentence");
  const double lp = prefix_logprob(lm, sentence) + std::log(lm.prob(sentence, NGramLM::kEnd));
  return per_symbol ? lp / double(sentence.size() + 1) : lp;
}

PairChoice classify_sentence_pair(const NGramLM& lm, std::span<const Symbol> a,
                                  std::span<const Symbol> b, bool per_symbol) {
  return classify_pair(sentence_logprob(lm, a, per_symbol), sentence_logprob(lm, b, per_symbol));
}

LengthBiasReport length_bias_report(std::span<const LabeledPair> pairs) {
  if (pairs.empty()) throw Error("length bias report: no labeled pairs");
  LengthBiasReport r;
  r.pairs = pairs.size();
  double correct_len = 0.0, incorrect_len = 0.0;
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    const bool gold_a = p.gold == PairChoice::kA;
    correct_len += double(gold_a ? p.a.size() : p.b.size());
    incorrect_len += double(gold_a ? p.b.size() : p.a.size());
    const PairChoice guess = p.b.size() < p.a.size() ? PairChoice::kB : PairChoice::kA;
    hits += guess == p.gold;
  }
  const double n = double(pairs.size());
  r.mean_len_correct = correct_len / n;
  r.mean_len_incorrect = incorrect_len / n;
  r.length_baseline_accuracy = double(hits) / n;
  return r;
}

}  // namespace zrk
