#include <doctest.h>

#include <cmath>
#include <random>

#include "zrk/syntactic.hpp"

using namespace zrk;

namespace {

std::vector<SymbolSequence> corpus_of(std::vector<SymbolString> sentences) {
  std::vector<SymbolSequence> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) out.push_back({"s" + std::to_string(i), sentences[i]});
  return out;
}

}  // namespace

TEST_CASE("unigram hand counts") {
  // "a a b": counts a=2, b=1 and one end transition, so C = 4 and V' = 3.
  const double k = 0.1;
  const auto lm = train_ngram(corpus_of({{0, 0, 1}}), 1, k);
  CHECK(lm.vocab_size() == 2);
  CHECK(lm.outcomes() == 3);
  CHECK(lm.prob({}, 0) == doctest::Approx((2 + k) / (4 + 3 * k)).epsilon(1e-12));
  CHECK(lm.prob({}, 1) == doctest::Approx((1 + k) / (4 + 3 * k)).epsilon(1e-12));
  CHECK(lm.prob({}, NGramLM::kEnd) == doctest::Approx((1 + k) / (4 + 3 * k)).epsilon(1e-12));
  // A symbol never seen in training keeps smoothing mass.
  CHECK(lm.prob({}, 9) == doctest::Approx(k / (4 + 3 * k)).epsilon(1e-12));
  CHECK(lm.prob({}, 9) > 0.0);
}

TEST_CASE("conditionals normalize for every context") {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<Symbol> sym(0, 5);
  std::uniform_int_distribution<std::size_t> len(1, 9);
  std::vector<SymbolString> sentences(200);
  for (auto& s : sentences) {
    s.resize(len(rng));
    for (auto& x : s) x = sym(rng);
  }
  for (std::size_t order : {1u, 2u, 3u, 5u}) {
    const auto lm = train_ngram(corpus_of(sentences), order, 0.1);
    auto contexts = lm.seen_contexts();
    contexts.push_back(SymbolString(order - 1, 4));  // possibly unseen
    for (const auto& ctx : contexts) {
      double total = lm.prob(ctx, NGramLM::kEnd);
      for (Symbol s : lm.vocab()) total += lm.prob(ctx, s);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(NGramLM(0, 0.1), Error);
  CHECK_THROWS_AS(NGramLM(2, 0.0), Error);
  CHECK_THROWS_AS(train_ngram(std::vector<SymbolSequence>{}, 2, 0.1), Error);
}

TEST_CASE("sentence log-probability") {
  const SymbolString s{0, 1, 2, 3};
  const auto sharp = train_ngram(corpus_of({s}), 2, 1e-9);
  CHECK(sentence_logprob(sharp, s) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));

  // Hand chain for a 2-symbol sentence under order 2.
  const double k = 0.5;
  const auto lm = train_ngram(corpus_of({{0, 1}, {0, 0}}), 2, k);
  // V' = 3. Context <s>: 0 twice. Context 0: 1 once, 0 once, end once. Context 1: end once.
  const double p0 = (2 + k) / (2 + 3 * k);
  const double p1 = (1 + k) / (3 + 3 * k);
  const double pend = (1 + k) / (1 + 3 * k);
  CHECK(std::abs(sentence_logprob(lm, SymbolString{0, 1}) - std::log(p0 * p1 * pend)) <= 1e-9);
  CHECK(sentence_logprob(lm, SymbolString{0, 1}, true) ==
        doctest::Approx(std::log(p0 * p1 * pend) / 3).epsilon(1e-12));
  CHECK_THROWS_AS(sentence_logprob(lm, SymbolString{}), Error);
}

TEST_CASE("extending a sentence strictly lowers its prefix log-probability") {
  std::mt19937_64 rng(62);
  std::uniform_int_distribution<Symbol> sym(0, 3);
  std::vector<SymbolString> train(50, SymbolString(6));
  for (auto& s : train)
    for (auto& x : s) x = sym(rng);
  const auto lm = train_ngram(corpus_of(train), 3, 0.1);
  for (int t = 0; t < 50; ++t) {
    SymbolString s;
    double prev = prefix_logprob(lm, s);
    CHECK(prev == 0.0);
    for (int i = 0; i < 8; ++i) {
      s.push_back(sym(rng));
      const double cur = prefix_logprob(lm, s);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("pair classification") {
  const SymbolString good{0, 1, 2, 3, 4, 5};
  const SymbolString scrambled{3, 0, 5, 1, 4, 2};
  std::vector<SymbolString> train(20, good);
  const auto lm = train_ngram(corpus_of(train), 3, 0.1);
  CHECK(classify_sentence_pair(lm, good, scrambled) == PairChoice::kA);
  CHECK(classify_sentence_pair(lm, scrambled, good) == PairChoice::kB);
  CHECK(classify_sentence_pair(lm, scrambled, scrambled) == PairChoice::kA);
  // Under a unigram model any reordering ties.
  const auto uni = train_ngram(corpus_of(train), 1, 0.1);
  CHECK(classify_sentence_pair(uni, SymbolString{1, 2}, SymbolString{2, 1}) == PairChoice::kA);
  // Shifting both scores by a constant leaves the decision alone.
  const double a = sentence_logprob(lm, good), b = sentence_logprob(lm, scrambled);
  CHECK(classify_pair(a + 7.5, b + 7.5) == classify_pair(a, b));
}

TEST_CASE("length bias report") {
  const std::vector<LabeledPair> one{{{1, 2}, {1, 2, 3}, PairChoice::kA}};
  const auto r1 = length_bias_report(one);
  CHECK(r1.length_baseline_accuracy == 1.0);
  CHECK(r1.mean_len_correct == 2.0);
  CHECK(r1.mean_len_incorrect == 3.0);

  const std::vector<LabeledPair> equal{{{1}, {2}, PairChoice::kA},
                                       {{1}, {2}, PairChoice::kB},
                                       {{1}, {2}, PairChoice::kA},
                                       {{1}, {2}, PairChoice::kA}};
  CHECK(length_bias_report(equal).length_baseline_accuracy == 0.75);

  std::mt19937_64 rng(63);
  std::bernoulli_distribution longer(0.8), gold_a(0.5);
  std::vector<LabeledPair> pairs;
  for (int i = 0; i < 10000; ++i) {
    SymbolString good(6, 0), bad(longer(rng) ? 7 : 5, 1);
    pairs.push_back(gold_a(rng) ? LabeledPair{good, bad, PairChoice::kA} : LabeledPair{bad, good, PairChoice::kB});
  }
  const auto r = length_bias_report(pairs);
  CHECK(r.pairs == 10000);
  CHECK(std::abs(r.length_baseline_accuracy - 0.8) <= 0.02);
  CHECK_THROWS_AS(length_bias_report(std::vector<LabeledPair>{}), Error);
}
