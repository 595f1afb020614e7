#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "zrk/lexical.hpp"

using namespace zrk;

namespace {

SymbolDistanceTable random_table(std::mt19937_64& rng, std::size_t k) {
  SymbolDistanceTable t;
  t.k = k;
  t.dist.assign(k * k, 0.0);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) t.dist[i * k + j] = t.dist[j * k + i] = u(rng);
  return t;
}

SymbolString random_string(std::mt19937_64& rng, std::size_t len, std::size_t k) {
  std::uniform_int_distribution<Symbol> s(0, Symbol(k) - 1);
  SymbolString out(len);
  for (auto& x : out) x = s(rng);
  return out;
}

Codebook three_points(Metric m) {
  Codebook cb;
  cb.k = 3;
  cb.dim = 2;
  cb.metric = m;
  if (m == Metric::kCosine) {
    const double r = std::sqrt(0.5);
    cb.centroids = {1, 0, 0, 1, r, r};
  } else {
    cb.centroids = {0, 0, 3, 4, 1, 1};
  }
  return cb;
}

}  // namespace

TEST_CASE("distance tables") {
  const auto e1 = build_distance_table(three_points(Metric::kEuclidean), 1.0);
  CHECK(e1(0, 1) == doctest::Approx(5.0));
  CHECK(e1(1, 0) == doctest::Approx(5.0));
  CHECK(e1(0, 2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(e1(2, 2) == 0.0);
  const auto e2 = build_distance_table(three_points(Metric::kEuclidean), 2.0);
  CHECK(e2(0, 1) == doctest::Approx(25.0));
  CHECK(e2(0, 2) == doctest::Approx(2.0));

  const auto c = build_distance_table(three_points(Metric::kCosine), 1.6);
  CHECK(c(0, 1) == doctest::Approx(1.0));
  CHECK(c(0, 2) == doctest::Approx(std::pow(1 - std::sqrt(0.5), 1.6)));
  CHECK(c.base_metric == Metric::kCosine);
  CHECK(default_gamma(Metric::kCosine) == 1.6);
  CHECK(default_gamma(Metric::kEuclidean) == 2.0);

  CHECK_THROWS_AS(build_distance_table(three_points(Metric::kCosine), 0.0), Error);
  CHECK_THROWS_AS(build_distance_table(three_points(Metric::kCosine), -1.0), Error);

  const auto k = constant_distance_table(3);
  CHECK(k(1, 1) == 0.0);
  CHECK(k(1, 2) == 1.0);
}

TEST_CASE("subsequence DTW examples") {
  const auto t = constant_distance_table(4);
  const SymbolString utt{3, 0, 1, 2, 1, 3};
  const SymbolString q{1, 2, 1};
  const auto m = subsequence_dtw(q, utt, t);
  CHECK(m.cost == 0.0);
  CHECK(m.start == 2);
  CHECK(m.end == 5);

  std::mt19937_64 rng(31);
  const auto table = random_table(rng, 3);
  const auto dist = [&](Symbol a, Symbol b) { return table(a, b); };
  const auto q3 = random_string(rng, 3, 3), u6 = random_string(rng, 6, 3);
  CHECK(std::abs(subsequence_dtw(q3, u6, table).cost - oracle::subsequence_dtw_enumerated(q3, u6, dist)) <
        1e-9);
  // Query longer than the utterance.
  const auto q4 = random_string(rng, 4, 3), u2 = random_string(rng, 2, 3);
  CHECK(std::abs(subsequence_dtw(q4, u2, table).cost - oracle::subsequence_dtw_enumerated(q4, u2, dist)) <
        1e-9);

  CHECK_THROWS_AS(subsequence_dtw(SymbolString{4}, utt, t), Error);
  CHECK_THROWS_AS(subsequence_dtw(SymbolString{}, utt, t), Error);
  CHECK_THROWS_AS(subsequence_dtw(q, SymbolString{}, t), Error);
}

TEST_CASE("subsequence DTW properties on random inputs") {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  for (int t = 0; t < 300; ++t) {
    const std::size_t k = 2 + std::size_t(t % 3);
    const auto table = random_table(rng, k);
    const auto dist = [&](Symbol a, Symbol b) { return table(a, b); };
    const auto q = random_string(rng, len(rng), k);
    auto u = random_string(rng, len(rng), k);
    const auto m = subsequence_dtw(q, u, table);
    CHECK(std::abs(m.cost - oracle::subsequence_dtw_enumerated(q, u, dist)) < 1e-9);
    CHECK(m.cost <= oracle::full_dtw_cost_enumerated(q, u, dist) + 1e-12);
    // The reported span really achieves the cost.
    const std::span<const Symbol> span(u.data() + m.start, m.end - m.start);
    CHECK(std::abs(oracle::full_dtw_cost_enumerated(q, span, dist) - m.cost) < 1e-9);
    // Appending symbols never increases the cost.
    u.push_back(random_string(rng, 1, k)[0]);
    CHECK(subsequence_dtw(q, u, table).cost <= m.cost);
  }
}

TEST_CASE("lookup scoring") {
  const auto t = constant_distance_table(5);
  {
    const CorpusIndex corpus({{"u1", {4, 4, 4}}, {"u2", {0, 1, 2, 3}}, {"u3", {3, 3}}});
    const auto r = lookup(SymbolString{1, 2}, corpus, t);
    CHECK(r.min_cost == 0.0);
    CHECK(r.pseudo_logprob == 0.0);
    CHECK_FALSE(std::signbit(r.pseudo_logprob));
    CHECK(r.argmin_utt == "u2");
    CHECK(r.argmin_start == 1);
    CHECK(r.argmin_end == 3);
  }
  {
    const CorpusIndex corpus({{"only", {0, 1, 0}}});
    const auto r = lookup(SymbolString{3, 3}, corpus, t);
    CHECK(r.min_cost == r.mean_cost);
    CHECK(r.pseudo_logprob == -1.0);
    CHECK_FALSE(r.degenerate);
  }
  {
    // Per-utterance costs 2, 4, 6 from a hand-built table.
    SymbolDistanceTable h;
    h.k = 4;
    h.dist.assign(16, 0.0);
    const double d[] = {2, 4, 6};
    for (int i = 1; i <= 3; ++i) h.dist[std::size_t(i)] = h.dist[std::size_t(i) * 4] = d[i - 1];
    const CorpusIndex corpus({{"a", {1}}, {"b", {2}}, {"c", {3}}});
    const auto r = lookup(SymbolString{0}, corpus, h);
    CHECK(r.min_cost == 2.0);
    CHECK(r.mean_cost == 4.0);
    CHECK(r.pseudo_logprob == -0.5);
    CHECK(lookup_score(r, false) == -2.0);
  }
  {
    const CorpusIndex corpus({{"a", {1, 2}}, {"b", {0, 1, 2}}});
    const auto r = lookup(SymbolString{1, 2}, corpus, t);
    CHECK(r.degenerate);
    CHECK(r.pseudo_logprob == -1.0);
  }
  CHECK_THROWS_AS(CorpusIndex({}), Error);
  CHECK_THROWS_AS(CorpusIndex({{"a", {1}}, {"a", {2}}}), Error);
}

TEST_CASE("lookup is independent of utterance order and bounded") {
  std::mt19937_64 rng(33);
  const auto table = random_table(rng, 4);
  std::vector<SymbolSequence> utts;
  for (int i = 0; i < 20; ++i) utts.push_back({"u" + std::to_string(i), random_string(rng, 10, 4)});
  const auto q = random_string(rng, 4, 4);
  const auto r = lookup(q, CorpusIndex(utts), table);
  CHECK(r.pseudo_logprob <= 0.0);
  CHECK(r.min_cost <= r.mean_cost * (1 + 1e-9));
  CHECK(r.pseudo_logprob == doctest::Approx(-r.min_cost / r.mean_cost));
  std::reverse(utts.begin(), utts.end());
  const auto s = lookup(q, CorpusIndex(utts), table);
  CHECK(s.min_cost == r.min_cost);
  CHECK(s.mean_cost == doctest::Approx(r.mean_cost).epsilon(1e-12));
}

TEST_CASE("pair classification") {
  CHECK(classify_pair(-0.3, -0.7) == PairChoice::kA);
  CHECK(classify_pair(-0.5, -0.5) == PairChoice::kA);
  CHECK(classify_pair(-0.9, -0.2) == PairChoice::kB);
}
