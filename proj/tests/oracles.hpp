#pragma once

// Brute-force reference implementations. Each one enumerates the search
// space directly instead of using dynamic programming, so agreement with the
// library is a real cross-check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "zrk/common.hpp"

namespace zrk::oracle {

// --- k-means ----------------------------------------------------------------

/// Minimum 1-D k=2 inertia over all 2-partitions into non-empty clusters.
/// Means and costs are accumulated in point order.
inline double kmeans_two_partition_optimum(std::span<const double> x) {
  const std::size_t n = x.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double sum[2] = {0.0, 0.0};
    std::size_t cnt[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int c = (mask >> i) & 1u;
      sum[c] += x[i];
      ++cnt[c];
    }
    const double mean[2] = {sum[0] / double(cnt[0]), sum[1] / double(cnt[1])};
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - mean[(mask >> i) & 1u];
      inertia += d * d;
    }
    best = std::min(best, inertia);
  }
  return best;
}

// --- alignment paths --------------------------------------------------------

/// Calls visit(cost, length) for every monotone path with steps (1,0), (0,1),
/// (1,1) from cell (0, j0) that ends in the last row. Cells are costed by
/// cell(i, j). With `any_end`, every visit of the last row counts as an end.
inline void enumerate_paths(std::size_t rows, std::size_t cols, std::size_t i, std::size_t j,
                            double cost, std::size_t len,
                            const std::function<double(std::size_t, std::size_t)>& cell,
                            bool any_end, std::size_t end_col,
                            const std::function<void(double, std::size_t, std::size_t)>& visit) {
  cost += cell(i, j);
  ++len;
  if (i + 1 == rows && (any_end || j == end_col)) visit(cost, len, j);
  if (i + 1 < rows) enumerate_paths(rows, cols, i + 1, j, cost, len, cell, any_end, end_col, visit);
  if (j + 1 < cols) enumerate_paths(rows, cols, i, j + 1, cost, len, cell, any_end, end_col, visit);
  if (i + 1 < rows && j + 1 < cols)
    enumerate_paths(rows, cols, i + 1, j + 1, cost, len, cell, any_end, end_col, visit);
}

/// Full DTW by path enumeration: the cheapest path from (0,0) to the corner,
/// shortest among equal costs, returned as cost / length.
inline double dtw_enumerated(std::size_t rows, std::size_t cols,
                             const std::function<double(std::size_t, std::size_t)>& cell) {
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t best_len = 0;
  enumerate_paths(rows, cols, 0, 0, 0.0, 0, cell, false, cols - 1,
                  [&](double c, std::size_t len, std::size_t) {
                    if (c < best_cost || (c == best_cost && len < best_len)) {
                      best_cost = c;
                      best_len = len;
                    }
                  });
  return best_cost / double(best_len);
}

/// Subsequence DTW by enumeration: all start columns, all paths, any end.
inline double subsequence_dtw_enumerated(std::span<const Symbol> q, std::span<const Symbol> u,
                                         const std::function<double(Symbol, Symbol)>& dist) {
  double best = std::numeric_limits<double>::infinity();
  const auto cell = [&](std::size_t i, std::size_t j) { return dist(q[i], u[j]); };
  for (std::size_t s = 0; s < u.size(); ++s)
    enumerate_paths(q.size(), u.size(), 0, s, 0.0, 0, cell, true, 0,
                    [&](double c, std::size_t, std::size_t) { best = std::min(best, c); });
  return best;
}

/// Plain DTW cost (sum, not normalized) of q against all of u.
inline double full_dtw_cost_enumerated(std::span<const Symbol> q, std::span<const Symbol> u,
                                       const std::function<double(Symbol, Symbol)>& dist) {
  double best = std::numeric_limits<double>::infinity();
  const auto cell = [&](std::size_t i, std::size_t j) { return dist(q[i], u[j]); };
  enumerate_paths(q.size(), u.size(), 0, 0, 0.0, 0, cell, false, u.size() - 1,
                  [&](double c, std::size_t, std::size_t) { best = std::min(best, c); });
  return best;
}

// --- segmentation -----------------------------------------------------------

struct BruteSegmentation {
  bool found = false;
  double logprob = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pieces;
};

/// Best segmentation over all 2^(n-1) split patterns. `piece_of` maps a
/// substring to its vocabulary index (or -1) and `logprob` gives its score.
/// Ties prefer fewer pieces, then the smaller index sequence.
inline BruteSegmentation segment_enumerated(
    std::span<const Symbol> s,
    const std::function<long(std::span<const Symbol>)>& piece_of,
    const std::function<double(std::size_t)>& logprob) {
  BruteSegmentation best;
  const std::size_t n = s.size();
  for (std::uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    std::vector<std::size_t> pieces;
    double lp = 0.0;
    std::size_t start = 0;
    bool ok = true;
    for (std::size_t i = 1; i <= n && ok; ++i) {
      if (i == n || ((cuts >> (i - 1)) & 1u)) {
        const long idx = piece_of(s.subspan(start, i - start));
        if (idx < 0) {
          ok = false;
        } else {
          pieces.push_back(std::size_t(idx));
          lp += logprob(std::size_t(idx));
        }
        start = i;
      }
    }
    if (!ok) continue;
    const bool better = !best.found || lp > best.logprob ||
                        (lp == best.logprob && (pieces.size() < best.pieces.size() ||
                                                (pieces.size() == best.pieces.size() &&
                                                 pieces < best.pieces)));
    if (better) best = {true, lp, pieces};
  }
  return best;
}

/// log P(s) summed over every segmentation, by enumeration.
inline double marginal_enumerated(std::span<const Symbol> s,
                                  const std::function<long(std::span<const Symbol>)>& piece_of,
                                  const std::function<double(std::size_t)>& logprob) {
  const std::size_t n = s.size();
  double total = 0.0;
  for (std::uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    double lp = 0.0;
    std::size_t start = 0;
    bool ok = true;
    for (std::size_t i = 1; i <= n && ok; ++i) {
      if (i == n || ((cuts >> (i - 1)) & 1u)) {
        const long idx = piece_of(s.subspan(start, i - start));
        if (idx < 0) ok = false;
        else lp += logprob(std::size_t(idx));
        start = i;
      }
    }
    if (ok) total += std::exp(lp);
  }
  return std::log(total);
}

// --- edit distance ----------------------------------------------------------

/// Levenshtein distance by plain recursion over edit scripts.
inline std::size_t edit_distance_recursive(std::span<const Symbol> a, std::span<const Symbol> b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t sub = edit_distance_recursive(a.subspan(1), b.subspan(1)) + (a[0] != b[0]);
  const std::size_t del = edit_distance_recursive(a.subspan(1), b) + 1;
  const std::size_t ins = edit_distance_recursive(a, b.subspan(1)) + 1;
  return std::min({sub, del, ins});
}

// --- rank correlation -------------------------------------------------------

/// Mid-rank of every value by counting smaller and equal entries.
inline std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = double(less) + (double(equal) + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman_oracle(std::span<const double> a, std::span<const double> b) {
  const auto ra = mid_ranks(a), rb = mid_ranks(b);
  return pearson(ra, rb);
}

}  // namespace zrk::oracle
