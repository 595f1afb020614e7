#include "zrk/abx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include "zrk/common.hpp"

namespace zrk {

AbxMode parse_abx_mode(const std::string& s) {
  if (s == "within") return AbxMode::kWithin;
  if (s == "across") return AbxMode::kAcross;
  throw Error("unknown ABX mode '" + s + "' (expected within|across)");
}

std::string abx_mode_name(AbxMode m) { return m == AbxMode::kWithin ? "within" : "across"; }

FrameMetric parse_frame_metric(const std::string& s) {
  if (s == "cosine") return FrameMetric::kCosine;
  if (s == "angular") return FrameMetric::kAngular;
  throw Error("unknown frame metric '" + s + "' (expected cosine|angular)");
}

double frame_distance(std::span<const float> a, std::span<const float> b, FrameMetric metric) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += double(a[j]) * double(b[j]);
    na += double(a[j]) * double(a[j]);
    nb += double(b[j]) * double(b[j]);
  }
  double cos = (na == 0.0 || nb == 0.0) ? 0.0 : dot / std::sqrt(na * nb);
  cos = std::clamp(cos, -1.0, 1.0);
  if (metric == FrameMetric::kCosine) return 1.0 - cos;
  return std::acos(cos) / std::numbers::pi;
}

double dtw_frame_distance(const EmbeddingMatrix& a, const EmbeddingMatrix& x, FrameMetric metric) {
  if (a.dim() != x.dim())
    throw Error("dtw: dimension mismatch between '" + a.utt_id() + "' and '" + x.utt_id() + "'");
  const std::size_t n = a.frames(), m = x.frames();
  struct Cell {
    double cost;
    std::size_t len;
  };
  auto better = [](const Cell& p, const Cell& q) {
    return p.cost < q.cost || (p.cost == q.cost && p.len < q.len);
  };
  std::vector<Cell> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = frame_distance(a.row(i), x.row(j), metric);
      if (i == 0 && j == 0) {
        cur[j] = {c, 1};
        continue;
      }
      Cell best{0.0, 0};
      bool have = false;
      auto offer = [&](const Cell& cand) {
        if (!have || better(cand, best)) best = cand;
        have = true;
      };
      if (i > 0 && j > 0) offer(prev[j - 1]);
      if (i > 0) offer(prev[j]);
      if (j > 0) offer(cur[j - 1]);
      cur[j] = {best.cost + c, best.len + 1};
    }
    std::swap(prev, cur);
  }
  const Cell& end = prev[m - 1];
  return end.cost / double(end.len);
}

UtteranceStore make_store(std::span<const EmbeddingMatrix> utts) {
  UtteranceStore store;
  for (const auto& u : utts) {
    if (!store.emplace(u.utt_id(), u).second)
      throw Error("duplicate utterance id '" + u.utt_id() + "'");
  }
  return store;
}

namespace {

struct CellSpec {
  std::vector<std::size_t> a, b, x;  // item indices
};

// Fixed-order key so that cell order never depends on item order.
using CellKey = std::tuple<std::string, std::string, std::string, std::string, std::string,
                           std::string>;  // prev, next, phone A, phone B, speaker ab, speaker x

}  // namespace

AbxResult abx_error(std::span<const AbxItem> items, const UtteranceStore& store, AbxMode mode,
                    FrameMetric metric) {
  std::vector<EmbeddingMatrix> segments;
  segments.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    auto found = store.find(it.utt_id);
    if (found == store.end())
      throw Error("ABX item " + std::to_string(i) + " references unknown utterance '" +
                  it.utt_id + "'");
    if (it.onset >= it.offset || it.offset > found->second.frames())
      throw Error("ABX item " + std::to_string(i) + " has invalid span [" +
                  std::to_string(it.onset) + ", " + std::to_string(it.offset) + ") in '" +
                  it.utt_id + "' (" + std::to_string(found->second.frames()) + " frames)");
    segments.push_back(found->second.slice(it.onset, it.offset));
  }

  // context -> speaker -> phone -> items
  std::map<std::pair<std::string, std::string>,
           std::map<std::string, std::map<std::string, std::vector<std::size_t>>>>
      groups;
  for (std::size_t i = 0; i < items.size(); ++i)
    groups[{items[i].prev, items[i].next}][items[i].speaker][items[i].phone].push_back(i);

  std::map<CellKey, CellSpec> cells;
  for (const auto& [ctx, speakers] : groups) {
    for (const auto& [spk_ab, phones] : speakers) {
      for (const auto& [pa, a_items] : phones) {
        for (const auto& [pb, b_items] : phones) {
          if (pa == pb) continue;
          if (mode == AbxMode::kWithin) {
            if (a_items.size() < 2) continue;
            cells[{ctx.first, ctx.second, pa, pb, spk_ab, spk_ab}] = {a_items, b_items, a_items};
          } else {
            for (const auto& [spk_x, x_phones] : speakers) {
              if (spk_x == spk_ab) continue;
              auto xs = x_phones.find(pa);
              if (xs == x_phones.end()) continue;
              cells[{ctx.first, ctx.second, pa, pb, spk_ab, spk_x}] = {a_items, b_items, xs->second};
            }
          }
        }
      }
    }
  }
  if (cells.empty()) throw Error("no valid ABX cells for mode '" + abx_mode_name(mode) + "'");

  std::vector<const CellSpec*> order;
  order.reserve(cells.size());
  for (const auto& [key, spec] : cells) order.push_back(&spec);

  std::vector<double> cell_score(order.size());
  std::vector<std::size_t> cell_triplets(order.size());
  parallel_for(order.size(), [&](std::size_t c) {
    const CellSpec& cell = *order[c];
    double score = 0.0;
    std::size_t count = 0;
    for (std::size_t x : cell.x) {
      std::vector<double> dbx(cell.b.size());
      for (std::size_t j = 0; j < cell.b.size(); ++j)
        dbx[j] = dtw_frame_distance(segments[cell.b[j]], segments[x], metric);
      for (std::size_t a : cell.a) {
        if (a == x) continue;
        const double dax = dtw_frame_distance(segments[a], segments[x], metric);
        for (double d : dbx) {
          score += dax < d ? 1.0 : (dax == d ? 0.5 : 0.0);
          ++count;
        }
      }
    }
    cell_score[c] = count ? score / double(count) : 0.0;
    cell_triplets[c] = count;
  });

  AbxResult result;
  result.mode = mode;
  double total = 0.0;
  for (std::size_t c = 0; c < order.size(); ++c) {
    if (cell_triplets[c] == 0) continue;
    total += cell_score[c];
    ++result.n_cells;
    result.n_triplets += cell_triplets[c];
  }
  if (result.n_cells == 0) throw Error("no valid ABX cells for mode '" + abx_mode_name(mode) + "'");
  result.error_rate = 1.0 - total / double(result.n_cells);
  return result;
}

}  // namespace zrk
