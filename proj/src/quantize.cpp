#include "zrk/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace zrk {

namespace {

// Working copy of the training data in double precision.
struct Points {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> x;

  const double* row(std::size_t i) const { return x.data() + i * dim; }
};

Points to_points(const EmbeddingMatrix& data, Metric metric) {
  Points p{data.frames(), data.dim(), std::vector<double>(data.data().begin(), data.data().end())};
  if (metric == Metric::kCosine) {
    for (std::size_t i = 0; i < p.n; ++i) {
      double* r = p.x.data() + i * p.dim;
      double norm = 0.0;
      for (std::size_t j = 0; j < p.dim; ++j) norm += r[j] * r[j];
      if (norm == 0.0)
        throw Error("cosine k-means: frame " + std::to_string(i) + " has zero norm");
      norm = std::sqrt(norm);
      for (std::size_t j = 0; j < p.dim; ++j) r[j] /= norm;
    }
  }
  return p;
}

// Squared Euclidean distance, or 1 - dot for unit vectors.
double point_cost(const double* x, const double* c, std::size_t dim, Metric metric) {
  if (metric == Metric::kEuclidean) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = x[j] - c[j];
      s += d * d;
    }
    return s;
  }
  double dot = 0.0;
  for (std::size_t j = 0; j < dim; ++j) dot += x[j] * c[j];
  return 1.0 - dot;
}

bool normalize_in_place(double* c, std::size_t dim) {
  double norm = 0.0;
  for (std::size_t j = 0; j < dim; ++j) norm += c[j] * c[j];
  if (norm == 0.0) return false;
  norm = std::sqrt(norm);
  for (std::size_t j = 0; j < dim; ++j) c[j] /= norm;
  return true;
}

std::vector<double> kmeanspp_init(const Points& p, std::size_t k, Metric metric,
                                  std::mt19937_64& rng) {
  std::vector<double> centers(k * p.dim);
  std::uniform_int_distribution<std::size_t> first(0, p.n - 1);
  std::size_t pick = first(rng);
  std::copy_n(p.row(pick), p.dim, centers.begin());
  std::vector<double> best(p.n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    const double* prev = centers.data() + (c - 1) * p.dim;
    double total = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
      best[i] = std::min(best[i], std::max(0.0, point_cost(p.row(i), prev, p.dim, metric)));
      total += best[i];
    }
    if (!(total > 0.0))
      throw Error("k-means: fewer than k=" + std::to_string(k) + " distinct points");
    std::uniform_real_distribution<double> u(0.0, total);
    const double target = u(rng);
    double acc = 0.0;
    pick = p.n;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.n; ++i) {
      if (best[i] <= 0.0) continue;
      last_positive = i;
      acc += best[i];
      if (acc > target) {
        pick = i;
        break;
      }
    }
    if (pick == p.n) pick = last_positive;
    std::copy_n(p.row(pick), p.dim, centers.begin() + std::ptrdiff_t(c * p.dim));
  }
  return centers;
}

struct Assignment {
  std::vector<std::size_t> label;
  std::vector<double> cost;
  double inertia = 0.0;
};

Assignment assign_points(const Points& p, const std::vector<double>& centers, std::size_t k,
                         Metric metric) {
  Assignment a{std::vector<std::size_t>(p.n), std::vector<double>(p.n), 0.0};
  for (std::size_t i = 0; i < p.n; ++i) {
    std::size_t arg = 0;
    double best = point_cost(p.row(i), centers.data(), p.dim, metric);
    for (std::size_t c = 1; c < k; ++c) {
      const double d = point_cost(p.row(i), centers.data() + c * p.dim, p.dim, metric);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    a.label[i] = arg;
    a.cost[i] = best;
    a.inertia += best;
  }
  return a;
}

void update_centers(const Points& p, Assignment& a, std::vector<double>& centers, std::size_t k,
                    Metric metric) {
  std::vector<double> sums(k * p.dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < p.n; ++i) {
    double* s = sums.data() + a.label[i] * p.dim;
    const double* x = p.row(i);
    for (std::size_t j = 0; j < p.dim; ++j) s[j] += x[j];
    ++counts[a.label[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    double* dst = centers.data() + c * p.dim;
    bool ok = counts[c] > 0;
    if (ok) {
      for (std::size_t j = 0; j < p.dim; ++j) dst[j] = sums[c * p.dim + j] / double(counts[c]);
      if (metric == Metric::kCosine) ok = normalize_in_place(dst, p.dim);
    }
    if (!ok) {
      // Empty cluster: reseed with the point farthest from its centroid.
      std::size_t far = 0;
      for (std::size_t i = 1; i < p.n; ++i)
        if (a.cost[i] > a.cost[far]) far = i;
      std::copy_n(p.row(far), p.dim, dst);
      a.cost[far] = -1.0;
    }
  }
}

}  // namespace

Codebook kmeans_fit(const EmbeddingMatrix& data, std::size_t k, Metric metric,
                    const KMeansOptions& opts, KMeansTrace* trace) {
  if (k == 0) throw Error("k-means: k must be >= 1");
  if (k > data.frames())
    throw Error("k-means: k=" + std::to_string(k) + " exceeds " + std::to_string(data.frames()) +
                " data rows");
  const Points p = to_points(data, metric);
  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
  if (trace) trace->inertia.assign(restarts, {});

  Codebook best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(derive_seed(opts.seed, "kmeans-restart-" + std::to_string(r)));
    std::vector<double> centers = kmeanspp_init(p, k, metric, rng);
    Assignment a = assign_points(p, centers, k, metric);
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
      if (trace) trace->inertia[r].push_back(a.inertia);
      update_centers(p, a, centers, k, metric);
      Assignment next = assign_points(p, centers, k, metric);
      const bool changed = next.label != a.label;
      a = std::move(next);
      if (!changed) break;
    }
    if (trace) trace->inertia[r].push_back(a.inertia);
    if (a.inertia < best.inertia) {
      best.k = k;
      best.dim = p.dim;
      best.centroids = std::move(centers);
      best.metric = metric;
      best.inertia = a.inertia;
    }
  }
  return best;
}

double centroid_distance(std::span<const float> frame, const Codebook& cb, std::size_t i) {
  const auto c = cb.centroid(i);
  if (cb.metric == Metric::kEuclidean) {
    double s = 0.0;
    for (std::size_t j = 0; j < cb.dim; ++j) {
      const double d = double(frame[j]) - c[j];
      s += d * d;
    }
    return std::sqrt(s);
  }
  double dot = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < cb.dim; ++j) {
    dot += double(frame[j]) * c[j];
    norm += double(frame[j]) * double(frame[j]);
  }
  if (norm == 0.0) throw Error("cosine distance of a zero-norm frame");
  return 1.0 - dot / std::sqrt(norm);
}

Symbol nearest_centroid(std::span<const float> frame, const Codebook& cb) {
  if (frame.size() != cb.dim)
    throw Error("dimension mismatch: frame dim " + std::to_string(frame.size()) +
                ", codebook dim " + std::to_string(cb.dim));
  std::size_t arg = 0;
  if (cb.metric == Metric::kEuclidean) {
    // Squared distances preserve the argmin.
    auto sq = [&](std::size_t i) {
      const auto c = cb.centroid(i);
      double s = 0.0;
      for (std::size_t j = 0; j < cb.dim; ++j) {
        const double d = double(frame[j]) - c[j];
        s += d * d;
      }
      return s;
    };
    double best = sq(0);
    for (std::size_t i = 1; i < cb.k; ++i) {
      const double d = sq(i);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
  } else {
    double best = centroid_distance(frame, cb, 0);
    for (std::size_t i = 1; i < cb.k; ++i) {
      const double d = centroid_distance(frame, cb, i);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
  }
  return static_cast<Symbol>(arg);
}

SymbolSequence assign(const EmbeddingMatrix& emb, const Codebook& cb) {
  if (emb.dim() != cb.dim)
    throw Error("dimension mismatch: '" + emb.utt_id() + "' has dim " + std::to_string(emb.dim()) +
                ", codebook dim " + std::to_string(cb.dim));
  SymbolSequence out{emb.utt_id(), SymbolString(emb.frames())};
  for (std::size_t f = 0; f < emb.frames(); ++f) {
    try {
      out.symbols[f] = nearest_centroid(emb.row(f), cb);
    } catch (const Error& e) {
      throw Error("'" + emb.utt_id() + "' frame " + std::to_string(f) + ": " + e.what());
    }
  }
  return out;
}

EmbeddingMatrix centroid_average(const EmbeddingMatrix& emb, const Codebook& cb, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("centroid weight alpha must lie in [0, 1]");
  const SymbolSequence labels = assign(emb, cb);
  std::vector<float> out(emb.data().size());
  for (std::size_t f = 0; f < emb.frames(); ++f) {
    const auto e = emb.row(f);
    const auto c = cb.centroid(std::size_t(labels.symbols[f]));
    for (std::size_t j = 0; j < emb.dim(); ++j)
      out[f * emb.dim() + j] = float(alpha * c[j] + (1.0 - alpha) * double(e[j]));
  }
  return EmbeddingMatrix(emb.utt_id(), emb.frames(), emb.dim(), std::move(out));
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& emb) {
  std::vector<float> out(emb.data().size());
  for (std::size_t f = 0; f < emb.frames(); ++f) {
    const auto e = emb.row(f);
    double norm = 0.0;
    for (float v : e) norm += double(v) * double(v);
    if (norm == 0.0)
      throw Error("l2_normalize: '" + emb.utt_id() + "' frame " + std::to_string(f) +
                  " has zero norm");
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < emb.dim(); ++j) out[f * emb.dim() + j] = float(double(e[j]) / norm);
  }
  return EmbeddingMatrix(emb.utt_id(), emb.frames(), emb.dim(), std::move(out));
}

BlockSequence collapse_runs(const SymbolSequence& seq) {
  if (seq.symbols.empty()) throw Error("collapse_runs: '" + seq.utt_id + "' is empty");
  BlockSequence out{seq.utt_id, {}};
  for (Symbol s : seq.symbols) {
    if (!out.blocks.empty() && out.blocks.back().symbol == s)
      ++out.blocks.back().run_length;
    else
      out.blocks.push_back({s, 1});
  }
  return out;
}

SymbolSequence expand_blocks(const BlockSequence& blocks) {
  SymbolSequence out{blocks.utt_id, {}};
  for (const auto& b : blocks.blocks) out.symbols.insert(out.symbols.end(), b.run_length, b.symbol);
  return out;
}

SymbolString block_symbols(const BlockSequence& blocks) {
  SymbolString out;
  out.reserve(blocks.blocks.size());
  for (const auto& b : blocks.blocks) out.push_back(b.symbol);
  return out;
}

void write_codebook(const std::filesystem::path& path, const Codebook& cb) {
  std::vector<float> data(cb.centroids.begin(), cb.centroids.end());
  write_zrk1(path, EmbeddingMatrix(path.stem().string(), cb.k, cb.dim, std::move(data)));
  std::ofstream side(path.string() + ".tsv", std::ios::trunc);
  if (!side) throw Error("cannot write " + path.string() + ".tsv");
  side << "metric\t" << metric_name(cb.metric) << "\n";
}

Codebook read_codebook(const std::filesystem::path& path) {
  const EmbeddingMatrix m = read_zrk1(path);
  Codebook cb;
  cb.k = m.frames();
  cb.dim = m.dim();
  cb.centroids.assign(m.data().begin(), m.data().end());
  std::ifstream side(path.string() + ".tsv");
  if (!side) throw Error("missing codebook sidecar " + path.string() + ".tsv");
  std::string line;
  bool have_metric = false;
  while (std::getline(side, line)) {
    std::istringstream fields(line);
    std::string key, value;
    if (!std::getline(fields, key, '\t') || !std::getline(fields, value)) continue;
    if (key == "metric") {
      cb.metric = parse_metric(value);
      have_metric = true;
    }
  }
  if (!have_metric) throw Error(path.string() + ".tsv: no metric line");
  if (cb.metric == Metric::kCosine) {
    for (std::size_t i = 0; i < cb.k; ++i)
      if (!normalize_in_place(cb.centroids.data() + i * cb.dim, cb.dim))
        throw Error(path.string() + ": zero centroid " + std::to_string(i) + " in cosine codebook");
  }
  return cb;
}

}  // namespace zrk
