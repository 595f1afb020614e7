#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zrk/common.hpp"
#include "zrk/embedding.hpp"

namespace zrk {

/// k centroids plus the metric that defines nearest-centroid assignment.
/// Under the cosine metric the centroids are unit-norm.
struct Codebook {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // k x dim, row-major
  Metric metric = Metric::kEuclidean;
  double inertia = 0.0;

  std::span<const double> centroid(std::size_t i) const {
    return {centroids.data() + i * dim, dim};
  }
};

/// Quantized utterance: one centroid index per frame.
struct SymbolSequence {
  std::string utt_id;
  SymbolString symbols;

  bool operator==(const SymbolSequence&) const = default;
};

struct Block {
  Symbol symbol = 0;
  std::size_t run_length = 1;

  bool operator==(const Block&) const = default;
};

/// Run-length view of a SymbolSequence; adjacent blocks differ in symbol.
struct BlockSequence {
  std::string utt_id;
  std::vector<Block> blocks;

  bool operator==(const BlockSequence&) const = default;
};

struct KMeansOptions {
  std::size_t max_iters = 300;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultPseudoPhones = 50;

/// Per-iteration inertia of every restart, for convergence diagnostics.
struct KMeansTrace {
  std::vector<std::vector<double>> inertia;  // [restart][iteration]
};

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
/// Under the cosine metric rows are L2-normalized first and centroids are
/// renormalized after every update (spherical k-means). Inertia is the sum of
/// squared Euclidean distances, or of cosine distances, to the assigned
/// centroid.
Codebook kmeans_fit(const EmbeddingMatrix& data, std::size_t k, Metric metric,
                    const KMeansOptions& opts = {}, KMeansTrace* trace = nullptr);

/// Distance from a frame to centroid i under the codebook metric. The cosine
/// distance is 1 - cos, in [0, 2].
double centroid_distance(std::span<const float> frame, const Codebook& cb, std::size_t i);

/// Index of the nearest centroid; ties go to the lowest index.
Symbol nearest_centroid(std::span<const float> frame, const Codebook& cb);

SymbolSequence assign(const EmbeddingMatrix& emb, const Codebook& cb);

/// Replaces every frame e by alpha * c_e + (1 - alpha) * e, c_e being the
/// centroid e is assigned to. Leaves every assignment unchanged.
EmbeddingMatrix centroid_average(const EmbeddingMatrix& emb, const Codebook& cb, double alpha);

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& emb);

BlockSequence collapse_runs(const SymbolSequence& seq);
SymbolSequence expand_blocks(const BlockSequence& blocks);
/// Block symbols with run lengths dropped.
SymbolString block_symbols(const BlockSequence& blocks);

// Codebook on disk: ZRK1 k x dim matrix plus a sidecar `<path>.tsv` holding
// `metric<TAB>euclidean|cosine`.
void write_codebook(const std::filesystem::path& path, const Codebook& cb);
Codebook read_codebook(const std::filesystem::path& path);

}  // namespace zrk
