#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zrk/segment.hpp"

namespace zrk {

/// Skip-gram vectors for pseudo-words. Vocabulary is ordered by descending
/// training frequency, so a lower index never means a rarer piece.
struct WordEmbeddings {
  std::vector<Piece> vocab;
  std::vector<std::size_t> counts;  // empty when loaded from disk
  std::size_t dim = 0;
  std::vector<float> vectors;  // |vocab| x dim

  std::span<const float> row(std::size_t i) const { return {vectors.data() + i * dim, dim}; }
  std::optional<std::size_t> find(std::span<const Symbol> piece) const;
};

struct SkipGramOptions {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr = 0.025;
  std::size_t min_count = 3;
  std::uint64_t seed = 0;
};

/// Skip-gram with negative sampling (unigram^0.75 noise, linearly decaying
/// learning rate). Single-threaded and deterministic for a fixed seed.
WordEmbeddings train_skipgram(std::span<const std::vector<Piece>> corpus,
                              const SkipGramOptions& opts = {});

/// Unit-cost Levenshtein distance.
std::size_t edit_distance(std::span<const Symbol> a, std::span<const Symbol> b);

/// Vector of an in-vocabulary query; otherwise the mean vector of the
/// n_matches pieces closest in edit distance (ties: higher frequency first,
/// then lower vocabulary index).
std::vector<double> embed_query(std::span<const Symbol> query, const WordEmbeddings& emb,
                                std::size_t n_matches = 5);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Pearson correlation of mid-ranks.
double spearman(std::span<const double> pred, std::span<const double> gold);

struct SimilarityRecord {
  std::string utt_a;
  std::string utt_b;
  double human_score = 0.0;
};

/// Spearman correlation (x100) between cosine similarities of embedded
/// query pairs and human scores.
double evaluate_ssimi(std::span<const SimilarityRecord> dataset, const WordEmbeddings& emb,
                      const std::map<std::string, SymbolString>& query_map,
                      std::size_t n_matches = 5, std::vector<double>* predictions = nullptr);

// Embedding file: header `dim<TAB>N`, then `piece<TAB>v1,v2,...` per row in
// vocabulary order.
void write_embeddings(const std::filesystem::path& path, const WordEmbeddings& emb);
WordEmbeddings read_embeddings(const std::filesystem::path& path);

std::vector<SimilarityRecord> read_similarity_dataset(const std::filesystem::path& path);

}  // namespace zrk
