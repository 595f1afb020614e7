#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zrk/abx.hpp"
#include "zrk/io.hpp"
#include "zrk/quantize.hpp"
#include "zrk/repr.hpp"
#include "zrk/semantic.hpp"
#include "zrk/syntactic.hpp"

// Deterministic synthetic fixtures for every evaluation. Same parameters and
// seed always produce the same data (and byte-identical files).
namespace zrk::synth {

// --- ABX ------------------------------------------------------------------

enum class PhoneLayout {
  kGaussian,    // random unit-norm phone means
  kOrthogonal,  // phone p sits on coordinate axis p
  kIdentical,   // every phone shares one mean
};

struct AbxParams {
  std::size_t speakers = 4;
  std::size_t phones = 4;
  std::size_t contexts = 1;
  std::size_t tokens = 4;  // per (phone, context, speaker)
  std::size_t min_frames = 3;
  std::size_t max_frames = 5;
  std::size_t dim = 16;
  std::size_t speaker_dims = 0;  // 0 disables speaker offsets
  double speaker_scale = 1.0;
  double phone_scale = 1.0;
  double noise = 0.3;
  PhoneLayout layout = PhoneLayout::kGaussian;
  std::uint64_t seed = 0;
};

struct AbxFixture {
  std::vector<EmbeddingMatrix> utterances;  // one per speaker
  std::vector<AbxItem> items;
  std::vector<FrameLabel> speaker_labels;
  std::vector<FrameLabel> phone_labels;
  Eigen::MatrixXd speaker_subspace;  // speaker_dims x dim, orthonormal rows
};

AbxFixture make_abx(const AbxParams& p);

// --- sWUGGY -----------------------------------------------------------------

struct SwuggyParams {
  std::size_t groups = 10;          // clusters of mutually similar centroids
  std::size_t per_group = 5;        // k = groups * per_group
  std::size_t dim = 16;
  double group_spread = 0.15;       // within-group centroid jitter
  std::size_t words = 500;
  std::size_t min_word_len = 5;
  std::size_t max_word_len = 8;
  std::size_t utterances = 200;
  std::size_t max_filler = 3;       // random symbols between planted words
  double noise = 0.0;               // per-symbol within-group substitution rate
  std::uint64_t seed = 0;
};

struct SwuggyFixture {
  Codebook codebook;  // cosine metric
  std::vector<SymbolSequence> corpus;
  std::vector<SymbolSequence> queries;  // real and pseudo words
  std::vector<PairRecord> pairs;
};

SwuggyFixture make_swuggy(const SwuggyParams& p);

// --- sSIMI ------------------------------------------------------------------

struct SsimiParams {
  std::size_t words = 40;
  std::size_t alphabet = 20;
  std::size_t min_word_len = 3;
  std::size_t max_word_len = 5;
  std::size_t sentences = 3000;
  std::size_t sentence_len = 10;
  double topic_width = 0.08;  // co-occurrence bandwidth on the word line
  std::size_t pairs = 200;
  double max_pair_gap = 0.3;  // largest planted distance in the dataset
  double oov_rate = 0.0;      // fraction of queries perturbed off-vocabulary
  std::uint64_t seed = 0;
};

struct SsimiFixture {
  std::vector<SegmentedUtterance> corpus;
  std::vector<SymbolSequence> queries;
  std::vector<SimilarityRecord> dataset;
  std::vector<double> planted_similarity;  // per record, before the monotone map
};

SsimiFixture make_ssimi(const SsimiParams& p);

/// Two disjoint topics: sentences use only A-words or only B-words.
std::vector<std::vector<Piece>> two_topic_corpus(std::size_t words_per_topic,
                                                 std::size_t sentences,
                                                 std::size_t sentence_len, std::uint64_t seed);

// --- sBLIMP -----------------------------------------------------------------

struct SblimpParams {
  std::size_t alphabet = 20;
  std::size_t successors = 2;  // allowed next symbols per symbol
  std::size_t min_len = 6;
  std::size_t max_len = 12;
  std::size_t train_sentences = 2000;
  std::size_t pairs = 500;
  double longer_rate = 0.8;  // probability the incorrect sentence is longer
  std::uint64_t seed = 0;
};

struct SblimpFixture {
  std::vector<SymbolSequence> train;
  std::vector<SymbolSequence> sentences;
  std::vector<PairRecord> pairs;
};

SblimpFixture make_sblimp(const SblimpParams& p);

/// Resolves pair records against a sentence table.
std::vector<LabeledPair> labeled_pairs(std::span<const PairRecord> pairs,
                                       const std::map<std::string, SymbolString>& sentences);

// --- on disk ----------------------------------------------------------------

void write_abx(const std::filesystem::path& dir, const AbxFixture& f);
void write_swuggy(const std::filesystem::path& dir, const SwuggyFixture& f);
void write_ssimi(const std::filesystem::path& dir, const SsimiFixture& f);
void write_sblimp(const std::filesystem::path& dir, const SblimpFixture& f);

}  // namespace zrk::synth
