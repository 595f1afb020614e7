#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "zrk/quantize.hpp"

namespace zrk {

using Piece = SymbolString;

struct PieceHash {
  std::size_t operator()(const Piece& p) const noexcept;
};

// --- block unification ------------------------------------------------------

/// Run lengths 1, 2-3, 4-7, 8+ map to buckets 0..3.
int run_length_bucket(std::size_t run_length);

/// One relabeling round: (symbol, run-length bucket) -> new symbol.
using UnifyRound = std::map<std::pair<Symbol, int>, Symbol>;

/// Replayable record of all merge rounds, so the same unification can be
/// applied to query utterances later.
struct UnifyMap {
  std::vector<UnifyRound> rounds;
};

struct UnifyResult {
  std::vector<BlockSequence> corpus;
  UnifyMap map;
};

/// Merges block types whose context vectors (counts of the preceding and
/// following block symbols) have cosine similarity >= threshold. The less
/// frequent type takes the symbol of the more frequent one; adjacent blocks
/// that end up with equal symbols are merged. Repeats until nothing merges.
UnifyResult unify_similar_blocks(std::span<const BlockSequence> corpus, double sim_threshold);

std::vector<BlockSequence> apply_unify_map(std::span<const BlockSequence> corpus,
                                           const UnifyMap& map);

void write_unify_map(const std::filesystem::path& path, const UnifyMap& map);
UnifyMap read_unify_map(const std::filesystem::path& path);

// --- unigram LM -------------------------------------------------------------

/// Piece vocabulary with log-probabilities summing to 1 in probability space.
/// Every symbol that occurs in any piece is also present as a single-symbol
/// piece, so any string over that alphabet can be segmented.
class UnigramLM {
 public:
  UnigramLM() = default;
  UnigramLM(std::vector<Piece> pieces, std::vector<double> logprob, std::size_t target_size = 0);

  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<double>& logprob() const { return logprob_; }
  std::size_t size() const { return pieces_.size(); }
  std::size_t target_size() const { return target_size_; }
  std::size_t max_piece_len() const { return max_len_; }

  std::optional<std::size_t> find(std::span<const Symbol> piece) const;

 private:
  std::vector<Piece> pieces_;
  std::vector<double> logprob_;
  std::size_t target_size_ = 0;
  std::size_t max_len_ = 0;
  std::unordered_map<Piece, std::size_t, PieceHash> index_;
};

struct UnigramOptions {
  std::size_t target_vocab = 50000;
  std::size_t seed_multiplier = 10;
  std::size_t max_piece_len = 8;
  std::size_t em_iters = 2;
  double prune_fraction = 0.2;
};

/// Corpus log-likelihood before every EM update, in training order.
struct UnigramTrace {
  std::vector<double> loglik;
  std::vector<std::size_t> vocab_size;  // vocabulary size at each entry
};

/// Sum over utterances of log P(x), marginalizing over all segmentations.
double corpus_loglik(const UnigramLM& lm, std::span<const SymbolString> corpus);

/// One EM update at fixed vocabulary; returns the log-likelihood under the
/// model it started from. Pieces (other than single symbols) whose expected
/// count is zero are dropped.
double em_step(UnigramLM& lm, std::span<const SymbolString> corpus);

UnigramLM train_unigram(std::span<const SymbolString> corpus, const UnigramOptions& opts = {},
                        UnigramTrace* trace = nullptr);

struct Segmentation {
  std::string utt_id;
  std::vector<std::size_t> pieces;
  double logprob = 0.0;
};

/// Most probable segmentation under P(x) = prod p(x_i). Ties prefer fewer
/// pieces, then the lexicographically smallest piece-index sequence.
Segmentation viterbi_segment(std::span<const Symbol> utt, const UnigramLM& lm,
                             std::string utt_id = {});

struct SegmentStats {
  std::size_t utterances = 0;
  double mean_pieces = 0.0;       // pieces per utterance
  double mean_piece_length = 0.0; // symbols per piece
};

std::vector<Segmentation> segment_corpus(std::span<const SymbolSequence> corpus,
                                         const UnigramLM& lm, SegmentStats* stats = nullptr);

/// Piece symbols of a segmentation, in order.
std::vector<Piece> segmentation_pieces(const Segmentation& seg, const UnigramLM& lm);

std::string format_piece(std::span<const Symbol> piece);
Piece parse_piece(const std::string& text);

void write_unigram(const std::filesystem::path& path, const UnigramLM& lm);
UnigramLM read_unigram(const std::filesystem::path& path);

}  // namespace zrk
