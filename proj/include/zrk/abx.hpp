#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "zrk/embedding.hpp"

namespace zrk {

/// A labeled phone segment: frames [onset, offset) of utterance utt_id.
struct AbxItem {
  std::string utt_id;
  std::size_t onset = 0;
  std::size_t offset = 0;
  std::string phone;
  std::string prev;
  std::string next;
  std::string speaker;
};

enum class AbxMode { kWithin, kAcross };
enum class FrameMetric { kCosine, kAngular };

AbxMode parse_abx_mode(const std::string& s);
std::string abx_mode_name(AbxMode m);
FrameMetric parse_frame_metric(const std::string& s);

struct AbxResult {
  AbxMode mode = AbxMode::kWithin;
  double error_rate = 0.0;
  std::size_t n_cells = 0;
  std::size_t n_triplets = 0;
};

/// Frame distance: 1 - cos (cosine) or arccos(cos) / pi (angular). A frame
/// with zero norm is treated as orthogonal to everything.
double frame_distance(std::span<const float> a, std::span<const float> b, FrameMetric metric);

/// DTW over the frame-distance matrix with unit steps (1,0), (0,1), (1,1).
/// Returns the cost of the cheapest path divided by its length in cells;
/// among equal-cost paths the shorter one is taken.
double dtw_frame_distance(const EmbeddingMatrix& a, const EmbeddingMatrix& x,
                          FrameMetric metric = FrameMetric::kCosine);

using UtteranceStore = std::map<std::string, EmbeddingMatrix, std::less<>>;

UtteranceStore make_store(std::span<const EmbeddingMatrix> utts);

/// ABX error over cells of (phone A, phone B, context, speaker setup).
///
/// within: a, b, x share a speaker; a and x are distinct tokens of phone A,
///         b is phone B in the same context.
/// across: a and b come from one speaker, x from another, x has phone A.
///
/// Each triplet scores 1 if d(a,x) < d(b,x), 0.5 on a tie, else 0. The error
/// is one minus the mean over cells of each cell's mean score.
AbxResult abx_error(std::span<const AbxItem> items, const UtteranceStore& store, AbxMode mode,
                    FrameMetric metric = FrameMetric::kCosine);

}  // namespace zrk
