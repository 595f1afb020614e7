#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zrk/embedding.hpp"

namespace zrk {

/// One row of an alignment file: frame `frame` of `utt_id` carries `label`.
struct FrameLabel {
  std::string utt_id;
  std::size_t frame = 0;
  std::string label;
};

/// Labeled frames gathered from a set of utterances, ready for training.
struct LabeledFrames {
  Eigen::MatrixXd x;                     // n x dim
  std::vector<int> y;                    // n, values in [0, label_names.size())
  std::vector<std::string> label_names;  // sorted
};

/// Collects the frames named by an alignment. Label ids follow the sorted
/// order of label names. Throws if an alignment row points at a missing
/// utterance or frame, or if the utterances disagree on dim.
LabeledFrames gather_labeled_frames(std::span<const EmbeddingMatrix> utts,
                                    std::span<const FrameLabel> alignment);

struct SgdOptions {
  std::size_t epochs = 10;
  double lr = 0.01;
  std::size_t batch = 256;
  std::uint64_t seed = 0;
};

/// Speaker classifier softmax(B * A * e + bias) with a linear bottleneck A.
struct FactorizedClassifier {
  Eigen::MatrixXd a;     // d_inb x d_emb
  Eigen::MatrixXd b;     // d_cls x d_inb
  Eigen::VectorXd bias;  // d_cls
  std::vector<std::string> label_names;
  double train_accuracy = 0.0;

  std::size_t d_emb() const { return static_cast<std::size_t>(a.cols()); }
  std::size_t d_inb() const { return static_cast<std::size_t>(a.rows()); }
  int predict(const Eigen::Ref<const Eigen::VectorXd>& e) const;
};

FactorizedClassifier train_factorized_classifier(const LabeledFrames& data, std::size_t d_inb,
                                                 const SgdOptions& opts = {});

/// Orthonormal basis of the kernel of a classifier's bottleneck factor.
struct NullspaceProjector {
  Eigen::MatrixXd basis;  // (d_emb - rank) x d_emb, orthonormal rows
  std::size_t source_rank = 0;
  // Set when A had fewer than d_inb singular values above tolerance; the
  // basis then spans the correspondingly larger kernel.
  bool rank_deficient = false;

  std::size_t input_dim() const { return static_cast<std::size_t>(basis.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(basis.rows()); }
};

inline constexpr double kDefaultNullspaceRelTol = 1e-6;

NullspaceProjector compute_nullspace(const Eigen::MatrixXd& a,
                                     double rel_tol = kDefaultNullspaceRelTol);
inline NullspaceProjector compute_nullspace(const FactorizedClassifier& clf,
                                            double rel_tol = kDefaultNullspaceRelTol) {
  return compute_nullspace(clf.a, rel_tol);
}

/// Returns emb * basis^T.
EmbeddingMatrix project(const EmbeddingMatrix& emb, const NullspaceProjector& proj);

/// Trains a plain softmax linear classifier on a seeded random split and
/// returns its accuracy on the held-out part.
double linear_probe(const LabeledFrames& data, double split_fraction, const SgdOptions& opts = {});

}  // namespace zrk
