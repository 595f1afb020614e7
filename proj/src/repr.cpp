#include "zrk/repr.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "zrk/common.hpp"

namespace zrk {

LabeledFrames gather_labeled_frames(std::span<const EmbeddingMatrix> utts,
                                    std::span<const FrameLabel> alignment) {
  if (utts.empty() || alignment.empty()) throw Error("no labeled frames");
  const std::size_t dim = utts.front().dim();
  std::unordered_map<std::string, const EmbeddingMatrix*> by_id;
  for (const auto& u : utts) {
    if (u.dim() != dim)
      throw Error("dimension mismatch: '" + u.utt_id() + "' has dim " + std::to_string(u.dim()) +
                  ", expected " + std::to_string(dim));
    by_id[u.utt_id()] = &u;
  }
  std::set<std::string> names;
  for (const auto& row : alignment) names.insert(row.label);

  LabeledFrames out;
  out.label_names.assign(names.begin(), names.end());
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < out.label_names.size(); ++i) ids[out.label_names[i]] = int(i);

  out.x.resize(static_cast<Eigen::Index>(alignment.size()), static_cast<Eigen::Index>(dim));
  out.y.reserve(alignment.size());
  for (std::size_t r = 0; r < alignment.size(); ++r) {
    const auto& row = alignment[r];
    auto it = by_id.find(row.utt_id);
    if (it == by_id.end()) throw Error("alignment references unknown utterance '" + row.utt_id + "'");
    if (row.frame >= it->second->frames())
      throw Error("alignment frame " + std::to_string(row.frame) + " out of range for '" +
                  row.utt_id + "' (" + std::to_string(it->second->frames()) + " frames)");
    const auto src = it->second->row(row.frame);
    for (std::size_t j = 0; j < dim; ++j) out.x(Eigen::Index(r), Eigen::Index(j)) = src[j];
    out.y.push_back(ids[row.label]);
  }
  return out;
}

namespace {

std::size_t count_classes(const std::vector<int>& y) {
  return std::set<int>(y.begin(), y.end()).size();
}

void check_training_input(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  if (x.rows() == 0 || y.empty()) throw Error("empty training input");
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw Error("labels (" + std::to_string(y.size()) + ") not aligned with frames (" +
                std::to_string(x.rows()) + ")");
  if (count_classes(y) < 2) throw Error("fewer than 2 classes in labels");
}

Eigen::MatrixXd random_init(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(cols)));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

// Row-wise softmax minus one-hot targets, scaled by 1/batch: the gradient of
// mean cross-entropy with respect to the logits.
Eigen::MatrixXd logit_gradient(Eigen::MatrixXd logits, std::span<const int> targets) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - mx).exp();
    logits.row(r) /= logits.row(r).sum();
    logits(r, targets[std::size_t(r)]) -= 1.0;
  }
  return logits / double(logits.rows());
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return int(best);
}

// Mini-batch SGD over a linear softmax model. `step` receives the batch
// inputs, targets and the learning rate and applies one update.
template <typename Step>
void run_sgd(const Eigen::MatrixXd& x, const std::vector<int>& y,
             const std::vector<std::size_t>& rows, const SgdOptions& opts, std::mt19937_64& rng,
             Step step) {
  std::vector<std::size_t> order = rows;
  const std::size_t batch = std::max<std::size_t>(1, opts.batch);
  Eigen::MatrixXd xb;
  std::vector<int> yb;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t n = std::min(batch, order.size() - start);
      xb.resize(Eigen::Index(n), x.cols());
      yb.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        xb.row(Eigen::Index(i)) = x.row(Eigen::Index(order[start + i]));
        yb[i] = y[order[start + i]];
      }
      step(xb, yb, opts.lr);
    }
  }
}

}  // namespace

int FactorizedClassifier::predict(const Eigen::Ref<const Eigen::VectorXd>& e) const {
  return argmax(b * (a * e) + bias);
}

FactorizedClassifier train_factorized_classifier(const LabeledFrames& data, std::size_t d_inb,
                                                 const SgdOptions& opts) {
  check_training_input(data.x, data.y);
  const auto d_emb = static_cast<std::size_t>(data.x.cols());
  if (d_inb == 0 || d_inb >= d_emb)
    throw Error("bottleneck d_inb=" + std::to_string(d_inb) + " must satisfy 1 <= d_inb < dim=" +
                std::to_string(d_emb));
  const int n_cls = std::max<int>(int(data.label_names.size()),
                                  *std::max_element(data.y.begin(), data.y.end()) + 1);

  std::mt19937_64 rng(opts.seed);
  FactorizedClassifier clf;
  clf.label_names = data.label_names;
  clf.a = random_init(Eigen::Index(d_inb), Eigen::Index(d_emb), rng);
  clf.b = random_init(n_cls, Eigen::Index(d_inb), rng);
  clf.bias = Eigen::VectorXd::Zero(n_cls);

  std::vector<std::size_t> rows(data.y.size());
  std::iota(rows.begin(), rows.end(), 0);
  run_sgd(data.x, data.y, rows, opts, rng,
          [&](const Eigen::MatrixXd& xb, const std::vector<int>& yb, double lr) {
            const Eigen::MatrixXd h = xb * clf.a.transpose();
            Eigen::MatrixXd logits = h * clf.b.transpose();
            logits.rowwise() += clf.bias.transpose();
            const Eigen::MatrixXd g = logit_gradient(std::move(logits), yb);
            const Eigen::MatrixXd grad_b = g.transpose() * h;
            const Eigen::MatrixXd grad_a = (g * clf.b).transpose() * xb;
            clf.bias -= lr * g.colwise().sum().transpose();
            clf.b -= lr * grad_b;
            clf.a -= lr * grad_a;
          });

  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < data.x.rows(); ++r)
    correct += clf.predict(data.x.row(r).transpose()) == data.y[std::size_t(r)];
  clf.train_accuracy = double(correct) / double(data.x.rows());
  if (!clf.a.allFinite() || !clf.b.allFinite())
    throw Error("classifier training diverged (non-finite weights); lower the learning rate");
  return clf;
}

NullspaceProjector compute_nullspace(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0) throw Error("compute_nullspace: empty matrix");
  if (!(rel_tol > 0.0)) throw Error("compute_nullspace: rel_tol must be positive");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;

  NullspaceProjector proj;
  proj.source_rank = rank;
  proj.rank_deficient = rank < static_cast<std::size_t>(a.rows());
  const Eigen::Index null_dim = a.cols() - Eigen::Index(rank);
  if (null_dim == 0) throw Error("compute_nullspace: A has full column rank, nullspace is empty");
  proj.basis = svd.matrixV().rightCols(null_dim).transpose();
  return proj;
}

EmbeddingMatrix project(const EmbeddingMatrix& emb, const NullspaceProjector& proj) {
  if (emb.dim() != proj.input_dim())
    throw Error("dimension mismatch: '" + emb.utt_id() + "' has dim " + std::to_string(emb.dim()) +
                ", projector expects " + std::to_string(proj.input_dim()));
  const std::size_t out_dim = proj.output_dim();
  std::vector<float> out(emb.frames() * out_dim);
  Eigen::VectorXd e(Eigen::Index(emb.dim()));
  for (std::size_t f = 0; f < emb.frames(); ++f) {
    const auto row = emb.row(f);
    for (std::size_t j = 0; j < emb.dim(); ++j) e(Eigen::Index(j)) = row[j];
    const Eigen::VectorXd p = proj.basis * e;
    for (std::size_t j = 0; j < out_dim; ++j) out[f * out_dim + j] = float(p(Eigen::Index(j)));
  }
  return EmbeddingMatrix(emb.utt_id(), emb.frames(), out_dim, std::move(out));
}

double linear_probe(const LabeledFrames& data, double split_fraction, const SgdOptions& opts) {
  check_training_input(data.x, data.y);
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw Error("split_fraction must lie in (0, 1)");
  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> rows(data.y.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(split_fraction * double(rows.size())));
  if (n_train == 0 || n_train == rows.size())
    throw Error("empty split: " + std::to_string(n_train) + " of " + std::to_string(rows.size()) +
                " frames assigned to training");
  const std::vector<std::size_t> train(rows.begin(), rows.begin() + std::ptrdiff_t(n_train));
  const std::vector<std::size_t> test(rows.begin() + std::ptrdiff_t(n_train), rows.end());

  const int n_cls = std::max<int>(int(data.label_names.size()),
                                  *std::max_element(data.y.begin(), data.y.end()) + 1);
  Eigen::MatrixXd w = random_init(n_cls, data.x.cols(), rng);
  Eigen::VectorXd bias = Eigen::VectorXd::Zero(n_cls);
  run_sgd(data.x, data.y, train, opts, rng,
          [&](const Eigen::MatrixXd& xb, const std::vector<int>& yb, double lr) {
            Eigen::MatrixXd logits = xb * w.transpose();
            logits.rowwise() += bias.transpose();
            const Eigen::MatrixXd g = logit_gradient(std::move(logits), yb);
            bias -= lr * g.colwise().sum().transpose();
            w -= lr * (g.transpose() * xb);
          });

  std::size_t correct = 0;
  for (std::size_t r : test) {
    const Eigen::VectorXd logits = w * data.x.row(Eigen::Index(r)).transpose() + bias;
    correct += argmax(logits) == data.y[r];
  }
  return double(correct) / double(test.size());
}

}  // namespace zrk
