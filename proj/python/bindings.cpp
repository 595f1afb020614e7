#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "zrk/lexical.hpp"
#include "zrk/quantize.hpp"
#include "zrk/repr.hpp"
#include "zrk/segment.hpp"
#include "zrk/semantic.hpp"
#include "zrk/syntactic.hpp"

namespace py = pybind11;
using namespace zrk;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix to_matrix(const FloatArray& a, std::string utt_id) {
  if (a.ndim() != 2) throw Error("expected a 2-d array of frames x dim");
  const auto frames = static_cast<std::size_t>(a.shape(0));
  const auto dim = static_cast<std::size_t>(a.shape(1));
  return EmbeddingMatrix(std::move(utt_id), frames, dim, std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const EmbeddingMatrix& m) {
  FloatArray out({m.frames(), m.dim()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_zrk, m) {
  m.doc() = "Core routines of the zrk toolkit";
  m.attr("__version__") = kToolkitVersion;
  py::register_exception<Error>(m, "ZrkError", PyExc_ValueError);

  py::enum_<Metric>(m, "Metric")
      .value("euclidean", Metric::kEuclidean)
      .value("cosine", Metric::kCosine);

  m.def("read_zrk1", [](const std::filesystem::path& p) { return to_array(read_zrk1(p)); });
  m.def("write_zrk1", [](const std::filesystem::path& p, const FloatArray& a) {
    write_zrk1(p, to_matrix(a, p.stem().string()));
  });

  py::class_<Codebook>(m, "Codebook")
      .def_readonly("k", &Codebook::k)
      .def_readonly("dim", &Codebook::dim)
      .def_readonly("metric", &Codebook::metric)
      .def_readonly("inertia", &Codebook::inertia)
      .def_property_readonly("centroids", [](const Codebook& cb) {
        py::array_t<double> out({cb.k, cb.dim});
        std::copy(cb.centroids.begin(), cb.centroids.end(), out.mutable_data());
        return out;
      });

  m.def(
      "kmeans_fit",
      [](const FloatArray& data, std::size_t k, Metric metric, std::size_t max_iters, std::size_t restarts,
         std::uint64_t seed) {
        KMeansOptions opts;
        opts.max_iters = max_iters;
        opts.restarts = restarts;
        opts.seed = seed;
        return kmeans_fit(to_matrix(data, "data"), k, metric, opts);
      },
      py::arg("data"), py::arg("k"), py::arg("metric") = Metric::kCosine, py::arg("max_iters") = 300,
      py::arg("restarts") = 5, py::arg("seed") = 0);
  m.def("assign", [](const FloatArray& frames, const Codebook& cb) {
    return assign(to_matrix(frames, "utt"), cb).symbols;
  });
  m.def("centroid_average", [](const FloatArray& frames, const Codebook& cb, double alpha) {
    return to_array(centroid_average(to_matrix(frames, "utt"), cb, alpha));
  });

  m.def(
      "nullspace_basis",
      [](const Eigen::MatrixXd& a, double rel_tol) { return compute_nullspace(a, rel_tol).basis; },
      py::arg("a"), py::arg("rel_tol") = kDefaultNullspaceRelTol);

  m.def(
      "distance_table",
      [](const Codebook& cb, double gamma) {
        const auto t = build_distance_table(cb, gamma);
        py::array_t<double> out({t.k, t.k});
        std::copy(t.dist.begin(), t.dist.end(), out.mutable_data());
        return out;
      },
      py::arg("codebook"), py::arg("gamma"));
  m.def(
      "subsequence_dtw",
      [](const SymbolString& query, const SymbolString& utt, const Codebook& cb, double gamma) {
        const auto r = subsequence_dtw(query, utt, build_distance_table(cb, gamma));
        return py::make_tuple(r.cost, r.start, r.end);
      },
      py::arg("query"), py::arg("utt"), py::arg("codebook"), py::arg("gamma"));
  m.def(
      "lookup_score",
      [](const SymbolString& query, const std::map<std::string, SymbolString>& corpus, const Codebook& cb,
         double gamma, bool normalize_mean) {
        std::vector<SymbolSequence> utts;
        for (const auto& [id, syms] : corpus) utts.push_back({id, syms});
        return lookup_score(lookup(query, CorpusIndex(std::move(utts)), build_distance_table(cb, gamma)),
                            normalize_mean);
      },
      py::arg("query"), py::arg("corpus"), py::arg("codebook"), py::arg("gamma"),
      py::arg("normalize_mean") = true);

  py::class_<UnigramLM>(m, "UnigramLM")
      .def_property_readonly("pieces", &UnigramLM::pieces)
      .def_property_readonly("logprob", &UnigramLM::logprob)
      .def("segment", [](const UnigramLM& lm, const SymbolString& utt) {
        const auto seg = viterbi_segment(utt, lm);
        return py::make_tuple(segmentation_pieces(seg, lm), seg.logprob);
      });
  m.def(
      "train_unigram",
      [](const std::vector<SymbolString>& corpus, std::size_t target_vocab, std::size_t max_piece_len) {
        UnigramOptions opts;
        opts.target_vocab = target_vocab;
        opts.max_piece_len = max_piece_len;
        return train_unigram(corpus, opts);
      },
      py::arg("corpus"), py::arg("target_vocab"), py::arg("max_piece_len") = 8);

  m.def("edit_distance", [](const SymbolString& a, const SymbolString& b) { return edit_distance(a, b); });
  m.def("spearman", [](const std::vector<double>& p, const std::vector<double>& g) { return spearman(p, g); });

  py::class_<NGramLM>(m, "NGramLM")
      .def_property_readonly("order", &NGramLM::order)
      .def(
          "logprob",
          [](const NGramLM& lm, const SymbolString& s, bool per_symbol) {
            return sentence_logprob(lm, s, per_symbol);
          },
          py::arg("sentence"), py::arg("per_symbol") = false);
  m.def(
      "train_ngram",
      [](const std::vector<SymbolString>& sentences, std::size_t order, double k) {
        std::vector<SymbolSequence> corpus;
        for (std::size_t i = 0; i < sentences.size(); ++i) corpus.push_back({std::to_string(i), sentences[i]});
        return train_ngram(corpus, order, k);
      },
      py::arg("sentences"), py::arg("order") = kDefaultNGramOrder, py::arg("k") = kDefaultNGramK);
}
