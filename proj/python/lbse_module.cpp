#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lbse/dataset.hpp"
#include "lbse/encoder.hpp"
#include "lbse/evaluate.hpp"
#include "lbse/index.hpp"
#include "lbse/metrics.hpp"
#include "lbse/similarity.hpp"
#include "lbse/trainer.hpp"

namespace py = pybind11;

namespace {

lbse::DatasetFormat format_from_name(const std::string& name) {
  if (name == "csv") return lbse::DatasetFormat::Csv;
  if (name == "lbse-binary") return lbse::DatasetFormat::LbseBinary;
  lbse::fail(lbse::ErrorCode::ConfigViolation, "unknown dataset format '" + name + "'");
}

py::array_t<std::uint64_t> codes_to_array(const lbse::CodeMatrix& codes) {
  py::array_t<std::uint64_t> out({codes.size(), codes.words_per_code()});
  auto view = out.mutable_unchecked<2>();
  for (Eigen::Index i = 0; i < codes.size(); ++i) {
    const auto words = codes.code(i);
    for (Eigen::Index w = 0; w < codes.words_per_code(); ++w)
      view(i, w) = words[static_cast<std::size_t>(w)];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Supervised binary embedding: alternating discrete optimization, Hamming retrieval "
            "and evaluation";

  py::register_exception<lbse::LbseError>(m, "Error");

  py::class_<lbse::Dataset>(m, "Dataset")
      .def(py::init([](Eigen::MatrixXd features, std::vector<std::uint32_t> labels,
                       std::uint32_t num_classes) {
             lbse::Dataset dataset{std::move(features), std::move(labels), num_classes};
             dataset.validate();
             return dataset;
           }),
           py::arg("features"), py::arg("labels"), py::arg("num_classes"))
      .def_readonly("features", &lbse::Dataset::features)
      .def_readonly("labels", &lbse::Dataset::labels)
      .def_readonly("num_classes", &lbse::Dataset::num_classes)
      .def_property_readonly("dim", &lbse::Dataset::dim)
      .def("__len__", &lbse::Dataset::size)
      .def("__repr__", [](const lbse::Dataset& d) {
        return "Dataset(D=" + std::to_string(d.dim()) + ", N=" + std::to_string(d.size()) +
               ", C=" + std::to_string(d.num_classes) + ")";
      });

  m.def("synth_clusters", &lbse::synth_clusters, py::arg("n_per_class"), py::arg("num_classes"),
        py::arg("dim"), py::arg("spread"), py::arg("seed"));
  m.def(
      "load_dataset",
      [](const std::filesystem::path& path, const std::string& format) {
        return lbse::load_dataset(path, format_from_name(format));
      },
      py::arg("path"), py::arg("format") = "lbse-binary");
  m.def(
      "save_dataset",
      [](const lbse::Dataset& dataset, const std::filesystem::path& path,
         const std::string& format) { lbse::save_dataset(dataset, path, format_from_name(format)); },
      py::arg("dataset"), py::arg("path"), py::arg("format") = "lbse-binary");
  m.def(
      "split",
      [](const lbse::Dataset& dataset, double query_fraction, std::uint64_t seed) {
        auto result = lbse::split(dataset, {query_fraction, seed});
        return py::make_tuple(std::move(result.database), std::move(result.query),
                              std::move(result.database_indices), std::move(result.query_indices));
      },
      py::arg("dataset"), py::arg("query_fraction") = 0.2, py::arg("seed") = 0,
      "Returns (database, query, database_indices, query_indices).");

  py::class_<lbse::LbseConfig>(m, "Config")
      .def(py::init([](Eigen::Index bits, double alpha, double beta, double gamma, double lambda,
                       std::size_t max_iters, std::uint64_t seed, Eigen::Index block, double tol) {
             lbse::LbseConfig config{bits, alpha, beta, gamma, lambda, max_iters, seed, block, tol};
             lbse::validate_config(config);
             return config;
           }),
           py::arg("bits") = 32, py::arg("alpha") = 0.5, py::arg("beta") = 5.0,
           py::arg("gamma") = 1e-5, py::arg("lambda") = 1e-5, py::arg("max_iters") = 15,
           py::arg("seed") = 0, py::arg("block") = 512, py::arg("tol") = 1e-8)
      .def_readwrite("bits", &lbse::LbseConfig::code_length)
      .def_readwrite("alpha", &lbse::LbseConfig::alpha)
      .def_readwrite("beta", &lbse::LbseConfig::beta)
      .def_readwrite("gamma", &lbse::LbseConfig::gamma)
      .def_readwrite("lambda_", &lbse::LbseConfig::lambda)
      .def_readwrite("max_iters", &lbse::LbseConfig::max_iters)
      .def_readwrite("seed", &lbse::LbseConfig::seed)
      .def_readwrite("block", &lbse::LbseConfig::block)
      .def_readwrite("tol", &lbse::LbseConfig::tol);

  py::class_<lbse::TrainStats>(m, "TrainStats")
      .def_readonly("objective_per_iter", &lbse::TrainStats::objective_per_iter)
      .def_readonly("bits_flipped_per_iter", &lbse::TrainStats::bits_flipped_per_iter)
      .def_readonly("converged_at", &lbse::TrainStats::converged_at)
      .def_readonly("w_orthogonality_error", &lbse::TrainStats::w_orthogonality_error)
      .def_readonly("b_balance_error", &lbse::TrainStats::b_balance_error)
      .def_readonly("b_uncorrelation_error", &lbse::TrainStats::b_uncorrelation_error)
      .def_property_readonly("iterations", &lbse::TrainStats::iterations);

  py::class_<lbse::LbseModel>(m, "Model")
      .def_readonly("P", &lbse::LbseModel::P)
      .def_readonly("W", &lbse::LbseModel::W)
      .def_readonly("config", &lbse::LbseModel::config)
      .def_readonly("history", &lbse::LbseModel::history)
      .def("save", &lbse::save_model, py::arg("path"));

  m.def("train", &lbse::train, py::arg("dataset"), py::arg("config") = lbse::LbseConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("load_model", &lbse::load_model, py::arg("path"));

  py::class_<lbse::CodeMatrix>(m, "CodeMatrix")
      .def_property_readonly("code_length", &lbse::CodeMatrix::code_length)
      .def("__len__", &lbse::CodeMatrix::size)
      .def("unpack", &lbse::unpack, "Unpack to an L x N matrix of +/-1 values.")
      .def("words", &codes_to_array, "Packed words as an (N, ceil(L/64)) uint64 array.");

  m.def("pack", &lbse::pack, py::arg("sign_matrix"));
  m.def("encode", &lbse::encode, py::arg("model"), py::arg("features"));
  m.def(
      "save_codes",
      [](const lbse::CodeMatrix& codes, const std::optional<std::vector<std::uint32_t>>& labels,
         const std::filesystem::path& path) { lbse::save_codes(codes, labels, path); },
      py::arg("codes"), py::arg("labels"), py::arg("path"));
  m.def(
      "load_codes",
      [](const std::filesystem::path& path) {
        auto file = lbse::load_codes(path);
        return py::make_tuple(std::move(file.codes), std::move(file.labels));
      },
      py::arg("path"), "Returns (codes, labels-or-None).");

  py::class_<lbse::HammingIndex>(m, "HammingIndex")
      .def(py::init<lbse::CodeMatrix, std::vector<std::uint32_t>>(), py::arg("codes"),
           py::arg("labels"))
      .def("__len__", &lbse::HammingIndex::size)
      .def_property_readonly("code_length", &lbse::HammingIndex::code_length)
      .def(
          "search",
          [](const lbse::HammingIndex& index, const lbse::CodeMatrix& queries, std::size_t k) {
            std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> out;
            out.reserve(static_cast<std::size_t>(queries.size()));
            for (Eigen::Index qi = 0; qi < queries.size(); ++qi) {
              auto neighbors = index.search(queries.code(qi), k);
              out.emplace_back(std::move(neighbors.ids), std::move(neighbors.distances));
            }
            return out;
          },
          py::arg("queries"), py::arg("k"),
          "Per query: (ids, hamming distances), ranked by (distance, id).")
      .def(
          "knn_classify",
          [](const lbse::HammingIndex& index, const lbse::CodeMatrix& queries, std::size_t k_vote) {
            std::vector<std::uint32_t> out;
            out.reserve(static_cast<std::size_t>(queries.size()));
            for (Eigen::Index qi = 0; qi < queries.size(); ++qi)
              out.push_back(index.knn_classify(queries.code(qi), k_vote));
            return out;
          },
          py::arg("queries"), py::arg("k_vote") = 5);

  py::class_<lbse::MetricsReport>(m, "MetricsReport")
      .def_readonly("oa", &lbse::MetricsReport::oa)
      .def_readonly("sensitivity", &lbse::MetricsReport::sensitivity)
      .def_readonly("ppv", &lbse::MetricsReport::ppv)
      .def_readonly("f1", &lbse::MetricsReport::f1)
      .def_readonly("map", &lbse::MetricsReport::map)
      .def_readonly("precision_at_k", &lbse::MetricsReport::precision_at_k)
      .def("to_json", &lbse::to_json)
      .def("to_csv", &lbse::to_csv)
      .def("__repr__", [](const lbse::MetricsReport& r) {
        return "MetricsReport(oa=" + std::to_string(r.oa) + ", map=" + std::to_string(r.map) + ")";
      });

  m.def(
      "classification_metrics",
      [](const std::vector<std::uint32_t>& predicted, const std::vector<std::uint32_t>& truth,
         std::uint32_t num_classes, std::optional<std::uint32_t> positive_class) {
        return lbse::classification_metrics(predicted, truth, num_classes, positive_class);
      },
      py::arg("predicted"), py::arg("truth"), py::arg("num_classes"),
      py::arg("positive_class") = std::nullopt);
  m.def("mean_average_precision", &lbse::mean_average_precision, py::arg("per_query_relevance"),
        py::arg("depth") = 99);
  m.def("precision_at_k", &lbse::precision_at_k, py::arg("relevance_ranked"), py::arg("k"));
  m.def(
      "evaluate_retrieval",
      [](const lbse::HammingIndex& index, const lbse::CodeMatrix& queries,
         const std::vector<std::uint32_t>& query_labels, std::uint32_t num_classes,
         std::size_t depth, std::size_t k_vote, bool exclude_self,
         std::vector<std::size_t> precision_ks) {
        lbse::EvalOptions options;
        options.depth = depth;
        options.k_vote = k_vote;
        options.exclude_self = exclude_self;
        options.precision_ks = std::move(precision_ks);
        return lbse::evaluate_retrieval(index, queries, query_labels, num_classes, options);
      },
      py::arg("index"), py::arg("queries"), py::arg("query_labels"), py::arg("num_classes"),
      py::arg("depth") = 99, py::arg("k_vote") = 5, py::arg("exclude_self") = false,
      py::arg("precision_ks") = std::vector<std::size_t>{1, 5, 10, 99});
}
