#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "flowsift/error.hpp"
#include "flowsift/importance.hpp"
#include "flowsift/pipeline.hpp"
#include "flowsift/report.hpp"

namespace py = pybind11;
using namespace flowsift;

namespace {

std::vector<ClassLabel> to_labels(const std::vector<int>& labels) {
  std::vector<ClassLabel> out;
  out.reserve(labels.size());
  for (const int v : labels) out.push_back(v != 0 ? ClassLabel::Botnet : ClassLabel::Benign);
  return out;
}

py::dict report_dict(const EvalReport& r) {
  return py::module_::import("json").attr("loads")(to_json(r).dump());
}

PipelineConfig make_config(const std::string& kind, std::uint64_t seed, std::size_t trees,
                           std::size_t max_depth, std::size_t min_samples_split,
                           std::size_t min_samples_leaf, double train_fraction,
                           std::size_t threads) {
  PipelineConfig config;
  config.kind = parse_model_kind(kind);
  config.seed = seed;
  config.split = {train_fraction, seed};
  config.tree = {max_depth, min_samples_split, min_samples_leaf};
  config.forest.n_trees = trees;
  config.forest.threads = threads;
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Botnet detection on NetFlow records: features, learners and imbalance-aware metrics.";

  py::register_exception<Error>(m, "FlowsiftError");

  m.def("parse_label", [](std::string_view s) { return to_int(parse_label(s)); },
        "1 if the label names botnet traffic, else 0.");
  m.def("parse_port", &parse_port);
  m.def("port_bucket", &port_bucket, py::arg("port"));
  m.def("sigmoid", &sigmoid);
  m.def("gini", &gini, py::arg("pos"), py::arg("neg"));
  m.def("feature_names", [] {
    return std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
  });

  m.def("average_precision",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
          return average_precision(scores, to_labels(labels));
        },
        py::arg("scores"), py::arg("labels"));
  m.def("roc_auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
          return roc_auc(scores, to_labels(labels));
        },
        py::arg("scores"), py::arg("labels"));
  m.def("threshold_sweep",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
          const auto sweep = threshold_sweep(scores, to_labels(labels));
          py::dict best;
          best["threshold"] = sweep.best.threshold;
          best["precision"] = sweep.best.precision;
          best["recall"] = sweep.best.recall;
          best["f1"] = sweep.best.f1;
          return best;
        },
        py::arg("scores"), py::arg("labels"), "Best-F1 operating point.");
  m.def("evaluate",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
          return report_dict(evaluate(scores, to_labels(labels)));
        },
        py::arg("scores"), py::arg("labels"));

  m.def("synth",
        [](const std::filesystem::path& path, std::size_t n, double prevalence, double separation,
           std::uint64_t seed) {
          write_binetflow(path, generate({n, prevalence, seed, separation}));
        },
        py::arg("path"), py::arg("n") = 10000, py::arg("prevalence") = 0.0248,
        py::arg("separation") = 1.0, py::arg("seed") = 0,
        "Writes a synthetic binetflow CSV.");

  py::class_<TrainedModel>(m, "Model")
      .def_static("load", &load_model_file, py::arg("path"))
      .def("save", [](const TrainedModel& self, const std::filesystem::path& p) {
        save_model_file(p, self);
      })
      .def_property_readonly("kind", [](const TrainedModel& self) {
        return std::string(to_string(self.kind()));
      })
      .def_property_readonly("standardized",
                             [](const TrainedModel& self) { return self.standardizer.has_value(); })
      .def("score_features",
           [](const TrainedModel& self, const std::vector<double>& x) { return self.score(x); })
      .def("score_csv",
           [](const TrainedModel& self, const std::filesystem::path& path) {
             ColumnMapping mapping;
             mapping.label_required = false;
             auto reader = FlowReader::open(path, mapping);
             std::vector<double> scores;
             while (auto rec = reader.next()) scores.push_back(self.score_flow(rec->flow));
             return scores;
           },
           py::arg("path"), "Scores every clean row of a binetflow CSV.")
      .def("evaluate_csv",
           [](const TrainedModel& self, const std::filesystem::path& path) {
             const std::vector<std::filesystem::path> paths{path};
             const auto data = load_dataset(paths);
             return report_dict(evaluate_model(self, data.flows, data.labels).report);
           },
           py::arg("path"));

  m.def("train",
        [](const std::vector<std::filesystem::path>& paths, const std::string& kind,
           std::uint64_t seed, std::size_t trees, std::size_t max_depth,
           std::size_t min_samples_split, std::size_t min_samples_leaf, double train_fraction,
           std::size_t threads) {
          const auto config = make_config(kind, seed, trees, max_depth, min_samples_split,
                                          min_samples_leaf, train_fraction, threads);
          Dataset data;
          {
            py::gil_scoped_release release;
            data = load_dataset(paths);
          }
          TrainResult result;
          {
            py::gil_scoped_release release;
            result = train_pipeline(data, config);
          }
          const auto test_flows = gather<RawFlow>(data.flows, result.split.test);
          const auto test_labels = gather<ClassLabel>(data.labels, result.split.test);
          const auto ev = evaluate_model(result.model, test_flows, test_labels);
          py::dict summary;
          summary["train_rows"] = result.split.train.size();
          summary["test_rows"] = result.split.test.size();
          summary["train_seconds"] = result.train_seconds;
          summary["test_report"] = report_dict(ev.report);
          return py::make_tuple(std::move(result.model), summary);
        },
        py::arg("paths"), py::arg("kind") = "rf", py::arg("seed") = 0, py::arg("trees") = 300,
        py::arg("max_depth") = 20, py::arg("min_samples_split") = 20,
        py::arg("min_samples_leaf") = 10, py::arg("train_fraction") = 0.7,
        py::arg("threads") = 0,
        "Stratified split, fit and test-set evaluation. Returns (Model, summary dict).");
}
