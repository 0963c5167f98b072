#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "xtrepan/c45.hpp"
#include "xtrepan/dataset.hpp"
#include "xtrepan/error.hpp"
#include "xtrepan/eval.hpp"
#include "xtrepan/network.hpp"
#include "xtrepan/trainer.hpp"
#include "xtrepan/trepan.hpp"
#include "xtrepan/tree.hpp"

namespace py = pybind11;
using namespace xtrepan;

namespace {

ActKind activation_arg(const std::string& name) {
  const auto kind = activation_from_name(name);
  if (!kind) throw ValidationError("unknown activation '" + name + "'");
  return *kind;
}

TrainConfig train_config_arg(const std::vector<std::size_t>& topology,
                             const std::string& hidden_act,
                             const std::string& output_act,
                             const std::vector<std::pair<std::size_t,
                                                         std::size_t>>& skips,
                             const std::string& loss, double lr,
                             std::size_t epochs, std::size_t patience,
                             std::uint64_t seed, std::size_t output_dim) {
  TrainConfig cfg;
  const ActKind hidden = activation_arg(hidden_act);
  for (std::size_t w : topology) cfg.hidden.push_back({w, hidden});
  cfg.output_activation = activation_arg(output_act);
  for (const auto& [from, to] : skips) cfg.skips.push_back({from, to});
  const auto loss_kind = loss_from_name(loss);
  if (!loss_kind) throw ValidationError("unknown loss '" + loss + "'");
  cfg.loss = *loss_kind;
  cfg.learning_rate = lr;
  cfg.max_epochs = epochs;
  cfg.patience = patience;
  cfg.seed = seed;
  cfg.output_dim = output_dim;
  return cfg;
}

TrepanParams trepan_params_arg(const std::string& variant,
                               std::size_t min_sample, std::size_t max_nodes,
                               std::size_t beam_width, double purity,
                               std::uint64_t seed, std::size_t rejection_cap) {
  TrepanParams p;
  const auto v = variant_from_name(variant);
  if (!v) throw ValidationError("unknown variant '" + variant + "'");
  p.variant = *v;
  p.min_sample = min_sample;
  p.max_internal_nodes = max_nodes;
  p.beam_width = beam_width;
  p.purity_stop = purity;
  p.seed = seed;
  p.rejection_cap = rejection_cap;
  return p;
}

std::vector<std::string> classify_all(const DecisionTree& tree,
                                      const Dataset& ds) {
  std::vector<std::string> out;
  out.reserve(ds.instances.size());
  for (const Instance& inst : ds.instances) out.push_back(tree.classify(inst));
  return out;
}

std::vector<std::string> predict_all(const Network& net, const Dataset& ds) {
  std::vector<std::string> out;
  out.reserve(ds.instances.size());
  for (const Instance& inst : ds.instances)
    out.push_back(net.predict_label(inst));
  return out;
}

ConfusionMatrix matrix_arg(const std::vector<std::string>& labels,
                           const std::vector<std::vector<std::size_t>>& counts) {
  ConfusionMatrix cm;
  cm.labels = labels;
  cm.counts = counts;
  if (counts.size() != labels.size())
    throw ValidationError("counts must be square over the labels");
  for (const auto& row : counts)
    if (row.size() != labels.size())
      throw ValidationError("counts must be square over the labels");
  return cm;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "decision-tree extraction from trained networks";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<RuntimeError>(m, "RuntimeError", PyExc_RuntimeError);

  py::class_<DatasetSchema>(m, "Schema")
      .def_static("parse", &DatasetSchema::parse, py::arg("text"))
      .def("serialize", &DatasetSchema::serialize)
      .def_property_readonly("classification", &DatasetSchema::classification)
      .def_readonly("class_labels", &DatasetSchema::class_labels);

  py::class_<Dataset>(m, "Dataset")
      .def_static(
          "parse",
          [](const std::string& csv, const DatasetSchema& schema) {
            return parse_dataset(csv, schema);
          },
          py::arg("csv"), py::arg("schema"))
      .def("__len__", [](const Dataset& ds) { return ds.size(); })
      .def("serialize", [](const Dataset& ds) { return serialize_dataset(ds); })
      .def_readonly("schema", &Dataset::schema)
      .def("labels", [](const Dataset& ds) {
        std::vector<std::string> out;
        if (!ds.schema.classification())
          throw ValidationError("labels() needs a classification dataset");
        out.reserve(ds.instances.size());
        for (const Instance& inst : ds.instances)
          out.push_back(ds.schema.class_labels.at(inst.label));
        return out;
      });

  m.def(
      "bin_target",
      [](const Dataset& ds, const std::string& bins) {
        return bin_target(ds, BinningSpec::parse(bins));
      },
      py::arg("dataset"), py::arg("bins"),
      "Convert a regression target into classes, e.g. bins='0.5:Lo,Hi'");

  m.def(
      "split_dataset",
      [](const Dataset& ds, const std::string& fractions, std::uint64_t seed) {
        SplitSpec spec = SplitSpec::parse_fractions(fractions);
        spec.seed = seed;
        SplitResult r = split_dataset(ds, spec);
        return py::make_tuple(std::move(r.train), std::move(r.cv),
                              std::move(r.test));
      },
      py::arg("dataset"), py::arg("fractions") = "0.6,0.2,0.2",
      py::arg("seed") = 0);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("train_errors", &TrainReport::train_errors)
      .def_readonly("cv_errors", &TrainReport::cv_errors)
      .def_readonly("stopping_epoch", &TrainReport::stopping_epoch)
      .def_readonly("stop_reason", &TrainReport::stop_reason)
      .def("to_csv", &TrainReport::to_csv);

  py::class_<Network>(m, "Network")
      .def_static("load", &Network::load, py::arg("text"))
      .def("save", &Network::save)
      .def_readonly("classification", &Network::classification)
      .def_readonly("class_labels", &Network::class_labels)
      .def("predict", &predict_all, py::arg("dataset"),
           "Predicted label for every instance")
      .def("set_bins", [](Network& net, const std::string& bins) {
        if (net.classification)
          throw ValidationError("bins apply to regression networks only");
        net.bins = BinningSpec::parse(bins);
        net.bins->validate();
      });

  m.def(
      "train",
      [](const Dataset& train_set, const Dataset& cv_set,
         const std::vector<std::size_t>& topology,
         const std::string& hidden_act, const std::string& output_act,
         const std::vector<std::pair<std::size_t, std::size_t>>& skips,
         const std::string& loss, double lr, std::size_t epochs,
         std::size_t patience, std::uint64_t seed, std::size_t output_dim) {
        auto [net, report] =
            train(train_set, cv_set,
                  train_config_arg(topology, hidden_act, output_act, skips,
                                   loss, lr, epochs, patience, seed,
                                   output_dim));
        return py::make_tuple(std::move(net), std::move(report));
      },
      py::arg("train"), py::arg("cv"), py::arg("topology"),
      py::arg("hidden_act") = "hyperbolic", py::arg("output_act") = "logistic",
      py::arg("skips") = std::vector<std::pair<std::size_t, std::size_t>>{},
      py::arg("loss") = "mse", py::arg("lr") = 0.1, py::arg("epochs") = 1000,
      py::arg("patience") = 10, py::arg("seed") = 0,
      py::arg("output_dim") = 0,
      "Returns (network, report)");

  py::class_<TreeComplexity>(m, "TreeComplexity")
      .def_readonly("internal_nodes", &TreeComplexity::internal_nodes)
      .def_readonly("leaves", &TreeComplexity::leaves)
      .def_readonly("total_literals", &TreeComplexity::total_literals);

  py::class_<DecisionTree>(m, "DecisionTree")
      .def_static("deserialize", &DecisionTree::deserialize, py::arg("text"))
      .def("serialize", &DecisionTree::serialize)
      .def("to_dot", &DecisionTree::to_dot)
      .def("complexity", &DecisionTree::complexity)
      .def("classify", &classify_all, py::arg("dataset"),
           "Predicted label for every instance");

  py::class_<ExtractionResult>(m, "ExtractionResult")
      .def_readonly("tree", &ExtractionResult::tree)
      .def("audit_csv", &ExtractionResult::audit_csv);

  m.def(
      "extract_tree",
      [](const Network& net, const Dataset& train, const std::string& variant,
         std::size_t min_sample, std::size_t max_nodes, std::size_t beam_width,
         double purity, std::uint64_t seed, std::size_t rejection_cap) {
        return extract_tree(net, train,
                            trepan_params_arg(variant, min_sample, max_nodes,
                                              beam_width, purity, seed,
                                              rejection_cap));
      },
      py::arg("network"), py::arg("train"), py::arg("variant") = "mofn",
      py::arg("min_sample") = 1000, py::arg("max_nodes") = 50,
      py::arg("beam_width") = 2, py::arg("purity") = 0.99, py::arg("seed") = 0,
      py::arg("rejection_cap") = 10000);

  m.def(
      "induce_c45",
      [](const Dataset& train, std::size_t min_leaf, bool gain_ratio,
         std::size_t max_depth) {
        return induce_c45(train, C45Params{min_leaf, gain_ratio, max_depth});
      },
      py::arg("train"), py::arg("min_leaf") = 2, py::arg("gain_ratio") = true,
      py::arg("max_depth") = 0);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("total_accuracy", &Metrics::total_accuracy)
      .def_readonly("per_class", &Metrics::per_class)
      .def_readonly("kappa", &Metrics::kappa)
      .def_readonly("fidelity", &Metrics::fidelity)
      .def_readonly("complexity", &Metrics::complexity);

  m.def(
      "evaluate_tree",
      [](const DecisionTree& tree, const Dataset& test, const Network* net) {
        return evaluate_tree(tree, test, net);
      },
      py::arg("tree"), py::arg("test"), py::arg("network") = nullptr);

  m.def("fidelity", &fidelity, py::arg("tree"), py::arg("network"),
        py::arg("data"));

  m.def(
      "accuracy",
      [](const std::vector<std::string>& labels,
         const std::vector<std::vector<std::size_t>>& counts) {
        return accuracy(matrix_arg(labels, counts));
      },
      py::arg("labels"), py::arg("counts"));

  m.def(
      "per_class_accuracy",
      [](const std::vector<std::string>& labels,
         const std::vector<std::vector<std::size_t>>& counts) {
        return per_class_accuracy(matrix_arg(labels, counts));
      },
      py::arg("labels"), py::arg("counts"));

  m.def(
      "kappa",
      [](const std::vector<std::string>& labels,
         const std::vector<std::vector<std::size_t>>& counts) {
        return kappa(matrix_arg(labels, counts));
      },
      py::arg("labels"), py::arg("counts"));

  py::class_<CompareReport>(m, "CompareReport")
      .def("to_csv", &CompareReport::to_csv)
      .def("to_text", &CompareReport::to_text)
      .def_property_readonly("rows", [](const CompareReport& r) {
        std::vector<std::pair<std::string, Metrics>> rows = r.rows;
        return rows;
      });

  m.def(
      "compare_report",
      [](const std::vector<std::pair<std::string, const DecisionTree*>>& models,
         const Network& net, const Dataset& test) {
        return compare_report(models, net, test);
      },
      py::arg("models"), py::arg("network"), py::arg("test"),
      "models: list of (name, tree) pairs");
}
