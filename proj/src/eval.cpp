#include "xtrepan/eval.hpp"

#include <algorithm>
#include <cstdio>

#include "xtrepan/error.hpp"

namespace xtrepan {

namespace {

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::size_t label_index(const std::vector<std::string>& order,
                        const std::string& label) {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == label) return i;
  throw ValidationError("label '" + label + "' is not in the label order");
}

std::string actual_label(const Dataset& ds, const Instance& inst) {
  return ds.schema.class_labels[static_cast<std::size_t>(inst.label)];
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts)
    for (std::size_t c : row) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::size_t t = 0;
  for (std::size_t c : counts[i]) t += c;
  return t;
}

std::size_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::size_t t = 0;
  for (const auto& row : counts) t += row[j];
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& actual,
                                 const std::vector<std::string>& predicted,
                                 const std::vector<std::string>& label_order) {
  if (actual.empty())
    throw ValidationError("confusion matrix needs at least one observation");
  if (actual.size() != predicted.size())
    throw ValidationError("actual and predicted label counts differ");
  ConfusionMatrix cm;
  cm.labels = label_order;
  cm.counts.assign(label_order.size(),
                   std::vector<std::size_t>(label_order.size(), 0));
  for (std::size_t k = 0; k < actual.size(); ++k)
    cm.counts[label_index(label_order, actual[k])]
             [label_index(label_order, predicted[k])] += 1;
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0)
    throw ValidationError("accuracy of an empty confusion matrix is undefined");
  return 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
}

std::vector<double> per_class_accuracy(const ConfusionMatrix& cm) {
  std::vector<double> out;
  for (std::size_t j = 0; j < cm.labels.size(); ++j) {
    const std::size_t denom = cm.col_sum(j);
    out.push_back(denom == 0 ? 0.0
                             : 100.0 * static_cast<double>(cm.counts[j][j]) /
                                   static_cast<double>(denom));
  }
  return out;
}

double kappa(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0)
    throw ValidationError("kappa of an empty confusion matrix is undefined");
  const double t = static_cast<double>(total);
  const double pa = static_cast<double>(cm.trace()) / t;
  double pe = 0.0;
  for (std::size_t j = 0; j < cm.labels.size(); ++j)
    pe += static_cast<double>(cm.row_sum(j)) *
          static_cast<double>(cm.col_sum(j)) / (t * t);
  if (pe == 1.0) return pa == 1.0 ? 1.0 : 0.0;
  return (pa - pe) / (1.0 - pe);
}

double fidelity(const DecisionTree& tree, const Network& net,
                const Dataset& data) {
  if (data.instances.empty())
    throw ValidationError("fidelity over an empty dataset is undefined");
  std::size_t agree = 0;
  for (const Instance& inst : data.instances)
    if (tree.classify(inst) == net.predict_label(inst)) ++agree;
  return 100.0 * static_cast<double>(agree) /
         static_cast<double>(data.size());
}

Metrics evaluate_tree(const DecisionTree& tree, const Dataset& test,
                      const Network* net) {
  if (!test.schema.classification())
    throw ValidationError("evaluation needs a classification dataset");
  if (test.instances.empty())
    throw ValidationError("evaluation over an empty dataset is undefined");
  std::vector<std::string> actual, predicted;
  for (const Instance& inst : test.instances) {
    actual.push_back(actual_label(test, inst));
    predicted.push_back(tree.classify(inst));
  }
  const ConfusionMatrix cm =
      confusion_matrix(actual, predicted, test.schema.class_labels);
  Metrics m;
  m.total_accuracy = accuracy(cm);
  m.per_class = per_class_accuracy(cm);
  m.kappa = kappa(cm);
  m.fidelity = net ? fidelity(tree, *net, test) : 0.0;
  m.complexity = tree.complexity();
  return m;
}

std::string CompareReport::to_csv() const {
  std::string out =
      "model,accuracy,kappa,fidelity,internal_nodes,leaves,literals\n";
  for (const auto& [name, m] : rows)
    out += name + "," + fmt_fixed(m.total_accuracy, 2) + "," +
           fmt_fixed(m.kappa, 4) + "," + fmt_fixed(m.fidelity, 2) + "," +
           std::to_string(m.complexity.internal_nodes) + "," +
           std::to_string(m.complexity.leaves) + "," +
           std::to_string(m.complexity.total_literals) + "\n";
  return out;
}

std::string CompareReport::to_text() const {
  std::size_t width = 5;
  for (const auto& [name, m] : rows) width = std::max(width, name.size());
  std::string out = "model";
  out.append(width - 5, ' ');
  out += "  accuracy   kappa  fidelity  internal  leaves  literals\n";
  for (const auto& [name, m] : rows) {
    out += name;
    out.append(width - name.size(), ' ');
    char buf[128];
    std::snprintf(buf, sizeof(buf), "  %7.2f%%  %6.4f  %7.2f%%  %8zu  %6zu  %8zu\n",
                  m.total_accuracy, m.kappa, m.fidelity,
                  m.complexity.internal_nodes, m.complexity.leaves,
                  m.complexity.total_literals);
    out += buf;
  }
  return out;
}

CompareReport compare_report(
    const std::vector<std::pair<std::string, const DecisionTree*>>& models,
    const Network& net, const Dataset& test) {
  if (models.empty())
    throw ValidationError("comparison needs at least one model");
  CompareReport report;
  for (const auto& [name, tree] : models)
    report.rows.emplace_back(name, evaluate_tree(*tree, test, &net));
  return report;
}

}  // namespace xtrepan
