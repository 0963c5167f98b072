#ifndef XTREPAN_EVAL_HPP
#define XTREPAN_EVAL_HPP

#include <string>
#include <utility>
#include <vector>

#include "xtrepan/dataset.hpp"
#include "xtrepan/network.hpp"
#include "xtrepan/tree.hpp"

namespace xtrepan {

struct ConfusionMatrix {
  std::vector<std::string> labels;
  // rows = actual, columns = predicted
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t i) const;
  std::size_t col_sum(std::size_t j) const;
};

ConfusionMatrix confusion_matrix(const std::vector<std::string>& actual,
                                 const std::vector<std::string>& predicted,
                                 const std::vector<std::string>& label_order);

// percent: 100 * trace / total
double accuracy(const ConfusionMatrix& cm);

// percent per label, denominated by the predicted column; empty column -> 0
std::vector<double> per_class_accuracy(const ConfusionMatrix& cm);

// (P(A) - P(E)) / (1 - P(E)); P(E) = 1 collapses to 1 when P(A) = 1 else 0
double kappa(const ConfusionMatrix& cm);

// percent of instances where the tree and the network agree
double fidelity(const DecisionTree& tree, const Network& net,
                const Dataset& data);

struct Metrics {
  double total_accuracy = 0.0;
  std::vector<double> per_class;
  double kappa = 0.0;
  double fidelity = 0.0;
  TreeComplexity complexity;
};

Metrics evaluate_tree(const DecisionTree& tree, const Dataset& test,
                      const Network* net);

struct CompareReport {
  std::vector<std::pair<std::string, Metrics>> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

CompareReport compare_report(
    const std::vector<std::pair<std::string, const DecisionTree*>>& models,
    const Network& net, const Dataset& test);

}  // namespace xtrepan

#endif
