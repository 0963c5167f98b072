#ifndef XTREPAN_TREPAN_HPP
#define XTREPAN_TREPAN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xtrepan/dataset.hpp"
#include "xtrepan/network.hpp"
#include "xtrepan/oracle.hpp"
#include "xtrepan/tree.hpp"

namespace xtrepan {

enum class TrepanVariant { mofn, single_test, disjunctive };

const char* variant_name(TrepanVariant v);
std::optional<TrepanVariant> variant_from_name(const std::string& name);

struct TrepanParams {
  std::size_t min_sample = 1000;
  std::size_t max_internal_nodes = 50;
  std::size_t beam_width = 2;
  TrepanVariant variant = TrepanVariant::mofn;
  // A leaf whose majority-label fraction reaches this is final.
  double purity_stop = 0.99;
  std::uint64_t seed = 0;
  std::size_t rejection_cap = 10000;

  void validate() const;
};

// One line per node, written when the node's fate is decided.
// outcome: expanded | pure | empty | split_failed | node_limit
struct AuditRow {
  std::size_t node_id = 0;
  std::size_t depth = 0;
  double priority = 0.0;
  double reach = 0.0;
  double fidelity = 0.0;
  std::size_t n_examples = 0;
  std::size_t n_drawn = 0;
  std::string outcome;
  std::string test;
  double gain = 0.0;
};

struct ExtractionResult {
  DecisionTree tree;
  std::vector<AuditRow> audit;

  std::string audit_csv() const;
};

double node_priority(double reach, double fidelity);

// Equals-literals for observed nominal tokens; greater_than literals at
// midpoints between consecutive distinct values whose label sets differ.
std::vector<Literal> candidate_literals(const std::vector<Instance>& samples,
                                        const DatasetSchema& schema);

struct SplitChoice {
  MofNTest test;
  double gain = 0.0;
};

// Gain-maximizing test per the variant's search. Empty = no admissible
// split; the caller finalizes the leaf.
std::optional<SplitChoice> search_split(const std::vector<Instance>& samples,
                                        const DatasetSchema& schema,
                                        std::size_t n_labels,
                                        const TrepanParams& p);

ExtractionResult extract_tree(const Network& net, const Dataset& train,
                              const TrepanParams& p);

}  // namespace xtrepan

#endif
