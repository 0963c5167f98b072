#ifndef XTREPAN_TREE_HPP
#define XTREPAN_TREE_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xtrepan/dataset.hpp"

namespace xtrepan {

enum class LitOp { equals, greater_than, less_equal };

// Atomic condition on one input attribute. input_pos caches the attribute's
// position among the schema's inputs so evaluation doesn't do name lookups.
struct Literal {
  std::string attribute;
  std::size_t input_pos = 0;
  LitOp op = LitOp::equals;
  int token = -1;             // equals only: token index
  std::string token_text;     // equals only: token spelling
  double threshold = 0.0;     // greater_than / less_equal only

  bool holds(const Instance& inst) const;
  std::string text() const;
  bool operator==(const Literal& other) const;
};

Literal make_equals_literal(const DatasetSchema& schema,
                            const std::string& attribute,
                            const std::string& token);
Literal make_threshold_literal(const DatasetSchema& schema,
                               const std::string& attribute, LitOp op,
                               double threshold);

struct MofNTest {
  std::size_t m = 1;
  std::vector<Literal> literals;

  void validate() const;
  bool evaluate(const Instance& inst) const;
  // "Outlook=Sunny" for 1-of-1, otherwise "2-of-{a=T, b>3.3}".
  std::string text() const;
};

struct TreeNode {
  std::optional<MofNTest> test;  // absent for leaves
  int label = -1;                // leaves: class index
  std::unique_ptr<TreeNode> pass;
  std::unique_ptr<TreeNode> fail;
  // Branch count of the original split this binary node was compiled from.
  // 2 except for nodes expressing multiway nominal splits.
  std::size_t source_arity = 2;

  bool is_leaf() const { return !test.has_value(); }
};

struct Provenance {
  std::string kind;    // "extracted" | "induced"
  std::string digest;  // parameter summary, single line
};

struct TreeComplexity {
  std::size_t internal_nodes = 0;
  std::size_t leaves = 0;
  std::size_t total_literals = 0;
};

struct DecisionTree {
  DatasetSchema schema;
  Provenance provenance;
  std::unique_ptr<TreeNode> root;

  int classify_index(const Instance& inst) const;
  std::string classify(const Instance& inst) const;
  TreeComplexity complexity() const;
  void validate() const;

  std::string serialize() const;
  static DecisionTree deserialize(const std::string& text);
  std::string to_dot() const;
};

}  // namespace xtrepan

#endif
