#include "xtrepan/tree.hpp"

#include <cmath>

#include "xtrepan/error.hpp"
#include "xtrepan/util.hpp"

namespace xtrepan {

namespace {

std::size_t input_position(const DatasetSchema& schema, std::size_t attr_index) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < attr_index; ++i)
    if (schema.attributes[i].role == AttrRole::input) ++pos;
  return pos;
}

std::size_t find_attribute(const DatasetSchema& schema, const std::string& name) {
  for (std::size_t i = 0; i < schema.attributes.size(); ++i)
    if (schema.attributes[i].name == name) return i;
  throw ValidationError("unknown attribute '" + name + "'");
}

}  // namespace

bool Literal::holds(const Instance& inst) const {
  if (input_pos >= inst.values.size())
    throw RuntimeError("literal refers past the instance arity");
  const double v = inst.values[input_pos];
  switch (op) {
    case LitOp::equals:
      return static_cast<int>(v) == token;
    case LitOp::greater_than:
      return v > threshold;
    case LitOp::less_equal:
      return v <= threshold;
  }
  throw RuntimeError("corrupt literal relation");
}

std::string Literal::text() const {
  switch (op) {
    case LitOp::equals:
      return attribute + "=" + token_text;
    case LitOp::greater_than:
      return attribute + ">" + fmt_double(threshold);
    case LitOp::less_equal:
      return attribute + "<=" + fmt_double(threshold);
  }
  throw RuntimeError("corrupt literal relation");
}

bool Literal::operator==(const Literal& other) const {
  return input_pos == other.input_pos && op == other.op &&
         token == other.token && threshold == other.threshold;
}

Literal make_equals_literal(const DatasetSchema& schema,
                            const std::string& attribute,
                            const std::string& token) {
  const std::size_t ai = find_attribute(schema, attribute);
  const AttributeSpec& a = schema.attributes[ai];
  if (a.role != AttrRole::input)
    throw ValidationError("literal attribute '" + attribute + "' is not an input");
  if (a.kind != AttrKind::nominal)
    throw ValidationError("equality literal needs a nominal attribute, '" +
                          attribute + "' is continuous");
  const int ti = a.token_index(token);
  if (ti < 0)
    throw ValidationError("attribute '" + attribute + "' has no token '" +
                          token + "'");
  Literal lit;
  lit.attribute = attribute;
  lit.input_pos = input_position(schema, ai);
  lit.op = LitOp::equals;
  lit.token = ti;
  lit.token_text = token;
  return lit;
}

Literal make_threshold_literal(const DatasetSchema& schema,
                               const std::string& attribute, LitOp op,
                               double threshold) {
  if (op == LitOp::equals)
    throw ValidationError("threshold literal cannot use the equals relation");
  const std::size_t ai = find_attribute(schema, attribute);
  const AttributeSpec& a = schema.attributes[ai];
  if (a.role != AttrRole::input)
    throw ValidationError("literal attribute '" + attribute + "' is not an input");
  if (a.kind != AttrKind::continuous)
    throw ValidationError("threshold literal needs a continuous attribute, '" +
                          attribute + "' is nominal");
  if (!std::isfinite(threshold))
    throw ValidationError("literal threshold must be finite");
  Literal lit;
  lit.attribute = attribute;
  lit.input_pos = input_position(schema, ai);
  lit.op = op;
  lit.threshold = threshold;
  return lit;
}

void MofNTest::validate() const {
  if (literals.empty()) throw ValidationError("m-of-n test has no literals");
  if (m < 1 || m > literals.size())
    throw ValidationError("m-of-n test needs 1 <= m <= n, got m=" +
                          std::to_string(m) + " n=" +
                          std::to_string(literals.size()));
  for (std::size_t i = 0; i < literals.size(); ++i)
    for (std::size_t j = i + 1; j < literals.size(); ++j)
      if (literals[i] == literals[j])
        throw ValidationError("duplicate literal '" + literals[i].text() +
                              "' in m-of-n test");
}

bool MofNTest::evaluate(const Instance& inst) const {
  std::size_t held = 0;
  for (const Literal& lit : literals)
    if (lit.holds(inst) && ++held >= m) return true;
  return false;
}

std::string MofNTest::text() const {
  if (literals.size() == 1 && m == 1) return literals[0].text();
  std::vector<std::string> parts;
  for (const Literal& lit : literals) parts.push_back(lit.text());
  return std::to_string(m) + "-of-{" + join(parts, ", ") + "}";
}

int DecisionTree::classify_index(const Instance& inst) const {
  const TreeNode* node = root.get();
  if (!node) throw RuntimeError("decision tree has no root");
  while (!node->is_leaf()) {
    node = node->test->evaluate(inst) ? node->pass.get() : node->fail.get();
    if (!node) throw RuntimeError("internal node with a missing child");
  }
  return node->label;
}

std::string DecisionTree::classify(const Instance& inst) const {
  const int idx = classify_index(inst);
  if (idx < 0 || static_cast<std::size_t>(idx) >= schema.class_labels.size())
    throw RuntimeError("leaf label out of range");
  return schema.class_labels[static_cast<std::size_t>(idx)];
}

namespace {

void accumulate_complexity(const TreeNode* node, TreeComplexity& c) {
  if (node->is_leaf()) {
    ++c.leaves;
    return;
  }
  ++c.internal_nodes;
  c.total_literals += node->test->literals.size();
  accumulate_complexity(node->pass.get(), c);
  accumulate_complexity(node->fail.get(), c);
}

void validate_node(const TreeNode* node, const DatasetSchema& schema) {
  if (!node) throw ValidationError("tree contains a missing node");
  if (node->is_leaf()) {
    if (node->pass || node->fail)
      throw ValidationError("leaf node has children");
    if (node->label < 0 ||
        static_cast<std::size_t>(node->label) >= schema.class_labels.size())
      throw ValidationError("leaf label index out of range");
    return;
  }
  node->test->validate();
  for (const Literal& lit : node->test->literals) {
    const AttributeSpec* found = nullptr;
    for (const auto& a : schema.attributes)
      if (a.name == lit.attribute) found = &a;
    if (!found || found->role != AttrRole::input)
      throw ValidationError("literal attribute '" + lit.attribute +
                            "' is not a schema input");
    if ((lit.op == LitOp::equals) != (found->kind == AttrKind::nominal))
      throw ValidationError("literal relation does not match the kind of '" +
                            lit.attribute + "'");
    if (lit.op == LitOp::equals &&
        (lit.token < 0 ||
         static_cast<std::size_t>(lit.token) >= found->tokens.size()))
      throw ValidationError("literal token index out of range for '" +
                            lit.attribute + "'");
  }
  if (!node->pass || !node->fail)
    throw ValidationError("internal node must have pass and fail children");
  validate_node(node->pass.get(), schema);
  validate_node(node->fail.get(), schema);
}

void serialize_node(const TreeNode* node, const DatasetSchema& schema,
                    std::string& out) {
  if (node->is_leaf()) {
    out += "leaf " +
           schema.class_labels[static_cast<std::size_t>(node->label)] + "\n";
    return;
  }
  const MofNTest& t = *node->test;
  out += "internal m=" + std::to_string(t.m) +
         " n=" + std::to_string(t.literals.size()) +
         " arity=" + std::to_string(node->source_arity) + "\n";
  for (const Literal& lit : t.literals) {
    switch (lit.op) {
      case LitOp::equals:
        out += "lit eq " + lit.attribute + " " + lit.token_text + "\n";
        break;
      case LitOp::greater_than:
        out += "lit gt " + lit.attribute + " " + fmt_double(lit.threshold) + "\n";
        break;
      case LitOp::less_equal:
        out += "lit le " + lit.attribute + " " + fmt_double(lit.threshold) + "\n";
        break;
    }
  }
  serialize_node(node->pass.get(), schema, out);
  serialize_node(node->fail.get(), schema, out);
}

struct TreeParser {
  const std::vector<std::string>& lines;
  const DatasetSchema& schema;
  std::size_t pos;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("tree line " + std::to_string(pos + 1) + ": " + msg);
  }

  const std::string& next_line() {
    while (pos < lines.size() && trim(lines[pos]).empty()) ++pos;
    if (pos >= lines.size())
      throw ValidationError("tree text ends before the structure is complete");
    return lines[pos];
  }

  std::unique_ptr<TreeNode> parse_node() {
    std::vector<std::string> words = split_ws(next_line());
    auto node = std::make_unique<TreeNode>();
    if (words[0] == "leaf") {
      if (words.size() != 2) fail("leaf line needs exactly one label");
      const int idx = schema.class_index(words[1]);
      if (idx < 0) fail("unknown class label '" + words[1] + "'");
      node->label = idx;
      ++pos;
      return node;
    }
    if (words[0] != "internal") fail("expected 'internal' or 'leaf'");
    if (words.size() != 4) fail("internal line needs m=, n= and arity=");
    auto field = [&](const std::string& w, const char* key) -> std::size_t {
      const std::string prefix = std::string(key) + "=";
      if (w.rfind(prefix, 0) != 0) fail("expected '" + prefix + "...'");
      auto v = parse_int(w.substr(prefix.size()));
      if (!v || *v < 0) fail("bad value in '" + w + "'");
      return static_cast<std::size_t>(*v);
    };
    MofNTest test;
    test.m = field(words[1], "m");
    const std::size_t n = field(words[2], "n");
    node->source_arity = field(words[3], "arity");
    ++pos;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> lw = split_ws(next_line());
      if (lw.size() != 4 || lw[0] != "lit")
        fail("expected 'lit <eq|gt|le> <attribute> <value>'");
      if (lw[1] == "eq") {
        test.literals.push_back(make_equals_literal(schema, lw[2], lw[3]));
      } else if (lw[1] == "gt" || lw[1] == "le") {
        auto v = parse_double(lw[3]);
        if (!v) fail("bad threshold '" + lw[3] + "'");
        test.literals.push_back(make_threshold_literal(
            schema, lw[2],
            lw[1] == "gt" ? LitOp::greater_than : LitOp::less_equal, *v));
      } else {
        fail("unknown literal relation '" + lw[1] + "'");
      }
      ++pos;
    }
    test.validate();
    node->test = std::move(test);
    node->pass = parse_node();
    node->fail = parse_node();
    return node;
  }
};

void dot_node(const TreeNode* node, const DatasetSchema& schema,
              std::size_t& next_id, std::string& out) {
  const std::size_t id = next_id++;
  if (node->is_leaf()) {
    out += "  n" + std::to_string(id) + " [shape=ellipse label=\"" +
           schema.class_labels[static_cast<std::size_t>(node->label)] + "\"];\n";
    return;
  }
  out += "  n" + std::to_string(id) + " [shape=box label=\"" +
         node->test->text() + "\"];\n";
  const std::size_t pass_id = next_id;
  dot_node(node->pass.get(), schema, next_id, out);
  const std::size_t fail_id = next_id;
  dot_node(node->fail.get(), schema, next_id, out);
  out += "  n" + std::to_string(id) + " -> n" + std::to_string(pass_id) +
         " [label=\"pass\"];\n";
  out += "  n" + std::to_string(id) + " -> n" + std::to_string(fail_id) +
         " [label=\"fail\"];\n";
}

}  // namespace

TreeComplexity DecisionTree::complexity() const {
  if (!root) throw RuntimeError("decision tree has no root");
  TreeComplexity c;
  accumulate_complexity(root.get(), c);
  return c;
}

void DecisionTree::validate() const {
  schema.validate();
  if (!schema.classification())
    throw ValidationError("decision trees require a classification schema");
  if (provenance.kind != "extracted" && provenance.kind != "induced")
    throw ValidationError("tree provenance must be extracted or induced");
  validate_node(root.get(), schema);
}

std::string DecisionTree::serialize() const {
  validate();
  std::string out = "xtrepan-tree 1\n";
  out += "provenance " + provenance.kind;
  if (!provenance.digest.empty()) out += " " + provenance.digest;
  out += "\n";
  const std::string schema_text = schema.serialize();
  const auto schema_lines = split(trim(schema_text), '\n');
  out += "schema " + std::to_string(schema_lines.size()) + "\n";
  out += schema_text;
  out += "nodes\n";
  serialize_node(root.get(), schema, out);
  out += "end\n";
  return out;
}

DecisionTree DecisionTree::deserialize(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  std::size_t pos = 0;
  auto demand = [&](const char* what) -> std::vector<std::string> {
    while (pos < lines.size() && trim(lines[pos]).empty()) ++pos;
    if (pos >= lines.size())
      throw ValidationError(std::string("tree text ends before ") + what);
    return split_ws(lines[pos]);
  };

  auto header = demand("the header");
  if (header.size() != 2 || header[0] != "xtrepan-tree" || header[1] != "1")
    throw ValidationError("tree line " + std::to_string(pos + 1) +
                          ": expected 'xtrepan-tree 1'");
  ++pos;

  auto prov = demand("the provenance line");
  if (prov.size() < 2 || prov[0] != "provenance")
    throw ValidationError("tree line " + std::to_string(pos + 1) +
                          ": expected 'provenance <kind> [digest]'");
  DecisionTree tree;
  tree.provenance.kind = prov[1];
  if (prov.size() > 2) {
    std::vector<std::string> rest(prov.begin() + 2, prov.end());
    tree.provenance.digest = join(rest, " ");
  }
  ++pos;

  auto schema_head = demand("the schema section");
  if (schema_head.size() != 2 || schema_head[0] != "schema")
    throw ValidationError("tree line " + std::to_string(pos + 1) +
                          ": expected 'schema <line count>'");
  auto count = parse_int(schema_head[1]);
  if (!count || *count < 1)
    throw ValidationError("tree line " + std::to_string(pos + 1) +
                          ": bad schema line count");
  ++pos;
  std::string schema_text;
  for (long long i = 0; i < *count; ++i) {
    if (pos >= lines.size())
      throw ValidationError("tree text ends inside the schema section");
    schema_text += lines[pos++] + "\n";
  }
  tree.schema = DatasetSchema::parse(schema_text);

  auto nodes_head = demand("the nodes section");
  if (nodes_head.size() != 1 || nodes_head[0] != "nodes")
    throw ValidationError("tree line " + std::to_string(pos + 1) +
                          ": expected 'nodes'");
  ++pos;

  TreeParser parser{lines, tree.schema, pos};
  tree.root = parser.parse_node();
  pos = parser.pos;

  auto tail = demand("the end marker");
  if (tail.size() != 1 || tail[0] != "end")
    throw ValidationError("tree line " + std::to_string(pos + 1) +
                          ": expected 'end'");
  tree.validate();
  return tree;
}

std::string DecisionTree::to_dot() const {
  validate();
  std::string out = "digraph decision_tree {\n";
  std::size_t next_id = 0;
  dot_node(root.get(), schema, next_id, out);
  out += "}\n";
  return out;
}

}  // namespace xtrepan
