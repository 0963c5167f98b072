#include "xtrepan/c45.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xtrepan/error.hpp"

namespace xtrepan {

namespace {

constexpr double kTinyGain = 1e-12;

std::size_t input_pos_of(const DatasetSchema& schema, const std::string& name) {
  const auto inputs = schema.input_indices();
  for (std::size_t pos = 0; pos < inputs.size(); ++pos)
    if (schema.attributes[inputs[pos]].name == name) return pos;
  throw ValidationError("'" + name + "' is not an input attribute");
}

std::vector<std::size_t> all_rows(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

std::vector<std::size_t> label_counts(const Dataset& ds,
                                      const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> counts(ds.schema.class_labels.size(), 0);
  for (std::size_t r : rows)
    ++counts[static_cast<std::size_t>(ds.instances[r].label)];
  return counts;
}

struct NominalSplit {
  double gain = 0.0;
  double split_info = 0.0;
};

NominalSplit nominal_split(const Dataset& ds,
                           const std::vector<std::size_t>& rows,
                           std::size_t pos, const AttributeSpec& attr) {
  const std::size_t k = attr.tokens.size();
  const std::size_t n_classes = ds.schema.class_labels.size();
  std::vector<std::vector<std::size_t>> branch(k,
      std::vector<std::size_t>(n_classes, 0));
  for (std::size_t r : rows) {
    const Instance& inst = ds.instances[r];
    ++branch[static_cast<std::size_t>(inst.nominal_at(pos))]
            [static_cast<std::size_t>(inst.label)];
  }
  NominalSplit out;
  const double total = static_cast<double>(rows.size());
  double weighted = 0.0;
  std::vector<std::size_t> sizes;
  for (std::size_t v = 0; v < k; ++v) {
    const std::size_t nv = std::accumulate(branch[v].begin(), branch[v].end(),
                                           std::size_t{0});
    if (nv == 0) continue;
    weighted += (static_cast<double>(nv) / total) * entropy(branch[v]);
    sizes.push_back(nv);
  }
  out.gain = entropy(label_counts(ds, rows)) - weighted;
  out.split_info = entropy(sizes);
  return out;
}

struct ContinuousSplit {
  double threshold = 0.0;
  double gain = 0.0;
  double split_info = 0.0;
  bool admissible = false;
};

ContinuousSplit continuous_split(const Dataset& ds,
                                 const std::vector<std::size_t>& rows,
                                 std::size_t pos) {
  std::vector<std::pair<double, int>> points;
  points.reserve(rows.size());
  for (std::size_t r : rows)
    points.emplace_back(ds.instances[r].values[pos], ds.instances[r].label);
  std::sort(points.begin(), points.end());

  ContinuousSplit best;
  const std::size_t n_classes = ds.schema.class_labels.size();
  const double base = entropy(label_counts(ds, rows));
  const double total = static_cast<double>(points.size());
  std::vector<std::size_t> left(n_classes, 0), right(n_classes, 0);
  for (const auto& [v, label] : points) ++right[static_cast<std::size_t>(label)];

  std::size_t moved = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    ++left[static_cast<std::size_t>(points[i].second)];
    --right[static_cast<std::size_t>(points[i].second)];
    ++moved;
    if (points[i].first == points[i + 1].first) continue;
    const double nl = static_cast<double>(moved);
    const double nr = total - nl;
    const double gain =
        base - (nl / total) * entropy(left) - (nr / total) * entropy(right);
    if (!best.admissible || gain > best.gain) {
      best.admissible = true;
      best.threshold = points[i].first + (points[i + 1].first - points[i].first) / 2.0;
      best.gain = gain;
      best.split_info = entropy({moved, points.size() - moved});
    }
  }
  if (best.admissible && best.gain <= kTinyGain) best.admissible = false;
  return best;
}

}  // namespace

double entropy(const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) throw RuntimeError("entropy of an empty distribution");
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double info_gain(const Dataset& ds, const std::vector<std::size_t>& rows,
                 const std::string& attribute) {
  if (rows.empty()) throw RuntimeError("info_gain on an empty row set");
  const std::size_t pos = input_pos_of(ds.schema, attribute);
  const AttributeSpec& attr = ds.schema.attributes[ds.schema.input_indices()[pos]];
  if (attr.kind == AttrKind::nominal)
    return nominal_split(ds, rows, pos, attr).gain;
  const ContinuousSplit split = continuous_split(ds, rows, pos);
  return split.admissible ? split.gain : 0.0;
}

double info_gain(const Dataset& ds, const std::string& attribute) {
  return info_gain(ds, all_rows(ds), attribute);
}

std::optional<double> gain_ratio(const Dataset& ds,
                                 const std::vector<std::size_t>& rows,
                                 const std::string& attribute) {
  if (rows.empty()) throw RuntimeError("gain_ratio on an empty row set");
  const std::size_t pos = input_pos_of(ds.schema, attribute);
  const AttributeSpec& attr = ds.schema.attributes[ds.schema.input_indices()[pos]];
  double gain = 0.0, split_info = 0.0;
  if (attr.kind == AttrKind::nominal) {
    const NominalSplit split = nominal_split(ds, rows, pos, attr);
    gain = split.gain;
    split_info = split.split_info;
  } else {
    const ContinuousSplit split = continuous_split(ds, rows, pos);
    if (!split.admissible) return std::nullopt;
    gain = split.gain;
    split_info = split.split_info;
  }
  if (split_info <= kTinyGain) return std::nullopt;
  return gain / split_info;
}

std::optional<ThresholdChoice> best_threshold(
    const Dataset& ds, const std::vector<std::size_t>& rows,
    const std::string& attribute) {
  if (rows.empty()) throw RuntimeError("best_threshold on an empty row set");
  const std::size_t pos = input_pos_of(ds.schema, attribute);
  const AttributeSpec& attr = ds.schema.attributes[ds.schema.input_indices()[pos]];
  if (attr.kind != AttrKind::continuous)
    throw ValidationError("best_threshold needs a continuous attribute");
  const ContinuousSplit split = continuous_split(ds, rows, pos);
  if (!split.admissible) return std::nullopt;
  return ThresholdChoice{split.threshold, split.gain};
}

namespace {

struct Inducer {
  const Dataset& ds;
  const C45Params& p;
  std::vector<std::size_t> inputs;  // schema attribute index per input position

  std::unique_ptr<TreeNode> leaf(int label) const {
    auto node = std::make_unique<TreeNode>();
    node->label = label;
    return node;
  }

  // Chains a k-way nominal split into equals tests, one token per level.
  std::unique_ptr<TreeNode> chain(const AttributeSpec& attr,
                                  std::vector<std::unique_ptr<TreeNode>> kids,
                                  std::size_t from) {
    const std::size_t k = kids.size();
    if (from + 1 == k) return std::move(kids[from]);
    auto node = std::make_unique<TreeNode>();
    MofNTest test;
    test.literals = {make_equals_literal(ds.schema, attr.name, attr.tokens[from])};
    node->test = std::move(test);
    node->source_arity = k;
    node->pass = std::move(kids[from]);
    node->fail = chain(attr, std::move(kids), from + 1);
    return node;
  }

  std::unique_ptr<TreeNode> build(const std::vector<std::size_t>& rows,
                                  std::vector<bool> used, std::size_t depth,
                                  int parent_majority) {
    if (rows.empty()) return leaf(parent_majority);
    const std::vector<std::size_t> counts = label_counts(ds, rows);
    const int majority = static_cast<int>(majority_class(counts));
    const std::size_t present =
        std::count_if(counts.begin(), counts.end(),
                      [](std::size_t c) { return c > 0; });
    if (present <= 1) return leaf(majority);
    if (rows.size() < p.min_instances_per_leaf) return leaf(majority);
    if (p.max_depth != 0 && depth >= p.max_depth) return leaf(majority);

    double best_score = 0.0;
    std::size_t best_pos = 0;
    bool found = false;
    double best_threshold_value = 0.0;
    bool best_is_nominal = false;
    for (std::size_t pos = 0; pos < inputs.size(); ++pos) {
      const AttributeSpec& attr = ds.schema.attributes[inputs[pos]];
      double gain = 0.0, split_info = 0.0, threshold = 0.0;
      bool is_nominal = attr.kind == AttrKind::nominal;
      if (is_nominal) {
        if (used[pos]) continue;
        const NominalSplit split = nominal_split(ds, rows, pos, attr);
        gain = split.gain;
        split_info = split.split_info;
      } else {
        const ContinuousSplit split = continuous_split(ds, rows, pos);
        if (!split.admissible) continue;
        gain = split.gain;
        split_info = split.split_info;
        threshold = split.threshold;
      }
      if (gain <= kTinyGain) continue;
      double score = gain;
      if (p.use_gain_ratio) {
        if (split_info <= kTinyGain) continue;
        score = gain / split_info;
      }
      if (!found || score > best_score) {
        found = true;
        best_score = score;
        best_pos = pos;
        best_threshold_value = threshold;
        best_is_nominal = is_nominal;
      }
    }
    if (!found) return leaf(majority);

    const AttributeSpec& attr = ds.schema.attributes[inputs[best_pos]];
    if (best_is_nominal) {
      std::vector<std::vector<std::size_t>> branch_rows(attr.tokens.size());
      for (std::size_t r : rows)
        branch_rows[static_cast<std::size_t>(ds.instances[r].nominal_at(best_pos))]
            .push_back(r);
      std::vector<bool> child_used = used;
      child_used[best_pos] = true;
      std::vector<std::unique_ptr<TreeNode>> kids;
      for (const auto& br : branch_rows)
        kids.push_back(build(br, child_used, depth + 1, majority));
      return chain(attr, std::move(kids), 0);
    }

    auto node = std::make_unique<TreeNode>();
    MofNTest test;
    test.literals = {make_threshold_literal(ds.schema, attr.name,
                                            LitOp::greater_than,
                                            best_threshold_value)};
    node->test = std::move(test);
    std::vector<std::size_t> pass_rows, fail_rows;
    for (std::size_t r : rows) {
      if (ds.instances[r].values[best_pos] > best_threshold_value)
        pass_rows.push_back(r);
      else
        fail_rows.push_back(r);
    }
    node->pass = build(pass_rows, used, depth + 1, majority);
    node->fail = build(fail_rows, used, depth + 1, majority);
    return node;
  }
};

}  // namespace

DecisionTree induce_c45(const Dataset& train, const C45Params& p) {
  train.schema.validate();
  if (!train.schema.classification())
    throw ValidationError("c45 requires a classification dataset");
  if (train.instances.empty())
    throw ValidationError("c45 requires a non-empty training set");
  if (p.min_instances_per_leaf < 1)
    throw ValidationError("min_instances_per_leaf must be at least 1");

  Inducer inducer{train, p, train.schema.input_indices()};
  DecisionTree tree;
  tree.schema = train.schema;
  tree.provenance.kind = "induced";
  tree.provenance.digest =
      std::string("criterion=") + (p.use_gain_ratio ? "gain_ratio" : "gain") +
      ",min_leaf=" + std::to_string(p.min_instances_per_leaf) +
      ",max_depth=" + std::to_string(p.max_depth);
  const std::vector<std::size_t> rows = all_rows(train);
  const std::vector<std::size_t> counts = label_counts(train, rows);
  tree.root = inducer.build(rows, std::vector<bool>(inducer.inputs.size(), false),
                            0, static_cast<int>(majority_class(counts)));
  tree.validate();
  return tree;
}

}  // namespace xtrepan
