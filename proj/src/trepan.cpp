#include "xtrepan/trepan.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "xtrepan/c45.hpp"
#include "xtrepan/error.hpp"
#include "xtrepan/util.hpp"

namespace xtrepan {

namespace {

constexpr double kTinyGain = 1e-12;
constexpr std::uint64_t kReachStream = ~0ull;

std::vector<std::size_t> label_counts(const std::vector<Instance>& samples,
                                      std::size_t n_labels) {
  std::vector<std::size_t> counts(n_labels, 0);
  for (const Instance& inst : samples)
    counts[static_cast<std::size_t>(inst.label)] += 1;
  return counts;
}

double test_gain(const std::vector<Instance>& samples, const MofNTest& test,
                 std::size_t n_labels) {
  std::vector<std::size_t> pass(n_labels, 0), fail(n_labels, 0);
  std::size_t n_pass = 0;
  for (const Instance& inst : samples) {
    if (test.evaluate(inst)) {
      pass[static_cast<std::size_t>(inst.label)] += 1;
      ++n_pass;
    } else {
      fail[static_cast<std::size_t>(inst.label)] += 1;
    }
  }
  const double n = static_cast<double>(samples.size());
  double g = entropy(label_counts(samples, n_labels));
  if (n_pass > 0)
    g -= static_cast<double>(n_pass) / n * entropy(pass);
  if (n_pass < samples.size())
    g -= static_cast<double>(samples.size() - n_pass) / n * entropy(fail);
  return g;
}

std::string literal_key(const Literal& lit) {
  std::string key = std::to_string(lit.input_pos) + "|" +
                    std::to_string(static_cast<int>(lit.op)) + "|" +
                    std::to_string(lit.token) + "|";
  return key + fmt_double(lit.threshold);
}

std::string test_key(const MofNTest& test) {
  std::vector<std::string> keys;
  for (const Literal& lit : test.literals) keys.push_back(literal_key(lit));
  std::sort(keys.begin(), keys.end());
  return std::to_string(test.m) + ":" + join(keys, ";");
}

bool contains_literal(const MofNTest& test, const Literal& lit) {
  for (const Literal& other : test.literals)
    if (other == lit) return true;
  return false;
}

struct BeamCand {
  MofNTest test;
  double gain = 0.0;
  std::size_t seq = 0;
};

}  // namespace

const char* variant_name(TrepanVariant v) {
  switch (v) {
    case TrepanVariant::mofn: return "mofn";
    case TrepanVariant::single_test: return "single";
    default: return "disjunctive";
  }
}

std::optional<TrepanVariant> variant_from_name(const std::string& name) {
  if (name == "mofn") return TrepanVariant::mofn;
  if (name == "single" || name == "single_test")
    return TrepanVariant::single_test;
  if (name == "disjunctive") return TrepanVariant::disjunctive;
  return std::nullopt;
}

void TrepanParams::validate() const {
  if (beam_width < 1)
    throw ValidationError("beam width must be at least 1");
  if (!(purity_stop > 0.5) || !(purity_stop <= 1.0))
    throw ValidationError("purity_stop must lie in (0.5, 1]");
  if (rejection_cap < 1)
    throw ValidationError("rejection cap must be at least 1");
}

double node_priority(double reach, double fidelity) {
  return reach * (1.0 - fidelity);
}

std::vector<Literal> candidate_literals(const std::vector<Instance>& samples,
                                        const DatasetSchema& schema) {
  std::vector<Literal> out;
  std::size_t pos = 0;
  for (std::size_t idx : schema.input_indices()) {
    const AttributeSpec& attr = schema.attributes[idx];
    if (attr.kind == AttrKind::nominal) {
      std::vector<bool> seen(attr.tokens.size(), false);
      for (const Instance& inst : samples)
        seen[static_cast<std::size_t>(inst.nominal_at(pos))] = true;
      for (std::size_t t = 0; t < attr.tokens.size(); ++t)
        if (seen[t])
          out.push_back(make_equals_literal(schema, attr.name, attr.tokens[t]));
    } else {
      // distinct values ascending, with the set of labels seen at each
      std::map<double, std::set<int>> groups;
      for (const Instance& inst : samples)
        groups[inst.values[pos]].insert(inst.label);
      auto it = groups.begin();
      if (it != groups.end()) {
        auto prev = it++;
        for (; it != groups.end(); prev = it++) {
          // boundary unless both sides are pure with the same label
          if (prev->second.size() == 1 && prev->second == it->second)
            continue;
          out.push_back(make_threshold_literal(
              schema, attr.name, LitOp::greater_than,
              prev->first + (it->first - prev->first) / 2.0));
        }
      }
    }
    ++pos;
  }
  return out;
}

std::optional<SplitChoice> search_split(const std::vector<Instance>& samples,
                                        const DatasetSchema& schema,
                                        std::size_t n_labels,
                                        const TrepanParams& p) {
  const std::vector<Literal> literals = candidate_literals(samples, schema);
  if (literals.empty()) return std::nullopt;

  BeamCand best;
  bool found = false;
  for (const Literal& lit : literals) {
    MofNTest test;
    test.m = 1;
    test.literals = {lit};
    const double g = test_gain(samples, test, n_labels);
    if (!found || g > best.gain) {
      best = {std::move(test), g, 0};
      found = true;
    }
  }
  if (best.gain <= kTinyGain) return std::nullopt;
  if (p.variant == TrepanVariant::single_test)
    return SplitChoice{best.test, best.gain};

  std::set<std::string> scored;
  scored.insert(test_key(best.test));
  std::vector<BeamCand> beam = {best};
  std::size_t seq = 0;
  for (;;) {
    std::vector<BeamCand> expansions;
    for (const BeamCand& member : beam) {
      for (const Literal& lit : literals) {
        if (contains_literal(member.test, lit)) continue;
        const int moves = p.variant == TrepanVariant::mofn ? 2 : 1;
        for (int mv = 0; mv < moves; ++mv) {
          MofNTest test = member.test;
          test.literals.push_back(lit);
          if (mv == 1) test.m += 1;
          if (!scored.insert(test_key(test)).second) continue;
          const double g = test_gain(samples, test, n_labels);
          expansions.push_back({std::move(test), g, ++seq});
        }
      }
    }
    if (expansions.empty()) break;
    std::stable_sort(expansions.begin(), expansions.end(),
                     [](const BeamCand& a, const BeamCand& b) {
                       if (a.gain != b.gain) return a.gain > b.gain;
                       return a.seq < b.seq;
                     });
    if (expansions.front().gain <= best.gain + kTinyGain) break;
    best = expansions.front();
    if (expansions.size() > p.beam_width) expansions.resize(p.beam_width);
    beam = std::move(expansions);
  }
  return SplitChoice{best.test, best.gain};
}

namespace {

struct NodeRecord {
  TreeNode* node = nullptr;
  std::vector<Constraint> constraints;
  std::vector<Instance> examples;
  double reach = 1.0;
  double fidelity = 1.0;
  std::size_t depth = 0;
  bool open = false;
};

struct Extractor {
  const Network& net;
  const DatasetSchema& schema;
  const TrepanParams& p;
  OracleHandle handle;
  std::vector<Instance> reach_sample;
  std::vector<NodeRecord> records;
  std::vector<AuditRow> audit;
  std::size_t n_labels = 0;
  std::size_t internal_nodes = 0;

  double estimate_reach(const std::vector<Constraint>& constraints) const {
    if (reach_sample.empty()) return 1.0;
    std::size_t hits = 0;
    for (const Instance& inst : reach_sample) {
      bool ok = true;
      for (const Constraint& c : constraints)
        if (!c.holds(inst)) {
          ok = false;
          break;
        }
      if (ok) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(reach_sample.size());
  }

  // Majority fraction doubles as leaf fidelity: the leaf answers with its
  // majority label, so agreement with the oracle is exactly that fraction.
  void relabel_majority(NodeRecord& rec, int fallback) {
    if (rec.examples.empty()) {
      rec.node->label = fallback;
      rec.fidelity = 1.0;
      return;
    }
    const auto counts = label_counts(rec.examples, n_labels);
    const std::size_t maj = majority_class(counts);
    rec.node->label = static_cast<int>(maj);
    rec.fidelity = static_cast<double>(counts[maj]) /
                   static_cast<double>(rec.examples.size());
  }

  std::size_t create_record(TreeNode* node, std::vector<Constraint> constraints,
                            std::vector<Instance> examples, std::size_t depth,
                            int fallback_label) {
    NodeRecord rec;
    rec.node = node;
    rec.reach = estimate_reach(constraints);
    rec.constraints = std::move(constraints);
    rec.examples = std::move(examples);
    rec.depth = depth;
    relabel_majority(rec, fallback_label);
    const std::size_t id = records.size();
    if (rec.examples.empty())
      finish(rec, id, "empty");
    else if (rec.fidelity >= p.purity_stop)
      finish(rec, id, "pure");
    else
      rec.open = true;
    records.push_back(std::move(rec));
    return id;
  }

  void finish(const NodeRecord& rec, std::size_t id, const std::string& why,
              std::size_t n_drawn = 0, const std::string& test = "",
              double gain = 0.0) {
    AuditRow row;
    row.node_id = id;
    row.depth = rec.depth;
    row.priority = node_priority(rec.reach, rec.fidelity);
    row.reach = rec.reach;
    row.fidelity = rec.fidelity;
    row.n_examples = rec.examples.size();
    row.n_drawn = n_drawn;
    row.outcome = why;
    row.test = test;
    row.gain = gain;
    audit.push_back(std::move(row));
  }

  void run() {
    while (internal_nodes < p.max_internal_nodes) {
      std::size_t pick = records.size();
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].open) continue;
        if (pick == records.size()) {
          pick = i;
          continue;
        }
        const double a = node_priority(records[i].reach, records[i].fidelity);
        const double b =
            node_priority(records[pick].reach, records[pick].fidelity);
        if (a > b) pick = i;  // ties keep the older node
      }
      if (pick == records.size()) return;
      expand(pick);
    }
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].open) {
        records[i].open = false;
        finish(records[i], i, "node_limit");
      }
  }

  void expand(std::size_t id) {
    NodeRecord& rec = records[id];
    rec.open = false;
    const std::size_t before = rec.examples.size();
    rec.examples = ensure_min_sample(std::move(rec.examples), p.min_sample,
                                     handle, rec.constraints, id);
    const std::size_t drawn = rec.examples.size() - before;
    const int fallback = rec.node->label;
    relabel_majority(rec, fallback);
    if (rec.fidelity >= p.purity_stop) {
      finish(rec, id, "pure", drawn);
      return;
    }
    const auto split = search_split(rec.examples, schema, n_labels, p);
    if (!split) {
      finish(rec, id, "split_failed", drawn);
      return;
    }

    rec.node->test = split->test;
    rec.node->pass = std::make_unique<TreeNode>();
    rec.node->fail = std::make_unique<TreeNode>();
    ++internal_nodes;
    finish(rec, id, "expanded", drawn, split->test.text(), split->gain);

    std::vector<Instance> pass_ex, fail_ex;
    for (Instance& inst : rec.examples) {
      if (split->test.evaluate(inst))
        pass_ex.push_back(std::move(inst));
      else
        fail_ex.push_back(std::move(inst));
    }
    const int majority = rec.node->label;
    std::vector<Constraint> pass_c = rec.constraints;
    Constraint c;
    c.test = split->test;
    c.satisfied = true;
    pass_c.push_back(c);
    std::vector<Constraint> fail_c = rec.constraints;
    c.satisfied = false;
    fail_c.push_back(std::move(c));

    // rec may dangle after the vector grows; copy what we still need first
    TreeNode* pass_node = rec.node->pass.get();
    TreeNode* fail_node = rec.node->fail.get();
    const std::size_t depth = rec.depth + 1;
    create_record(pass_node, std::move(pass_c), std::move(pass_ex), depth,
                  majority);
    create_record(fail_node, std::move(fail_c), std::move(fail_ex), depth,
                  majority);
  }
};

}  // namespace

std::string ExtractionResult::audit_csv() const {
  std::string out =
      "node_id,depth,priority,reach,fidelity,n_examples,n_drawn,outcome,test,"
      "gain\n";
  for (const AuditRow& r : audit) {
    out += std::to_string(r.node_id) + "," + std::to_string(r.depth) + "," +
           fmt_double(r.priority) + "," + fmt_double(r.reach) + "," +
           fmt_double(r.fidelity) + "," + std::to_string(r.n_examples) + "," +
           std::to_string(r.n_drawn) + "," + r.outcome + ",\"" + r.test +
           "\"," + fmt_double(r.gain) + "\n";
  }
  return out;
}

ExtractionResult extract_tree(const Network& net, const Dataset& train,
                              const TrepanParams& p) {
  p.validate();
  net.validate();
  net.check_schema(train.schema);
  if (train.instances.empty())
    throw ValidationError("cannot extract a tree from an empty training set");
  if (!net.classification && !net.bins)
    throw ValidationError("regression extraction needs a binning spec");

  ExtractionResult result;
  result.tree.schema =
      net.classification ? train.schema : bin_target(train, *net.bins).schema;
  result.tree.provenance.kind = "extracted";
  result.tree.provenance.digest =
      std::string("variant=") + variant_name(p.variant) +
      ",min_sample=" + std::to_string(p.min_sample) +
      ",max_nodes=" + std::to_string(p.max_internal_nodes) +
      ",beam=" + std::to_string(p.beam_width) +
      ",purity=" + fmt_double(p.purity_stop) +
      ",seed=" + std::to_string(p.seed);
  result.tree.root = std::make_unique<TreeNode>();

  Extractor ex{net, train.schema, p, {}, {}, {}, {}, 0, 0};
  ex.handle.network = &net;
  ex.handle.models = fit_feature_models(train);
  ex.handle.seed = p.seed;
  ex.handle.rejection_cap = p.rejection_cap;
  ex.n_labels = net.label_set().size();
  ex.reach_sample = draw_instances(ex.handle, {}, p.min_sample, kReachStream);

  std::vector<Instance> root_examples = train.instances;
  for (Instance& inst : root_examples) inst.label = net.predict_index(inst);
  ex.create_record(result.tree.root.get(), {}, std::move(root_examples), 0, 0);
  ex.run();

  result.audit = std::move(ex.audit);
  result.tree.validate();
  return result;
}

}  // namespace xtrepan
