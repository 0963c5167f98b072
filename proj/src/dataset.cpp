#include "xtrepan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "xtrepan/error.hpp"
#include "xtrepan/rng.hpp"
#include "xtrepan/util.hpp"

namespace xtrepan {

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974ull;

// Names and tokens flow through every textual format (schema lines, CSV,
// tree files, DOT labels), so keep them to printable ASCII without the
// characters those formats reserve.
bool valid_token(const std::string& s) {
  if (s.empty()) return false;
  for (unsigned char c : s) {
    if (c <= ' ' || c >= 127) return false;
    if (c == ',' || c == '"' || c == '\\' || c == '#' || c == ':') return false;
  }
  return true;
}

void require_token(const std::string& s, const std::string& what) {
  if (!valid_token(s))
    throw ValidationError(what + " '" + s + "' is not a plain token");
}

}  // namespace

int AttributeSpec::token_index(const std::string& tok) const {
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i] == tok) return static_cast<int>(i);
  return -1;
}

std::size_t DatasetSchema::target_index() const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].role == AttrRole::target) return i;
  throw ValidationError("schema has no target attribute");
}

std::vector<std::size_t> DatasetSchema::input_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].role == AttrRole::input) out.push_back(i);
  return out;
}

int DatasetSchema::class_index(const std::string& label) const {
  for (std::size_t i = 0; i < class_labels.size(); ++i)
    if (class_labels[i] == label) return static_cast<int>(i);
  return -1;
}

void DatasetSchema::validate() const {
  if (attributes.empty()) throw ValidationError("schema declares no attributes");
  std::set<std::string> names;
  std::size_t targets = 0;
  for (const auto& a : attributes) {
    require_token(a.name, "attribute name");
    if (!names.insert(a.name).second)
      throw ValidationError("duplicate attribute name '" + a.name + "'");
    if (a.role == AttrRole::target) ++targets;
    if (a.kind == AttrKind::nominal) {
      if (a.tokens.empty())
        throw ValidationError("nominal attribute '" + a.name + "' has no tokens");
      std::set<std::string> seen;
      for (const auto& t : a.tokens) {
        require_token(t, "token");
        if (!seen.insert(t).second)
          throw ValidationError("duplicate token '" + t + "' in attribute '" +
                                a.name + "'");
      }
    } else if (!a.tokens.empty()) {
      throw ValidationError("continuous attribute '" + a.name +
                            "' must not list tokens");
    }
  }
  if (targets != 1)
    throw ValidationError("schema must declare exactly one target attribute");
  const AttributeSpec& t = target();
  if (t.kind == AttrKind::nominal) {
    if (class_labels != t.tokens)
      throw ValidationError("class labels must match the target's token list");
  } else if (!class_labels.empty()) {
    throw ValidationError("continuous target cannot carry class labels");
  }
  if (input_indices().empty())
    throw ValidationError("schema declares no input attributes");
}

DatasetSchema DatasetSchema::parse(const std::string& text) {
  DatasetSchema schema;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> words = split_ws(line);
    const std::string where = "schema line " + std::to_string(line_no);
    if (words[0] != "attribute")
      throw ValidationError(where + ": unknown directive '" + words[0] + "'");
    if (words.size() < 4)
      throw ValidationError(where + ": expected 'attribute <name> <role> <kind> [tokens]'");
    AttributeSpec a;
    a.name = words[1];
    if (words[2] == "input")
      a.role = AttrRole::input;
    else if (words[2] == "target")
      a.role = AttrRole::target;
    else
      throw ValidationError(where + ": role must be input or target, got '" +
                            words[2] + "'");
    if (words[3] == "nominal")
      a.kind = AttrKind::nominal;
    else if (words[3] == "continuous")
      a.kind = AttrKind::continuous;
    else
      throw ValidationError(where + ": kind must be nominal or continuous, got '" +
                            words[3] + "'");
    a.tokens.assign(words.begin() + 4, words.end());
    schema.attributes.push_back(std::move(a));
  }
  if (schema.attributes.empty())
    throw ValidationError("schema text declares no attributes");
  const std::size_t ti = schema.target_index();
  if (schema.attributes[ti].kind == AttrKind::nominal)
    schema.class_labels = schema.attributes[ti].tokens;
  schema.validate();
  return schema;
}

std::string DatasetSchema::serialize() const {
  std::string out;
  for (const auto& a : attributes) {
    out += "attribute " + a.name;
    out += a.role == AttrRole::target ? " target" : " input";
    out += a.kind == AttrKind::nominal ? " nominal" : " continuous";
    for (const auto& t : a.tokens) out += " " + t;
    out += "\n";
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(schema.class_labels.size(), 0);
  for (const auto& inst : instances) {
    if (inst.label < 0 || static_cast<std::size_t>(inst.label) >= counts.size())
      throw RuntimeError("instance label out of range");
    ++counts[static_cast<std::size_t>(inst.label)];
  }
  return counts;
}

Dataset parse_dataset(const std::string& csv_text, const DatasetSchema& schema) {
  schema.validate();
  Dataset ds;
  ds.schema = schema;

  std::vector<std::string> lines = split(csv_text, '\n');
  for (auto& l : lines) l = trim(l);

  std::size_t row = 0;
  bool header_seen = false;
  const std::size_t ti = schema.target_index();
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    std::vector<std::string> cells = split(lines[li], ',');
    for (auto& c : cells) c = trim(c);
    if (!header_seen) {
      if (cells.size() != schema.attributes.size())
        throw ValidationError("CSV header has " + std::to_string(cells.size()) +
                              " columns, schema declares " +
                              std::to_string(schema.attributes.size()));
      for (std::size_t j = 0; j < cells.size(); ++j)
        if (cells[j] != schema.attributes[j].name)
          throw ValidationError("CSV header column " + std::to_string(j + 1) +
                                " is '" + cells[j] + "', schema declares '" +
                                schema.attributes[j].name + "'");
      header_seen = true;
      continue;
    }
    ++row;
    const std::string where = "CSV row " + std::to_string(row);
    if (cells.size() != schema.attributes.size())
      throw ValidationError(where + ": expected " +
                            std::to_string(schema.attributes.size()) +
                            " values, got " + std::to_string(cells.size()));
    Instance inst;
    inst.values.reserve(schema.attributes.size() - 1);
    for (std::size_t j = 0; j < schema.attributes.size(); ++j) {
      const AttributeSpec& a = schema.attributes[j];
      const std::string& cell = cells[j];
      if (a.kind == AttrKind::nominal) {
        int idx = a.token_index(cell);
        if (idx < 0)
          throw ValidationError(where + ", column '" + a.name +
                                "': unknown token '" + cell + "'");
        if (j == ti)
          inst.label = idx;
        else
          inst.values.push_back(static_cast<double>(idx));
      } else {
        auto v = parse_double(cell);
        if (!v || !std::isfinite(*v))
          throw ValidationError(where + ", column '" + a.name +
                                "': expected a finite number, got '" + cell + "'");
        if (j == ti)
          inst.target_value = *v;
        else
          inst.values.push_back(*v);
      }
    }
    ds.instances.push_back(std::move(inst));
  }
  if (!header_seen) throw ValidationError("CSV has no header row");
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  const DatasetSchema& schema = ds.schema;
  const std::size_t ti = schema.target_index();
  std::vector<std::string> names;
  for (const auto& a : schema.attributes) names.push_back(a.name);
  std::string out = join(names, ",") + "\n";
  for (const auto& inst : ds.instances) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < schema.attributes.size(); ++j) {
      const AttributeSpec& a = schema.attributes[j];
      if (j == ti) {
        if (schema.classification())
          cells.push_back(schema.class_labels[static_cast<std::size_t>(inst.label)]);
        else
          cells.push_back(fmt_double(inst.target_value));
      } else {
        double v = inst.values[pos++];
        if (a.kind == AttrKind::nominal)
          cells.push_back(a.tokens[static_cast<std::size_t>(v)]);
        else
          cells.push_back(fmt_double(v));
      }
    }
    out += join(cells, ",") + "\n";
  }
  return out;
}

void BinningSpec::validate() const {
  if (edges.empty()) throw ValidationError("binning needs at least one edge");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i]))
      throw ValidationError("binning edges must be finite");
    if (i > 0 && edges[i] <= edges[i - 1])
      throw ValidationError("binning edges must be strictly increasing");
  }
  if (labels.size() != edges.size() + 1)
    throw ValidationError("binning needs one more label than edges");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    require_token(l, "bin label");
    if (!seen.insert(l).second)
      throw ValidationError("duplicate bin label '" + l + "'");
  }
}

std::size_t BinningSpec::bin_index(double v) const {
  return static_cast<std::size_t>(
      std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

BinningSpec BinningSpec::parse(const std::string& text) {
  std::vector<std::string> parts = split(text, ':');
  if (parts.size() != 2)
    throw ValidationError("binning spec must look like 'edge,edge,...:label,label,...'");
  BinningSpec spec;
  for (const auto& e : split(parts[0], ',')) {
    auto v = parse_double(trim(e));
    if (!v) throw ValidationError("bad binning edge '" + trim(e) + "'");
    spec.edges.push_back(*v);
  }
  for (const auto& l : split(parts[1], ',')) spec.labels.push_back(trim(l));
  spec.validate();
  return spec;
}

std::string BinningSpec::serialize() const {
  std::vector<std::string> es;
  for (double e : edges) es.push_back(fmt_double(e));
  return join(es, ",") + ":" + join(labels, ",");
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, cv_fraction, test_fraction})
    if (!(f >= 0.0 && f <= 1.0))
      throw ValidationError("split fractions must lie in [0,1]");
  const double sum = train_fraction + cv_fraction + test_fraction;
  if (std::fabs(sum - 1.0) > 1e-9)
    throw ValidationError("split fractions must sum to 1, got " + fmt_double(sum));
}

SplitSpec SplitSpec::parse_fractions(const std::string& text) {
  std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 3)
    throw ValidationError("split spec must look like 'train,cv,test'");
  SplitSpec spec;
  double* slots[3] = {&spec.train_fraction, &spec.cv_fraction, &spec.test_fraction};
  for (std::size_t i = 0; i < 3; ++i) {
    auto v = parse_double(trim(parts[i]));
    if (!v) throw ValidationError("bad split fraction '" + trim(parts[i]) + "'");
    *slots[i] = *v;
  }
  spec.validate();
  return spec;
}

Dataset bin_target(const Dataset& ds, const BinningSpec& spec) {
  spec.validate();
  const std::size_t ti = ds.schema.target_index();
  if (ds.schema.attributes[ti].kind != AttrKind::continuous)
    throw ValidationError("bin_target requires a continuous target");
  Dataset out;
  out.schema = ds.schema;
  AttributeSpec& t = out.schema.attributes[ti];
  t.kind = AttrKind::nominal;
  t.tokens = spec.labels;
  out.schema.class_labels = spec.labels;
  out.schema.validate();
  out.instances.reserve(ds.instances.size());
  for (const auto& inst : ds.instances) {
    if (!std::isfinite(inst.target_value))
      throw ValidationError("non-finite target value cannot be binned");
    Instance binned = inst;
    binned.label = static_cast<int>(spec.bin_index(inst.target_value));
    binned.target_value = 0.0;
    out.instances.push_back(std::move(binned));
  }
  return out;
}

SplitResult split_dataset(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  if (ds.instances.empty())
    throw ValidationError("cannot split an empty dataset");
  const std::size_t n = ds.instances.size();
  auto rounded = [n](double f) {
    return static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
  };
  std::size_t cv_n = std::min(rounded(spec.cv_fraction), n);
  std::size_t test_n = std::min(rounded(spec.test_fraction), n - cv_n);
  std::size_t train_n = n - cv_n - test_n;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::derive(spec.seed, kSplitStream);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.next_below(i + 1)]);

  SplitResult result;
  result.train.schema = ds.schema;
  result.cv.schema = ds.schema;
  result.test.schema = ds.schema;
  for (std::size_t i = 0; i < n; ++i) {
    const Instance& inst = ds.instances[order[i]];
    if (i < train_n)
      result.train.instances.push_back(inst);
    else if (i < train_n + cv_n)
      result.cv.instances.push_back(inst);
    else
      result.test.instances.push_back(inst);
  }
  return result;
}

std::size_t majority_class(const std::vector<std::size_t>& counts) {
  if (counts.empty()) throw RuntimeError("majority_class on empty counts");
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return best;
}

}  // namespace xtrepan
