#ifndef XTREPAN_DATASET_HPP
#define XTREPAN_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace xtrepan {

enum class AttrKind { nominal, continuous };
enum class AttrRole { input, target };

struct AttributeSpec {
  std::string name;
  AttrRole role = AttrRole::input;
  AttrKind kind = AttrKind::continuous;
  std::vector<std::string> tokens;  // nominal only, declared order

  // -1 when the token is not admissible.
  int token_index(const std::string& tok) const;
};

struct DatasetSchema {
  std::vector<AttributeSpec> attributes;
  // Non-empty exactly when the task is classification. For a nominal target
  // this equals the target's token list.
  std::vector<std::string> class_labels;

  std::size_t target_index() const;
  const AttributeSpec& target() const { return attributes[target_index()]; }
  std::vector<std::size_t> input_indices() const;
  std::size_t input_count() const { return input_indices().size(); }
  bool classification() const { return !class_labels.empty(); }
  int class_index(const std::string& label) const;

  void validate() const;

  static DatasetSchema parse(const std::string& text);
  std::string serialize() const;
};

// One value per input attribute, in schema order with the target skipped.
// Nominal values hold the token index; continuous values hold the number.
struct Instance {
  std::vector<double> values;
  int label = -1;             // class index, classification only
  double target_value = 0.0;  // regression only

  int nominal_at(std::size_t input_pos) const {
    return static_cast<int>(values[input_pos]);
  }
};

struct Dataset {
  DatasetSchema schema;
  std::vector<Instance> instances;

  std::size_t size() const { return instances.size(); }
  std::vector<std::size_t> class_counts() const;
};

struct BinningSpec {
  std::vector<double> edges;        // strictly increasing
  std::vector<std::string> labels;  // edges.size() + 1 entries

  void validate() const;
  // Left-open, right-closed intervals with saturation at both ends:
  // v <= edges[0] -> 0, edges[i-1] < v <= edges[i] -> i, v > back -> last.
  std::size_t bin_index(double v) const;

  // "10,20,30:A,B,C,D"
  static BinningSpec parse(const std::string& text);
  std::string serialize() const;
};

struct SplitSpec {
  double train_fraction = 0.6;
  double cv_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  // "0.6,0.2,0.2"
  static SplitSpec parse_fractions(const std::string& text);
};

struct SplitResult {
  Dataset train;
  Dataset cv;
  Dataset test;
};

Dataset parse_dataset(const std::string& csv_text, const DatasetSchema& schema);
std::string serialize_dataset(const Dataset& ds);

Dataset bin_target(const Dataset& ds, const BinningSpec& spec);

SplitResult split_dataset(const Dataset& ds, const SplitSpec& spec);

// Lowest index wins ties.
std::size_t majority_class(const std::vector<std::size_t>& counts);

}  // namespace xtrepan

#endif
