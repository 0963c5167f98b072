#ifndef XTREPAN_C45_HPP
#define XTREPAN_C45_HPP

#include <optional>
#include <string>
#include <vector>

#include "xtrepan/dataset.hpp"
#include "xtrepan/tree.hpp"

namespace xtrepan {

struct C45Params {
  std::size_t min_instances_per_leaf = 2;
  bool use_gain_ratio = true;
  std::size_t max_depth = 0;  // 0 = unlimited
};

// Shannon entropy in bits of a class-count distribution.
double entropy(const std::vector<std::size_t>& counts);

// Information gain of splitting `rows` on the named attribute: the token
// partition for nominal attributes, the best binary threshold partition for
// continuous ones (0 when no admissible threshold exists).
double info_gain(const Dataset& ds, const std::vector<std::size_t>& rows,
                 const std::string& attribute);
double info_gain(const Dataset& ds, const std::string& attribute);

// Gain normalized by the split information I(A). Empty when I(A) = 0, which
// marks the attribute inadmissible rather than dividing by zero.
std::optional<double> gain_ratio(const Dataset& ds,
                                 const std::vector<std::size_t>& rows,
                                 const std::string& attribute);

struct ThresholdChoice {
  double threshold = 0.0;
  double gain = 0.0;
};

// Gain-maximizing midpoint between consecutive distinct sorted values, ties
// to the smallest threshold. Empty when fewer than two distinct values exist
// or no threshold yields positive gain.
std::optional<ThresholdChoice> best_threshold(
    const Dataset& ds, const std::vector<std::size_t>& rows,
    const std::string& attribute);

DecisionTree induce_c45(const Dataset& train, const C45Params& p);

}  // namespace xtrepan

#endif
