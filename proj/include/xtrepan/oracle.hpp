#ifndef XTREPAN_ORACLE_HPP
#define XTREPAN_ORACLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xtrepan/dataset.hpp"
#include "xtrepan/network.hpp"
#include "xtrepan/tree.hpp"

namespace xtrepan {

// Marginal distribution of one input attribute. Nominal attributes keep the
// empirical token frequencies; continuous ones a kernel density estimate with
// one Gaussian kernel per training value.
struct FeatureModel {
  std::string attribute;
  bool nominal = false;
  std::vector<double> frequencies;  // nominal, indexed by token
  std::vector<double> centers;      // continuous kernel centers
  double bandwidth = 0.0;
};

// bandwidth = population sd / sqrt(n), floored at 1e-6
std::vector<FeatureModel> fit_feature_models(const Dataset& train);

struct Constraint {
  MofNTest test;
  bool satisfied = true;  // required polarity of the test

  bool holds(const Instance& inst) const {
    return test.evaluate(inst) == satisfied;
  }
  std::string text() const;
};

struct OracleHandle {
  const Network* network = nullptr;
  std::vector<FeatureModel> models;
  std::uint64_t seed = 0;
  std::size_t rejection_cap = 10000;
};

// n instances sampled attribute-independently from the models, rejection
// sampled until every constraint holds. Deterministic per (seed, stream).
std::vector<Instance> draw_instances(const OracleHandle& h,
                                     const std::vector<Constraint>& constraints,
                                     std::size_t n, std::uint64_t stream);

// Tops node_examples up to min_sample with drawn instances, each labeled by
// the network. Appends exactly max(0, min_sample - |node_examples|).
std::vector<Instance> ensure_min_sample(std::vector<Instance> node_examples,
                                        std::size_t min_sample,
                                        const OracleHandle& h,
                                        const std::vector<Constraint>& constraints,
                                        std::uint64_t stream);

}  // namespace xtrepan

#endif
