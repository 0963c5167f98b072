#include "xtrepan/oracle.hpp"

#include <cmath>

#include "xtrepan/error.hpp"
#include "xtrepan/rng.hpp"

namespace xtrepan {

namespace {

constexpr double kBandwidthFloor = 1e-6;

double sample_feature(const FeatureModel& model, Rng& rng) {
  if (model.nominal) {
    const double u = rng.next_unit();
    double cum = 0.0;
    std::size_t last = 0;
    for (std::size_t t = 0; t < model.frequencies.size(); ++t) {
      if (model.frequencies[t] <= 0.0) continue;
      cum += model.frequencies[t];
      last = t;
      if (u < cum) return static_cast<double>(t);
    }
    return static_cast<double>(last);  // guards the float shortfall at u~1
  }
  const std::size_t k = rng.next_below(model.centers.size());
  return model.centers[k] + model.bandwidth * rng.next_normal();
}

}  // namespace

std::string Constraint::text() const {
  return test.text() + (satisfied ? " (satisfied)" : " (violated)");
}

std::vector<FeatureModel> fit_feature_models(const Dataset& train) {
  if (train.instances.empty())
    throw ValidationError("cannot fit feature models on an empty dataset");
  const double n = static_cast<double>(train.size());

  std::vector<FeatureModel> models;
  std::size_t pos = 0;
  for (std::size_t idx : train.schema.input_indices()) {
    const AttributeSpec& attr = train.schema.attributes[idx];
    FeatureModel model;
    model.attribute = attr.name;
    if (attr.kind == AttrKind::nominal) {
      model.nominal = true;
      model.frequencies.assign(attr.tokens.size(), 0.0);
      for (const Instance& inst : train.instances)
        model.frequencies[static_cast<std::size_t>(inst.nominal_at(pos))] +=
            1.0;
      for (double& f : model.frequencies) f /= n;
    } else {
      double mean = 0.0;
      for (const Instance& inst : train.instances) {
        model.centers.push_back(inst.values[pos]);
        mean += inst.values[pos];
      }
      mean /= n;
      double var = 0.0;
      for (double v : model.centers) var += (v - mean) * (v - mean);
      var /= n;
      model.bandwidth = std::max(kBandwidthFloor, std::sqrt(var / n));
    }
    models.push_back(std::move(model));
    ++pos;
  }
  return models;
}

std::vector<Instance> draw_instances(const OracleHandle& h,
                                     const std::vector<Constraint>& constraints,
                                     std::size_t n, std::uint64_t stream) {
  if (h.rejection_cap == 0)
    throw ValidationError("rejection cap must be at least 1");
  Rng rng = Rng::derive(h.seed, stream);
  std::vector<Instance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Constraint* last_violated = nullptr;
    for (std::size_t attempt = 0; attempt < h.rejection_cap; ++attempt) {
      Instance inst;
      for (const FeatureModel& m : h.models)
        inst.values.push_back(sample_feature(m, rng));
      const Constraint* violated = nullptr;
      for (const Constraint& c : constraints)
        if (!c.holds(inst)) {
          violated = &c;
          break;
        }
      if (!violated) {
        out.push_back(std::move(inst));
        break;
      }
      last_violated = violated;
    }
    if (out.size() != i + 1)
      throw RuntimeError("rejection cap (" + std::to_string(h.rejection_cap) +
                         ") exceeded; cannot satisfy constraint " +
                         last_violated->text());
  }
  return out;
}

std::vector<Instance> ensure_min_sample(std::vector<Instance> node_examples,
                                        std::size_t min_sample,
                                        const OracleHandle& h,
                                        const std::vector<Constraint>& constraints,
                                        std::uint64_t stream) {
  if (node_examples.size() >= min_sample) return node_examples;
  const std::size_t need = min_sample - node_examples.size();
  std::vector<Instance> drawn = draw_instances(h, constraints, need, stream);
  for (Instance& inst : drawn) {
    inst.label = h.network->predict_index(inst);
    node_examples.push_back(std::move(inst));
  }
  return node_examples;
}

}  // namespace xtrepan
