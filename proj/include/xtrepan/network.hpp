#ifndef XTREPAN_NETWORK_HPP
#define XTREPAN_NETWORK_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xtrepan/dataset.hpp"

namespace xtrepan {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// m * v with a fixed left-to-right accumulation order per row.
std::vector<double> matvec(const Matrix& m, const std::vector<double>& v);

enum class ActKind {
  identity,
  logistic,
  hyperbolic,
  exponential,
  softmax,
  unit_sum,
  square_root,
  sine,
  ramp,
  step,
};

const char* activation_name(ActKind k);
std::optional<ActKind> activation_from_name(const std::string& name);
// softmax and unit_sum act on the whole vector; the rest are elementwise.
bool activation_is_vector(ActKind k);
bool activation_trainable(ActKind k);

std::vector<double> apply_activation(ActKind k, const std::vector<double>& z);

// d f(z)/dz for elementwise activations, given z and f(z).
double activation_derivative(ActKind k, double z, double fz);

struct Layer {
  Matrix weights;  // out_dim x in_dim
  std::vector<double> bias;
  ActKind activation = ActKind::identity;

  std::size_t out_dim() const { return weights.rows; }
  std::size_t in_dim() const { return weights.cols; }
};

// Activation indices: 0 is the network input, k is the output of layer k.
// A skip feeds the pre-activation of to_layer from activation from_layer and
// must jump over at least one layer (from_layer < to_layer - 1).
struct SkipConnection {
  std::size_t from_layer = 0;
  std::size_t to_layer = 0;
  Matrix weights;  // layers[to_layer-1].out_dim x dim(activation from_layer)
};

// How one schema input attribute maps into the network input vector.
struct AttributeEncoding {
  std::string attribute;
  bool onehot = false;
  std::vector<std::string> tokens;  // onehot: one slot per token
  double min = 0.0;                 // scaled: training minimum
  double max = 1.0;                 // scaled: training maximum

  std::size_t width() const { return onehot ? tokens.size() : 1; }
};

struct Network {
  std::size_t input_dim = 0;
  std::vector<Layer> layers;
  std::vector<SkipConnection> skips;
  bool classification = true;
  std::vector<std::string> class_labels;  // classification only
  std::optional<BinningSpec> bins;        // regression only, optional
  std::vector<AttributeEncoding> encodings;

  std::size_t output_dim() const { return layers.back().out_dim(); }
  void validate() const;
  void check_schema(const DatasetSchema& schema) const;

  std::vector<double> encode(const Instance& inst) const;
  std::vector<double> forward(const std::vector<double>& x) const;
  // All activations a_0 (the input) through a_L; forward() is the last entry.
  std::vector<std::vector<double>> forward_trace(const std::vector<double>& x) const;
  std::vector<double> forward_instance(const Instance& inst) const;

  // Index into class_labels, or into bins->labels for regression.
  int predict_index(const Instance& inst) const;
  std::string predict_label(const Instance& inst) const;
  const std::vector<std::string>& label_set() const;

  static Network load(const std::string& text);
  std::string save() const;
};

// One-hot for nominal attributes, min-max scaling fit on train for continuous.
std::vector<AttributeEncoding> fit_encodings(const Dataset& train);

}  // namespace xtrepan

#endif
