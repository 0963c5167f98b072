#include "xtrepan/network.hpp"

#include <algorithm>
#include <cmath>

#include "xtrepan/error.hpp"
#include "xtrepan/util.hpp"

namespace xtrepan {

std::vector<double> matvec(const Matrix& m, const std::vector<double>& v) {
  if (v.size() != m.cols) throw RuntimeError("matvec dimension mismatch");
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    const double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

const char* activation_name(ActKind k) {
  switch (k) {
    case ActKind::identity: return "identity";
    case ActKind::logistic: return "logistic";
    case ActKind::hyperbolic: return "hyperbolic";
    case ActKind::exponential: return "exponential";
    case ActKind::softmax: return "softmax";
    case ActKind::unit_sum: return "unit_sum";
    case ActKind::square_root: return "square_root";
    case ActKind::sine: return "sine";
    case ActKind::ramp: return "ramp";
    case ActKind::step: return "step";
  }
  throw RuntimeError("corrupt activation kind");
}

std::optional<ActKind> activation_from_name(const std::string& name) {
  for (ActKind k : {ActKind::identity, ActKind::logistic, ActKind::hyperbolic,
                    ActKind::exponential, ActKind::softmax, ActKind::unit_sum,
                    ActKind::square_root, ActKind::sine, ActKind::ramp,
                    ActKind::step})
    if (name == activation_name(k)) return k;
  return std::nullopt;
}

bool activation_is_vector(ActKind k) {
  return k == ActKind::softmax || k == ActKind::unit_sum;
}

bool activation_trainable(ActKind k) { return k != ActKind::step; }

namespace {

double stable_logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> apply_activation(ActKind k, const std::vector<double>& z) {
  std::vector<double> out(z.size());
  switch (k) {
    case ActKind::identity:
      return z;
    case ActKind::logistic:
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = stable_logistic(z[i]);
      return out;
    case ActKind::hyperbolic:
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::tanh(z[i]);
      return out;
    case ActKind::exponential:
      for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i]);
        if (!std::isfinite(out[i]))
          throw RuntimeError("exponential activation overflowed");
      }
      return out;
    case ActKind::softmax: {
      const double m = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        sum += out[i];
      }
      for (double& v : out) v /= sum;
      return out;
    }
    case ActKind::unit_sum: {
      double sum = 0.0;
      for (double v : z) sum += v;
      if (sum == 0.0)
        throw RuntimeError("unit_sum activation on a zero-sum vector");
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] / sum;
      return out;
    }
    case ActKind::square_root:
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < 0.0)
          throw RuntimeError("square_root activation on a negative input");
        out[i] = std::sqrt(z[i]);
      }
      return out;
    case ActKind::sine:
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::sin(z[i]);
      return out;
    case ActKind::ramp:
      for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = std::clamp(z[i], -1.0, 1.0);
      return out;
    case ActKind::step:
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] < 0.0 ? 0.0 : 1.0;
      return out;
  }
  throw RuntimeError("corrupt activation kind");
}

double activation_derivative(ActKind k, double z, double fz) {
  switch (k) {
    case ActKind::identity: return 1.0;
    case ActKind::logistic: return fz * (1.0 - fz);
    case ActKind::hyperbolic: return 1.0 - fz * fz;
    case ActKind::exponential: return fz;
    case ActKind::square_root:
      if (fz <= 0.0) throw RuntimeError("square_root derivative at zero");
      return 0.5 / fz;
    case ActKind::sine: return std::cos(z);
    case ActKind::ramp: return (z > -1.0 && z < 1.0) ? 1.0 : 0.0;
    case ActKind::softmax:
    case ActKind::unit_sum:
      throw RuntimeError("vector activations have no elementwise derivative");
    case ActKind::step:
      throw RuntimeError("step activation is not differentiable");
  }
  throw RuntimeError("corrupt activation kind");
}

namespace {

void require_finite(const std::vector<double>& v, const std::string& what) {
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError(what + " must be finite");
}

}  // namespace

void Network::validate() const {
  if (input_dim == 0) throw ValidationError("network input_dim must be positive");
  if (layers.empty()) throw ValidationError("network has no layers");
  std::size_t prev = input_dim;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& layer = layers[k];
    const std::string where = "layer " + std::to_string(k + 1);
    if (layer.out_dim() == 0)
      throw ValidationError(where + " has no output units");
    if (layer.in_dim() != prev)
      throw ValidationError(where + " expects input dim " +
                            std::to_string(layer.in_dim()) + ", gets " +
                            std::to_string(prev));
    if (layer.bias.size() != layer.out_dim())
      throw ValidationError(where + " bias length mismatches its output dim");
    require_finite(layer.weights.data, where + " weights");
    require_finite(layer.bias, where + " bias");
    prev = layer.out_dim();
  }

  auto act_dim = [&](std::size_t idx) {
    return idx == 0 ? input_dim : layers[idx - 1].out_dim();
  };
  for (const SkipConnection& skip : skips) {
    const std::string where = "skip " + std::to_string(skip.from_layer) +
                              "->" + std::to_string(skip.to_layer);
    if (skip.to_layer < 1 || skip.to_layer > layers.size())
      throw ValidationError(where + " targets a nonexistent layer");
    if (skip.from_layer + 1 >= skip.to_layer)
      throw ValidationError(where + " must jump over at least one layer");
    if (skip.weights.rows != layers[skip.to_layer - 1].out_dim() ||
        skip.weights.cols != act_dim(skip.from_layer))
      throw ValidationError(where + " weight dimensions are inconsistent");
    require_finite(skip.weights.data, where + " weights");
  }

  if (classification) {
    if (class_labels.size() < 2)
      throw ValidationError("classification network needs at least two labels");
    const std::size_t out = output_dim();
    if (out != class_labels.size() && !(out == 1 && class_labels.size() == 2))
      throw ValidationError("classification output dim " + std::to_string(out) +
                            " does not fit " +
                            std::to_string(class_labels.size()) + " labels");
    if (bins.has_value())
      throw ValidationError("classification network cannot carry bins");
  } else {
    if (!class_labels.empty())
      throw ValidationError("regression network cannot carry class labels");
    if (output_dim() != 1)
      throw ValidationError("regression network must have one output");
    if (bins) bins->validate();
  }

  if (encodings.empty()) throw ValidationError("network declares no encodings");
  std::size_t width = 0;
  for (const AttributeEncoding& e : encodings) {
    if (e.attribute.empty())
      throw ValidationError("encoding with an empty attribute name");
    if (e.onehot && e.tokens.empty())
      throw ValidationError("one-hot encoding of '" + e.attribute +
                            "' has no tokens");
    if (!e.onehot && !(std::isfinite(e.min) && std::isfinite(e.max) &&
                       e.min <= e.max))
      throw ValidationError("scaled encoding of '" + e.attribute +
                            "' has a bad range");
    width += e.width();
  }
  if (width != input_dim)
    throw ValidationError("encodings cover " + std::to_string(width) +
                          " inputs, network expects " +
                          std::to_string(input_dim));
}

void Network::check_schema(const DatasetSchema& schema) const {
  const auto inputs = schema.input_indices();
  if (inputs.size() != encodings.size())
    throw ValidationError("network encodes " +
                          std::to_string(encodings.size()) +
                          " attributes, schema has " +
                          std::to_string(inputs.size()) + " inputs");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const AttributeSpec& a = schema.attributes[inputs[i]];
    const AttributeEncoding& e = encodings[i];
    if (a.name != e.attribute)
      throw ValidationError("network encodes '" + e.attribute +
                            "' where schema has '" + a.name + "'");
    if (e.onehot != (a.kind == AttrKind::nominal))
      throw ValidationError("encoding kind of '" + a.name +
                            "' does not match the schema");
    if (e.onehot && e.tokens != a.tokens)
      throw ValidationError("one-hot token list of '" + a.name +
                            "' does not match the schema");
  }
  if (classification && schema.classification() &&
      schema.class_labels != class_labels)
    throw ValidationError("network class labels do not match the schema");
}

std::vector<double> Network::encode(const Instance& inst) const {
  std::vector<double> x;
  x.reserve(input_dim);
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    const AttributeEncoding& e = encodings[i];
    const double raw = inst.values[i];
    if (e.onehot) {
      const auto hot = static_cast<std::size_t>(raw);
      for (std::size_t t = 0; t < e.tokens.size(); ++t)
        x.push_back(t == hot ? 1.0 : 0.0);
    } else if (e.max > e.min) {
      x.push_back((raw - e.min) / (e.max - e.min));
    } else {
      // Degenerate training range: every value maps to the range's origin.
      x.push_back(0.0);
    }
  }
  return x;
}

std::vector<std::vector<double>> Network::forward_trace(
    const std::vector<double>& x) const {
  if (x.size() != input_dim)
    throw RuntimeError("forward input has dim " + std::to_string(x.size()) +
                       ", network expects " + std::to_string(input_dim));
  std::vector<std::vector<double>> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(x);
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& layer = layers[k];
    std::vector<double> z = matvec(layer.weights, acts[k]);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];
    for (const SkipConnection& skip : skips) {
      if (skip.to_layer != k + 1) continue;
      std::vector<double> extra = matvec(skip.weights, acts[skip.from_layer]);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += extra[i];
    }
    acts.push_back(apply_activation(layer.activation, z));
  }
  return acts;
}

std::vector<double> Network::forward(const std::vector<double>& x) const {
  return forward_trace(x).back();
}

std::vector<double> Network::forward_instance(const Instance& inst) const {
  return forward(encode(inst));
}

const std::vector<std::string>& Network::label_set() const {
  if (classification) return class_labels;
  if (!bins)
    throw ValidationError("regression network has no bins to name labels");
  return bins->labels;
}

int Network::predict_index(const Instance& inst) const {
  const std::vector<double> out = forward_instance(inst);
  if (classification) {
    if (out.size() == 1) return out[0] < 0.5 ? 0 : 1;
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.size(); ++i)
      if (out[i] > out[best]) best = i;
    return static_cast<int>(best);
  }
  if (!bins)
    throw ValidationError(
        "regression network needs bins before predicting labels");
  return static_cast<int>(bins->bin_index(out[0]));
}

std::string Network::predict_label(const Instance& inst) const {
  return label_set()[static_cast<std::size_t>(predict_index(inst))];
}

std::vector<AttributeEncoding> fit_encodings(const Dataset& train) {
  if (train.instances.empty())
    throw ValidationError("cannot fit encodings on an empty dataset");
  std::vector<AttributeEncoding> out;
  const auto inputs = train.schema.input_indices();
  for (std::size_t pos = 0; pos < inputs.size(); ++pos) {
    const AttributeSpec& a = train.schema.attributes[inputs[pos]];
    AttributeEncoding e;
    e.attribute = a.name;
    if (a.kind == AttrKind::nominal) {
      e.onehot = true;
      e.tokens = a.tokens;
    } else {
      e.min = e.max = train.instances[0].values[pos];
      for (const Instance& inst : train.instances) {
        e.min = std::min(e.min, inst.values[pos]);
        e.max = std::max(e.max, inst.values[pos]);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

struct NetParser {
  std::vector<std::string> lines;
  std::size_t pos = 0;

  explicit NetParser(const std::string& text) : lines(split(text, '\n')) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("network line " + std::to_string(pos + 1) + ": " + msg);
  }

  std::vector<std::string> next(const char* what) {
    while (pos < lines.size() && trim(lines[pos]).empty()) ++pos;
    if (pos >= lines.size())
      throw ValidationError(std::string("network text ends before ") + what);
    return split_ws(lines[pos]);
  }

  std::vector<double> number_row(const char* tag, std::size_t count) {
    auto words = next("a number row");
    if (words.empty() || words[0] != tag)
      fail(std::string("expected a '") + tag + "' row");
    if (words.size() != count + 1)
      fail(std::string("'") + tag + "' row needs " + std::to_string(count) +
           " values, got " + std::to_string(words.size() - 1));
    std::vector<double> out;
    for (std::size_t i = 1; i < words.size(); ++i) {
      auto v = parse_double(words[i]);
      if (!v || !std::isfinite(*v)) fail("bad number '" + words[i] + "'");
      out.push_back(*v);
    }
    ++pos;
    return out;
  }

  std::size_t counted(const std::string& word, const char* what) {
    auto v = parse_int(word);
    if (!v || *v < 0) fail(std::string("bad ") + what + " '" + word + "'");
    return static_cast<std::size_t>(*v);
  }
};

}  // namespace

Network Network::load(const std::string& text) {
  NetParser p(text);
  auto header = p.next("the header");
  if (header.size() != 2 || header[0] != "xtrepan-network" || header[1] != "1")
    p.fail("expected 'xtrepan-network 1'");
  ++p.pos;

  Network net;
  auto task = p.next("the task line");
  if (task.size() >= 2 && task[0] == "task" && task[1] == "classification") {
    net.classification = true;
    net.class_labels.assign(task.begin() + 2, task.end());
    if (net.class_labels.size() < 2)
      p.fail("classification task needs at least two labels");
  } else if (task.size() == 2 && task[0] == "task" && task[1] == "regression") {
    net.classification = false;
  } else {
    p.fail("expected 'task classification <labels...>' or 'task regression'");
  }
  ++p.pos;

  auto peek = p.next("input_dim");
  if (peek.size() == 2 && peek[0] == "bins") {
    if (net.classification) p.fail("bins are only valid for regression");
    net.bins = BinningSpec::parse(peek[1]);
    ++p.pos;
    peek = p.next("input_dim");
  }
  if (peek.size() != 2 || peek[0] != "input_dim") p.fail("expected 'input_dim <n>'");
  net.input_dim = p.counted(peek[1], "input_dim");
  ++p.pos;

  auto enc_head = p.next("the encodings section");
  if (enc_head.size() != 2 || enc_head[0] != "encodings")
    p.fail("expected 'encodings <count>'");
  const std::size_t enc_count = p.counted(enc_head[1], "encoding count");
  ++p.pos;
  for (std::size_t i = 0; i < enc_count; ++i) {
    auto words = p.next("an encoding line");
    AttributeEncoding e;
    if (words.size() >= 4 && words[0] == "encoding" && words[1] == "onehot") {
      e.onehot = true;
      e.attribute = words[2];
      e.tokens.assign(words.begin() + 3, words.end());
    } else if (words.size() == 5 && words[0] == "encoding" &&
               words[1] == "scaled") {
      e.attribute = words[2];
      auto lo = parse_double(words[3]);
      auto hi = parse_double(words[4]);
      if (!lo || !hi) p.fail("bad scaled range");
      e.min = *lo;
      e.max = *hi;
    } else {
      p.fail("expected 'encoding onehot <attr> <tokens...>' or "
             "'encoding scaled <attr> <min> <max>'");
    }
    net.encodings.push_back(std::move(e));
    ++p.pos;
  }

  auto layers_head = p.next("the layers section");
  if (layers_head.size() != 2 || layers_head[0] != "layers")
    p.fail("expected 'layers <count>'");
  const std::size_t layer_count = p.counted(layers_head[1], "layer count");
  ++p.pos;
  for (std::size_t k = 0; k < layer_count; ++k) {
    auto words = p.next("a layer header");
    if (words.size() != 5 || words[0] != "layer")
      p.fail("expected 'layer <index> <out_dim> <in_dim> <activation>'");
    if (p.counted(words[1], "layer index") != k + 1)
      p.fail("layer declared out of order");
    Layer layer;
    const std::size_t out_dim = p.counted(words[2], "out_dim");
    const std::size_t in_dim = p.counted(words[3], "in_dim");
    auto act = activation_from_name(words[4]);
    if (!act) p.fail("unknown activation '" + words[4] + "'");
    layer.activation = *act;
    layer.weights = Matrix(out_dim, in_dim);
    ++p.pos;
    for (std::size_t r = 0; r < out_dim; ++r) {
      auto row = p.number_row("w", in_dim);
      std::copy(row.begin(), row.end(), layer.weights.data.begin() + r * in_dim);
    }
    layer.bias = p.number_row("b", out_dim);
    net.layers.push_back(std::move(layer));
  }

  auto skips_head = p.next("the skips section");
  if (skips_head.size() != 2 || skips_head[0] != "skips")
    p.fail("expected 'skips <count>'");
  const std::size_t skip_count = p.counted(skips_head[1], "skip count");
  ++p.pos;
  for (std::size_t s = 0; s < skip_count; ++s) {
    auto words = p.next("a skip header");
    if (words.size() != 3 || words[0] != "skip")
      p.fail("expected 'skip <from> <to>'");
    SkipConnection skip;
    skip.from_layer = p.counted(words[1], "skip source");
    skip.to_layer = p.counted(words[2], "skip target");
    if (skip.to_layer < 1 || skip.to_layer > net.layers.size())
      p.fail("skip targets a nonexistent layer");
    if (skip.from_layer + 1 >= skip.to_layer)
      p.fail("skip must jump over at least one layer");
    const std::size_t rows = net.layers[skip.to_layer - 1].out_dim();
    const std::size_t cols = skip.from_layer == 0
                                 ? net.input_dim
                                 : net.layers[skip.from_layer - 1].out_dim();
    skip.weights = Matrix(rows, cols);
    ++p.pos;
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = p.number_row("w", cols);
      std::copy(row.begin(), row.end(), skip.weights.data.begin() + r * cols);
    }
    net.skips.push_back(std::move(skip));
  }

  net.validate();
  return net;
}

std::string Network::save() const {
  validate();
  std::string out = "xtrepan-network 1\n";
  if (classification) {
    out += "task classification";
    for (const auto& l : class_labels) out += " " + l;
    out += "\n";
  } else {
    out += "task regression\n";
    if (bins) out += "bins " + bins->serialize() + "\n";
  }
  out += "input_dim " + std::to_string(input_dim) + "\n";
  out += "encodings " + std::to_string(encodings.size()) + "\n";
  for (const AttributeEncoding& e : encodings) {
    if (e.onehot) {
      out += "encoding onehot " + e.attribute;
      for (const auto& t : e.tokens) out += " " + t;
      out += "\n";
    } else {
      out += "encoding scaled " + e.attribute + " " + fmt_double(e.min) + " " +
             fmt_double(e.max) + "\n";
    }
  }
  out += "layers " + std::to_string(layers.size()) + "\n";
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& layer = layers[k];
    out += "layer " + std::to_string(k + 1) + " " +
           std::to_string(layer.out_dim()) + " " +
           std::to_string(layer.in_dim()) + " " +
           activation_name(layer.activation) + "\n";
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      out += "w";
      for (std::size_t c = 0; c < layer.in_dim(); ++c)
        out += " " + fmt_double(layer.weights.at(r, c));
      out += "\n";
    }
    out += "b";
    for (double b : layer.bias) out += " " + fmt_double(b);
    out += "\n";
  }
  out += "skips " + std::to_string(skips.size()) + "\n";
  for (const SkipConnection& skip : skips) {
    out += "skip " + std::to_string(skip.from_layer) + " " +
           std::to_string(skip.to_layer) + "\n";
    for (std::size_t r = 0; r < skip.weights.rows; ++r) {
      out += "w";
      for (std::size_t c = 0; c < skip.weights.cols; ++c)
        out += " " + fmt_double(skip.weights.at(r, c));
      out += "\n";
    }
  }
  return out;
}

}  // namespace xtrepan
