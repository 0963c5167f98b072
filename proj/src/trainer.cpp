#include "xtrepan/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "xtrepan/error.hpp"
#include "xtrepan/rng.hpp"
#include "xtrepan/util.hpp"

namespace xtrepan {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ull;
constexpr double kLogClamp = 1e-12;

std::vector<double> target_vector(const Network& net, const Instance& inst) {
  const std::size_t out = net.output_dim();
  if (!net.classification) return {inst.target_value};
  if (out == 1) return {static_cast<double>(inst.label)};
  std::vector<double> t(out, 0.0);
  t[static_cast<std::size_t>(inst.label)] = 1.0;
  return t;
}

double instance_loss(const std::vector<double>& out,
                     const std::vector<double>& t, LossKind loss) {
  double acc = 0.0;
  if (loss == LossKind::mean_square_error) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double d = out[k] - t[k];
      acc += d * d;
    }
    return acc;
  }
  if (out.size() == 1) {
    const double o = std::clamp(out[0], kLogClamp, 1.0 - kLogClamp);
    return -(t[0] * std::log(o) + (1.0 - t[0]) * std::log(1.0 - o));
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (t[k] == 0.0) continue;
    acc -= t[k] * std::log(std::max(out[k], kLogClamp));
  }
  return acc;
}

// dL/d(output) for one instance, before the 1/N batch scale.
std::vector<double> loss_output_gradient(const std::vector<double>& out,
                                         const std::vector<double>& t,
                                         LossKind loss) {
  std::vector<double> g(out.size(), 0.0);
  if (loss == LossKind::mean_square_error) {
    for (std::size_t k = 0; k < out.size(); ++k) g[k] = 2.0 * (out[k] - t[k]);
    return g;
  }
  if (out.size() == 1) {
    const double o = std::clamp(out[0], kLogClamp, 1.0 - kLogClamp);
    g[0] = -t[0] / o + (1.0 - t[0]) / (1.0 - o);
    return g;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (t[k] == 0.0) continue;
    g[k] = -t[k] / std::max(out[k], kLogClamp);
  }
  return g;
}

// dL/dz from dL/da for one layer's activation.
std::vector<double> backprop_activation(ActKind kind,
                                        const std::vector<double>& z,
                                        const std::vector<double>& a,
                                        const std::vector<double>& grad_a) {
  std::vector<double> grad_z(z.size(), 0.0);
  if (kind == ActKind::softmax) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * grad_a[i];
    for (std::size_t i = 0; i < a.size(); ++i)
      grad_z[i] = a[i] * (grad_a[i] - dot);
    return grad_z;
  }
  if (kind == ActKind::unit_sum) {
    double sum = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      sum += z[i];
      dot += grad_a[i] * z[i];
    }
    for (std::size_t i = 0; i < z.size(); ++i)
      grad_z[i] = grad_a[i] / sum - dot / (sum * sum);
    return grad_z;
  }
  for (std::size_t i = 0; i < z.size(); ++i)
    grad_z[i] = grad_a[i] * activation_derivative(kind, z[i], a[i]);
  return grad_z;
}

void check_trainable(const Network& net, LossKind loss) {
  for (const Layer& layer : net.layers)
    if (!activation_trainable(layer.activation))
      throw RuntimeError("step activation is not trainable");
  if (loss == LossKind::cross_entropy && !net.classification)
    throw ValidationError("cross_entropy requires a classification task");
}

void validate_batch(const Network& net, const Dataset& batch) {
  if (batch.instances.empty())
    throw ValidationError("loss over an empty batch is undefined");
  if (net.classification && !batch.schema.classification())
    throw ValidationError("classification network on a regression dataset");
  if (!net.classification && batch.schema.classification())
    throw ValidationError("regression network on a classification dataset");
}

// Pre-activations recomputed from a forward trace (z_k = W a + b + skips).
std::vector<double> pre_activation(const Network& net, std::size_t k,
                                   const std::vector<std::vector<double>>& acts) {
  const Layer& layer = net.layers[k];
  std::vector<double> z = matvec(layer.weights, acts[k]);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];
  for (const SkipConnection& skip : net.skips) {
    if (skip.to_layer != k + 1) continue;
    std::vector<double> extra = matvec(skip.weights, acts[skip.from_layer]);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += extra[i];
  }
  return z;
}

}  // namespace

const char* loss_name(LossKind k) {
  return k == LossKind::mean_square_error ? "mse" : "cross_entropy";
}

std::optional<LossKind> loss_from_name(const std::string& name) {
  if (name == "mse" || name == "mean_square_error")
    return LossKind::mean_square_error;
  if (name == "cross_entropy" || name == "ce") return LossKind::cross_entropy;
  return std::nullopt;
}

std::string TrainReport::to_csv() const {
  std::string out = "epoch,train_error,cv_error\n";
  for (std::size_t i = 0; i < train_errors.size(); ++i)
    out += std::to_string(i + 1) + "," + fmt_double(train_errors[i]) + "," +
           fmt_double(cv_errors[i]) + "\n";
  return out;
}

Network init_network(const Dataset& train, const TrainConfig& cfg) {
  train.schema.validate();
  Network net;
  net.encodings = fit_encodings(train);
  net.input_dim = 0;
  for (const AttributeEncoding& e : net.encodings) net.input_dim += e.width();
  net.classification = train.schema.classification();
  net.class_labels = train.schema.class_labels;

  std::size_t out_dim = cfg.output_dim;
  if (out_dim == 0)
    out_dim = net.classification ? net.class_labels.size() : 1;

  std::size_t prev = net.input_dim;
  for (const LayerSpec& spec : cfg.hidden) {
    if (spec.width == 0)
      throw ValidationError("hidden layer width must be positive");
    Layer layer;
    layer.weights = Matrix(spec.width, prev);
    layer.bias.assign(spec.width, 0.0);
    layer.activation = spec.activation;
    net.layers.push_back(std::move(layer));
    prev = spec.width;
  }
  Layer out_layer;
  out_layer.weights = Matrix(out_dim, prev);
  out_layer.bias.assign(out_dim, 0.0);
  out_layer.activation = cfg.output_activation;
  net.layers.push_back(std::move(out_layer));

  auto act_dim = [&](std::size_t idx) {
    return idx == 0 ? net.input_dim : net.layers[idx - 1].out_dim();
  };
  for (const SkipSpec& spec : cfg.skips) {
    if (spec.to_layer < 1 || spec.to_layer > net.layers.size())
      throw ValidationError("skip targets a nonexistent layer");
    if (spec.from_layer + 1 >= spec.to_layer)
      throw ValidationError("skip must jump over at least one layer");
    SkipConnection skip;
    skip.from_layer = spec.from_layer;
    skip.to_layer = spec.to_layer;
    skip.weights = Matrix(net.layers[spec.to_layer - 1].out_dim(),
                          act_dim(spec.from_layer));
    net.skips.push_back(std::move(skip));
  }

  // Parameter order is fixed so a seed always yields the same network:
  // per layer weights row-major then bias, then skip matrices in order.
  Rng rng = Rng::derive(cfg.seed, kInitStream);
  for (Layer& layer : net.layers) {
    for (double& w : layer.weights.data) w = rng.next_uniform(-0.5, 0.5);
    for (double& b : layer.bias) b = rng.next_uniform(-0.5, 0.5);
  }
  for (SkipConnection& skip : net.skips)
    for (double& w : skip.weights.data) w = rng.next_uniform(-0.5, 0.5);

  net.validate();
  return net;
}

double batch_loss(const Network& net, const Dataset& batch, LossKind loss) {
  validate_batch(net, batch);
  if (loss == LossKind::cross_entropy && !net.classification)
    throw ValidationError("cross_entropy requires a classification task");
  double acc = 0.0;
  for (const Instance& inst : batch.instances)
    acc += instance_loss(net.forward_instance(inst),
                         target_vector(net, inst), loss);
  return acc / static_cast<double>(batch.instances.size());
}

Gradients loss_gradient(const Network& net, const Dataset& batch,
                        LossKind loss) {
  validate_batch(net, batch);
  check_trainable(net, loss);

  Gradients g;
  for (const Layer& layer : net.layers) {
    g.layer_weights.emplace_back(layer.out_dim(), layer.in_dim());
    g.layer_bias.emplace_back(layer.out_dim(), 0.0);
  }
  for (const SkipConnection& skip : net.skips)
    g.skip_weights.emplace_back(skip.weights.rows, skip.weights.cols);

  const std::size_t L = net.layers.size();
  for (const Instance& inst : batch.instances) {
    const std::vector<double> x = net.encode(inst);
    const auto acts = net.forward_trace(x);
    const std::vector<double> t = target_vector(net, inst);

    std::vector<std::vector<double>> grad_a(L + 1);
    grad_a[L] = loss_output_gradient(acts[L], t, loss);
    for (std::size_t k = L; k >= 1; --k) {
      const Layer& layer = net.layers[k - 1];
      const std::vector<double> z = pre_activation(net, k - 1, acts);
      const std::vector<double> dz =
          backprop_activation(layer.activation, z, acts[k], grad_a[k]);

      Matrix& gw = g.layer_weights[k - 1];
      std::vector<double>& gb = g.layer_bias[k - 1];
      const std::vector<double>& in = acts[k - 1];
      for (std::size_t r = 0; r < layer.out_dim(); ++r) {
        gb[r] += dz[r];
        for (std::size_t c = 0; c < layer.in_dim(); ++c)
          gw.at(r, c) += dz[r] * in[c];
      }
      if (grad_a[k - 1].empty()) grad_a[k - 1].assign(in.size(), 0.0);
      for (std::size_t c = 0; c < layer.in_dim(); ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < layer.out_dim(); ++r)
          acc += layer.weights.at(r, c) * dz[r];
        grad_a[k - 1][c] += acc;
      }
      for (std::size_t s = 0; s < net.skips.size(); ++s) {
        const SkipConnection& skip = net.skips[s];
        if (skip.to_layer != k) continue;
        const std::vector<double>& from = acts[skip.from_layer];
        Matrix& gs = g.skip_weights[s];
        for (std::size_t r = 0; r < skip.weights.rows; ++r)
          for (std::size_t c = 0; c < skip.weights.cols; ++c)
            gs.at(r, c) += dz[r] * from[c];
        if (grad_a[skip.from_layer].empty())
          grad_a[skip.from_layer].assign(from.size(), 0.0);
        for (std::size_t c = 0; c < skip.weights.cols; ++c) {
          double acc = 0.0;
          for (std::size_t r = 0; r < skip.weights.rows; ++r)
            acc += skip.weights.at(r, c) * dz[r];
          grad_a[skip.from_layer][c] += acc;
        }
      }
    }
  }

  const double scale = 1.0 / static_cast<double>(batch.instances.size());
  for (Matrix& m : g.layer_weights)
    for (double& v : m.data) v *= scale;
  for (auto& b : g.layer_bias)
    for (double& v : b) v *= scale;
  for (Matrix& m : g.skip_weights)
    for (double& v : m.data) v *= scale;
  return g;
}

std::pair<Network, TrainReport> train(const Dataset& train_set,
                                      const Dataset& cv_set,
                                      const TrainConfig& cfg) {
  if (cfg.learning_rate <= 0.0)
    throw ValidationError("learning rate must be positive");
  if (train_set.instances.empty())
    throw ValidationError("training set is empty");
  if (cv_set.instances.empty())
    throw ValidationError("cross-validation set is empty");
  if (train_set.schema.serialize() != cv_set.schema.serialize())
    throw ValidationError("train and cv sets must share a schema");

  Network net = init_network(train_set, cfg);
  check_trainable(net, cfg.loss);

  TrainReport report;
  report.stop_reason = "max_epochs";
  if (cfg.max_epochs == 0) {
    report.stopping_epoch = 0;
    return {std::move(net), std::move(report)};
  }

  Network best = net;
  double best_cv = batch_loss(net, cv_set, cfg.loss);
  double prev_cv = best_cv;
  std::size_t rising = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const Gradients g = loss_gradient(net, train_set, cfg.loss);
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      Layer& layer = net.layers[k];
      for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
        layer.weights.data[i] -= cfg.learning_rate * g.layer_weights[k].data[i];
      for (std::size_t i = 0; i < layer.bias.size(); ++i)
        layer.bias[i] -= cfg.learning_rate * g.layer_bias[k][i];
    }
    for (std::size_t s = 0; s < net.skips.size(); ++s)
      for (std::size_t i = 0; i < net.skips[s].weights.data.size(); ++i)
        net.skips[s].weights.data[i] -=
            cfg.learning_rate * g.skip_weights[s].data[i];

    const double train_err = batch_loss(net, train_set, cfg.loss);
    const double cv_err = batch_loss(net, cv_set, cfg.loss);
    if (!std::isfinite(train_err) || !std::isfinite(cv_err))
      throw RuntimeError("training diverged at epoch " + std::to_string(epoch));
    report.train_errors.push_back(train_err);
    report.cv_errors.push_back(cv_err);
    report.stopping_epoch = epoch;

    if (cv_err < best_cv) {
      best_cv = cv_err;
      best = net;
    }
    rising = cv_err > prev_cv ? rising + 1 : 0;
    prev_cv = cv_err;
    if (cfg.patience > 0 && rising >= cfg.patience) {
      report.stop_reason = "early_stop";
      break;
    }
  }
  return {std::move(best), std::move(report)};
}

}  // namespace xtrepan
