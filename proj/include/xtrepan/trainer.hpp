#ifndef XTREPAN_TRAINER_HPP
#define XTREPAN_TRAINER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xtrepan/dataset.hpp"
#include "xtrepan/network.hpp"

namespace xtrepan {

enum class LossKind { mean_square_error, cross_entropy };

const char* loss_name(LossKind k);
std::optional<LossKind> loss_from_name(const std::string& name);

struct LayerSpec {
  std::size_t width = 0;
  ActKind activation = ActKind::hyperbolic;
};

struct SkipSpec {
  std::size_t from_layer = 0;
  std::size_t to_layer = 0;
};

struct TrainConfig {
  std::vector<LayerSpec> hidden;
  ActKind output_activation = ActKind::logistic;
  std::vector<SkipSpec> skips;
  LossKind loss = LossKind::mean_square_error;
  double learning_rate = 0.1;
  std::size_t max_epochs = 1000;
  // Consecutive epochs of rising CV error tolerated before stopping;
  // 0 disables early stopping.
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  std::size_t output_dim = 0;  // 0 = derived from the task
};

struct TrainReport {
  std::vector<double> train_errors;
  std::vector<double> cv_errors;
  std::size_t stopping_epoch = 0;
  std::string stop_reason;  // "max_epochs" | "early_stop"

  std::string to_csv() const;
};

// Same shape as the network's trainable parameters.
struct Gradients {
  std::vector<Matrix> layer_weights;
  std::vector<std::vector<double>> layer_bias;
  std::vector<Matrix> skip_weights;
};

// Fresh network for cfg's topology: encodings fit on train, weights drawn
// uniformly from [-0.5, 0.5] on the seed's init stream.
Network init_network(const Dataset& train, const TrainConfig& cfg);

double batch_loss(const Network& net, const Dataset& batch, LossKind loss);

Gradients loss_gradient(const Network& net, const Dataset& batch, LossKind loss);

std::pair<Network, TrainReport> train(const Dataset& train_set,
                                      const Dataset& cv_set,
                                      const TrainConfig& cfg);

}  // namespace xtrepan

#endif
