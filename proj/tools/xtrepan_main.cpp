// xtrepan: train networks, extract trees, induce the baseline, evaluate.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xtrepan/c45.hpp"
#include "xtrepan/dataset.hpp"
#include "xtrepan/error.hpp"
#include "xtrepan/eval.hpp"
#include "xtrepan/network.hpp"
#include "xtrepan/trainer.hpp"
#include "xtrepan/trepan.hpp"
#include "xtrepan/tree.hpp"
#include "xtrepan/util.hpp"

namespace fs = std::filesystem;
using namespace xtrepan;

namespace {

struct Options {
  std::string data;
  std::string schema;
  std::string network;
  std::vector<std::string> trees;
  std::string out;
  std::uint64_t seed = 0;
  std::string bins;
  std::string split;

  // train
  std::string topology;
  std::string hidden_act = "hyperbolic";
  std::string output_act = "logistic";
  std::vector<std::string> skips;
  std::string loss = "mse";
  double lr = 0.1;
  std::size_t epochs = 1000;
  std::size_t patience = 10;
  std::size_t output_dim = 0;

  // extract
  std::string variant = "mofn";
  std::size_t min_sample = 1000;
  std::size_t max_nodes = 50;
  std::size_t beam_width = 2;
  double purity = 0.99;
  std::size_t rejection_cap = 10000;

  // induce
  std::string criterion = "gain_ratio";
  std::size_t min_leaf = 2;
  std::size_t max_depth = 0;
};

Dataset load_dataset(const Options& opt) {
  const auto schema = DatasetSchema::parse(read_text_file(opt.schema));
  Dataset ds = parse_dataset(read_text_file(opt.data), schema);
  if (!opt.bins.empty()) {
    if (ds.schema.classification())
      throw ValidationError("--bins applies to regression targets only");
    ds = bin_target(ds, BinningSpec::parse(opt.bins));
  }
  return ds;
}

Network load_network(const std::string& path) {
  return Network::load(read_text_file(path));
}

DecisionTree load_tree(const std::string& path) {
  return DecisionTree::deserialize(read_text_file(path));
}

void require_same_attributes(const DecisionTree& tree, const Dataset& ds,
                             const std::string& tree_path) {
  if (tree.schema.serialize() != ds.schema.serialize())
    throw ValidationError("tree '" + tree_path +
                          "' was built against a different schema than the "
                          "supplied data");
}

std::string out_path(const Options& opt, const std::string& name) {
  fs::create_directories(opt.out);
  return (fs::path(opt.out) / name).string();
}

// out1/tree.tree -> out1/tree
std::string model_name(const std::string& path) {
  fs::path p(path);
  return (p.parent_path() / p.stem()).generic_string();
}

std::vector<double> parse_widths(const std::string& text) {
  std::vector<double> widths;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string part = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      widths.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("bad topology entry '" + part + "'");
    }
    pos = comma + 1;
  }
  return widths;
}

ActKind parse_activation(const std::string& name) {
  const auto kind = activation_from_name(name);
  if (!kind) throw ValidationError("unknown activation '" + name + "'");
  return *kind;
}

TrainConfig train_config(const Options& opt) {
  TrainConfig cfg;
  if (!opt.topology.empty()) {
    const ActKind act = parse_activation(opt.hidden_act);
    for (double w : opt.topology == "none" ? std::vector<double>{}
                                           : parse_widths(opt.topology)) {
      if (w < 1.0 || w != static_cast<double>(static_cast<std::size_t>(w)))
        throw ValidationError("hidden layer widths must be positive integers");
      cfg.hidden.push_back({static_cast<std::size_t>(w), act});
    }
  }
  cfg.output_activation = parse_activation(opt.output_act);
  for (const std::string& s : opt.skips) {
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos)
      throw ValidationError("skip must look like from:to, got '" + s + "'");
    try {
      cfg.skips.push_back({std::stoul(s.substr(0, colon)),
                           std::stoul(s.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ValidationError("skip must look like from:to, got '" + s + "'");
    }
  }
  const auto loss = loss_from_name(opt.loss);
  if (!loss) throw ValidationError("unknown loss '" + opt.loss + "'");
  cfg.loss = *loss;
  cfg.learning_rate = opt.lr;
  cfg.max_epochs = opt.epochs;
  cfg.patience = opt.patience;
  cfg.seed = opt.seed;
  cfg.output_dim = opt.output_dim;
  return cfg;
}

int cmd_train(const Options& opt) {
  const auto schema = DatasetSchema::parse(read_text_file(opt.schema));
  const Dataset full = parse_dataset(read_text_file(opt.data), schema);

  SplitSpec split;
  if (!opt.split.empty()) split = SplitSpec::parse_fractions(opt.split);
  split.seed = opt.seed;
  SplitResult parts = split_dataset(full, split);
  if (parts.cv.instances.empty()) parts.cv = parts.train;

  auto [net, report] = train(parts.train, parts.cv, train_config(opt));
  if (!opt.bins.empty()) {
    if (net.classification)
      throw ValidationError("--bins applies to regression targets only");
    net.bins = BinningSpec::parse(opt.bins);
    net.bins->validate();
  }

  write_text_file_atomic(out_path(opt, "network.net"), net.save());
  write_text_file_atomic(out_path(opt, "train_report.csv"), report.to_csv());
  std::cout << "trained " << report.stopping_epoch << " epochs (stop: "
            << report.stop_reason << "), network.net + train_report.csv in "
            << opt.out << "\n";
  return 0;
}

int cmd_extract(const Options& opt) {
  Network net = load_network(opt.network);
  const auto schema = DatasetSchema::parse(read_text_file(opt.schema));
  const Dataset ds = parse_dataset(read_text_file(opt.data), schema);
  if (!opt.bins.empty()) {
    if (net.classification)
      throw ValidationError("--bins applies to regression networks only");
    net.bins = BinningSpec::parse(opt.bins);
    net.bins->validate();
  }

  TrepanParams p;
  const auto variant = variant_from_name(opt.variant);
  if (!variant) throw ValidationError("unknown variant '" + opt.variant + "'");
  p.variant = *variant;
  p.min_sample = opt.min_sample;
  p.max_internal_nodes = opt.max_nodes;
  p.beam_width = opt.beam_width;
  p.purity_stop = opt.purity;
  p.rejection_cap = opt.rejection_cap;
  p.seed = opt.seed;

  const ExtractionResult result = extract_tree(net, ds, p);
  write_text_file_atomic(out_path(opt, "tree.tree"), result.tree.serialize());
  write_text_file_atomic(out_path(opt, "tree.dot"), result.tree.to_dot());
  write_text_file_atomic(out_path(opt, "audit.csv"), result.audit_csv());
  const TreeComplexity c = result.tree.complexity();
  std::cout << "extracted " << c.internal_nodes << " internal / " << c.leaves
            << " leaf nodes, tree.tree + tree.dot + audit.csv in " << opt.out
            << "\n";
  return 0;
}

int cmd_induce(const Options& opt) {
  const Dataset ds = load_dataset(opt);
  C45Params p;
  if (opt.criterion == "gain")
    p.use_gain_ratio = false;
  else if (opt.criterion != "gain_ratio")
    throw ValidationError("criterion must be gain or gain_ratio, got '" +
                          opt.criterion + "'");
  p.min_instances_per_leaf = opt.min_leaf;
  p.max_depth = opt.max_depth;

  const DecisionTree tree = induce_c45(ds, p);
  write_text_file_atomic(out_path(opt, "tree.tree"), tree.serialize());
  write_text_file_atomic(out_path(opt, "tree.dot"), tree.to_dot());
  const TreeComplexity c = tree.complexity();
  std::cout << "induced " << c.internal_nodes << " internal / " << c.leaves
            << " leaf nodes, tree.tree + tree.dot in " << opt.out << "\n";
  return 0;
}

int cmd_evaluate(const Options& opt) {
  const DecisionTree tree = load_tree(opt.trees.front());
  const Dataset ds = load_dataset(opt);
  require_same_attributes(tree, ds, opt.trees.front());

  std::optional<Network> net;
  if (!opt.network.empty()) net = load_network(opt.network);

  CompareReport report;
  report.rows.emplace_back(model_name(opt.trees.front()),
                           evaluate_tree(tree, ds, net ? &*net : nullptr));
  write_text_file_atomic(out_path(opt, "metrics.csv"), report.to_csv());
  std::cout << report.to_text();
  return 0;
}

int cmd_compare(const Options& opt) {
  Network net = load_network(opt.network);
  const Dataset ds = load_dataset(opt);

  std::vector<DecisionTree> trees;
  trees.reserve(opt.trees.size());
  std::vector<std::pair<std::string, const DecisionTree*>> models;
  for (const std::string& path : opt.trees) {
    trees.push_back(load_tree(path));
    require_same_attributes(trees.back(), ds, path);
  }
  for (std::size_t i = 0; i < trees.size(); ++i)
    models.emplace_back(model_name(opt.trees[i]), &trees[i]);

  const CompareReport report = compare_report(models, net, ds);
  write_text_file_atomic(out_path(opt, "report.csv"), report.to_csv());
  write_text_file_atomic(out_path(opt, "report.txt"), report.to_text());
  std::cout << report.to_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decision-tree extraction from trained networks"};
  app.require_subcommand(1);
  app.set_config("--config");

  Options opt;

  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--data", opt.data, "dataset CSV")->required();
    cmd->add_option("--schema", opt.schema, "schema file")->required();
    cmd->add_option("--out", opt.out, "output directory")->required();
    cmd->add_option("--seed", opt.seed, "random seed")
        ->capture_default_str();
  };

  CLI::App* train_cmd = app.add_subcommand("train", "fit a network")->configurable();
  add_common(train_cmd);
  train_cmd->add_option("--split", opt.split,
                        "train,cv,test fractions (default 0.6,0.2,0.2)");
  train_cmd->add_option("--topology", opt.topology,
                        "hidden layer widths, e.g. 10,5 ('none' for none)");
  train_cmd->add_option("--hidden-act", opt.hidden_act,
                        "hidden activation")
      ->capture_default_str();
  train_cmd->add_option("--output-act", opt.output_act,
                        "output activation")
      ->capture_default_str();
  train_cmd->add_option("--skip", opt.skips,
                        "skip connection from:to (repeatable)");
  train_cmd->add_option("--loss", opt.loss, "mse or cross_entropy")
      ->capture_default_str();
  train_cmd->add_option("--lr", opt.lr, "learning rate")
      ->capture_default_str();
  train_cmd->add_option("--epochs", opt.epochs, "epoch budget")
      ->capture_default_str();
  train_cmd->add_option("--patience", opt.patience,
                        "rising-CV epochs before stopping, 0 disables")
      ->capture_default_str();
  train_cmd->add_option("--output-dim", opt.output_dim,
                        "output units, 0 derives from the task")
      ->capture_default_str();
  train_cmd->add_option("--bins", opt.bins,
                        "bin spec stored with a regression network");

  CLI::App* extract_cmd =
      app.add_subcommand("extract", "extract a tree from a network")
          ->configurable();
  add_common(extract_cmd);
  extract_cmd->add_option("--network", opt.network, "network file")
      ->required();
  extract_cmd->add_option("--variant", opt.variant,
                          "mofn, single or disjunctive")
      ->capture_default_str();
  extract_cmd->add_option("--min-sample", opt.min_sample,
                          "minimum examples per node")
      ->capture_default_str();
  extract_cmd->add_option("--max-nodes", opt.max_nodes,
                          "internal node budget")
      ->capture_default_str();
  extract_cmd->add_option("--beam-width", opt.beam_width, "beam width")
      ->capture_default_str();
  extract_cmd->add_option("--purity", opt.purity,
                          "majority fraction that finalizes a leaf")
      ->capture_default_str();
  extract_cmd->add_option("--rejection-cap", opt.rejection_cap,
                          "sampling attempts per instance")
      ->capture_default_str();
  extract_cmd->add_option("--bins", opt.bins,
                          "bin spec override for regression networks");

  CLI::App* induce_cmd =
      app.add_subcommand("induce", "grow the baseline tree from data")
          ->configurable();
  add_common(induce_cmd);
  induce_cmd->add_option("--criterion", opt.criterion,
                         "gain or gain_ratio")
      ->capture_default_str();
  induce_cmd->add_option("--min-leaf", opt.min_leaf,
                         "minimum instances per leaf")
      ->capture_default_str();
  induce_cmd->add_option("--max-depth", opt.max_depth,
                         "depth cap, 0 unlimited")
      ->capture_default_str();
  induce_cmd->add_option("--bins", opt.bins,
                         "bin a regression target before induction");

  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "score one tree on a dataset")
          ->configurable();
  add_common(eval_cmd);
  eval_cmd->add_option("--tree", opt.trees, "tree file")
      ->required()
      ->expected(1);
  eval_cmd->add_option("--network", opt.network,
                       "network for fidelity (optional)");
  eval_cmd->add_option("--bins", opt.bins,
                       "bin a regression target before scoring");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "score several trees side by side")
          ->configurable();
  add_common(compare_cmd);
  compare_cmd->add_option("--tree", opt.trees, "tree files (repeatable)")
      ->required();
  compare_cmd->add_option("--network", opt.network, "network for fidelity")
      ->required();
  compare_cmd->add_option("--bins", opt.bins,
                          "bin a regression target before scoring");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*train_cmd) return cmd_train(opt);
    if (*extract_cmd) return cmd_extract(opt);
    if (*induce_cmd) return cmd_induce(opt);
    if (*eval_cmd) return cmd_evaluate(opt);
    if (*compare_cmd) return cmd_compare(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == Error::Kind::validation ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
