// Acceptance gate: one line per criterion, non-zero exit when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "xtrepan/c45.hpp"
#include "xtrepan/dataset.hpp"
#include "xtrepan/eval.hpp"
#include "xtrepan/network.hpp"
#include "xtrepan/oracle.hpp"
#include "xtrepan/rng.hpp"
#include "xtrepan/trainer.hpp"
#include "xtrepan/trepan.hpp"
#include "xtrepan/tree.hpp"
#include "xtrepan/util.hpp"

namespace fs = std::filesystem;
using namespace xtrepan;

namespace {

struct Checks {
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("FAIL " + what);
    }
  }
  void note(const std::string& line) { notes.push_back(line); }
};

std::string data_file(const std::string& name) {
  return (fs::path(XTREPAN_DATA_DIR) / name).string();
}

Dataset load(const std::string& stem) {
  const auto schema =
      DatasetSchema::parse(read_text_file(data_file(stem + ".schema")));
  return parse_dataset(read_text_file(data_file(stem + ".csv")), schema);
}

ConfusionMatrix make_cm(std::vector<std::string> labels,
                        std::vector<std::vector<std::size_t>> counts) {
  ConfusionMatrix cm;
  cm.labels = std::move(labels);
  cm.counts = std::move(counts);
  return cm;
}

std::string two_dec(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// ---- criterion 1: worked-example entropy and gains -------------------------

void criterion1(Checks& c) {
  const Dataset tennis = load("play_tennis");
  const double h = entropy({9, 5});
  c.expect(std::abs(h - 0.940286) < 1e-6,
           "entropy([9,5]) = " + std::to_string(h) + ", want 0.940286 +-1e-6");

  const struct {
    const char* attribute;
    double gain;
  } wanted[] = {{"Outlook", 0.2467},
                {"Humidity", 0.1518},
                {"Wind", 0.0481},
                {"Temperature", 0.0292}};
  for (const auto& w : wanted) {
    const double g = info_gain(tennis, w.attribute);
    c.expect(std::abs(g - w.gain) < 1e-3,
             std::string("Gain(") + w.attribute + ") = " + std::to_string(g) +
                 ", want " + std::to_string(w.gain) + " +-1e-3");
  }

  C45Params p;
  p.use_gain_ratio = false;
  const DecisionTree tree = induce_c45(tennis, p);
  c.expect(tree.root && tree.root->test &&
               tree.root->test->literals.front().attribute == "Outlook",
           "induced root attribute must be Outlook");
}

// ---- criterion 2: published-matrix arithmetic ------------------------------

void criterion2(Checks& c) {
  const struct {
    const char* table;
    ConfusionMatrix cm;
    double want;
  } totals[] = {
      {"Table 3",
       make_cm({"Toned", "Healthy", "Flabby", "Obese"},
               {{13, 0, 0, 0}, {1, 21, 0, 0}, {0, 0, 9, 1}, {0, 0, 0, 18}}),
       96.83},
      {"Table 4",
       make_cm({"Toned", "Healthy", "Flabby", "Obese"},
               {{13, 0, 0, 0}, {1, 20, 0, 0}, {0, 0, 9, 0}, {0, 0, 3, 16}}),
       92.06},
      {"Table 5",
       make_cm({"C11", "C12", "C13", "C14", "C15"},
               {{3, 0, 0, 0, 0},
                {4, 48, 5, 0, 0},
                {0, 1, 8, 0, 0},
                {0, 0, 1, 5, 0},
                {0, 0, 0, 0, 0}}),
       85.33},
      {"Table 6",
       make_cm({"C11", "C12", "C13", "C14", "C15"},
               {{2, 5, 0, 0, 0},
                {3, 43, 3, 0, 0},
                {0, 6, 7, 1, 0},
                {0, 0, 0, 5, 0},
                {0, 0, 0, 0, 0}}),
       76.00},
      {"Table 7", make_cm({"Yes", "No"}, {{401, 279}, {168, 754}}), 72.10},
      {"Table 8", make_cm({"Yes", "No"}, {{379, 190}, {259, 774}}), 71.67},
  };
  for (const auto& t : totals) {
    const double got = accuracy(t.cm);
    c.expect(std::abs(got - t.want) < 0.005,
             std::string(t.table) + " total = " + two_dec(got) + ", want " +
                 two_dec(t.want));
  }

  const std::vector<double> row = per_class_accuracy(totals[0].cm);
  const double want_row[] = {92.86, 100.00, 100.00, 94.74};
  for (std::size_t i = 0; i < row.size(); ++i)
    c.expect(std::abs(row[i] - want_row[i]) < 0.005,
             "Table 3 per-class [" + std::to_string(i) + "] = " +
                 two_dec(row[i]) + ", want " + two_dec(want_row[i]));
}

// ---- criterion 3: excluded end-to-end figures -------------------------------

void criterion3(Checks& c) {
  c.note("the Body Fat / Outages / Admissions source data are unavailable;");
  c.note("the end-to-end 94/96/91/92/72/74% figures are excluded and covered");
  c.note("by criteria 4-7 instead");
}

// ---- criterion 4: concept recovery on 2-of-{x1,x2,x3} ----------------------

DatasetSchema bool_schema(std::size_t inputs) {
  std::string text;
  for (std::size_t i = 0; i < inputs; ++i)
    text += "attribute x" + std::to_string(i + 1) + " input continuous\n";
  text += "attribute Class target nominal No Yes\n";
  return DatasetSchema::parse(text);
}

Dataset corners_2of3() {
  Dataset ds;
  ds.schema = bool_schema(3);
  for (std::size_t bits = 0; bits < 8; ++bits) {
    Instance inst;
    std::size_t ones = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double v = (bits >> j) & 1 ? 1.0 : 0.0;
      inst.values.push_back(v);
      if (v == 1.0) ++ones;
    }
    inst.label = ones >= 2 ? 1 : 0;
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

// single step unit firing when x1 + x2 + x3 >= 2
Network net_2of3(const Dataset& train) {
  Network net;
  net.encodings = fit_encodings(train);
  net.input_dim = 3;
  Layer out;
  out.weights = Matrix(1, 3);
  for (std::size_t i = 0; i < 3; ++i) out.weights.at(0, i) = 1.0;
  out.bias = {-1.5};
  out.activation = ActKind::step;
  net.layers.push_back(std::move(out));
  net.classification = true;
  net.class_labels = train.schema.class_labels;
  net.validate();
  return net;
}

std::size_t count_internal(const TreeNode* node) {
  if (!node || node->is_leaf()) return 0;
  return 1 + count_internal(node->pass.get()) +
         count_internal(node->fail.get());
}

void criterion4(Checks& c) {
  const Dataset corners = corners_2of3();
  const Network net = net_2of3(corners);

  TrepanParams p;
  p.min_sample = 200;
  p.max_internal_nodes = 8;
  p.variant = TrepanVariant::mofn;
  const ExtractionResult mofn = extract_tree(net, corners, p);

  std::size_t agree = 0;
  for (const Instance& inst : corners.instances)
    if (mofn.tree.classify_index(inst) == net.predict_index(inst)) ++agree;
  c.expect(agree == 8, "mofn fidelity " + std::to_string(agree) + "/8");

  c.expect(mofn.tree.root && mofn.tree.root->test.has_value(),
           "mofn root must carry a test");
  if (mofn.tree.root && mofn.tree.root->test) {
    bool equivalent = true;
    for (const Instance& inst : corners.instances) {
      std::size_t ones = 0;
      for (double v : inst.values) ones += v == 1.0;
      if (mofn.tree.root->test->evaluate(inst) != (ones >= 2))
        equivalent = false;
    }
    c.expect(equivalent, "mofn root not equivalent to 2-of-{x1,x2,x3}: " +
                             mofn.tree.root->test->text());
  }

  p.variant = TrepanVariant::single_test;
  const ExtractionResult single = extract_tree(net, corners, p);
  agree = 0;
  for (const Instance& inst : corners.instances)
    if (single.tree.classify_index(inst) == net.predict_index(inst)) ++agree;
  c.expect(agree == 8, "single-test fidelity " + std::to_string(agree) + "/8");
  const std::size_t internal = count_internal(single.tree.root.get());
  c.expect(internal >= 2, "single-test tree has " + std::to_string(internal) +
                              " internal nodes, want >= 2");
}

// ---- criterion 5: gradient correctness --------------------------------------

DatasetSchema cont_schema(std::size_t inputs, std::vector<std::string> labels) {
  DatasetSchema s;
  for (std::size_t i = 0; i < inputs; ++i) {
    AttributeSpec a;
    a.name = "x" + std::to_string(i + 1);
    a.role = AttrRole::input;
    a.kind = AttrKind::continuous;
    s.attributes.push_back(a);
  }
  AttributeSpec t;
  t.role = AttrRole::target;
  if (labels.empty()) {
    t.name = "y";
    t.kind = AttrKind::continuous;
  } else {
    t.name = "Class";
    t.kind = AttrKind::nominal;
    t.tokens = labels;
  }
  s.attributes.push_back(t);
  s.class_labels = std::move(labels);
  return s;
}

Dataset random_dataset(const DatasetSchema& schema, std::size_t n, Rng& rng) {
  Dataset ds;
  ds.schema = schema;
  const std::size_t inputs = schema.input_count();
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    for (std::size_t j = 0; j < inputs; ++j)
      inst.values.push_back(rng.next_uniform(0.05, 0.95));
    if (schema.classification())
      inst.label =
          static_cast<int>(rng.next_below(schema.class_labels.size()));
    else
      inst.target_value = rng.next_uniform(0.1, 0.9);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

std::vector<double*> parameters(Network& net) {
  std::vector<double*> p;
  for (Layer& layer : net.layers) {
    for (double& w : layer.weights.data) p.push_back(&w);
    for (double& b : layer.bias) p.push_back(&b);
  }
  for (SkipConnection& s : net.skips)
    for (double& w : s.weights.data) p.push_back(&w);
  return p;
}

std::vector<double> flatten(const Gradients& g) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.layer_weights.size(); ++k) {
    for (double v : g.layer_weights[k].data) out.push_back(v);
    for (double v : g.layer_bias[k]) out.push_back(v);
  }
  for (const Matrix& m : g.skip_weights)
    for (double v : m.data) out.push_back(v);
  return out;
}

void criterion5(Checks& c) {
  const ActKind acts[4] = {ActKind::hyperbolic, ActKind::logistic,
                           ActKind::sine, ActKind::identity};
  std::size_t with_skips = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t task = i % 5;  // 2 regression, 3 binary ce, 4 multi ce
    const std::size_t inputs = 2 + i % 2;

    std::vector<std::string> labels;
    if (task != 2) labels = {"A", "B"};
    if (task == 4) labels.push_back("C");

    TrainConfig cfg;
    cfg.seed = 100 + i;
    cfg.hidden = {{1 + i % 2, acts[(i + i / 4) % 4]}};
    if (task <= 3 && i % 3 == 0) cfg.hidden.push_back({2, ActKind::logistic});
    if (task == 2)
      cfg.output_activation = ActKind::identity;
    else if (task == 4)
      cfg.output_activation = ActKind::softmax;
    if (task == 3) cfg.output_dim = 1;
    if (i % 4 == 1) {
      cfg.skips = {{0, cfg.hidden.size() + 1}};
      ++with_skips;
    }

    Rng rng(40 + i);
    const Dataset batch = random_dataset(cont_schema(inputs, labels), 4, rng);
    Network net = init_network(batch, cfg);
    const LossKind loss =
        task >= 3 ? LossKind::cross_entropy : LossKind::mean_square_error;

    const std::vector<double> analytic = flatten(loss_gradient(net, batch, loss));
    std::vector<double*> p = parameters(net);
    c.expect(p.size() <= 30,
             "net " + std::to_string(i) + " exceeds 30 parameters");
    const double h = 1e-5;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double old = *p[j];
      *p[j] = old + h;
      const double lp = batch_loss(net, batch, loss);
      *p[j] = old - h;
      const double lm = batch_loss(net, batch, loss);
      *p[j] = old;
      const double fd = (lp - lm) / (2.0 * h);
      const double denom = std::max({1e-6, std::abs(fd), std::abs(analytic[j])});
      worst = std::max(worst, std::abs(fd - analytic[j]) / denom);
    }
  }
  c.expect(with_skips >= 5,
           "only " + std::to_string(with_skips) + " nets carry skips");
  c.expect(worst < 1e-4,
           "max relative gradient error " + std::to_string(worst));
}

// ---- criterion 6: oracle minimum-sample contract ----------------------------

void criterion6(Checks& c) {
  const Dataset tennis = load("play_tennis");

  Network net;
  net.encodings = fit_encodings(tennis);
  net.input_dim = 0;
  for (const AttributeEncoding& e : net.encodings) net.input_dim += e.width();
  Layer out;
  out.weights = Matrix(1, net.input_dim);
  out.bias = {0.2};
  out.activation = ActKind::logistic;
  net.layers.push_back(std::move(out));
  net.classification = true;
  net.class_labels = tennis.schema.class_labels;
  net.validate();

  OracleHandle h;
  h.network = &net;
  h.models = fit_feature_models(tennis);
  h.seed = 9;

  const std::size_t sizes[] = {0, 30, 100, 150};
  const std::size_t want[] = {100, 70, 0, 0};
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<Instance> examples(tennis.instances.begin(),
                                   tennis.instances.begin() +
                                       std::min<std::size_t>(sizes[k], 14));
    while (examples.size() < sizes[k])
      examples.push_back(tennis.instances[examples.size() % 14]);
    const std::size_t before = examples.size();

    const std::vector<Instance> topped =
        ensure_min_sample(examples, 100, h, {}, 7 + k);
    const std::size_t queries = topped.size() - before;
    c.expect(queries == want[k],
             "m=" + std::to_string(sizes[k]) + " issued " +
                 std::to_string(queries) + " queries, want " +
                 std::to_string(want[k]));
    bool labels_match = true;
    for (std::size_t i = before; i < topped.size(); ++i)
      if (topped[i].label != net.predict_index(topped[i]))
        labels_match = false;
    c.expect(labels_match, "attached labels must equal predict_label re-query");
  }
}

// ---- criterion 7: pipeline determinism ---------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return "<missing " + path.string() + ">";
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void criterion7(Checks& c) {
  const fs::path base = fs::temp_directory_path() / "xtrepan_acceptance";
  fs::remove_all(base);
  const fs::path out = base / "run";
  const fs::path first = base / "first";
  fs::create_directories(out);
  fs::create_directories(first);

  const std::string xor_args = std::string(" --data ") +
                               data_file("xor.csv") + " --schema " +
                               data_file("xor.schema");
  const std::string train_cmd =
      std::string(XTREPAN_BIN) + " train" + xor_args + " --out " +
      out.string() +
      " --topology 2 --lr 2.0 --epochs 300 --patience 0 --seed 11" +
      " --split 0.5,0.25,0.25 > /dev/null";
  const std::string extract_cmd =
      std::string(XTREPAN_BIN) + " extract" + xor_args + " --network " +
      (out / "network.net").string() + " --out " + out.string() +
      " --min-sample 120 --max-nodes 6 --seed 11 > /dev/null";
  const std::string compare_cmd =
      std::string(XTREPAN_BIN) + " compare" + xor_args + " --network " +
      (out / "network.net").string() + " --tree " +
      (out / "tree.tree").string() + " --out " + out.string() + " > /dev/null";

  const char* files[] = {"network.net", "train_report.csv", "tree.tree",
                         "tree.dot",    "audit.csv",        "report.csv",
                         "report.txt"};

  // identical command lines, twice; snapshot the first run's outputs
  for (int round = 0; round < 2; ++round) {
    c.expect(std::system(train_cmd.c_str()) == 0, "train run must exit 0");
    c.expect(std::system(extract_cmd.c_str()) == 0, "extract run must exit 0");
    c.expect(std::system(compare_cmd.c_str()) == 0, "compare run must exit 0");
    if (round == 0)
      for (const char* name : files)
        fs::copy_file(out / name, first / name,
                      fs::copy_options::overwrite_existing);
  }

  for (const char* name : files) {
    c.expect(fs::exists(out / name),
             std::string(name) + " was not written");
    c.expect(slurp(out / name) == slurp(first / name),
             std::string(name) + " differs between identical runs");
  }
}

// ---- criterion 8: kappa properties -------------------------------------------

void criterion8(Checks& c) {
  c.expect(kappa(make_cm({"A", "B"}, {{3, 0}, {0, 4}})) == 1.0,
           "diagonal matrix must give kappa 1");
  c.expect(kappa(make_cm({"A", "B", "C"},
                         {{5, 0, 0}, {0, 2, 0}, {0, 0, 9}})) == 1.0,
           "3x3 diagonal matrix must give kappa 1");
  c.expect(kappa(make_cm({"A", "B"}, {{4, 4}, {1, 1}})) == 0.0,
           "chance matrix must give kappa 0");
  c.expect(kappa(make_cm({"A", "B"}, {{30, 10}, {6, 2}})) == 0.0,
           "second chance matrix must give kappa 0");
  const double k =
      kappa(make_cm({"Yes", "No"}, {{401, 279}, {168, 754}}));
  c.expect(std::abs(k - 0.416) <= 0.005,
           "Table 7 kappa = " + std::to_string(k) + ", want 0.416 +-0.005");
}

struct Criterion {
  int id;
  const char* summary;
  double budget_seconds;
  void (*run)(Checks&);
};

const Criterion kCriteria[] = {
    {1, "worked-example entropy and information gains", 1.0, criterion1},
    {2, "published confusion-matrix arithmetic", 1.0, criterion2},
    {3, "end-to-end dataset accuracies excluded (data unavailable)", 1.0,
     criterion3},
    {4, "2-of-3 concept recovery, mofn and single-test", 10.0, criterion4},
    {5, "backprop gradients vs central finite differences", 10.0, criterion5},
    {6, "oracle minimum-sample query contract", 1.0, criterion6},
    {7, "byte-identical rerun of train/extract/compare", 30.0, criterion7},
    {8, "kappa statistic properties", 1.0, criterion8},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance_tests [--criterion N]\n";
      return 2;
    }
  }

  bool all_ok = true;
  for (const Criterion& cr : kCriteria) {
    if (only != 0 && cr.id != only) continue;
    Checks checks;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(checks);
    } catch (const std::exception& e) {
      checks.expect(false, std::string("threw: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed >= cr.budget_seconds) {
      checks.expect(false, "runtime " + std::to_string(elapsed) +
                               "s exceeds " +
                               std::to_string(cr.budget_seconds) + "s");
    }
    std::printf("criterion %d: %s (%.2fs) %s\n", cr.id,
                checks.ok ? "PASS" : "FAIL", elapsed, cr.summary);
    for (const std::string& line : checks.notes)
      std::printf("  %s\n", line.c_str());
    if (!checks.ok) all_ok = false;
  }
  return all_ok ? 0 : 1;
}
