#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "xtrepan/c45.hpp"
#include "xtrepan/dataset.hpp"
#include "xtrepan/error.hpp"
#include "xtrepan/rng.hpp"
#include "xtrepan/util.hpp"

using namespace xtrepan;

namespace {

Dataset tennis() {
  DatasetSchema schema = DatasetSchema::parse(
      read_text_file(std::string(XTREPAN_DATA_DIR) + "/play_tennis.schema"));
  return parse_dataset(
      read_text_file(std::string(XTREPAN_DATA_DIR) + "/play_tennis.csv"),
      schema);
}

Instance tennis_inst(int outlook, int temp, int humidity, int wind) {
  Instance i;
  i.values = {double(outlook), double(temp), double(humidity), double(wind)};
  return i;
}

}  // namespace

TEST_CASE("entropy of the worked class distribution") {
  CHECK(entropy({9, 5}) == doctest::Approx(0.940286).epsilon(1e-6));
  CHECK(entropy({4, 0}) == 0.0);
  CHECK(entropy({1, 1}) == 1.0);
  CHECK(entropy({3, 3, 3, 3}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(entropy({0, 0}), RuntimeError);
}

TEST_CASE("entropy peaks on uniform counts and vanishes on pure ones") {
  for (std::size_t k = 2; k <= 6; ++k) {
    std::vector<std::size_t> uniform(k, 7);
    CHECK(entropy(uniform) == doctest::Approx(std::log2(double(k))));
    std::vector<std::size_t> pure(k, 0);
    pure[k - 1] = 13;
    CHECK(entropy(pure) == 0.0);
  }
}

TEST_CASE("information gains on the play-tennis attributes") {
  Dataset ds = tennis();
  CHECK(info_gain(ds, "Outlook") == doctest::Approx(0.2467).epsilon(1e-3));
  CHECK(info_gain(ds, "Humidity") == doctest::Approx(0.1518).epsilon(1e-3));
  CHECK(info_gain(ds, "Wind") == doctest::Approx(0.0481).epsilon(1e-3));
  CHECK(info_gain(ds, "Temperature") == doctest::Approx(0.0292).epsilon(1e-3));
}

TEST_CASE("info_gain is zero on pure data and nonnegative in general") {
  DatasetSchema schema = DatasetSchema::parse(
      "attribute a input nominal F T\n"
      "attribute y target nominal No Yes\n");
  Dataset pure = parse_dataset("a,y\nF,No\nT,No\nF,No\n", schema);
  CHECK(info_gain(pure, "a") == 0.0);

  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::string csv = "a,y\n";
    const int n = 2 + int(rng.next_below(7));
    for (int i = 0; i < n; ++i) {
      csv += rng.next_below(2) ? "T," : "F,";
      csv += rng.next_below(2) ? "Yes\n" : "No\n";
    }
    Dataset ds = parse_dataset(csv, schema);
    CHECK(info_gain(ds, "a") >= -1e-12);
  }
}

TEST_CASE("gain_ratio normalizes by split information") {
  DatasetSchema schema = DatasetSchema::parse(
      "attribute a input nominal F T\n"
      "attribute y target nominal No Yes\n");
  Dataset half = parse_dataset("a,y\nF,No\nF,No\nT,Yes\nT,Yes\n", schema);
  auto ratio = gain_ratio(half, {0, 1, 2, 3}, "a");
  REQUIRE(ratio.has_value());
  CHECK(*ratio == doctest::Approx(info_gain(half, "a")));
  CHECK(*ratio == doctest::Approx(1.0));

  // Identifier-like attribute: one instance per token.
  DatasetSchema ids = DatasetSchema::parse(
      "attribute id input nominal t1 t2 t3 t4 t5 t6 t7 t8\n"
      "attribute y target nominal No Yes\n");
  std::string csv = "id,y\n";
  for (int i = 1; i <= 8; ++i)
    csv += "t" + std::to_string(i) + (i % 2 ? ",No\n" : ",Yes\n");
  Dataset idset = parse_dataset(csv, ids);
  std::vector<std::size_t> rows(8);
  std::iota(rows.begin(), rows.end(), 0);
  auto idratio = gain_ratio(idset, rows, "id");
  REQUIRE(idratio.has_value());
  CHECK(*idratio == doctest::Approx(info_gain(idset, "id") / std::log2(8.0)));

  // Constant attribute: I(A) = 0, inadmissible.
  Dataset constant = parse_dataset("a,y\nF,No\nF,Yes\nF,No\n", schema);
  CHECK_FALSE(gain_ratio(constant, {0, 1, 2}, "a").has_value());
}

TEST_CASE("best_threshold picks the separating midpoint") {
  DatasetSchema schema = DatasetSchema::parse(
      "attribute x input continuous\n"
      "attribute y target nominal A B\n");
  Dataset ds = parse_dataset("x,y\n1,A\n2,A\n3,B\n4,B\n", schema);
  auto choice = best_threshold(ds, {0, 1, 2, 3}, "x");
  REQUIRE(choice.has_value());
  CHECK(choice->threshold == doctest::Approx(2.5));
  CHECK(choice->gain == doctest::Approx(1.0));

  Dataset pure = parse_dataset("x,y\n1,A\n2,A\n", schema);
  CHECK_FALSE(best_threshold(pure, {0, 1}, "x").has_value());

  Dataset constant = parse_dataset("x,y\n3,A\n3,B\n", schema);
  CHECK_FALSE(best_threshold(constant, {0, 1}, "x").has_value());
}

TEST_CASE("best_threshold matches a brute-force midpoint scan") {
  DatasetSchema schema = DatasetSchema::parse(
      "attribute x input continuous\n"
      "attribute y target nominal A B C\n");
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + int(rng.next_below(12));
    std::string csv = "x,y\n";
    std::vector<std::pair<double, int>> data;
    for (int i = 0; i < n; ++i) {
      const double v = double(rng.next_below(8));
      const int label = int(rng.next_below(3));
      data.emplace_back(v, label);
      csv += fmt_double(v) + "," + std::string(1, char('A' + label)) + "\n";
    }
    Dataset ds = parse_dataset(csv, schema);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    auto choice = best_threshold(ds, rows, "x");

    // Brute force over every midpoint between distinct sorted values.
    std::sort(data.begin(), data.end());
    double best_gain = -1.0, best_t = 0.0;
    for (std::size_t i = 0; i + 1 < data.size(); ++i) {
      if (data[i].first == data[i + 1].first) continue;
      const double t = (data[i].first + data[i + 1].first) / 2.0;
      std::vector<std::size_t> lo(3, 0), hi(3, 0), all(3, 0);
      for (const auto& [v, label] : data) {
        ++(v <= t ? lo : hi)[std::size_t(label)];
        ++all[std::size_t(label)];
      }
      const double nl = double(std::accumulate(lo.begin(), lo.end(), std::size_t{0}));
      const double nh = double(n) - nl;
      const double gain = entropy(all) - (nl / n) * entropy(lo) -
                          (nh / n) * entropy(hi);
      if (gain > best_gain + 1e-15) {
        best_gain = gain;
        best_t = t;
      }
    }
    if (best_gain <= 1e-12) {
      CHECK_FALSE(choice.has_value());
    } else {
      REQUIRE(choice.has_value());
      CHECK(choice->gain == doctest::Approx(best_gain));
      CHECK(choice->threshold == doctest::Approx(best_t));
    }
  }
}

TEST_CASE("play-tennis induction roots at Outlook and isolates Overcast") {
  Dataset ds = tennis();
  C45Params p;
  p.use_gain_ratio = false;
  DecisionTree tree = induce_c45(ds, p);

  REQUIRE_FALSE(tree.root->is_leaf());
  CHECK(tree.root->test->literals[0].attribute == "Outlook");
  CHECK(tree.root->source_arity == 3);

  // Every Overcast instance is Yes regardless of the other attributes.
  for (int temp = 0; temp < 3; ++temp)
    for (int hum = 0; hum < 2; ++hum)
      for (int wind = 0; wind < 2; ++wind)
        CHECK(tree.classify(tennis_inst(1, temp, hum, wind)) == "Yes");

  // The induced tree reproduces every training label.
  for (const Instance& inst : ds.instances)
    CHECK(tree.classify_index(inst) == inst.label);

  TreeComplexity c = tree.complexity();
  CHECK(c.internal_nodes == 4);
  CHECK(c.leaves == 5);
  CHECK(c.total_literals == 4);

  // Gain ratio picks the same root here.
  DecisionTree ratio_tree = induce_c45(ds, C45Params{});
  CHECK(ratio_tree.root->test->literals[0].attribute == "Outlook");
}

TEST_CASE("pure training data induces a single leaf") {
  DatasetSchema schema = DatasetSchema::parse(
      "attribute a input nominal F T\n"
      "attribute y target nominal No Yes\n");
  Dataset ds = parse_dataset("a,y\nF,Yes\nT,Yes\nT,Yes\n", schema);
  DecisionTree tree = induce_c45(ds, C45Params{});
  CHECK(tree.root->is_leaf());
  CHECK(tree.classify(ds.instances[0]) == "Yes");
  TreeComplexity c = tree.complexity();
  CHECK(c.internal_nodes == 0);
  CHECK(c.leaves == 1);
}

TEST_CASE("stopping rules cap growth") {
  Dataset ds = tennis();
  C45Params few;
  few.min_instances_per_leaf = 15;
  DecisionTree stump = induce_c45(ds, few);
  CHECK(stump.root->is_leaf());
  CHECK(stump.classify(ds.instances[0]) == "Yes");  // majority 9/14

  C45Params shallow;
  shallow.use_gain_ratio = false;
  shallow.max_depth = 1;
  DecisionTree one = induce_c45(ds, shallow);
  CHECK_FALSE(one.root->is_leaf());
  CHECK(one.classify(tennis_inst(0, 0, 0, 0)) == "No");   // Sunny majority
  CHECK(one.classify(tennis_inst(1, 0, 0, 0)) == "Yes");  // Overcast
  CHECK(one.classify(tennis_inst(2, 0, 0, 0)) == "Yes");  // Rain majority
  TreeComplexity c = one.complexity();
  CHECK(c.internal_nodes == 2);  // 3-way chain
  CHECK(c.leaves == 3);
}

TEST_CASE("continuous attributes may recur along a path") {
  DatasetSchema schema = DatasetSchema::parse(
      "attribute x input continuous\n"
      "attribute y target nominal A B\n");
  Dataset ds = parse_dataset("x,y\n0.5,A\n1.5,B\n2.5,B\n3.5,A\n", schema);
  C45Params p;
  p.use_gain_ratio = false;
  p.min_instances_per_leaf = 1;
  DecisionTree tree = induce_c45(ds, p);
  for (const Instance& inst : ds.instances)
    CHECK(tree.classify_index(inst) == inst.label);
  TreeComplexity c = tree.complexity();
  CHECK(c.internal_nodes == 2);
  REQUIRE_FALSE(tree.root->is_leaf());
  CHECK(tree.root->test->literals[0].attribute == "x");
  CHECK(tree.root->test->literals[0].threshold == doctest::Approx(1.0));
}

TEST_CASE("root choice equals a brute-force gain scan on small datasets") {
  DatasetSchema schema = DatasetSchema::parse(
      "attribute a input nominal F T\n"
      "attribute b input nominal F T\n"
      "attribute c input nominal F T\n"
      "attribute y target nominal No Yes\n");
  Rng rng(123);
  int informative_cases = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + int(rng.next_below(6));
    std::string csv = "a,b,c,y\n";
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) csv += rng.next_below(2) ? "T," : "F,";
      csv += rng.next_below(2) ? "Yes\n" : "No\n";
    }
    Dataset ds = parse_dataset(csv, schema);
    C45Params p;
    p.use_gain_ratio = false;
    p.min_instances_per_leaf = 1;
    DecisionTree tree = induce_c45(ds, p);

    double best_gain = 0.0;
    std::string best_attr;
    for (const std::string name : {"a", "b", "c"}) {
      const double g = info_gain(ds, name);
      if (g > 1e-12 && g > best_gain) {
        best_gain = g;
        best_attr = name;
      }
    }
    if (best_attr.empty()) {
      CHECK(tree.root->is_leaf());
    } else {
      ++informative_cases;
      REQUIRE_FALSE(tree.root->is_leaf());
      CHECK(tree.root->test->literals[0].attribute == best_attr);
    }
  }
  CHECK(informative_cases > 20);  // the scan exercised real splits
}

TEST_CASE("induction is deterministic") {
  Dataset ds = tennis();
  CHECK(induce_c45(ds, C45Params{}).serialize() ==
        induce_c45(ds, C45Params{}).serialize());
}
