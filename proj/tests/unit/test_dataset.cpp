#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "xtrepan/dataset.hpp"
#include "xtrepan/error.hpp"
#include "xtrepan/rng.hpp"
#include "xtrepan/util.hpp"

using namespace xtrepan;

namespace {

DatasetSchema tennis_schema() {
  return DatasetSchema::parse(
      read_text_file(std::string(XTREPAN_DATA_DIR) + "/play_tennis.schema"));
}

Dataset tennis_data() {
  return parse_dataset(
      read_text_file(std::string(XTREPAN_DATA_DIR) + "/play_tennis.csv"),
      tennis_schema());
}

std::vector<std::string> sorted_rows(const Dataset& ds) {
  auto lines = split(serialize_dataset(ds), '\n');
  std::vector<std::string> rows(lines.begin() + 1, lines.end());
  rows.erase(std::remove(rows.begin(), rows.end(), ""), rows.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("schema parses and serialization round trips") {
  DatasetSchema schema = tennis_schema();
  REQUIRE(schema.attributes.size() == 5);
  CHECK(schema.attributes[0].name == "Outlook");
  CHECK(schema.attributes[0].tokens ==
        std::vector<std::string>{"Sunny", "Overcast", "Rain"});
  CHECK(schema.target_index() == 4);
  CHECK(schema.class_labels == std::vector<std::string>{"No", "Yes"});
  CHECK(schema.input_count() == 4);

  DatasetSchema again = DatasetSchema::parse(schema.serialize());
  CHECK(again.serialize() == schema.serialize());
}

TEST_CASE("schema rejects structural violations") {
  CHECK_THROWS_AS(DatasetSchema::parse("attribute A input nominal x\n"),
                  ValidationError);  // no target
  CHECK_THROWS_AS(
      DatasetSchema::parse("attribute A input nominal x\n"
                           "attribute A target nominal y z\n"),
      ValidationError);  // duplicate name
  CHECK_THROWS_AS(
      DatasetSchema::parse("attribute A input nominal\n"
                           "attribute B target nominal y z\n"),
      ValidationError);  // empty token list
  CHECK_THROWS_AS(
      DatasetSchema::parse("attribute A input nominal x x\n"
                           "attribute B target nominal y z\n"),
      ValidationError);  // duplicate token
  CHECK_THROWS_AS(
      DatasetSchema::parse("attribute B target nominal y z\n"),
      ValidationError);  // no inputs
}

TEST_CASE("play-tennis CSV loads with the expected label balance") {
  Dataset ds = tennis_data();
  REQUIRE(ds.size() == 14);
  auto counts = ds.class_counts();
  CHECK(counts[0] == 5);   // No
  CHECK(counts[1] == 9);   // Yes
  CHECK(ds.instances[0].nominal_at(0) == 0);  // Sunny
  CHECK(ds.instances[2].nominal_at(0) == 1);  // Overcast
}

TEST_CASE("header-only CSV gives an empty dataset") {
  Dataset ds = parse_dataset("Outlook,Temperature,Humidity,Wind,PlayTennis\n",
                             tennis_schema());
  CHECK(ds.size() == 0);
}

TEST_CASE("CSV errors name the offending row and column") {
  DatasetSchema schema = tennis_schema();
  const std::string header = "Outlook,Temperature,Humidity,Wind,PlayTennis\n";
  try {
    parse_dataset(header + "Foggy,Hot,High,Weak,No\n", schema);
    FAIL("expected a schema violation");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("Outlook") != std::string::npos);
    CHECK(msg.find("Foggy") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_dataset(header + "Sunny,Hot,High,Weak\n", schema),
                  ValidationError);
  CHECK_THROWS_AS(parse_dataset("Outlook,Temperature\nSunny,Hot\n", schema),
                  ValidationError);

  DatasetSchema xs = DatasetSchema::parse(
      "attribute x input continuous\nattribute y target nominal a b\n");
  CHECK_THROWS_AS(parse_dataset("x,y\nnotanumber,a\n", xs), ValidationError);
  CHECK_THROWS_AS(parse_dataset("x,y\ninf,a\n", xs), ValidationError);
}

TEST_CASE("dataset serialization round trips") {
  Dataset ds = tennis_data();
  std::string csv = serialize_dataset(ds);
  Dataset again = parse_dataset(csv, ds.schema);
  CHECK(serialize_dataset(again) == csv);
}

TEST_CASE("bin_target follows left-open right-closed intervals") {
  BinningSpec spec;
  spec.edges = {10, 20, 30};
  spec.labels = {"A", "B", "C", "D"};
  spec.validate();
  CHECK(spec.bin_index(5.0) == 0);
  CHECK(spec.bin_index(10.0) == 0);
  CHECK(spec.bin_index(10.5) == 1);
  CHECK(spec.bin_index(20.0) == 1);
  CHECK(spec.bin_index(35.0) == 3);

  DatasetSchema rs = DatasetSchema::parse(
      "attribute x input continuous\nattribute y target continuous\n");
  Dataset ds = parse_dataset("x,y\n1,5\n2,10\n3,35\n", rs);
  Dataset binned = bin_target(ds, spec);
  CHECK(binned.schema.class_labels == spec.labels);
  CHECK(binned.instances[0].label == 0);
  CHECK(binned.instances[1].label == 0);
  CHECK(binned.instances[2].label == 3);
}

TEST_CASE("bin_target is monotone in the target value") {
  BinningSpec spec;
  spec.edges = {-1.0, 0.25, 2.0};
  spec.labels = {"w", "x", "y", "z"};
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    double a = rng.next_uniform(-5, 5);
    double b = rng.next_uniform(-5, 5);
    if (a > b) std::swap(a, b);
    CHECK(spec.bin_index(a) <= spec.bin_index(b));
  }
}

TEST_CASE("bin_target requires a continuous target") {
  BinningSpec spec;
  spec.edges = {0.5};
  spec.labels = {"lo", "hi"};
  CHECK_THROWS_AS(bin_target(tennis_data(), spec), ValidationError);
}

TEST_CASE("binning spec text form round trips") {
  BinningSpec spec = BinningSpec::parse("10,20,30:A,B,C,D");
  CHECK(spec.edges == std::vector<double>{10, 20, 30});
  CHECK(spec.labels == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(BinningSpec::parse(spec.serialize()).serialize() == spec.serialize());
  CHECK_THROWS_AS(BinningSpec::parse("30,20:A,B,C"), ValidationError);
  CHECK_THROWS_AS(BinningSpec::parse("10:A"), ValidationError);
}

TEST_CASE("split_dataset produces rounded sizes with remainder to train") {
  DatasetSchema xs = DatasetSchema::parse(
      "attribute x input continuous\nattribute y target nominal a b\n");
  std::string csv = "x,y\n";
  for (int i = 0; i < 10; ++i)
    csv += std::to_string(i) + (i % 2 ? ",a\n" : ",b\n");
  Dataset ds = parse_dataset(csv, xs);

  SplitSpec spec;  // 0.6 / 0.2 / 0.2
  SplitResult r = split_dataset(ds, spec);
  CHECK(r.train.size() == 6);
  CHECK(r.cv.size() == 2);
  CHECK(r.test.size() == 2);
}

TEST_CASE("split_dataset partitions without loss or overlap") {
  Dataset ds = tennis_data();
  SplitSpec spec;
  spec.train_fraction = 0.5;
  spec.cv_fraction = 0.25;
  spec.test_fraction = 0.25;
  spec.seed = 77;
  SplitResult r = split_dataset(ds, spec);
  CHECK(r.train.size() + r.cv.size() + r.test.size() == ds.size());

  std::vector<std::string> combined;
  for (const Dataset* part : {&r.train, &r.cv, &r.test})
    for (const auto& row : sorted_rows(*part)) combined.push_back(row);
  std::sort(combined.begin(), combined.end());
  CHECK(combined == sorted_rows(ds));
}

TEST_CASE("split_dataset is deterministic per seed") {
  Dataset ds = tennis_data();
  SplitSpec spec;
  spec.seed = 3;
  SplitResult a = split_dataset(ds, spec);
  SplitResult b = split_dataset(ds, spec);
  CHECK(serialize_dataset(a.train) == serialize_dataset(b.train));
  CHECK(serialize_dataset(a.cv) == serialize_dataset(b.cv));
  CHECK(serialize_dataset(a.test) == serialize_dataset(b.test));
}

TEST_CASE("split_dataset rejects bad fractions") {
  SplitSpec bad;
  bad.train_fraction = bad.cv_fraction = bad.test_fraction = 0.5;
  CHECK_THROWS_AS(split_dataset(tennis_data(), bad), ValidationError);
  CHECK_THROWS_AS(SplitSpec::parse_fractions("0.5,0.5,0.5"), ValidationError);
  CHECK(SplitSpec::parse_fractions("0.7,0.1,0.2").train_fraction == 0.7);
}

TEST_CASE("majority_class breaks ties toward the lowest index") {
  CHECK(majority_class({3, 5, 5}) == 1);
  CHECK(majority_class({2, 2}) == 0);
  CHECK(majority_class({0, 0, 1}) == 2);
}
