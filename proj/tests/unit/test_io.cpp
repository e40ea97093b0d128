#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "rar/config.hpp"
#include "rar/csv.hpp"
#include "rar/rng.hpp"

using namespace rar;

TEST(KeyValue, ParseCommentsSectionsAndRepeats) {
  const auto kv = KeyValueFile::parse_string(
      "# header\n[run]\nalpha = 1.5  # trailing\nname = \"quoted\"\nrow = 1\nrow = 2\n\n");
  EXPECT_EQ(kv.get_double("alpha", 0), 1.5);
  EXPECT_EQ(kv.require("name"), "quoted");
  EXPECT_EQ(kv.get_all("row"), (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(kv.get("row"), std::optional<std::string>("2"));  // last one wins
  EXPECT_EQ(kv.get_int("missing", 9), 9);
  EXPECT_FALSE(kv.has("missing"));
  EXPECT_THROW(kv.require("missing"), Error);
  EXPECT_THROW(KeyValueFile::parse_string("no equals sign\n"), Error);
  EXPECT_THROW(KeyValueFile::parse_string(" = 3\n"), Error);
  EXPECT_THROW(KeyValueFile::load("/nonexistent/file.cfg"), Error);
}

TEST(KeyValue, SetReplacesLast) {
  KeyValueFile kv;
  kv.add("a", "1");
  kv.add("a", "2");
  kv.set("a", "3");
  EXPECT_EQ(kv.get_all("a"), (std::vector<std::string>{"1", "3"}));
  EXPECT_EQ(kv.get("a"), std::optional<std::string>("3"));
}

TEST(KeyValue, NumberParsing) {
  EXPECT_EQ(split_list(" a, b ,c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(parse_doubles("1, -2.5, 3e2"), (std::vector<double>{1, -2.5, 300}));
  EXPECT_EQ(parse_int("42"), 42);
  EXPECT_THROW(parse_int("4.2"), Error);
  EXPECT_THROW(parse_double("abc"), Error);
  EXPECT_THROW(parse_double("1.0x"), Error);
}

TEST(ScenarioConfig, RoundTripBuiltins) {
  for (const auto& name : builtin_scenario_names()) {
    ScenarioSpec s = builtin_scenario(name, 300);
    if (name == "2D") s.p = 77;
    const ScenarioSpec back = scenario_from_config(scenario_to_config(s));
    EXPECT_EQ(back.n, s.n);
    EXPECT_EQ(back.p, s.p);
    EXPECT_EQ(back.sigma, s.sigma);
    EXPECT_EQ(back.beta_s, s.beta_s);
    EXPECT_EQ(back.block_matrix(), s.block_matrix()) << name;
  }
}

TEST(ScenarioConfig, OverridesAndCustom) {
  const ScenarioSpec s = scenario_from_config(KeyValueFile::parse_string("name = 1A\nn = 200\nsigma = 0.5\n"));
  EXPECT_EQ(s.dimension(), dimension_rule(200));
  EXPECT_EQ(s.sigma, 0.5);
  const ScenarioSpec c = scenario_from_config(KeyValueFile::parse_string(
      "name = mine\nn = 50\np = 10\nblock = explicit\nblock_row = 1, 0.2\nblock_row = 0.2, 1\nbeta_s = 1, -1\n"));
  EXPECT_EQ(c.dimension(), 10);
  EXPECT_DOUBLE_EQ(c.block_matrix()(0, 1), 0.2);
  EXPECT_THROW(scenario_from_config(KeyValueFile::parse_string("name = mine\nn = 50\n")), Error);
  EXPECT_THROW(scenario_from_config(KeyValueFile::parse_string(
                   "name = mine\nblock = explicit\nblock_row = 1, 2\nblock_row = 2, 1\nbeta_s = 1\np = 5\n")),
               Error);
  EXPECT_NE(scenario_to_string(c).find("block_row = 0.20000000000000001, 1"), std::string::npos);
}

TEST(Csv, ResponseByNameAndIndex) {
  const std::string text = "a,target,b\n1,10,2\n3,20,4\n5,30,7\n";
  std::istringstream in1(text);
  CsvOptions opt;
  opt.response = "target";
  const Dataset d = parse_csv(in1, opt);
  EXPECT_EQ(d.y, (Vector(3) << 10, 20, 30).finished());
  EXPECT_EQ(d.x, (Matrix(3, 2) << 1, 2, 3, 4, 5, 7).finished());
  EXPECT_EQ(d.column_names, (std::vector<std::string>{"a", "b"}));
  std::istringstream in2(text);
  opt.response = "1";
  EXPECT_EQ(parse_csv(in2, opt).y, d.y);
}

TEST(Csv, Errors) {
  auto parse = [](const std::string& text, CsvOptions opt = {}) {
    std::istringstream in(text);
    return parse_csv(in, opt);
  };
  EXPECT_THROW(parse("y,x\n1,2\n3\n"), Error);
  EXPECT_THROW(parse("y,x\n1,\n3,4\n"), Error);
  EXPECT_THROW(parse("y,x\n1,nan\n3,4\n"), Error);
  EXPECT_THROW(parse("y,x\n1,abc\n3,4\n"), Error);
  EXPECT_THROW(parse("y\n1\n2\n"), Error);
  EXPECT_THROW(parse("y,x\n1,2\n"), Error);
  CsvOptions opt;
  opt.response = "zzz";
  EXPECT_THROW(parse("y,x\n1,2\n3,4\n", opt), Error);
  opt.response = "5";
  EXPECT_THROW(parse("y,x\n1,2\n3,4\n", opt), Error);
}

TEST(Csv, WriteReadRoundTrip) {
  const Dataset d = Dataset::make((Matrix(3, 2) << 0.1, 1e-20, -3, 4.5, 7, 8).finished(),
                                  (Vector(3) << 1.0 / 3.0, 2, 3).finished());
  std::ostringstream out;
  write_csv(d, out);
  std::istringstream in(out.str());
  const Dataset e = parse_csv(in);
  EXPECT_EQ(e.x, d.x);
  EXPECT_EQ(e.y, d.y);
  EXPECT_EQ(e.column_names, (std::vector<std::string>{"x1", "x2"}));
}

TEST(Rng, DeriveSeedIsOrderSensitiveAndStable) {
  EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
  EXPECT_NE(derive_seed(7, {1}), derive_seed(7, {1, 0}));
  EXPECT_EQ(hash_tag(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hash_tag("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, PermutationIsPermutation) {
  Rng rng = make_rng(3);
  for (std::int64_t n : {0, 1, 2, 17, 100}) {
    auto p = random_permutation(n, rng);
    std::sort(p.begin(), p.end());
    for (std::int64_t i = 0; i < n; ++i) EXPECT_EQ(p[static_cast<std::size_t>(i)], i);
  }
}

TEST(Rng, UniformBelowRoughlyUniform) {
  Rng rng = make_rng(9);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[uniform_below(rng, 7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_EQ(uniform_below(rng, 1), 0u);
}
