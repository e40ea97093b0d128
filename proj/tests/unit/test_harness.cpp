#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "rar/harness.hpp"

using namespace rar;

namespace {

ExperimentConfig tiny(int reps) {
  ExperimentConfig cfg;
  for (const char* name : {"1A", "2C"}) {
    ScenarioSpec s = builtin_scenario(name, 60);
    s.p = 80;
    cfg.scenarios.push_back(s);
  }
  cfg.ns = {60, 40};
  cfg.methods = {parse_method_spec("lasso"), parse_method_spec("sis"), parse_method_spec("rar:3"),
                 parse_method_spec("mrar:3")};
  cfg.replications = reps;
  cfg.root_seed = 11;
  return cfg;
}

struct WorkersUnset : ::testing::Test {
  void SetUp() override { unsetenv("RAR_WORKERS"); }
};

}  // namespace

TEST(MethodSpec, LabelsAndKeys) {
  EXPECT_EQ(parse_method_spec("lasso").label(), "Lasso");
  EXPECT_EQ(parse_method_spec("SIS").label(), "SIS-lasso");
  EXPECT_EQ(parse_method_spec("isis").label(), "ISIS-lasso");
  EXPECT_EQ(parse_method_spec("ada").label(), "Ada-lasso");
  EXPECT_EQ(parse_method_spec("rar:30").label(), "RAR_30");
  EXPECT_EQ(parse_method_spec("mrar:1").label(), "MRAR_1");
  EXPECT_EQ(parse_method_spec("mrar").permutations, 10);
  for (const char* k : {"lasso", "sis", "isis", "ada", "rar:5", "mrar:15"}) {
    EXPECT_EQ(parse_method_spec(k).key(), k);
  }
  EXPECT_THROW(parse_method_spec("lasso:3"), Error);
  EXPECT_THROW(parse_method_spec("rar:0"), Error);
  EXPECT_THROW(parse_method_spec("ridge"), Error);
}

TEST(ExperimentConfig, FromConfig) {
  const auto kv = KeyValueFile::parse_string(
      "scenario = 1A, 2D\nn = 100, 200\nmethods = lasso, mrar:5\nreplications = 7\nroot_seed = 3\n"
      "parallelism = 2\nn_lambda = 50\nstage3 = gic\nverify_kkt = yes\n");
  const ExperimentConfig cfg = ExperimentConfig::from_config(kv);
  ASSERT_EQ(cfg.scenarios.size(), 2u);
  EXPECT_EQ(cfg.scenarios[1].name, "2D");
  EXPECT_EQ(cfg.ns, (std::vector<Index>{100, 200}));
  EXPECT_EQ(cfg.methods[1], (MethodSpec{Method::Mrar, 5}));
  EXPECT_EQ(cfg.replications, 7);
  EXPECT_EQ(cfg.root_seed, 3u);
  EXPECT_EQ(cfg.parallelism, 2);
  EXPECT_EQ(cfg.estimator.solver.n_lambda, 50);
  EXPECT_EQ(cfg.estimator.stage3, Stage3Mode::Gic);
  EXPECT_TRUE(cfg.verify_kkt);
  EXPECT_THROW(ExperimentConfig::from_config(KeyValueFile::parse_string("n = 100\nmethods = lasso\n")), Error);
  EXPECT_THROW(ExperimentConfig::from_config(KeyValueFile::parse_string("scenario = 1A\nn = 100\n")), Error);
  EXPECT_THROW(
      ExperimentConfig::from_config(KeyValueFile::parse_string("scenario = 1A\nn = 100\nmethods = lasso\nstage3 = x")),
      Error);
}

TEST(ExperimentConfig, PublishedGrid) {
  const ExperimentConfig g = ExperimentConfig::full_grid();
  EXPECT_EQ(g.scenarios.size(), 4u);
  EXPECT_EQ(g.ns, (std::vector<Index>{100, 200, 300, 400, 500}));
  EXPECT_EQ(g.methods.size(), 14u);
  EXPECT_EQ(g.replications, 200);
  EXPECT_EQ(ExperimentConfig::smoke().replications, 25);
}

TEST_F(WorkersUnset, ResolveParallelism) {
  EXPECT_EQ(resolve_parallelism(3), 3);
  setenv("RAR_WORKERS", "5", 1);
  EXPECT_EQ(resolve_parallelism(3), 5);
  setenv("RAR_WORKERS", "junk", 1);
  EXPECT_EQ(resolve_parallelism(3), 3);
  unsetenv("RAR_WORKERS");
}

TEST(Seeds, ReplicationSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (const char* s : {"1A", "1B"}) {
    for (Index n : {100, 200}) {
      for (int r = 0; r < 50; ++r) EXPECT_TRUE(seen.insert(replication_seed(1, s, n, r)).second);
    }
  }
  EXPECT_EQ(replication_seed(1, "1A", 100, 0), replication_seed(1, "1A", 100, 0));
  EXPECT_NE(replication_seed(1, "1A", 100, 0), replication_seed(2, "1A", 100, 0));
}

TEST_F(WorkersUnset, SingleReplicationProportions) {
  const ExperimentResult r = run_experiment(tiny(1));
  ASSERT_EQ(r.tables.size(), 2u);
  for (const auto& t : r.tables) {
    EXPECT_EQ(t.columns, (std::vector<std::pair<Index, Index>>{{40, 80}, {60, 80}}));
    for (const auto& row : t.cells) {
      for (const auto& c : row) {
        EXPECT_EQ(c.reps, 1);
        EXPECT_TRUE(c.proportion() == 0.0 || c.proportion() == 1.0);
        EXPECT_EQ(c.standard_error(), 0.0);
      }
    }
  }
}

TEST_F(WorkersUnset, ParallelismInvariance) {
  ExperimentConfig cfg = tiny(3);
  cfg.parallelism = 1;
  const ExperimentResult a = run_experiment(cfg);
  cfg.parallelism = 4;
  const ExperimentResult b = run_experiment(cfg);
  EXPECT_EQ(a.tables, b.tables);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    EXPECT_EQ(a.records[i].dataset_hash, b.records[i].dataset_hash);
    for (std::size_t m = 0; m < a.records[i].methods.size(); ++m) {
      EXPECT_EQ(a.records[i].methods[m].success, b.records[i].methods[m].success);
      EXPECT_EQ(a.records[i].methods[m].retained, b.records[i].methods[m].retained);
    }
  }
}

TEST_F(WorkersUnset, MethodsSeeSameDataAndShareRetention) {
  const ExperimentConfig cfg = tiny(1);
  const ReplicationRecord r = run_replication(cfg, cfg.scenarios[0].with_n(60), 0);
  EXPECT_EQ(r.seed, replication_seed(cfg.root_seed, "1A", 60, 0));
  EXPECT_EQ(r.dataset_hash, dataset_hash(sample_dataset(cfg.scenarios[0].with_n(60), r.seed)));
  ASSERT_EQ(r.methods.size(), 4u);
  EXPECT_EQ(r.methods[2].retained, r.methods[3].retained);
}

TEST(Aggregate, StandardErrorFormula) {
  TableCell c{7, 20, 0};
  EXPECT_DOUBLE_EQ(c.proportion(), 0.35);
  EXPECT_DOUBLE_EQ(c.standard_error(), std::sqrt(0.35 * 0.65 / 20));
  EXPECT_EQ((TableCell{0, 0, 3}).proportion(), 0.0);
}

TEST(Aggregate, HardErrorsExcluded) {
  const std::vector<MethodSpec> methods = {parse_method_spec("lasso"), parse_method_spec("sis")};
  std::vector<ReplicationRecord> recs;
  for (int i = 0; i < 4; ++i) {
    ReplicationRecord r;
    r.scenario = "1A";
    r.n = 100;
    r.p = 1232;
    r.replication = i;
    MethodRecord a;
    a.label = "Lasso";
    a.success = i % 2 == 0;
    MethodRecord b;
    b.label = "SIS-lasso";
    if (i == 3) {
      b.error = "boom";
    } else {
      b.success = true;
    }
    r.methods = {a, b};
    recs.push_back(r);
  }
  const SignRecoveryTable t = aggregate("1A", methods, recs);
  EXPECT_EQ(t.cell("Lasso", 100), (TableCell{2, 4, 0}));
  EXPECT_EQ(t.cell("SIS-lasso", 100), (TableCell{3, 3, 1}));
  EXPECT_THROW(t.cell("Lasso", 200), Error);
  EXPECT_THROW(t.cell("RAR_1", 100), Error);
}

TEST_F(WorkersUnset, HardErrorWarns) {
  ExperimentConfig cfg = tiny(1);
  cfg.scenarios.resize(1);
  cfg.ns = {60};
  cfg.estimator.screen_size = 500;  // larger than p: SIS-lasso throws
  const ExperimentResult r = run_experiment(cfg);
  const TableCell& c = r.tables[0].cell("SIS-lasso", 60);
  EXPECT_EQ(c.failures, 1);
  EXPECT_EQ(c.reps, 0);
  EXPECT_EQ(r.tables[0].cell("Lasso", 60).reps, 1);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("SIS-lasso"), std::string::npos);
}

TEST(Tables, EmptyThrows) {
  SignRecoveryTable t;
  std::ostringstream out;
  EXPECT_THROW(emit_table(t, TableFormat::Csv, out), Error);
  t.methods = {"Lasso"};
  t.cells = {{}};
  EXPECT_THROW(emit_table(t, TableFormat::Markdown, out), Error);
}

TEST(Tables, Formats) {
  SignRecoveryTable t;
  t.scenario = "2C";
  t.methods = {"Lasso", "MRAR_5"};
  t.columns = {{100, 1232}, {200, 1791}};
  t.cells = {{{1, 4, 0}, {0, 4, 0}}, {{3, 4, 0}, {4, 4, 0}}};
  std::ostringstream csv;
  emit_table(t, TableFormat::Csv, csv);
  EXPECT_EQ(csv.str(),
            "scenario,method,n,p,proportion,se,successes,reps,failures\n"
            "2C,Lasso,100,1232,0.250,0.217,1,4,0\n"
            "2C,Lasso,200,1791,0.000,0.000,0,4,0\n"
            "2C,MRAR_5,100,1232,0.750,0.217,3,4,0\n"
            "2C,MRAR_5,200,1791,1.000,0.000,4,4,0\n");
  std::ostringstream md;
  emit_table(t, TableFormat::Markdown, md);
  EXPECT_NE(md.str().find("| (n, p) | (100, 1232) | (200, 1791) |"), std::string::npos);
  EXPECT_NE(md.str().find("| MRAR_5 | 0.750 | 1.000 |"), std::string::npos);
  std::ostringstream js;
  emit_table(t, TableFormat::Json, js);
  EXPECT_EQ(table_from_json(js.str()), t);
  EXPECT_THROW(table_from_json("{}"), Error);
  EXPECT_EQ(parse_table_format("md"), TableFormat::Markdown);
  EXPECT_THROW(parse_table_format("xlsx"), Error);
}

TEST_F(WorkersUnset, EventsJsonl) {
  ExperimentConfig cfg = tiny(2);
  cfg.verify_kkt = true;
  const ExperimentResult r = run_experiment(cfg);
  std::ostringstream out;
  write_events(r, out);
  std::istringstream in(out.str());
  std::string line;
  std::size_t replications = 0;
  std::size_t tables = 0;
  std::map<std::pair<std::string, int>, std::set<std::string>> hashes;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::string ev = j.at("event");
    if (ev == "table") {
      ++tables;
      continue;
    }
    ASSERT_EQ(ev, "replication");
    ++replications;
    hashes[{j.at("scenario").get<std::string>(), j.at("n").get<int>()}].insert(j.at("dataset_hash").get<std::string>());
    for (const auto& m : j.at("methods")) {
      EXPECT_TRUE(m.contains("checked_kkt"));
      EXPECT_EQ(m.at("kkt_failures").get<int>(), 0);
      EXPECT_GT(m.at("solutions").get<int>(), 0);
    }
  }
  EXPECT_EQ(replications, r.records.size());
  EXPECT_EQ(tables, 2u);
  // Two replications per cell draw two different datasets.
  for (const auto& [key, h] : hashes) EXPECT_EQ(h.size(), 2u);
}

TEST(RealData, TrainEqualsTestBestBeatsCv) {
  ScenarioSpec s = builtin_scenario("1A", 80);
  s.p = 60;
  const Dataset d = sample_dataset(s, 4);
  RealDataOptions opt;
  opt.methods = {parse_method_spec("lasso"), parse_method_spec("mrar:3")};
  const auto summaries = run_realdata(d, d, opt);
  ASSERT_EQ(summaries.size(), 2u);
  for (const auto& sm : summaries) {
    EXPECT_LE(sm.mean_best_mse(), sm.mean_mse() + 1e-12) << sm.method;
    EXPECT_FALSE(sm.sd_mse());
    EXPECT_FALSE(sm.sd_size());
  }
}

TEST(RealData, ResplitRepetitions) {
  ScenarioSpec s = builtin_scenario("2C", 90);
  s.p = 40;
  const Dataset train = sample_dataset(s, 5);
  const Dataset test = sample_dataset(s.with_n(30), 6);
  RealDataOptions opt;
  opt.methods = {parse_method_spec("lasso")};
  opt.repetitions = 3;
  opt.train_size = 90;
  const auto a = run_realdata(train, test, opt);
  ASSERT_EQ(a[0].test_mse.size(), 3u);
  ASSERT_TRUE(a[0].sd_mse());
  EXPECT_GE(*a[0].sd_mse(), 0.0);
  EXPECT_EQ(a[0].test_mse, run_realdata(train, test, opt)[0].test_mse);
}
