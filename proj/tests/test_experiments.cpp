#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "qbn/errors.hpp"
#include "qbn/experiments.hpp"
#include "qbn/inference.hpp"
#include "qbn/io.hpp"
#include "qbn/queries.hpp"

using namespace qbn;
namespace fs = std::filesystem;

namespace {

const ResultRow& row(const ExperimentReport& r, const std::string& metric) {
  for (const auto& x : r.rows) {
    if (x.metric == metric) return x;
  }
  throw std::runtime_error("no row " + metric);
}

void expect_same(const ExperimentReport& a, const ExperimentReport& b) {
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].metric, b.rows[i].metric);
    EXPECT_EQ(a.rows[i].value, b.rows[i].value) << a.rows[i].metric;
    EXPECT_EQ(a.rows[i].pass, b.rows[i].pass);
  }
  EXPECT_EQ(a.data, b.data);
}

}  // namespace

TEST(Examples, ClosedForms) {
  for (std::size_t n : {1u, 4u, 10u}) {
    const double a = 0.5 * std::pow(0.2, n), b = 0.5 * std::pow(0.05, n);
    EXPECT_NEAR(examples::naive_bayes_answer(n), a / (a + b), 1e-15);
  }
  const BayesNet parity = examples::parity_truth(5, 0.0);
  EXPECT_NEAR(marginal(parity, {{5, 1}}), 0.25, 1e-15);
  // A_1=1, A_2..A_5 = 1,0,0,0 has odd parity.
  EXPECT_DOUBLE_EQ(cond_prob(parity, {{5, 1}}, {{0, 1}, {1, 1}, {2, 0}, {3, 0}, {4, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(cond_prob(parity, {{5, 1}}, {{0, 1}, {1, 1}, {2, 1}, {3, 0}, {4, 0}}), 0.0);
  EXPECT_THROW(examples::parity_truth(1, 0.0), InvalidArgument);
}

TEST(RandomInstances, StructureIsTopological) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    RandomNetOptions opts;
    opts.vars = 8;
    opts.max_parents = 3;
    opts.max_arity = 4;
    const BayesNet net = random_net(opts, rng);
    EXPECT_TRUE(validate(net).empty());
    for (VarId v = 0; v < net.size(); ++v) {
      EXPECT_LE(net.parents(v).size(), 3u);
      for (VarId u : net.parents(v)) EXPECT_LT(u, v);
    }
    EXPECT_TRUE(is_markov_blanket_query(net, random_blanket_query(net, rng)));
  }
}

TEST(Ex41, RowsPass) {
  Ex41Params p;
  p.ofe_samples = 20000;
  p.restarts = 3;
  const auto r = run_ex41(42, 1, p);
  EXPECT_EQ(r.id, "ex4.1");
  EXPECT_TRUE(r.passed());
  EXPECT_DOUBLE_EQ(row(r, "err_frequency_limit").value, 0.25);
  EXPECT_DOUBLE_EQ(row(r, "err_query_optimal").value, 0.0);
  EXPECT_LT(row(r, "empirical_err_fit").value, 1e-3);
}

TEST(Ex42, SmallRunAndJobsInvariance) {
  Ex42Params p;
  p.n = 6;
  p.sizes = {50, 400};
  p.criterion_size = 400;
  p.seeds = 15;
  const auto a = run_ex42(7, 1, p);
  const auto b = run_ex42(7, 3, p);
  expect_same(a, b);
  EXPECT_EQ(a.data.size(), 2u);
  EXPECT_EQ(a.columns.size(), 4u);
  const auto c = run_ex42(8, 1, p);
  EXPECT_NE(a.data, c.data);

  p.criterion_size = 123;
  EXPECT_THROW(run_ex42(7, 1, p), InvalidArgument);
  p.n = 3;
  EXPECT_THROW(run_ex42(7, 1, p), InvalidArgument);
}

TEST(Ex43, DefaultRunAndPreconditions) {
  Ex43Params p;
  p.seeds = 20;
  const auto r = run_ex43(42, 2, p);
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(row(r, "truth_p_c1").value, 0.25, 1e-6);
  EXPECT_GE(row(r, "ofe_b_c1_min").value, 0.4);
  EXPECT_LE(row(r, "ofe_b_c1_max").value, 0.6);

  Ex43Params bad;
  bad.n = 5;
  bad.samples = 32;
  EXPECT_THROW(run_ex43(42, 1, bad), InvalidArgument);
  bad.n = 3;
  bad.samples = 2;
  EXPECT_THROW(run_ex43(42, 1, bad), InvalidArgument);
}

TEST(Table1, SmallComparison) {
  ComparisonParams p;
  p.sizes = {200, 5000};
  p.seeds = 2;
  p.restarts = 2;
  const auto a = run_table1(5, 1, p);
  const auto b = run_table1(5, 2, p);
  expect_same(a, b);
  EXPECT_FALSE(a.data.empty());
  EXPECT_GE(row(a, "ofe_given@5000").value, 0.2);
  EXPECT_LT(row(a, "qfit_given@5000").value, 1e-2);
}

TEST(Hoeffding, CoverageAndDeterminism) {
  HoeffdingParams p;
  p.trials = 40;
  const auto a = run_hoeffding(11, 1, p);
  const auto b = run_hoeffding(11, 4, p);
  expect_same(a, b);
  EXPECT_TRUE(a.passed());
  const double miss = row(a, "miss_fraction").value;
  EXPECT_GE(miss, 0.0);
  EXPECT_LE(miss, 0.1);
  p.trials = 0;
  EXPECT_THROW(run_hoeffding(11, 1, p), InvalidArgument);
}

TEST(RunExperiment, DispatchAndOverrides) {
  const auto r = run_experiment("ex4.3", 42, 1, {{"n", 8}, {"N", 100}});
  EXPECT_EQ(r.id, "ex4.3");
  bool saw_n = false;
  for (const auto& [k, v] : r.params) {
    if (k == "n") {
      EXPECT_EQ(v, "8");
      saw_n = true;
    }
    if (k == "N") EXPECT_EQ(v, "100");
  }
  EXPECT_TRUE(saw_n);
  EXPECT_THROW(run_experiment("ex5", 42, 1), InvalidArgument);
  EXPECT_THROW(run_experiment("ex4.3", 42, 1, {{"n", 5}, {"N", 64}}), InvalidArgument);
}

TEST(Reports, SaveAndSerialize) {
  ExperimentReport r;
  r.id = "demo";
  r.seed = 9;
  r.params = {{"n", "3"}};
  r.rows = {{"m1", 0.5, "info", true}, {"m2", 2.0, "< 1", false}};
  EXPECT_FALSE(r.passed());

  std::ostringstream csv;
  write_rows_csv(r, csv);
  EXPECT_EQ(csv.str(), "metric,value,criterion,pass\nm1,0.5,info,pass\nm2,2,< 1,fail\n");

  const auto doc = to_json(r);
  EXPECT_EQ(doc["id"], "demo");
  EXPECT_EQ(doc["seed"], 9);
  EXPECT_EQ(doc["params"]["n"], "3");
  EXPECT_FALSE(doc["passed"].get<bool>());

  const fs::path dir = fs::temp_directory_path() / "qbn_experiments_reports";
  fs::remove_all(dir);
  save_report(r, dir.string());
  EXPECT_TRUE(fs::exists(dir / "demo.json"));
  EXPECT_EQ(io::read_file((dir / "demo.csv").string()), csv.str());
  EXPECT_FALSE(fs::exists(dir / "demo_data.csv"));

  r.columns = {"x", "y"};
  r.data = {{"1", "2"}};
  save_report(r, dir.string());
  EXPECT_EQ(io::read_file((dir / "demo_data.csv").string()), "x,y\n1,2\n");
}
