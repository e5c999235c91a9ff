#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qbn/network.hpp"
#include "qbn/queries.hpp"
#include "qbn/rng.hpp"

namespace qbn {

// ---------------------------------------------------------------------------
// Random instances

struct RandomNetOptions {
  std::size_t vars = 5;
  std::size_t max_parents = 2;
  std::size_t max_arity = 2;   // arities drawn uniformly from [2, max_arity]
  double edge_prob = 0.5;      // chance each earlier node is proposed as a parent
  double alpha = 1.0;          // Dirichlet concentration of every CPT row
};

std::vector<Variable> random_variables(std::size_t n, std::size_t max_arity, Rng& rng);
// DAG whose parents always precede their child in id order.
Structure random_structure(std::vector<Variable> variables, std::size_t max_parents,
                           double edge_prob, Rng& rng);
BayesNet random_cpts(const Structure& structure, double alpha, Rng& rng);
BayesNet random_net(const RandomNetOptions& opts, Rng& rng);
// One to max_targets target variables; each other variable joins the
// evidence with probability evidence_prob. Values are uniform.
StatQuery random_query(const BayesNet& net, Rng& rng, std::size_t max_targets = 1,
                       double evidence_prob = 0.4);
// Query whose evidence is exactly the Markov blanket of a random variable.
StatQuery random_blanket_query(const BayesNet& net, Rng& rng);

// ---------------------------------------------------------------------------
// Worked-example nets. Variables are binary with domain {"0","1"}.

namespace examples {

// A, X, C with C = A and X independent at 0.5; p(A=1) = 0.5.
BayesNet abc_truth();
// A -> X -> C.
Structure abc_chain();
// Chain with every row uniform (the frequency-estimate limit).
BayesNet abc_frequency_limit();
// Chain with X = A and C = X.
BayesNet abc_query_optimal();
// p(C=1|A=1) labeled 1 and p(C=1|A=0) labeled 0, weight 1/2 each.
std::vector<LabeledQuery> abc_queries();
QueryDistribution abc_distribution();

// C -> A_1..A_n with p(C=0)=0.5, p(A_i=0|C=0)=0.2, p(A_i=0|C=1)=0.05.
BayesNet naive_bayes_truth(std::size_t n);
// p(C=0 | A_1=0, ..., A_n=0).
StatQuery naive_bayes_query(std::size_t n);
double naive_bayes_answer(std::size_t n);

// A_1..A_n -> C with C = A_1 and parity(A_2..A_n), entries clamped to
// [clamp, 1 - clamp]; p(A_i=1) = 0.5.
BayesNet parity_truth(std::size_t n, double clamp);

}  // namespace examples

// ---------------------------------------------------------------------------
// Reports

struct ResultRow {
  std::string metric;
  double value = 0.0;
  std::string criterion;
  bool pass = true;
};

struct ExperimentReport {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<ResultRow> rows;
  // Curve data for plotting.
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> data;

  bool passed() const;
};

nlohmann::json to_json(const ExperimentReport& report);
// metric,value,criterion,pass
void write_rows_csv(const ExperimentReport& report, std::ostream& out);
void write_data_csv(const ExperimentReport& report, std::ostream& out);
// <dir>/<id>.json, <dir>/<id>.csv and, with curve data, <dir>/<id>_data.csv.
void save_report(const ExperimentReport& report, const std::string& dir);

// ---------------------------------------------------------------------------
// Runners. Every run is a deterministic function of its parameters and seed;
// jobs only changes how many seeded repetitions run at once.

struct Ex41Params {
  std::size_t ofe_samples = 100000;
  int restarts = 10;
  int max_iters = 2000;
};
ExperimentReport run_ex41(std::uint64_t seed = 42, int jobs = 1, const Ex41Params& p = {});

struct Ex42Params {
  std::size_t n = 10;
  std::vector<std::size_t> sizes{100, 500, 2000, 10000};
  std::size_t criterion_size = 2000;
  int seeds = 100;
};
ExperimentReport run_ex42(std::uint64_t seed = 42, int jobs = 1, const Ex42Params& p = {});

struct Ex43Params {
  std::size_t n = 10;
  std::size_t samples = 1000;
  int seeds = 100;
  double clamp = 1e-6;
};
ExperimentReport run_ex43(std::uint64_t seed = 42, int jobs = 1, const Ex43Params& p = {});

struct ComparisonParams {
  std::vector<std::size_t> sizes{100, 1000, 10000, 100000};
  int seeds = 3;
  int restarts = 3;
  int max_iters = 2000;
  double ofe_alpha = 1.0;
};
// OFE and query fitting on the truth's own structure and on `given`, with
// training labels taken as conditional frequencies in the same sample.
// Reports the mean true error per (method, structure, size).
ExperimentReport run_comparison(const BayesNet& truth, const Structure& given,
                                const QueryDistribution& dist, const ComparisonParams& p,
                                std::uint64_t seed = 42, int jobs = 1);
// The comparison on the A/X/C example.
ExperimentReport run_table1(std::uint64_t seed = 42, int jobs = 1, const ComparisonParams& p = {});

struct HoeffdingParams {
  int trials = 200;
  double eps = 0.1;
  double delta = 0.1;
  std::size_t vars = 5;
  std::size_t atoms = 20;
};
// Coverage of the labeled-query estimate: fraction of trials whose empirical
// error on m_lsq(eps, delta) sampled queries misses the true error by eps or
// more.
ExperimentReport run_hoeffding(std::uint64_t seed = 42, int jobs = 1, const HoeffdingParams& p = {});

// ex4.1, ex4.2, ex4.3, table1, hoeffding with default parameters apart from
// the overrides in `params` (n, N). Throws InvalidArgument for an unknown id.
ExperimentReport run_experiment(const std::string& id, std::uint64_t seed, int jobs,
                                const std::vector<std::pair<std::string, double>>& params = {});

}  // namespace qbn
