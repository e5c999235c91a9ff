#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbn/network.hpp"
#include "qbn/rng.hpp"

namespace qbn {

// "p(X = x | Y = y) = ?" with a non-empty target and disjoint evidence.
struct StatQuery {
  Assignment target;
  Assignment evidence;

  // Checks the invariants; throws InvalidArgument on violation.
  static StatQuery make(Assignment target, Assignment evidence);

  friend bool operator==(const StatQuery&, const StatQuery&) = default;
  friend auto operator<=>(const StatQuery&, const StatQuery&) = default;
};

struct LabeledQuery {
  StatQuery query;
  double label = 0.0;
};

struct WeightedQuery {
  StatQuery query;
  double weight = 0.0;
};

// Finite distribution over ground queries.
class QueryDistribution {
 public:
  QueryDistribution() = default;

  // Merges duplicate queries by summing their weights. Weights must be
  // positive and sum to 1 within tolerance; they are then renormalized.
  static QueryDistribution from_atoms(std::vector<WeightedQuery> atoms, double tolerance = 1e-6);

  const std::vector<WeightedQuery>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

 private:
  friend const StatQuery& sample_query(const QueryDistribution& dist, Rng& rng);

  std::vector<WeightedQuery> atoms_;
  std::vector<double> cumulative_;
};

// Query template: every variable in target_vars and evidence_vars is either
// pinned to a value or ranges over its whole domain.
struct QueryPattern {
  std::vector<VarId> target_vars;
  std::vector<VarId> evidence_vars;
  Assignment pinned;
};

inline constexpr std::size_t kDefaultExpansionCap = std::size_t{1} << 20;

// Every ground instance of the pattern, sharing the weight uniformly.
std::vector<WeightedQuery> expand_pattern(const BayesNet& net, const QueryPattern& pattern,
                                          double weight,
                                          std::size_t cap = kDefaultExpansionCap);

// Atom i with probability weight_i. Throws InvalidArgument if dist is empty.
const StatQuery& sample_query(const QueryDistribution& dist, Rng& rng);
// m draws from a fresh stream seeded with seed.
std::vector<StatQuery> sample_queries(const QueryDistribution& dist, std::size_t m,
                                      std::uint64_t seed);

// Single target variable whose evidence covers the target's Markov blanket.
bool is_markov_blanket_query(const BayesNet& net, const StatQuery& q);

// Labels each query with the truth net's answer. Throws ZeroEvidence listing
// every query whose evidence has probability zero under truth.
std::vector<LabeledQuery> label_queries(const BayesNet& truth, const std::vector<StatQuery>& qs);

// CPT variables whose tables can affect B(x|y) for some atom of dist.
std::vector<VarId> relevant_variables(const BayesNet& net, const QueryDistribution& dist);
// All entries of the relevant variables; the complement provably cannot
// change any answer to a query in dist's support.
std::vector<EntryId> relevant_entries(const BayesNet& net, const QueryDistribution& dist);
// Same test for a single query.
bool cpt_influences(const BayesNet& net, VarId v, const StatQuery& q);

// "p(C=1|A=1)"
std::string describe(const BayesNet& net, const StatQuery& q);

}  // namespace qbn
