#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qbn/network.hpp"
#include "qbn/queries.hpp"
#include "qbn/sampling.hpp"

namespace qbn {

enum class ScoreMode { True, Labeled, Events };

std::string to_string(ScoreMode mode);

struct QueryScore {
  StatQuery query;
  double weight = 0.0;
  double hypothesis = 0.0;
  double reference = 0.0;
  double sq_error = 0.0;
  // Non-empty when the hypothesis could not answer (zero-mass evidence in an
  // unclamped net). Such queries are excluded from the aggregate.
  std::string failure;
};

struct ErrReport {
  ScoreMode mode = ScoreMode::True;
  double aggregate = 0.0;
  std::vector<QueryScore> per_query;

  std::size_t failures() const;
};

// Query-weighted squared error against the truth net's conditionals.
// Throws ZeroEvidence if an atom is illegal under truth.
ErrReport true_err(const BayesNet& b, const QueryDistribution& dist, const BayesNet& truth);

// Unweighted mean squared deviation from the labels. Throws InvalidArgument
// for an empty list.
ErrReport empirical_err(const BayesNet& b, const std::vector<LabeledQuery>& qs);
// Weighted variant; weights are normalized to sum to 1.
ErrReport empirical_err(const BayesNet& b, const std::vector<LabeledQuery>& qs,
                        const std::vector<double>& weights);

// Labels replaced by conditional frequencies in data. Throws
// UnmatchedEvidence listing the queries with no matching tuple.
ErrReport empirical_err_from_events(const BayesNet& b, const std::vector<StatQuery>& qs,
                                    const Dataset& data);

// (1/|D|) Σ ln(1/B(d)). Throws ZeroEvidence for a zero-probability tuple.
double nll(const BayesNet& b, const Dataset& data);

// Σ_d p(d) ln(p(d)/B(d)) by enumeration. Throws InvalidArgument when b puts
// zero mass where truth does not, CapExceeded above the enumeration cap.
double true_kl(const BayesNet& b, const BayesNet& truth);

// (Σ ln B(c_i | a_i), Σ ln B(a_i)) where a_i are the other variables of tuple i.
std::pair<double, double> ll_decomposition(const BayesNet& b, const Dataset& data, VarId class_var);

}  // namespace qbn
