#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qbn/network.hpp"
#include "qbn/queries.hpp"

namespace qbn {

// Non-negative table over the joint configurations of scope. scope is sorted
// by variable id and the last scope variable varies fastest.
struct Factor {
  std::vector<VarId> scope;
  std::vector<std::size_t> cards;
  std::vector<double> table;

  // Value at the configuration given by a (all scope variables bound).
  double at(const Assignment& a) const;
};

// CPT of v as a factor, with the variables bound in evidence fixed and
// dropped from the scope.
Factor cpt_factor(const BayesNet& net, VarId v, const Assignment& evidence);

// Product of the factors with `eliminate` (if any) summed out.
Factor sum_product(const std::vector<const Factor*>& factors, std::optional<VarId> eliminate);

// B(a): sum over completions of a, by variable elimination on the ancestral
// subgraph of a's variables with a greedy min-degree ordering.
double marginal(const BayesNet& net, const Assignment& a);

// Factor over keep (minus variables bound in evidence) holding
// B(keep = k, evidence) for every configuration k.
Factor marginal_factor(const BayesNet& net, const Assignment& evidence,
                       const std::vector<VarId>& keep);

// B(x | y) = B(x ∪ y) / B(y). Overlapping assignments are allowed; a
// conflicting binding makes the numerator zero. Throws ZeroEvidence when
// B(y) = 0.
double cond_prob(const BayesNet& net, const Assignment& x, const Assignment& y);

inline constexpr double kDefaultEnumerationCapBits = 22.0;

// Sum of log2(arity) over all variables.
double binary_equivalent_size(const BayesNet& net);

// B(a) by brute-force enumeration of every completion. Throws CapExceeded when
// the net exceeds cap_bits binary-equivalent variables.
double enumerate_marginal(const BayesNet& net, const Assignment& a,
                          double cap_bits = kDefaultEnumerationCapBits);

// B(v = v_val | y) from local CPT arithmetic. y must bind all of v's Markov
// blanket and leave v unbound.
double mb_query(const BayesNet& net, VarId v, ValueId v_val, const Assignment& y);
// Full posterior over v's values.
std::vector<double> mb_posterior(const BayesNet& net, VarId v, const Assignment& y);

// Net's answer to q; takes the Markov-blanket path when it applies.
double answer(const BayesNet& net, const StatQuery& q);

}  // namespace qbn
