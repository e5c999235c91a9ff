#include "qbn/queries.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qbn/errors.hpp"
#include "qbn/inference.hpp"

namespace qbn {

StatQuery StatQuery::make(Assignment target, Assignment evidence) {
  if (target.empty()) throw InvalidArgument("statistical query needs a non-empty target");
  if (target.shares_variable_with(evidence)) {
    throw InvalidArgument("statistical query target and evidence must bind disjoint variables");
  }
  return StatQuery{std::move(target), std::move(evidence)};
}

QueryDistribution QueryDistribution::from_atoms(std::vector<WeightedQuery> atoms,
                                                double tolerance) {
  std::map<StatQuery, double> merged;
  std::vector<StatQuery> order;
  double total = 0.0;
  for (auto& atom : atoms) {
    if (atom.query.target.empty() || atom.query.target.shares_variable_with(atom.query.evidence)) {
      throw InvalidArgument("query distribution contains a malformed query");
    }
    if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) {
      throw InvalidArgument("query weights must be positive");
    }
    auto [it, inserted] = merged.try_emplace(atom.query, 0.0);
    if (inserted) order.push_back(atom.query);
    it->second += atom.weight;
    total += atom.weight;
  }
  if (!atoms.empty() && std::abs(total - 1.0) > tolerance) {
    throw InvalidArgument("query weights sum to " + std::to_string(total) + ", expected 1");
  }

  QueryDistribution dist;
  double running = 0.0;
  for (const auto& q : order) {
    const double w = merged[q] / total;
    dist.atoms_.push_back({q, w});
    running += w;
    dist.cumulative_.push_back(running);
  }
  return dist;
}

std::vector<WeightedQuery> expand_pattern(const BayesNet& net, const QueryPattern& pattern,
                                          double weight, std::size_t cap) {
  if (pattern.target_vars.empty()) throw InvalidArgument("pattern needs at least one target variable");
  std::set<VarId> target(pattern.target_vars.begin(), pattern.target_vars.end());
  std::set<VarId> evidence(pattern.evidence_vars.begin(), pattern.evidence_vars.end());
  for (VarId v : target) {
    if (v >= net.size()) throw InvalidArgument("pattern references an unknown variable");
    if (evidence.count(v)) throw InvalidArgument("pattern target and evidence sets overlap");
  }
  for (VarId v : evidence) {
    if (v >= net.size()) throw InvalidArgument("pattern references an unknown variable");
  }
  net.check(pattern.pinned);
  for (const auto& [var, value] : pattern.pinned) {
    if (!target.count(var) && !evidence.count(var)) {
      throw InvalidArgument("pinned variable " + net.variable(var).name + " is not in the pattern");
    }
  }

  std::vector<VarId> free_vars;
  std::size_t count = 1;
  for (VarId v = 0; v < net.size(); ++v) {
    if ((target.count(v) || evidence.count(v)) && !pattern.pinned.contains(v)) {
      free_vars.push_back(v);
      const std::size_t k = net.variable(v).arity();
      if (count > cap / k) throw CapExceeded("pattern expansion exceeds the atom cap");
      count *= k;
    }
  }

  std::vector<WeightedQuery> out;
  out.reserve(count);
  const double share = weight / static_cast<double>(count);
  Assignment ground = pattern.pinned;
  for (VarId v : free_vars) ground.set(v, 0);
  for (std::size_t i = 0; i < count; ++i) {
    StatQuery q;
    for (const auto& [var, value] : ground) {
      (target.count(var) ? q.target : q.evidence).set(var, value);
    }
    out.push_back({std::move(q), share});
    for (std::size_t pos = free_vars.size(); pos-- > 0;) {
      const VarId v = free_vars[pos];
      const ValueId next = *ground.get(v) + 1;
      if (next < net.variable(v).arity()) {
        ground.set(v, next);
        break;
      }
      ground.set(v, 0);
    }
  }
  return out;
}

const StatQuery& sample_query(const QueryDistribution& dist, Rng& rng) {
  if (dist.empty()) throw InvalidArgument("sample_query: empty distribution");
  const double u = rng.uniform() * dist.cumulative_.back();
  auto it = std::upper_bound(dist.cumulative_.begin(), dist.cumulative_.end(), u);
  if (it == dist.cumulative_.end()) --it;
  return dist.atoms_[static_cast<std::size_t>(it - dist.cumulative_.begin())].query;
}

std::vector<StatQuery> sample_queries(const QueryDistribution& dist, std::size_t m,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<StatQuery> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(sample_query(dist, rng));
  return out;
}

bool is_markov_blanket_query(const BayesNet& net, const StatQuery& q) {
  if (q.target.size() != 1) return false;
  const VarId v = q.target.begin()->first;
  if (v >= net.size() || q.evidence.contains(v)) return false;
  for (VarId m : markov_blanket(net, v)) {
    if (!q.evidence.contains(m)) return false;
  }
  return true;
}

std::vector<LabeledQuery> label_queries(const BayesNet& truth, const std::vector<StatQuery>& qs) {
  std::vector<LabeledQuery> out;
  out.reserve(qs.size());
  std::vector<std::size_t> illegal;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    try {
      out.push_back({qs[i], answer(truth, qs[i])});
    } catch (const ZeroEvidence&) {
      illegal.push_back(i);
    }
  }
  if (!illegal.empty()) {
    throw ZeroEvidence(std::to_string(illegal.size()) +
                           " queries have zero-probability evidence under the labeling net",
                       illegal);
  }
  return out;
}

bool cpt_influences(const BayesNet& net, VarId v, const StatQuery& q) {
  return cpt_influences(net, v, q.target.variables(), q.evidence.variables());
}

std::vector<VarId> relevant_variables(const BayesNet& net, const QueryDistribution& dist) {
  std::vector<bool> relevant(net.size(), false);
  for (const auto& atom : dist.atoms()) {
    net.check(atom.query.target);
    net.check(atom.query.evidence);
    const auto targets = atom.query.target.variables();
    const auto evidence = atom.query.evidence.variables();
    for (VarId v = 0; v < net.size(); ++v) {
      if (!relevant[v] && cpt_influences(net, v, targets, evidence)) relevant[v] = true;
    }
  }
  std::vector<VarId> out;
  for (VarId v = 0; v < net.size(); ++v) {
    if (relevant[v]) out.push_back(v);
  }
  return out;
}

std::vector<EntryId> relevant_entries(const BayesNet& net, const QueryDistribution& dist) {
  std::vector<EntryId> out;
  for (VarId v : relevant_variables(net, dist)) {
    const std::size_t rows = net.row_count(v);
    const std::size_t k = net.variable(v).arity();
    for (std::size_t r = 0; r < rows; ++r) {
      for (ValueId q = 0; q < k; ++q) out.push_back({v, r, q});
    }
  }
  return out;
}

std::string describe(const BayesNet& net, const StatQuery& q) {
  return "p(" + net.describe(q.target) + "|" + net.describe(q.evidence) + ")";
}

}  // namespace qbn
