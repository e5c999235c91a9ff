#include "qbn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <set>

#include "qbn/errors.hpp"

namespace qbn {

double Factor::at(const Assignment& a) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    auto value = a.get(scope[i]);
    if (!value) throw InvalidArgument("Factor::at: scope variable unbound");
    idx = idx * cards[i] + *value;
  }
  return table[idx];
}

Factor cpt_factor(const BayesNet& net, VarId v, const Assignment& evidence) {
  std::vector<VarId> family = net.parents(v);
  family.push_back(v);

  Factor f;
  for (VarId u : family) {
    if (!evidence.contains(u)) f.scope.push_back(u);
  }
  std::sort(f.scope.begin(), f.scope.end());
  std::size_t size = 1;
  for (VarId u : f.scope) {
    f.cards.push_back(net.variable(u).arity());
    size *= f.cards.back();
  }
  f.table.resize(size);

  Assignment config = evidence;
  std::vector<std::size_t> digits(f.scope.size(), 0);
  for (VarId u : f.scope) config.set(u, 0);
  const CptRows& rows = net.cpt(v);
  for (std::size_t idx = 0; idx < size; ++idx) {
    f.table[idx] = rows[net.row_index(v, config)][*config.get(v)];
    for (std::size_t pos = f.scope.size(); pos-- > 0;) {
      if (++digits[pos] < f.cards[pos]) {
        config.set(f.scope[pos], digits[pos]);
        break;
      }
      digits[pos] = 0;
      config.set(f.scope[pos], 0);
    }
  }
  return f;
}

Factor sum_product(const std::vector<const Factor*>& factors, std::optional<VarId> eliminate) {
  // Union scope, sorted.
  std::vector<VarId> scope;
  std::vector<std::size_t> cards;
  {
    std::vector<std::pair<VarId, std::size_t>> all;
    for (const Factor* f : factors) {
      for (std::size_t i = 0; i < f->scope.size(); ++i) all.emplace_back(f->scope[i], f->cards[i]);
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (const auto& [v, k] : all) {
      scope.push_back(v);
      cards.push_back(k);
    }
  }
  const std::size_t width = scope.size();

  // Per-factor stride for each union position (zero when absent).
  std::vector<std::vector<std::size_t>> strides(factors.size(), std::vector<std::size_t>(width, 0));
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const Factor& f = *factors[k];
    std::size_t stride = 1;
    for (std::size_t i = f.scope.size(); i-- > 0;) {
      auto pos = std::lower_bound(scope.begin(), scope.end(), f.scope[i]) - scope.begin();
      strides[k][pos] = stride;
      stride *= f.cards[i];
    }
  }

  Factor out;
  std::vector<std::size_t> out_stride(width, 0);
  {
    std::size_t stride = 1;
    for (std::size_t i = width; i-- > 0;) {
      if (eliminate && scope[i] == *eliminate) continue;
      out_stride[i] = stride;
      stride *= cards[i];
    }
    for (std::size_t i = 0; i < width; ++i) {
      if (eliminate && scope[i] == *eliminate) continue;
      out.scope.push_back(scope[i]);
      out.cards.push_back(cards[i]);
    }
    out.table.assign(stride, 0.0);
  }

  std::size_t total = 1;
  for (std::size_t k : cards) total *= k;

  std::vector<std::size_t> digits(width, 0);
  std::vector<std::size_t> idx(factors.size(), 0);
  std::size_t out_idx = 0;
  for (std::size_t it = 0; it < total; ++it) {
    double prod = 1.0;
    for (std::size_t k = 0; k < factors.size(); ++k) prod *= factors[k]->table[idx[k]];
    out.table[out_idx] += prod;
    for (std::size_t pos = width; pos-- > 0;) {
      ++digits[pos];
      out_idx += out_stride[pos];
      for (std::size_t k = 0; k < factors.size(); ++k) idx[k] += strides[k][pos];
      if (digits[pos] < cards[pos]) break;
      out_idx -= out_stride[pos] * cards[pos];
      for (std::size_t k = 0; k < factors.size(); ++k) idx[k] -= strides[k][pos] * cards[pos];
      digits[pos] = 0;
    }
  }
  return out;
}

namespace {

// Variable elimination over the ancestral subgraph of evidence ∪ keep,
// eliminating every unbound variable outside keep.
Factor eliminate(const BayesNet& net, const Assignment& evidence, const std::vector<VarId>& keep) {
  std::vector<VarId> roots = evidence.variables();
  roots.insert(roots.end(), keep.begin(), keep.end());
  const std::vector<bool> relevant = ancestral_closure(net, roots);

  std::list<Factor> pool;
  std::vector<bool> kept(net.size(), false);
  for (VarId k : keep) kept[k] = true;
  std::vector<VarId> free_vars;
  for (VarId v = 0; v < net.size(); ++v) {
    if (!relevant[v]) continue;
    pool.push_back(cpt_factor(net, v, evidence));
    if (!evidence.contains(v) && !kept[v]) free_vars.push_back(v);
  }

  while (!free_vars.empty()) {
    // Greedy min-degree: fewest distinct neighbours in the current interaction graph.
    std::size_t best = 0;
    std::size_t best_degree = SIZE_MAX;
    for (std::size_t i = 0; i < free_vars.size(); ++i) {
      std::set<VarId> nbrs;
      for (const Factor& f : pool) {
        if (std::binary_search(f.scope.begin(), f.scope.end(), free_vars[i])) {
          nbrs.insert(f.scope.begin(), f.scope.end());
        }
      }
      if (nbrs.size() < best_degree) {
        best_degree = nbrs.size();
        best = i;
      }
    }
    const VarId var = free_vars[best];
    free_vars.erase(free_vars.begin() + static_cast<std::ptrdiff_t>(best));

    std::vector<const Factor*> touching;
    for (const Factor& f : pool) {
      if (std::binary_search(f.scope.begin(), f.scope.end(), var)) touching.push_back(&f);
    }
    Factor merged = sum_product(touching, var);
    pool.remove_if([var](const Factor& f) {
      return std::binary_search(f.scope.begin(), f.scope.end(), var);
    });
    pool.push_back(std::move(merged));
  }

  std::vector<const Factor*> rest;
  for (const Factor& f : pool) rest.push_back(&f);
  if (rest.empty()) {
    Factor one;
    one.table = {1.0};
    return one;
  }
  return sum_product(rest, std::nullopt);
}

}  // namespace

double marginal(const BayesNet& net, const Assignment& a) {
  net.check(a);
  if (a.empty()) return 1.0;
  return eliminate(net, a, {}).table[0];
}

Factor marginal_factor(const BayesNet& net, const Assignment& evidence,
                       const std::vector<VarId>& keep) {
  net.check(evidence);
  std::vector<VarId> free_keep;
  for (VarId k : keep) {
    if (k >= net.size()) throw InvalidArgument("marginal_factor: unknown variable");
    if (!evidence.contains(k)) free_keep.push_back(k);
  }
  std::sort(free_keep.begin(), free_keep.end());
  free_keep.erase(std::unique(free_keep.begin(), free_keep.end()), free_keep.end());
  return eliminate(net, evidence, free_keep);
}

double cond_prob(const BayesNet& net, const Assignment& x, const Assignment& y) {
  net.check(x);
  net.check(y);
  const double evidence = marginal(net, y);
  if (!(evidence > 0.0)) {
    throw ZeroEvidence("cond_prob: evidence {" + net.describe(y) + "} has probability zero");
  }
  auto joint = Assignment::merge(x, y);
  if (!joint) return 0.0;
  return marginal(net, *joint) / evidence;
}

double binary_equivalent_size(const BayesNet& net) {
  double bits = 0.0;
  for (VarId v = 0; v < net.size(); ++v) bits += std::log2(static_cast<double>(net.variable(v).arity()));
  return bits;
}

double enumerate_marginal(const BayesNet& net, const Assignment& a, double cap_bits) {
  net.check(a);
  if (binary_equivalent_size(net) > cap_bits + 1e-9) {
    throw CapExceeded("enumerate_marginal: net exceeds the enumeration cap");
  }
  std::vector<VarId> free_vars;
  for (VarId v = 0; v < net.size(); ++v) {
    if (!a.contains(v)) free_vars.push_back(v);
  }
  std::vector<ValueId> values(net.size(), 0);
  for (const auto& [var, value] : a) values[var] = value;

  std::vector<std::vector<std::size_t>> row_stride(net.size());
  for (VarId v = 0; v < net.size(); ++v) {
    const auto& ps = net.parents(v);
    row_stride[v].resize(ps.size());
    std::size_t stride = 1;
    for (std::size_t i = ps.size(); i-- > 0;) {
      row_stride[v][i] = stride;
      stride *= net.variable(ps[i]).arity();
    }
  }

  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (VarId v = 0; v < net.size(); ++v) {
      std::size_t row = 0;
      const auto& ps = net.parents(v);
      for (std::size_t i = 0; i < ps.size(); ++i) row += values[ps[i]] * row_stride[v][i];
      p *= net.cpt(v)[row][values[v]];
    }
    total += p;

    bool done = true;
    for (std::size_t pos = free_vars.size(); pos-- > 0;) {
      const VarId v = free_vars[pos];
      if (++values[v] < net.variable(v).arity()) {
        done = false;
        break;
      }
      values[v] = 0;
    }
    if (done) return total;
  }
}

std::vector<double> mb_posterior(const BayesNet& net, VarId v, const Assignment& y) {
  if (v >= net.size()) throw InvalidArgument("mb_query: unknown variable");
  net.check(y);
  if (y.contains(v)) throw InvalidArgument("mb_query: target variable is bound in the evidence");
  for (VarId m : markov_blanket(net, v)) {
    if (!y.contains(m)) {
      throw InvalidArgument("mb_query: evidence does not cover Markov blanket member " +
                            net.variable(m).name);
    }
  }
  const std::size_t k = net.variable(v).arity();
  std::vector<double> scores(k, 0.0);
  Assignment local = y;
  double total = 0.0;
  for (ValueId value = 0; value < k; ++value) {
    local.set(v, value);
    double s = net.cpt(v)[net.row_index(v, local)][value];
    for (VarId c : net.children(v)) {
      s *= net.cpt(c)[net.row_index(c, local)][*local.get(c)];
    }
    scores[value] = s;
    total += s;
  }
  if (!(total > 0.0)) {
    throw ZeroEvidence("mb_query: every value of " + net.variable(v).name + " has zero score");
  }
  for (double& s : scores) s /= total;
  return scores;
}

double mb_query(const BayesNet& net, VarId v, ValueId v_val, const Assignment& y) {
  if (v < net.size() && v_val >= net.variable(v).arity()) {
    throw InvalidArgument("mb_query: value out of range");
  }
  return mb_posterior(net, v, y)[v_val];
}

double answer(const BayesNet& net, const StatQuery& q) {
  if (is_markov_blanket_query(net, q)) {
    // The local scores cannot see zero mass on the evidence itself.
    if (!net.strictly_positive() && !(marginal(net, q.evidence) > 0.0)) {
      throw ZeroEvidence("answer: evidence {" + net.describe(q.evidence) + "} has probability zero");
    }
    const auto& [var, value] = *q.target.begin();
    return mb_query(net, var, value, q.evidence);
  }
  return cond_prob(net, q.target, q.evidence);
}

}  // namespace qbn
