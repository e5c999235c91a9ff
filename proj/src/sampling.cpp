#include "qbn/sampling.hpp"

#include "qbn/errors.hpp"
#include "qbn/rng.hpp"

namespace qbn {

void Dataset::push_back(std::span<const ValueId> tuple) {
  if (tuple.size() != width()) throw InvalidArgument("dataset tuple has the wrong width");
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (tuple[i] >= variables_[i].arity()) {
      throw InvalidArgument("dataset value out of range for " + variables_[i].name);
    }
  }
  cells_.insert(cells_.end(), tuple.begin(), tuple.end());
}

bool Dataset::matches(std::size_t i, const Assignment& a) const {
  const auto tuple = row(i);
  for (const auto& [var, value] : a) {
    if (var >= width() || tuple[var] != value) return false;
  }
  return true;
}

std::size_t Dataset::count(const Assignment& a) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i) n += matches(i, a) ? 1 : 0;
  return n;
}

ForwardSampler::ForwardSampler(const BayesNet& net) : net_(&net) {
  const auto& topo = net.topological_order();
  if (!topo) throw InvalidArgument("cannot sample from a cyclic graph");
  order_ = *topo;
}

void ForwardSampler::draw(Rng& rng, std::span<ValueId> out) const {
  for (VarId v : order_) {
    std::size_t row = 0;
    for (VarId p : net_->parents(v)) row = row * net_->variable(p).arity() + out[p];
    out[v] = rng.categorical(net_->cpt(v)[row]);
  }
}

namespace {

Dataset empty_like(const BayesNet& net, std::uint64_t seed, const char* source) {
  Dataset data(net.structure().variables);
  data.set_provenance({source, seed});
  return data;
}

}  // namespace

Dataset forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed) {
  ForwardSampler sampler(net);
  Rng rng(seed);
  Dataset data = empty_like(net, seed, "forward_sample");
  data.reserve(n);
  std::vector<ValueId> tuple(net.size());
  for (std::size_t i = 0; i < n; ++i) {
    sampler.draw(rng, tuple);
    data.push_back(tuple);
  }
  return data;
}

Dataset collect_until_matched(const BayesNet& source, const std::vector<Assignment>& evidences,
                              std::size_t per_evidence, std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw InvalidArgument("collect_until_matched: cap must be positive");
  for (const auto& y : evidences) source.check(y);

  ForwardSampler sampler(source);
  Rng rng(seed);
  Dataset data = empty_like(source, seed, "collect_until_matched");
  std::vector<std::size_t> matched(evidences.size(), 0);
  std::size_t unsatisfied = 0;
  for (std::size_t i = 0; i < evidences.size(); ++i) unsatisfied += per_evidence > 0 ? 1 : 0;

  std::vector<ValueId> tuple(source.size());
  std::size_t draws = 0;
  while (unsatisfied > 0) {
    if (draws == cap) {
      throw CapExceeded("collect_until_matched: " + std::to_string(cap) +
                        " draws without matching every evidence pattern");
    }
    sampler.draw(rng, tuple);
    ++draws;
    data.push_back(tuple);
    const std::size_t last = data.size() - 1;
    for (std::size_t e = 0; e < evidences.size(); ++e) {
      if (matched[e] < per_evidence && data.matches(last, evidences[e])) {
        if (++matched[e] == per_evidence) --unsatisfied;
      }
    }
  }
  return data;
}

double cond_freq(const Dataset& data, const Assignment& x, const Assignment& y) {
  std::size_t evidence = 0;
  std::size_t joint = 0;
  const bool consistent = x.consistent_with(y);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.matches(i, y)) continue;
    ++evidence;
    if (consistent && data.matches(i, x)) ++joint;
  }
  if (evidence == 0) throw UnmatchedEvidence("cond_freq: no tuple matches the evidence", {0});
  return static_cast<double>(joint) / static_cast<double>(evidence);
}

}  // namespace qbn
