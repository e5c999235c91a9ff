#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbn/network.hpp"
#include "qbn/rng.hpp"

namespace qbn {

// Complete event tuples over a fixed, ordered variable list. Column i holds
// the value index of variables[i]; datasets produced from a net use the
// net's variable order.
class Dataset {
 public:
  struct Provenance {
    std::string source;
    std::uint64_t seed = 0;
  };

  Dataset() = default;
  explicit Dataset(std::vector<Variable> variables) : variables_(std::move(variables)) {}

  const std::vector<Variable>& variables() const { return variables_; }
  std::size_t width() const { return variables_.size(); }
  std::size_t size() const { return width() == 0 ? 0 : cells_.size() / width(); }
  bool empty() const { return size() == 0; }

  std::span<const ValueId> row(std::size_t i) const {
    return {cells_.data() + i * width(), width()};
  }
  // Appends a complete, domain-valid tuple.
  void push_back(std::span<const ValueId> tuple);
  void reserve(std::size_t rows) { cells_.reserve(rows * width()); }

  bool matches(std::size_t i, const Assignment& a) const;
  std::size_t count(const Assignment& a) const;

  const std::optional<Provenance>& provenance() const { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = std::move(p); }

 private:
  std::vector<Variable> variables_;
  std::vector<ValueId> cells_;
  std::optional<Provenance> provenance_;
};

// Ancestral sampler: draws one complete tuple per call, sampling variables
// in topological order from their CPT rows.
class ForwardSampler {
 public:
  explicit ForwardSampler(const BayesNet& net);
  void draw(Rng& rng, std::span<ValueId> out) const;

 private:
  const BayesNet* net_;
  std::vector<VarId> order_;
};

// n i.i.d. tuples from net, deterministic given seed.
Dataset forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed);

inline constexpr std::size_t kDefaultDrawCap = 10'000'000;

// Draws tuples until every evidence pattern has been matched by at least
// per_evidence tuples and returns everything drawn. Throws CapExceeded if
// cap draws happen first.
Dataset collect_until_matched(const BayesNet& source, const std::vector<Assignment>& evidences,
                              std::size_t per_evidence, std::size_t cap, std::uint64_t seed);

// #(x ∧ y) / #(y). Throws UnmatchedEvidence when no tuple matches y.
double cond_freq(const Dataset& data, const Assignment& x, const Assignment& y);

}  // namespace qbn
