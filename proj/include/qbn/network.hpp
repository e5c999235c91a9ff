#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qbn {

using VarId = std::size_t;
using ValueId = std::size_t;

struct Variable {
  std::string name;
  std::vector<std::string> domain;

  std::size_t arity() const { return domain.size(); }
  std::optional<ValueId> value_index(const std::string& label) const;
};

// Partial assignment of values to variables, kept sorted by variable id.
class Assignment {
 public:
  using Binding = std::pair<VarId, ValueId>;

  Assignment() = default;
  Assignment(std::initializer_list<Binding> bindings);

  // Binds var, replacing any previous value.
  Assignment& set(VarId var, ValueId value);
  Assignment& erase(VarId var);
  std::optional<ValueId> get(VarId var) const;
  bool contains(VarId var) const { return get(var).has_value(); }

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  auto begin() const { return bindings_.begin(); }
  auto end() const { return bindings_.end(); }
  std::vector<VarId> variables() const;

  // True when every variable bound in both assignments has the same value.
  bool consistent_with(const Assignment& other) const;
  bool shares_variable_with(const Assignment& other) const;
  // Union of two assignments; nullopt when they bind a variable differently.
  static std::optional<Assignment> merge(const Assignment& a, const Assignment& b);

  friend bool operator==(const Assignment&, const Assignment&) = default;
  friend auto operator<=>(const Assignment&, const Assignment&) = default;

 private:
  std::vector<Binding> bindings_;
};

// Variables plus the DAG over them. parents[v] lists v's parents in declared
// order; that order fixes the CPT row layout.
struct Structure {
  std::vector<Variable> variables;
  std::vector<std::vector<VarId>> parents;

  std::size_t size() const { return variables.size(); }
  std::optional<VarId> find(const std::string& name) const;
};

// CPT rows for one variable: rows[r][q] = e_{q|r}. Rows are indexed by the
// parent configuration with parents in declared order and the LAST parent
// varying fastest.
using CptRows = std::vector<std::vector<double>>;

// Identifies one CPT entry e_{value | row} of variable var.
struct EntryId {
  VarId var = 0;
  std::size_t row = 0;
  ValueId value = 0;

  friend bool operator==(const EntryId&, const EntryId&) = default;
  friend auto operator<=>(const EntryId&, const EntryId&) = default;
};

// A discrete Bayesian network. Construction performs no validation so that
// malformed nets can be inspected by validate(); every other operation
// assumes a net for which validate() returns no violations.
class BayesNet {
 public:
  BayesNet(Structure structure, std::vector<CptRows> cpts);

  // Net over the structure with every row uniform.
  static BayesNet uniform(Structure structure);

  const Structure& structure() const { return structure_; }
  std::size_t size() const { return structure_.size(); }
  const Variable& variable(VarId v) const { return structure_.variables[v]; }
  const std::vector<VarId>& parents(VarId v) const { return structure_.parents[v]; }
  const std::vector<VarId>& children(VarId v) const { return children_[v]; }
  const CptRows& cpt(VarId v) const { return cpts_[v]; }
  const std::vector<CptRows>& cpts() const { return cpts_; }
  double entry(const EntryId& e) const { return cpts_[e.var][e.row][e.value]; }

  // Every CPT entry is > 0, so every partial assignment has positive mass.
  bool strictly_positive() const { return positive_; }

  // Copy of this net with new CPTs.
  BayesNet with_cpts(std::vector<CptRows> cpts) const;

  // Product of parent arities.
  std::size_t row_count(VarId v) const;
  // Row selected by the parent values in a (all parents must be bound).
  std::size_t row_index(VarId v, const Assignment& a) const;
  // Parent values of a given row, in declared parent order.
  std::vector<ValueId> row_parent_values(VarId v, std::size_t row) const;

  // Topological order, or nullopt if the graph has a cycle.
  const std::optional<std::vector<VarId>>& topological_order() const { return topo_; }

  std::optional<VarId> find(const std::string& name) const { return structure_.find(name); }
  // Throws InvalidArgument for unknown names.
  VarId index_of(const std::string& name) const;
  ValueId value_of(VarId v, const std::string& label) const;

  // Builds an assignment from (variable name, value label) pairs.
  Assignment assign(std::initializer_list<std::pair<std::string, std::string>> bindings) const;
  Assignment assign(const std::map<std::string, std::string>& bindings) const;
  // "A=1,X=0"
  std::string describe(const Assignment& a) const;
  // Throws InvalidArgument unless every binding is a known variable/value.
  void check(const Assignment& a) const;

 private:
  Structure structure_;
  std::vector<CptRows> cpts_;
  std::vector<std::vector<VarId>> children_;
  std::optional<std::vector<VarId>> topo_;
  bool positive_ = true;
};

struct Violation {
  std::string location;
  std::string message;
};

struct ValidateOptions {
  double row_tolerance = 1e-9;
  // When set, every entry must lie in [clamp, 1 - clamp].
  std::optional<double> clamp;
};

// Empty iff all structural and numerical invariants of the net hold.
std::vector<Violation> validate(const BayesNet& net, const ValidateOptions& opts = {});

// Product of the matching CPT entries; a must bind every variable.
double joint_prob(const BayesNet& net, const Assignment& a);

// Parents, children and the children's other parents of v, sorted.
std::vector<VarId> markov_blanket(const BayesNet& net, VarId v);

// Ancestors of the given nodes, including the nodes themselves; indicator vector.
std::vector<bool> ancestral_closure(const BayesNet& net, const std::vector<VarId>& nodes);

// d-separation of xs and ys given zs. The three sets must be pairwise
// disjoint and reference existing variables.
bool d_separated(const BayesNet& net, const std::vector<VarId>& xs, const std::vector<VarId>& ys,
                 const std::vector<VarId>& zs);

// True when the CPT of v can influence B(targets | evidence): a fresh root
// parent attached to v is d-connected to some target given the evidence.
// When false, every entry of v's CPT has zero effect on that conditional.
bool cpt_influences(const BayesNet& net, VarId v, const std::vector<VarId>& targets,
                    const std::vector<VarId>& evidence);

// Flat numbering of all CPT entries: variables in id order, then rows, then values.
class EntryIndex {
 public:
  explicit EntryIndex(const BayesNet& net);

  std::size_t size() const { return total_; }
  std::size_t flat(const EntryId& e) const;
  EntryId id(std::size_t flat) const;
  std::size_t offset(VarId v) const { return offsets_[v]; }
  std::size_t arity(VarId v) const { return arity_[v]; }
  std::size_t rows(VarId v) const { return rows_[v]; }
  std::size_t variables() const { return arity_.size(); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> arity_;
  std::vector<std::size_t> rows_;
  std::size_t total_ = 0;
};

}  // namespace qbn
