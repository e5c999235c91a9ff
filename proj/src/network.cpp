#include "qbn/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "qbn/errors.hpp"

namespace qbn {

std::optional<ValueId> Variable::value_index(const std::string& label) const {
  auto it = std::find(domain.begin(), domain.end(), label);
  if (it == domain.end()) return std::nullopt;
  return static_cast<ValueId>(it - domain.begin());
}

// ---------------------------------------------------------------------------
// Assignment

Assignment::Assignment(std::initializer_list<Binding> bindings) {
  for (const auto& [var, value] : bindings) set(var, value);
}

Assignment& Assignment::set(VarId var, ValueId value) {
  auto it = std::lower_bound(bindings_.begin(), bindings_.end(), var,
                             [](const Binding& b, VarId v) { return b.first < v; });
  if (it != bindings_.end() && it->first == var) {
    it->second = value;
  } else {
    bindings_.insert(it, {var, value});
  }
  return *this;
}

Assignment& Assignment::erase(VarId var) {
  std::erase_if(bindings_, [var](const Binding& b) { return b.first == var; });
  return *this;
}

std::optional<ValueId> Assignment::get(VarId var) const {
  auto it = std::lower_bound(bindings_.begin(), bindings_.end(), var,
                             [](const Binding& b, VarId v) { return b.first < v; });
  if (it != bindings_.end() && it->first == var) return it->second;
  return std::nullopt;
}

std::vector<VarId> Assignment::variables() const {
  std::vector<VarId> out;
  out.reserve(bindings_.size());
  for (const auto& b : bindings_) out.push_back(b.first);
  return out;
}

bool Assignment::consistent_with(const Assignment& other) const {
  for (const auto& [var, value] : bindings_) {
    auto v = other.get(var);
    if (v && *v != value) return false;
  }
  return true;
}

bool Assignment::shares_variable_with(const Assignment& other) const {
  for (const auto& b : bindings_) {
    if (other.contains(b.first)) return true;
  }
  return false;
}

std::optional<Assignment> Assignment::merge(const Assignment& a, const Assignment& b) {
  if (!a.consistent_with(b)) return std::nullopt;
  Assignment out = a;
  for (const auto& [var, value] : b) out.set(var, value);
  return out;
}

// ---------------------------------------------------------------------------
// Structure / BayesNet

std::optional<VarId> Structure::find(const std::string& name) const {
  for (VarId v = 0; v < variables.size(); ++v) {
    if (variables[v].name == name) return v;
  }
  return std::nullopt;
}

namespace {

std::optional<std::vector<VarId>> kahn_order(const Structure& s,
                                             const std::vector<std::vector<VarId>>& children) {
  const std::size_t n = s.size();
  std::vector<std::size_t> indegree(n, 0);
  for (VarId v = 0; v < n && v < s.parents.size(); ++v) {
    for (VarId p : s.parents[v]) {
      if (p < n) ++indegree[v];
    }
  }
  std::deque<VarId> ready;
  for (VarId v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::vector<VarId> order;
  order.reserve(n);
  while (!ready.empty()) {
    VarId v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (VarId c : children[v]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

}  // namespace

BayesNet::BayesNet(Structure structure, std::vector<CptRows> cpts)
    : structure_(std::move(structure)), cpts_(std::move(cpts)) {
  const std::size_t n = structure_.size();
  structure_.parents.resize(n);
  cpts_.resize(n);
  children_.assign(n, {});
  for (VarId v = 0; v < n; ++v) {
    for (VarId p : structure_.parents[v]) {
      if (p < n) children_[p].push_back(v);
    }
  }
  topo_ = kahn_order(structure_, children_);
  for (const auto& rows : cpts_) {
    for (const auto& row : rows) {
      for (double e : row) positive_ = positive_ && e > 0.0;
    }
  }
}

BayesNet BayesNet::uniform(Structure structure) {
  std::vector<CptRows> cpts;
  cpts.reserve(structure.size());
  for (VarId v = 0; v < structure.size(); ++v) {
    std::size_t rows = 1;
    for (VarId p : structure.parents[v]) rows *= structure.variables[p].arity();
    const std::size_t k = structure.variables[v].arity();
    cpts.emplace_back(rows, std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }
  return BayesNet(std::move(structure), std::move(cpts));
}

BayesNet BayesNet::with_cpts(std::vector<CptRows> cpts) const {
  return BayesNet(structure_, std::move(cpts));
}

std::size_t BayesNet::row_count(VarId v) const {
  std::size_t rows = 1;
  for (VarId p : structure_.parents[v]) {
    if (p < size()) rows *= structure_.variables[p].arity();
  }
  return rows;
}

std::size_t BayesNet::row_index(VarId v, const Assignment& a) const {
  std::size_t row = 0;
  for (VarId p : structure_.parents[v]) {
    auto value = a.get(p);
    if (!value) {
      throw InvalidArgument("row_index: parent " + variable(p).name + " of " + variable(v).name +
                            " is unbound");
    }
    row = row * variable(p).arity() + *value;
  }
  return row;
}

std::vector<ValueId> BayesNet::row_parent_values(VarId v, std::size_t row) const {
  const auto& ps = structure_.parents[v];
  std::vector<ValueId> values(ps.size());
  for (std::size_t i = ps.size(); i-- > 0;) {
    const std::size_t k = variable(ps[i]).arity();
    values[i] = row % k;
    row /= k;
  }
  return values;
}

VarId BayesNet::index_of(const std::string& name) const {
  auto v = find(name);
  if (!v) throw InvalidArgument("unknown variable '" + name + "'");
  return *v;
}

ValueId BayesNet::value_of(VarId v, const std::string& label) const {
  auto value = variable(v).value_index(label);
  if (!value) {
    throw InvalidArgument("value '" + label + "' not in the domain of " + variable(v).name);
  }
  return *value;
}

Assignment BayesNet::assign(
    std::initializer_list<std::pair<std::string, std::string>> bindings) const {
  Assignment a;
  for (const auto& [name, label] : bindings) {
    VarId v = index_of(name);
    a.set(v, value_of(v, label));
  }
  return a;
}

Assignment BayesNet::assign(const std::map<std::string, std::string>& bindings) const {
  Assignment a;
  for (const auto& [name, label] : bindings) {
    VarId v = index_of(name);
    a.set(v, value_of(v, label));
  }
  return a;
}

std::string BayesNet::describe(const Assignment& a) const {
  std::string out;
  for (const auto& [var, value] : a) {
    if (!out.empty()) out += ',';
    out += variable(var).name;
    out += '=';
    out += variable(var).domain[value];
  }
  return out;
}

void BayesNet::check(const Assignment& a) const {
  for (const auto& [var, value] : a) {
    if (var >= size()) throw InvalidArgument("assignment references unknown variable id");
    if (value >= variable(var).arity()) {
      throw InvalidArgument("assignment value out of range for " + variable(var).name);
    }
  }
}

// ---------------------------------------------------------------------------
// validate

std::vector<Violation> validate(const BayesNet& net, const ValidateOptions& opts) {
  std::vector<Violation> out;
  const Structure& s = net.structure();
  const std::size_t n = s.size();

  std::set<std::string> names;
  for (VarId v = 0; v < n; ++v) {
    const Variable& var = s.variables[v];
    const std::string where = "variable '" + var.name + "'";
    if (var.name.empty()) out.push_back({where, "empty variable name"});
    if (!names.insert(var.name).second) out.push_back({where, "duplicate variable name"});
    if (var.domain.size() < 2) out.push_back({where, "domain must have at least 2 values"});
    std::set<std::string> labels(var.domain.begin(), var.domain.end());
    if (labels.size() != var.domain.size()) out.push_back({where, "duplicate value labels"});

    std::set<VarId> seen;
    for (VarId p : s.parents[v]) {
      if (p >= n) {
        out.push_back({where, "parent references a nonexistent node"});
      } else if (!seen.insert(p).second) {
        out.push_back({where, "duplicate parent '" + s.variables[p].name + "'"});
      }
    }
  }

  if (!net.topological_order()) {
    // Report once; name the nodes that never became ready.
    std::vector<bool> placed(n, false);
    std::vector<std::size_t> indegree(n, 0);
    for (VarId v = 0; v < n; ++v)
      for (VarId p : s.parents[v])
        if (p < n) ++indegree[v];
    std::deque<VarId> ready;
    for (VarId v = 0; v < n; ++v)
      if (indegree[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
      VarId v = ready.front();
      ready.pop_front();
      placed[v] = true;
      for (VarId c : net.children(v))
        if (--indegree[c] == 0) ready.push_back(c);
    }
    std::string involved;
    for (VarId v = 0; v < n; ++v) {
      if (placed[v]) continue;
      if (!involved.empty()) involved += ", ";
      involved += s.variables[v].name;
    }
    out.push_back({"graph", "cycle detected among {" + involved + "}"});
  }

  for (VarId v = 0; v < n; ++v) {
    const Variable& var = s.variables[v];
    const CptRows& rows = net.cpt(v);
    const std::string where = "cpt '" + var.name + "'";
    const std::size_t expected_rows = net.row_count(v);
    if (rows.size() != expected_rows) {
      std::ostringstream msg;
      msg << "expected " << expected_rows << " rows, found " << rows.size();
      out.push_back({where, msg.str()});
      continue;
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& row = rows[r];
      const std::string at = where + " row " + std::to_string(r);
      if (row.size() != var.arity()) {
        std::ostringstream msg;
        msg << "expected " << var.arity() << " entries, found " << row.size();
        out.push_back({at, msg.str()});
        continue;
      }
      double sum = 0.0;
      bool bad_entry = false;
      for (double e : row) {
        if (!std::isfinite(e) || e < 0.0 || e > 1.0) bad_entry = true;
        sum += e;
      }
      if (bad_entry) {
        out.push_back({at, "entry outside [0,1]"});
        continue;
      }
      if (std::abs(sum - 1.0) > opts.row_tolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "row sum " << sum << " != 1";
        out.push_back({at, msg.str()});
      }
      if (opts.clamp) {
        const double lo = *opts.clamp;
        for (double e : row) {
          if (e < lo || e > 1.0 - lo) {
            out.push_back({at, "entry outside the clamped range"});
            break;
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Probability and graph queries

double joint_prob(const BayesNet& net, const Assignment& a) {
  if (a.size() != net.size()) throw InvalidArgument("joint_prob: assignment is not complete");
  net.check(a);
  double p = 1.0;
  for (VarId v = 0; v < net.size(); ++v) {
    p *= net.cpt(v)[net.row_index(v, a)][*a.get(v)];
  }
  return p;
}

std::vector<VarId> markov_blanket(const BayesNet& net, VarId v) {
  if (v >= net.size()) throw InvalidArgument("markov_blanket: unknown variable");
  std::set<VarId> mb(net.parents(v).begin(), net.parents(v).end());
  for (VarId c : net.children(v)) {
    mb.insert(c);
    for (VarId p : net.parents(c)) mb.insert(p);
  }
  mb.erase(v);
  return {mb.begin(), mb.end()};
}

std::vector<bool> ancestral_closure(const BayesNet& net, const std::vector<VarId>& nodes) {
  std::vector<bool> in(net.size(), false);
  std::vector<VarId> stack(nodes.begin(), nodes.end());
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    if (in[v]) continue;
    in[v] = true;
    for (VarId p : net.parents(v)) stack.push_back(p);
  }
  return in;
}

namespace {

enum class Direction { Up, Down };  // Up: arrived from a child. Down: from a parent.

// Nodes reachable along active trails from the given start states given the
// observed set (Bayes-ball / Koller-Friedman reachability).
std::vector<bool> active_reachable(const BayesNet& net,
                                   const std::vector<std::pair<VarId, Direction>>& starts,
                                   const std::vector<VarId>& observed_nodes) {
  const std::size_t n = net.size();
  std::vector<bool> observed(n, false);
  for (VarId z : observed_nodes) observed[z] = true;
  const std::vector<bool> anc = ancestral_closure(net, observed_nodes);

  std::vector<bool> reachable(n, false);
  std::vector<bool> seen_up(n, false), seen_down(n, false);
  std::vector<std::pair<VarId, Direction>> stack(starts.begin(), starts.end());
  while (!stack.empty()) {
    auto [y, dir] = stack.back();
    stack.pop_back();
    auto& seen = dir == Direction::Up ? seen_up : seen_down;
    if (seen[y]) continue;
    seen[y] = true;
    if (!observed[y]) reachable[y] = true;
    if (dir == Direction::Up) {
      if (observed[y]) continue;
      for (VarId p : net.parents(y)) stack.emplace_back(p, Direction::Up);
      for (VarId c : net.children(y)) stack.emplace_back(c, Direction::Down);
    } else {
      if (!observed[y]) {
        for (VarId c : net.children(y)) stack.emplace_back(c, Direction::Down);
      }
      if (anc[y]) {
        for (VarId p : net.parents(y)) stack.emplace_back(p, Direction::Up);
      }
    }
  }
  return reachable;
}

}  // namespace

bool d_separated(const BayesNet& net, const std::vector<VarId>& xs, const std::vector<VarId>& ys,
                 const std::vector<VarId>& zs) {
  const std::size_t n = net.size();
  std::vector<int> owner(n, -1);
  auto claim = [&](const std::vector<VarId>& set, int id) {
    for (VarId v : set) {
      if (v >= n) throw InvalidArgument("d_separated: unknown variable");
      if (owner[v] != -1 && owner[v] != id) {
        throw InvalidArgument("d_separated: sets overlap on " + net.variable(v).name);
      }
      owner[v] = id;
    }
  };
  claim(xs, 0);
  claim(ys, 1);
  claim(zs, 2);

  std::vector<std::pair<VarId, Direction>> starts;
  for (VarId x : xs) starts.emplace_back(x, Direction::Up);
  const auto reach = active_reachable(net, starts, zs);
  return std::none_of(ys.begin(), ys.end(), [&](VarId y) { return reach[y]; });
}

bool cpt_influences(const BayesNet& net, VarId v, const std::vector<VarId>& targets,
                    const std::vector<VarId>& evidence) {
  // Entering v from a fresh parent is the Down state at v.
  const auto reach = active_reachable(net, {{v, Direction::Down}}, evidence);
  return std::any_of(targets.begin(), targets.end(), [&](VarId t) { return reach[t]; });
}

// ---------------------------------------------------------------------------
// EntryIndex

EntryIndex::EntryIndex(const BayesNet& net) {
  const std::size_t n = net.size();
  offsets_.resize(n);
  arity_.resize(n);
  rows_.resize(n);
  for (VarId v = 0; v < n; ++v) {
    offsets_[v] = total_;
    arity_[v] = net.variable(v).arity();
    rows_[v] = net.row_count(v);
    total_ += arity_[v] * rows_[v];
  }
}

std::size_t EntryIndex::flat(const EntryId& e) const {
  return offsets_[e.var] + e.row * arity_[e.var] + e.value;
}

EntryId EntryIndex::id(std::size_t flat) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
  // Variables with zero entries cannot occur (arity >= 2, rows >= 1).
  const VarId v = static_cast<VarId>((it - offsets_.begin()) - 1);
  const std::size_t local = flat - offsets_[v];
  return {v, local / arity_[v], local % arity_[v]};
}

}  // namespace qbn
