#include "qbn/learning.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

#include "qbn/bounds.hpp"
#include "qbn/errors.hpp"
#include "qbn/inference.hpp"

namespace qbn {

BayesNet ofe(const Structure& structure, const Dataset& data, double alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument("ofe: smoothing must be non-negative");
  if (data.width() != structure.size()) {
    throw InvalidArgument("ofe: dataset columns do not match the structure");
  }
  for (VarId v = 0; v < structure.size(); ++v) {
    if (data.variables()[v].name != structure.variables[v].name ||
        data.variables()[v].arity() != structure.variables[v].arity()) {
      throw InvalidArgument("ofe: dataset column " + std::to_string(v) +
                            " does not match variable " + structure.variables[v].name);
    }
  }
  BayesNet shape = BayesNet::uniform(structure);
  std::vector<CptRows> counts = shape.cpts();
  for (auto& rows : counts)
    for (auto& row : rows) std::fill(row.begin(), row.end(), 0.0);

  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto tuple = data.row(i);
    for (VarId v = 0; v < structure.size(); ++v) {
      std::size_t row = 0;
      for (VarId p : structure.parents[v]) row = row * structure.variables[p].arity() + tuple[p];
      counts[v][row][tuple[v]] += 1.0;
    }
  }
  for (VarId v = 0; v < structure.size(); ++v) {
    const double k = static_cast<double>(structure.variables[v].arity());
    for (auto& row : counts[v]) {
      double n = 0.0;
      for (double c : row) n += c;
      const double denom = n + alpha * k;
      for (double& c : row) c = denom > 0.0 ? (c + alpha) / denom : 1.0 / k;
    }
  }
  return shape.with_cpts(std::move(counts));
}

// ---------------------------------------------------------------------------
// Derivatives

namespace {

void check_entry(const BayesNet& b, const EntryId& e) {
  if (e.var >= b.size() || e.row >= b.row_count(e.var) || e.value >= b.variable(e.var).arity()) {
    throw InvalidArgument("entry id out of range");
  }
}

// The event {var = value, parents = row configuration}.
Assignment entry_event(const BayesNet& b, const EntryId& e) {
  Assignment a;
  const auto& ps = b.parents(e.var);
  const auto values = b.row_parent_values(e.var, e.row);
  for (std::size_t i = 0; i < ps.size(); ++i) a.set(ps[i], values[i]);
  a.set(e.var, e.value);
  return a;
}

double positive_entry(const BayesNet& b, const EntryId& e) {
  const double value = b.entry(e);
  if (!(value > 0.0)) {
    throw InvalidArgument("derivative undefined at a zero CPT entry of " + b.variable(e.var).name);
  }
  return value;
}

std::vector<double> normalized_weights(std::size_t n, const std::vector<double>& weights) {
  if (weights.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  if (weights.size() != n) throw InvalidArgument("weight count does not match query count");
  return weights;
}

}  // namespace

double db_dentry(const BayesNet& b, const StatQuery& q, const EntryId& e) {
  check_entry(b, e);
  if (!cpt_influences(b, e.var, q)) return 0.0;
  const double value = positive_entry(b, e);
  const double posterior = cond_prob(b, q.target, q.evidence);
  if (posterior == 0.0) return 0.0;
  const Assignment joint = *Assignment::merge(q.target, q.evidence);
  const Assignment event = entry_event(b, e);
  const double given_both = cond_prob(b, event, joint);
  const double given_evidence = cond_prob(b, event, q.evidence);
  return posterior * (given_both - given_evidence) / value;
}

double derr_dentry(const BayesNet& b, const LabeledQuery& lq, const EntryId& e) {
  const double residual = answer(b, lq.query) - lq.label;
  if (residual == 0.0) return 0.0;
  return 2.0 * residual * db_dentry(b, lq.query, e);
}

double derr_dentry_mb(const BayesNet& b, const LabeledQuery& lq, const EntryId& e) {
  if (!is_markov_blanket_query(b, lq.query)) {
    throw InvalidArgument("derr_dentry_mb: query is not a Markov-blanket query");
  }
  check_entry(b, e);
  const VarId target = lq.query.target.begin()->first;
  const auto& ps = b.parents(e.var);
  const bool family_has_target =
      e.var == target || std::find(ps.begin(), ps.end(), target) != ps.end();
  if (!family_has_target) return 0.0;
  const Assignment joint = *Assignment::merge(lq.query.target, lq.query.evidence);
  if (!entry_event(b, e).consistent_with(joint)) return 0.0;

  const double value = positive_entry(b, e);
  const double p = answer(b, lq.query);
  return 2.0 * (p - lq.label) / value * p * (1.0 - p);
}

namespace {

void accumulate_blanket(const BayesNet& b, const EntryIndex& index, const StatQuery& q,
                        double weight, double label, std::vector<double>& g) {
  const auto& [target, value] = *q.target.begin();
  const std::vector<double> post = mb_posterior(b, target, q.evidence);
  const double p = post[value];
  const double c = 2.0 * weight * (p - label);
  if (c == 0.0) return;

  Assignment local = q.evidence;
  local.set(target, 0);
  const std::size_t own_row = b.row_index(target, local);
  for (ValueId v = 0; v < post.size(); ++v) {
    const EntryId e{target, own_row, v};
    const double indicator = v == value ? 1.0 : 0.0;
    g[index.flat(e)] += c * p * (indicator - post[v]) / positive_entry(b, e);
  }
  for (VarId child : b.children(target)) {
    const ValueId observed = *q.evidence.get(child);
    for (ValueId v = 0; v < post.size(); ++v) {
      local.set(target, v);
      const EntryId e{child, b.row_index(child, local), observed};
      const double indicator = v == value ? 1.0 : 0.0;
      g[index.flat(e)] += c * p * (indicator - post[v]) / positive_entry(b, e);
    }
  }
}

void accumulate_general(const BayesNet& b, const EntryIndex& index, const StatQuery& q,
                        double weight, double label, std::vector<double>& g) {
  const double evidence_mass = marginal(b, q.evidence);
  if (!(evidence_mass > 0.0)) {
    throw ZeroEvidence("grad: query " + describe(b, q) + " has zero-probability evidence");
  }
  const Assignment joint = *Assignment::merge(q.target, q.evidence);
  const double p = marginal(b, joint) / evidence_mass;
  const double c = 2.0 * weight * (p - label);
  if (c == 0.0) return;

  const auto targets = q.target.variables();
  const auto evidence = q.evidence.variables();
  for (VarId u = 0; u < b.size(); ++u) {
    if (!cpt_influences(b, u, targets, evidence)) continue;
    std::vector<VarId> family = b.parents(u);
    family.push_back(u);
    const Factor given_evidence = marginal_factor(b, q.evidence, family);
    const Factor given_joint = marginal_factor(b, joint, family);
    const std::size_t rows = b.row_count(u);
    const std::size_t k = b.variable(u).arity();
    for (std::size_t r = 0; r < rows; ++r) {
      for (ValueId v = 0; v < k; ++v) {
        const EntryId e{u, r, v};
        const Assignment event = entry_event(b, e);
        const double fy = event.consistent_with(q.evidence) ? given_evidence.at(event) : 0.0;
        const double fxy = event.consistent_with(joint) ? given_joint.at(event) : 0.0;
        if (fy == 0.0 && fxy == 0.0) continue;
        // dB(x|y)/de = [B(q,r,x,y) - B(x|y) B(q,r,y)] / (e B(y))
        g[index.flat(e)] += c * (fxy - p * fy) / (positive_entry(b, e) * evidence_mass);
      }
    }
  }
}

}  // namespace

std::vector<double> grad(const BayesNet& b, const std::vector<LabeledQuery>& qs,
                         const std::vector<double>& weights) {
  if (qs.empty()) throw InvalidArgument("grad: empty query list");
  const std::vector<double> w = normalized_weights(qs.size(), weights);
  const EntryIndex index(b);
  std::vector<double> g(index.size(), 0.0);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (is_markov_blanket_query(b, qs[i].query)) {
      accumulate_blanket(b, index, qs[i].query, w[i], qs[i].label, g);
    } else {
      accumulate_general(b, index, qs[i].query, w[i], qs[i].label, g);
    }
  }
  return g;
}

double objective(const BayesNet& b, const std::vector<LabeledQuery>& qs,
                 const std::vector<double>& weights) {
  if (qs.empty()) throw InvalidArgument("objective: empty query list");
  const std::vector<double> w = normalized_weights(qs.size(), weights);
  double total = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const double d = answer(b, qs[i].query) - qs[i].label;
    total += w[i] * d * d;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Parameterization

namespace {

void check_clamp(const Structure& s, double clamp) {
  for (const auto& var : s.variables) {
    if (!(clamp > 0.0) || clamp * static_cast<double>(var.arity()) >= 1.0) {
      throw InvalidArgument("clamp floor too large for variable " + var.name);
    }
  }
}

void softmax(const double* scores, std::size_t k, double* out) {
  double top = scores[0];
  for (std::size_t j = 1; j < k; ++j) top = std::max(top, scores[j]);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = std::exp(scores[j] - top);
    total += out[j];
  }
  for (std::size_t j = 0; j < k; ++j) out[j] /= total;
}

}  // namespace

BayesNet net_from_scores(const Structure& structure, const std::vector<double>& scores,
                         double clamp) {
  check_clamp(structure, clamp);
  BayesNet net = BayesNet::uniform(structure);
  std::vector<CptRows> cpts = net.cpts();
  std::size_t offset = 0;
  for (VarId v = 0; v < structure.size(); ++v) {
    const std::size_t k = structure.variables[v].arity();
    const double scale = 1.0 - static_cast<double>(k) * clamp;
    for (auto& row : cpts[v]) {
      if (offset + k > scores.size()) throw InvalidArgument("score vector too short");
      softmax(scores.data() + offset, k, row.data());
      for (double& e : row) e = std::min(clamp + scale * e, 1.0 - clamp);
      offset += k;
    }
  }
  if (offset != scores.size()) throw InvalidArgument("score vector length mismatch");
  return net.with_cpts(std::move(cpts));
}

std::vector<double> scores_from_net(const BayesNet& net, double clamp) {
  check_clamp(net.structure(), clamp);
  std::vector<double> scores;
  scores.reserve(EntryIndex(net).size());
  for (VarId v = 0; v < net.size(); ++v) {
    const std::size_t k = net.variable(v).arity();
    const double scale = 1.0 - static_cast<double>(k) * clamp;
    for (const auto& row : net.cpt(v)) {
      std::vector<double> s(k);
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        s[j] = std::max(0.0, (row[j] - clamp) / scale);
        total += s[j];
      }
      for (std::size_t j = 0; j < k; ++j) {
        const double share = total > 0.0 ? s[j] / total : 1.0 / static_cast<double>(k);
        scores.push_back(share > 0.0 ? std::clamp(std::log(share), -kScoreBound, kScoreBound)
                                     : -kScoreBound);
      }
    }
  }
  return scores;
}

std::vector<double> score_gradient(const BayesNet& net, const std::vector<double>& scores,
                                   const std::vector<double>& entry_grad, double clamp) {
  const EntryIndex index(net);
  if (scores.size() != index.size() || entry_grad.size() != index.size()) {
    throw InvalidArgument("score_gradient: length mismatch");
  }
  std::vector<double> out(index.size(), 0.0);
  std::vector<double> s;
  for (VarId v = 0; v < net.size(); ++v) {
    const std::size_t k = index.arity(v);
    const double scale = 1.0 - static_cast<double>(k) * clamp;
    s.resize(k);
    for (std::size_t r = 0; r < index.rows(v); ++r) {
      const std::size_t base = index.offset(v) + r * k;
      softmax(scores.data() + base, k, s.data());
      double mean = 0.0;
      for (std::size_t j = 0; j < k; ++j) mean += s[j] * entry_grad[base + j];
      for (std::size_t j = 0; j < k; ++j) {
        out[base + j] = scale * s[j] * (entry_grad[base + j] - mean);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

void FitOptions::validate() const {
  if (!(clamp > 0.0 && clamp < 0.5)) throw InvalidArgument("clamp must lie in (0, 0.5)");
  if (restarts < 1) throw InvalidArgument("restarts must be at least 1");
  if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
  if (!(step > 0.0) || !(max_step >= step)) throw InvalidArgument("invalid step sizes");
  if (max_halvings < 0) throw InvalidArgument("max_halvings must be non-negative");
  if (!(tol >= 0.0)) throw InvalidArgument("tol must be non-negative");
  if (jobs < 1) throw InvalidArgument("jobs must be at least 1");
  if (!(dirichlet_alpha > 0.0)) throw InvalidArgument("dirichlet alpha must be positive");
  if (init == InitKind::Given && !start) throw InvalidArgument("given init needs a start net");
  if (init == InitKind::Ofe && !init_data) throw InvalidArgument("ofe init needs data");
}

namespace {

struct RestartOutcome {
  std::vector<double> scores;
  double err = 0.0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

bool same_shape(const Structure& a, const Structure& b) {
  if (a.size() != b.size() || a.parents != b.parents) return false;
  for (VarId v = 0; v < a.size(); ++v) {
    if (a.variables[v].arity() != b.variables[v].arity()) return false;
  }
  return true;
}

std::vector<double> dirichlet_scores(const Structure& structure, double alpha, Rng& rng) {
  const BayesNet shape = BayesNet::uniform(structure);
  std::vector<double> scores;
  for (VarId v = 0; v < structure.size(); ++v) {
    const std::size_t k = structure.variables[v].arity();
    for (std::size_t r = 0; r < shape.row_count(v); ++r) {
      std::vector<double> draw(k);
      double total = 0.0;
      for (double& d : draw) {
        d = rng.gamma(alpha);
        total += d;
      }
      for (double d : draw) {
        const double share = total > 0.0 ? d / total : 1.0 / static_cast<double>(k);
        scores.push_back(share > 0.0 ? std::clamp(std::log(share), -kScoreBound, kScoreBound)
                                     : -kScoreBound);
      }
    }
  }
  return scores;
}

std::vector<double> initial_scores(const Structure& structure, const FitOptions& opts,
                                   int restart, Rng& rng) {
  if (restart > 0 || opts.init == InitKind::Dirichlet) {
    return dirichlet_scores(structure, opts.dirichlet_alpha, rng);
  }
  switch (opts.init) {
    case InitKind::Uniform:
      return std::vector<double>(EntryIndex(BayesNet::uniform(structure)).size(), 0.0);
    case InitKind::Given:
      if (!same_shape(structure, opts.start->structure())) {
        throw InvalidArgument("start net does not match the structure");
      }
      return scores_from_net(*opts.start, opts.clamp);
    case InitKind::Ofe:
      return scores_from_net(ofe(structure, *opts.init_data, opts.ofe_alpha), opts.clamp);
    case InitKind::Dirichlet:
      break;
  }
  return dirichlet_scores(structure, opts.dirichlet_alpha, rng);
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

RestartOutcome run_restart(const Structure& structure, const std::vector<LabeledQuery>& qs,
                           const std::vector<double>& weights, const FitOptions& opts,
                           int restart) {
  Rng rng = Rng(opts.seed).split(static_cast<std::uint64_t>(restart));
  RestartOutcome out;
  out.scores = initial_scores(structure, opts, restart, rng);
  BayesNet net = net_from_scores(structure, out.scores, opts.clamp);
  out.err = objective(net, qs, weights);

  double trial_step = opts.step;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const std::vector<double> g =
        score_gradient(net, out.scores, grad(net, qs, weights), opts.clamp);
    const double gn = norm(g);
    if (it == 1) out.trace.push_back({restart, 0, out.err, gn, 0.0});
    if (gn <= opts.tol) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    double step = trial_step;
    std::vector<double> candidate(out.scores.size());
    for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
      for (std::size_t i = 0; i < candidate.size(); ++i) {
        candidate[i] = std::clamp(out.scores[i] - step * g[i], -kScoreBound, kScoreBound);
      }
      BayesNet next = net_from_scores(structure, candidate, opts.clamp);
      const double err = objective(next, qs, weights);
      if (err < out.err) {
        out.scores.swap(candidate);
        net = std::move(next);
        out.err = err;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no descent along the gradient at any tried step
    const TraceRow row{restart, it, out.err, gn, step};
    out.trace.push_back(row);
    if (opts.observer) opts.observer(net, row);
    trial_step = std::min(2.0 * step, opts.max_step);
  }
  return out;
}

}  // namespace

FitResult fit_cpt(const Structure& structure, const std::vector<LabeledQuery>& qs,
                  const FitOptions& opts, const std::vector<double>& weights) {
  opts.validate();
  if (qs.empty()) throw InvalidArgument("fit_cpt: empty query list");
  for (const auto& lq : qs) {
    if (!(lq.label >= 0.0 && lq.label <= 1.0)) throw InvalidArgument("fit_cpt: label outside [0,1]");
  }
  check_clamp(structure, opts.clamp);

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(opts.restarts));
  if (opts.jobs == 1) {
    for (int r = 0; r < opts.restarts; ++r) {
      outcomes[static_cast<std::size_t>(r)] = run_restart(structure, qs, weights, opts, r);
    }
  } else {
    for (int first = 0; first < opts.restarts; first += opts.jobs) {
      std::vector<std::future<RestartOutcome>> batch;
      const int last = std::min(opts.restarts, first + opts.jobs);
      for (int r = first; r < last; ++r) {
        batch.push_back(std::async(std::launch::async, [&, r] {
          return run_restart(structure, qs, weights, opts, r);
        }));
      }
      for (int r = first; r < last; ++r) {
        outcomes[static_cast<std::size_t>(r)] = batch[static_cast<std::size_t>(r - first)].get();
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r) {
    if (outcomes[r].err < outcomes[best].err) best = r;
  }
  FitResult result{net_from_scores(structure, outcomes[best].scores, opts.clamp),
                   outcomes[best].err, static_cast<int>(best), outcomes[best].converged, {}};
  for (auto& o : outcomes) {
    result.trace.insert(result.trace.end(), o.trace.begin(), o.trace.end());
  }
  return result;
}

EventFitResult fit_cpt_from_events(const Structure& structure, const std::vector<StatQuery>& qs,
                                   const BayesNet& source, const FitOptions& opts, double eps,
                                   double delta, std::size_t cap) {
  if (qs.empty()) throw InvalidArgument("fit_cpt_from_events: empty query list");
  const std::size_t per_evidence = bounds::m_prime_d(eps, delta, qs.size());

  std::set<Assignment> unique;
  for (const auto& q : qs) unique.insert(q.evidence);
  const std::vector<Assignment> evidences(unique.begin(), unique.end());
  const Dataset data = collect_until_matched(source, evidences, per_evidence, cap,
                                             Rng(opts.seed).split(0xe7e7).next());
  std::vector<LabeledQuery> labels;
  labels.reserve(qs.size());
  for (const auto& q : qs) labels.push_back({q, cond_freq(data, q.target, q.evidence)});
  FitResult fit = fit_cpt(structure, labels, opts);
  return EventFitResult{std::move(fit), std::move(labels), per_evidence, data.size()};
}

}  // namespace qbn
