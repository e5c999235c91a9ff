#include "qbn/scoring.hpp"

#include <cmath>

#include "qbn/errors.hpp"
#include "qbn/inference.hpp"

namespace qbn {

std::string to_string(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::True:
      return "true";
    case ScoreMode::Labeled:
      return "labeled";
    case ScoreMode::Events:
      return "unlabeled+events";
  }
  return "unknown";
}

std::size_t ErrReport::failures() const {
  std::size_t n = 0;
  for (const auto& q : per_query) n += q.failure.empty() ? 0 : 1;
  return n;
}

namespace {

// Fills hypothesis, sq_error and failure; accumulates in index order.
void score_against(const BayesNet& b, ErrReport& report) {
  double total = 0.0;
  for (auto& row : report.per_query) {
    try {
      row.hypothesis = answer(b, row.query);
      const double d = row.hypothesis - row.reference;
      row.sq_error = d * d;
      total += row.weight * row.sq_error;
    } catch (const ZeroEvidence& e) {
      row.hypothesis = std::nan("");
      row.sq_error = std::nan("");
      row.failure = e.what();
    }
  }
  report.aggregate = total;
}

}  // namespace

ErrReport true_err(const BayesNet& b, const QueryDistribution& dist, const BayesNet& truth) {
  ErrReport report;
  report.mode = ScoreMode::True;
  report.per_query.reserve(dist.size());
  std::vector<std::size_t> illegal;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& atom = dist.atoms()[i];
    QueryScore row;
    row.query = atom.query;
    row.weight = atom.weight;
    try {
      row.reference = answer(truth, atom.query);
    } catch (const ZeroEvidence&) {
      illegal.push_back(i);
    }
    report.per_query.push_back(std::move(row));
  }
  if (!illegal.empty()) {
    throw ZeroEvidence("true_err: " + std::to_string(illegal.size()) +
                           " queries are illegal under the truth net",
                       illegal);
  }
  score_against(b, report);
  return report;
}

ErrReport empirical_err(const BayesNet& b, const std::vector<LabeledQuery>& qs) {
  return empirical_err(b, qs, std::vector<double>(qs.size(), 1.0));
}

ErrReport empirical_err(const BayesNet& b, const std::vector<LabeledQuery>& qs,
                        const std::vector<double>& weights) {
  if (qs.empty()) throw InvalidArgument("empirical_err: empty query list");
  if (weights.size() != qs.size()) throw InvalidArgument("empirical_err: weight count mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("empirical_err: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("empirical_err: weights sum to zero");

  ErrReport report;
  report.mode = ScoreMode::Labeled;
  report.per_query.reserve(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (!(qs[i].label >= 0.0 && qs[i].label <= 1.0)) {
      throw InvalidArgument("empirical_err: label outside [0,1]");
    }
    QueryScore row;
    row.query = qs[i].query;
    row.weight = weights[i] / total;
    row.reference = qs[i].label;
    report.per_query.push_back(std::move(row));
  }
  score_against(b, report);
  return report;
}

ErrReport empirical_err_from_events(const BayesNet& b, const std::vector<StatQuery>& qs,
                                    const Dataset& data) {
  if (qs.empty()) throw InvalidArgument("empirical_err_from_events: empty query list");
  ErrReport report;
  report.mode = ScoreMode::Events;
  report.per_query.reserve(qs.size());
  std::vector<std::size_t> unmatched;
  const double w = 1.0 / static_cast<double>(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    QueryScore row;
    row.query = qs[i];
    row.weight = w;
    try {
      row.reference = cond_freq(data, qs[i].target, qs[i].evidence);
    } catch (const UnmatchedEvidence&) {
      unmatched.push_back(i);
    }
    report.per_query.push_back(std::move(row));
  }
  if (!unmatched.empty()) {
    throw UnmatchedEvidence(std::to_string(unmatched.size()) +
                                " queries have no tuple matching their evidence",
                            unmatched);
  }
  score_against(b, report);
  return report;
}

double nll(const BayesNet& b, const Dataset& data) {
  if (data.empty()) throw InvalidArgument("nll: empty dataset");
  double total = 0.0;
  Assignment full;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto tuple = data.row(i);
    for (VarId v = 0; v < tuple.size(); ++v) full.set(v, tuple[v]);
    const double p = joint_prob(b, full);
    if (!(p > 0.0)) throw ZeroEvidence("nll: tuple " + std::to_string(i) + " has probability zero");
    total -= std::log(p);
  }
  return total / static_cast<double>(data.size());
}

double true_kl(const BayesNet& b, const BayesNet& truth) {
  if (b.size() != truth.size()) throw InvalidArgument("true_kl: nets over different variables");
  if (binary_equivalent_size(truth) > kDefaultEnumerationCapBits + 1e-9) {
    throw CapExceeded("true_kl: net exceeds the enumeration cap");
  }
  Assignment full;
  for (VarId v = 0; v < truth.size(); ++v) full.set(v, 0);
  double kl = 0.0;
  while (true) {
    const double p = joint_prob(truth, full);
    if (p > 0.0) {
      const double q = joint_prob(b, full);
      if (!(q > 0.0)) throw InvalidArgument("true_kl: hypothesis misses part of the truth's support");
      kl += p * std::log(p / q);
    }
    bool done = true;
    for (VarId v = truth.size(); v-- > 0;) {
      const ValueId next = *full.get(v) + 1;
      if (next < truth.variable(v).arity()) {
        full.set(v, next);
        done = false;
        break;
      }
      full.set(v, 0);
    }
    if (done) break;
  }
  return std::max(kl, 0.0);
}

std::pair<double, double> ll_decomposition(const BayesNet& b, const Dataset& data, VarId class_var) {
  if (class_var >= b.size()) throw InvalidArgument("ll_decomposition: unknown class variable");
  double conditional = 0.0;
  double rest = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto tuple = data.row(i);
    Assignment attrs;
    for (VarId v = 0; v < tuple.size(); ++v) {
      if (v != class_var) attrs.set(v, tuple[v]);
    }
    Assignment cls;
    cls.set(class_var, tuple[class_var]);
    const double pa = marginal(b, attrs);
    if (!(pa > 0.0)) throw ZeroEvidence("ll_decomposition: attribute tuple has probability zero");
    const double pc = answer(b, StatQuery{cls, attrs});
    if (!(pc > 0.0)) throw ZeroEvidence("ll_decomposition: class value has probability zero");
    conditional += std::log(pc);
    rest += std::log(pa);
  }
  return {conditional, rest};
}

}  // namespace qbn
