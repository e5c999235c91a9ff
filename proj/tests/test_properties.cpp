#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "oracle.hpp"
#include "qbn/experiments.hpp"
#include "qbn/inference.hpp"
#include "qbn/learning.hpp"
#include "qbn/queries.hpp"
#include "qbn/scoring.hpp"

using namespace qbn;

namespace {

BayesNet draw_net(Rng& rng, std::size_t vars = 5, std::size_t max_arity = 3) {
  RandomNetOptions opts;
  opts.vars = vars;
  opts.max_arity = max_arity;
  opts.max_parents = 2;
  return random_net(opts, rng);
}

Assignment draw_assignment(const BayesNet& net, Rng& rng, double p) {
  Assignment a;
  for (VarId v = 0; v < net.size(); ++v) {
    if (rng.uniform() < p) a.set(v, static_cast<ValueId>(rng.next() % net.variable(v).arity()));
  }
  return a;
}

bool consistent_family_entry(const BayesNet& b, const StatQuery& q, const EntryId& e) {
  const VarId v = q.target.begin()->first;
  const auto& ps = b.parents(e.var);
  if (e.var != v && std::find(ps.begin(), ps.end(), v) == ps.end()) return false;
  const Assignment all = *Assignment::merge(q.target, q.evidence);
  if (all.get(e.var) != e.value) return false;
  const auto values = b.row_parent_values(e.var, e.row);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (all.get(ps[i]) != values[i]) return false;
  }
  return true;
}

}  // namespace

// Analytic gradient along every row-renormalized direction agrees with a
// float128 finite difference of the squared error.
TEST(Properties, GradientMatchesFiniteDifferences) {
  Rng rng(2024);
  int checked = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const BayesNet net = draw_net(rng);
    const StatQuery q = pair % 2 ? random_blanket_query(net, rng) : random_query(net, rng, 2, 0.5);
    const LabeledQuery lq{q, rng.uniform()};
    const auto g = grad(net, {lq}, {1.0});
    const double residual = 2.0 * (answer(net, q) - lq.label);
    const EntryIndex index(net);
    for (VarId v = 0; v < net.size(); ++v) {
      for (std::size_t r = 0; r < net.row_count(v); ++r) {
        std::vector<double> row(net.variable(v).arity());
        for (ValueId x = 0; x < row.size(); ++x) row[x] = g[index.flat({v, r, x})];
        for (ValueId x = 0; x < row.size(); ++x) {
          const EntryId e{v, r, x};
          if (net.cpt(v)[r][x] > 1.0 - 1e-6) continue;
          const double fd = residual * oracle::fd_cond_renorm(net, q, e);
          EXPECT_LT(oracle::rel_err(oracle::renormalized(net, e, row), fd), 1e-5)
              << "pair " << pair << " entry " << v << "/" << r << "/" << x;
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Properties, FitKeepsRowsOnTheClampedSimplex) {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const BayesNet truth = draw_net(rng, 4, 2);
    std::vector<StatQuery> qs;
    for (int i = 0; i < 6; ++i) qs.push_back(random_query(truth, rng, 1, 0.5));
    const auto labeled = label_queries(truth, qs);

    FitOptions opts;
    opts.restarts = 2;
    opts.max_iters = 60;
    opts.clamp = 1e-4;
    opts.seed = 100 + trial;
    std::mutex mu;
    int calls = 0;
    bool bad = false;
    opts.observer = [&](const BayesNet& b, const TraceRow&) {
      bool ok = true;
      for (const auto& table : b.cpts()) {
        for (const auto& row : table) {
          double sum = 0.0;
          for (double e : row) {
            sum += e;
            ok = ok && e >= opts.clamp && e <= 1.0 - opts.clamp;
          }
          ok = ok && std::abs(sum - 1.0) <= 1e-9;
        }
      }
      std::lock_guard<std::mutex> lock(mu);
      ++calls;
      bad = bad || !ok;
    };
    const FitResult fit = fit_cpt(truth.structure(), labeled, opts);
    EXPECT_GT(calls, 0);
    EXPECT_FALSE(bad);

    // Accepted steps never increase the error within a restart.
    for (std::size_t i = 1; i < fit.trace.size(); ++i) {
      if (fit.trace[i].restart == fit.trace[i - 1].restart) {
        EXPECT_LE(fit.trace[i].err, fit.trace[i - 1].err + 1e-15);
      }
    }
    EXPECT_NEAR(fit.err, objective(fit.net, labeled), 1e-12);
  }
}

TEST(Properties, GradientVanishesAtAPerfectFit) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const BayesNet net = draw_net(rng);
    std::vector<StatQuery> qs;
    for (int i = 0; i < 4; ++i) qs.push_back(random_query(net, rng, 2, 0.4));
    for (double x : grad(net, label_queries(net, qs))) EXPECT_NEAR(x, 0.0, 1e-12);
  }
}

TEST(Properties, BlanketFastPathMatchesElimination) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const BayesNet net = draw_net(rng, 6, 3);
    const StatQuery q = random_blanket_query(net, rng);
    const auto [v, x] = *q.target.begin();
    EXPECT_NEAR(mb_query(net, v, x, q.evidence), cond_prob(net, q.target, q.evidence), 1e-12);
  }
}

TEST(Properties, BlanketDerivativeMatchesGeneralForm) {
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const BayesNet net = draw_net(rng, 5, 3);
    const LabeledQuery lq{random_blanket_query(net, rng), rng.uniform()};
    const EntryIndex index(net);
    for (std::size_t k = 0; k < index.size(); ++k) {
      const EntryId e = index.id(k);
      const double local = derr_dentry_mb(net, lq, e);
      if (consistent_family_entry(net, lq.query, e)) {
        EXPECT_NEAR(local, derr_dentry(net, lq, e), 1e-10);
      } else {
        EXPECT_EQ(local, 0.0);
      }
    }
  }
}

TEST(Properties, EliminationMatchesEnumeration) {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const BayesNet net = draw_net(rng, 7, 3);
    const auto t = oracle::tables(net);
    for (int k = 0; k < 4; ++k) {
      const Assignment a = draw_assignment(net, rng, 0.5);
      EXPECT_NEAR(marginal(net, a), oracle::to_double(oracle::mass(net, t, a)), 1e-13);
    }
    // Conditionals over a target's values sum to one.
    const StatQuery q = random_query(net, rng, 1, 0.5);
    const VarId v = q.target.begin()->first;
    double total = 0.0;
    for (ValueId x = 0; x < net.variable(v).arity(); ++x) total += cond_prob(net, {{v, x}}, q.evidence);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Properties, ErrorsStayInUnitInterval) {
  Rng rng(11);
  for (int i = 0; i < 30; ++i) {
    const BayesNet truth = draw_net(rng);
    const BayesNet hyp = random_cpts(truth.structure(), 0.5, rng);
    std::vector<WeightedQuery> atoms;
    for (int k = 0; k < 5; ++k) atoms.push_back({random_query(truth, rng, 2, 0.5), 0.2});
    const auto dist = QueryDistribution::from_atoms(atoms);
    const ErrReport r = true_err(hyp, dist, truth);
    EXPECT_GE(r.aggregate, 0.0);
    EXPECT_LE(r.aggregate, 1.0);
    EXPECT_EQ(true_err(truth, dist, truth).aggregate, 0.0);
    for (const auto& s : r.per_query) {
      EXPECT_GE(s.hypothesis, 0.0);
      EXPECT_LE(s.hypothesis, 1.0);
      EXPECT_NEAR(s.sq_error, (s.hypothesis - s.reference) * (s.hypothesis - s.reference), 1e-15);
    }
  }
}
