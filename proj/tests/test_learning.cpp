#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "qbn/bounds.hpp"
#include "qbn/errors.hpp"
#include "qbn/experiments.hpp"
#include "qbn/inference.hpp"
#include "qbn/learning.hpp"
#include "qbn/scoring.hpp"

using namespace qbn;

namespace {

Variable bin(const std::string& name) { return {name, {"0", "1"}}; }

Structure a_to_b() { return Structure{{bin("A"), bin("B")}, {{}, {0}}}; }

std::vector<LabeledQuery> label_with(const BayesNet& truth, const std::vector<StatQuery>& qs) {
  return label_queries(truth, qs);
}

// Entries of b consistent with the query's full assignment whose family
// contains the target.
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

TEST(Ofe, Frequencies) {
  Dataset data(a_to_b().variables);
  for (int i = 0; i < 3; ++i) data.push_back(std::vector<ValueId>{1, 1});
  data.push_back(std::vector<ValueId>{1, 0});
  const BayesNet net = ofe(a_to_b(), data, 0.0);
  EXPECT_DOUBLE_EQ(net.cpt(1)[1][1], 0.75);
  EXPECT_DOUBLE_EQ(net.cpt(0)[0][1], 1.0);
  // Unseen parent configuration.
  EXPECT_DOUBLE_EQ(net.cpt(1)[0][0], 0.5);
  const BayesNet laplace = ofe(a_to_b(), data, 1.0);
  EXPECT_DOUBLE_EQ(laplace.cpt(1)[0][1], 0.5);
  EXPECT_DOUBLE_EQ(laplace.cpt(1)[1][1], 4.0 / 6.0);
  EXPECT_THROW(ofe(a_to_b(), data, -1.0), InvalidArgument);
  EXPECT_THROW(ofe(examples::abc_chain(), data, 1.0), InvalidArgument);
}

TEST(Ofe, ConsistentUnderCorrectStructure) {
  Rng rng(41);
  RandomNetOptions opts;
  opts.vars = 5;
  const BayesNet truth = random_net(opts, rng);
  std::vector<WeightedQuery> atoms;
  for (int i = 0; i < 10; ++i) atoms.push_back({random_query(truth, rng, 2), 0.1});
  const auto dist = QueryDistribution::from_atoms(atoms);
  double previous = 1.0;
  for (std::size_t n : {100, 1000, 10000, 100000}) {
    const double err = true_err(ofe(truth.structure(), forward_sample(truth, n, n), 1.0), dist, truth).aggregate;
    EXPECT_LT(err, previous * 1.5 + 1e-4);
    previous = err;
  }
  EXPECT_LT(previous, 0.01);
}

TEST(DbDentry, WorkedExample) {
  const BayesNet bp = examples::abc_frequency_limit();
  const StatQuery q = StatQuery::make({{2, 1}}, {{0, 1}});
  const EntryId e{2, 1, 1};  // e_{C=1|X=1}
  EXPECT_NEAR(db_dentry(bp, q, e), 0.25, 1e-15);
  EXPECT_NEAR(db_dentry(bp, q, e), oracle::fd_cond(bp, q, e), 1e-8);
  // A's prior cannot move B(C|A).
  EXPECT_EQ(db_dentry(bp, q, EntryId{0, 0, 1}), 0.0);
  EXPECT_THROW(db_dentry(bp, q, EntryId{2, 2, 0}), InvalidArgument);
  EXPECT_THROW(db_dentry(examples::abc_query_optimal(), q, EntryId{1, 0, 1}), InvalidArgument);
}

TEST(DbDentry, MatchesFiniteDifferences) {
  Rng rng(42);
  for (int trial = 0; trial < 15; ++trial) {
    RandomNetOptions opts;
    opts.vars = 5;
    opts.max_arity = 3;
    const BayesNet net = random_net(opts, rng);
    const StatQuery q = random_query(net, rng, 2, 0.5);
    for (VarId v = 0; v < net.size(); ++v) {
      for (std::size_t r = 0; r < net.row_count(v); ++r) {
        std::vector<double> row;
        for (ValueId x = 0; x < net.variable(v).arity(); ++x) row.push_back(db_dentry(net, q, {v, r, x}));
        for (ValueId x = 0; x < net.variable(v).arity(); ++x) {
          const EntryId e{v, r, x};
          EXPECT_LT(oracle::rel_err(oracle::renormalized(net, e, row), oracle::fd_cond_renorm(net, q, e)), 1e-5);
          // Off the simplex only influencing tables have the raw derivative.
          if (cpt_influences(net, v, q)) {
            EXPECT_LT(oracle::rel_err(row[x], oracle::fd_cond(net, q, e)), 1e-5);
          }
        }
      }
    }
  }
}

TEST(DerrDentry, WorkedExampleAndZeroResidual) {
  const BayesNet bp = examples::abc_frequency_limit();
  const auto qs = examples::abc_queries();
  EXPECT_NEAR(derr_dentry(bp, qs[0], EntryId{2, 1, 1}), -0.25, 1e-15);

  Rng rng(43);
  const BayesNet net = random_net({}, rng);
  const auto labeled = label_with(net, {random_query(net, rng, 1, 0.5)});
  const EntryIndex index(net);
  for (std::size_t i = 0; i < index.size(); ++i) EXPECT_EQ(derr_dentry(net, labeled[0], index.id(i)), 0.0);
}

TEST(DerrDentryMb, ZerosAndErrors) {
  Rng rng(44);
  const BayesNet net = random_net({}, rng);
  const StatQuery q = random_blanket_query(net, rng);
  const LabeledQuery exact{q, answer(net, q)};
  const EntryIndex index(net);
  for (std::size_t i = 0; i < index.size(); ++i) EXPECT_EQ(derr_dentry_mb(net, exact, index.id(i)), 0.0);

  const BayesNet chain = examples::abc_frequency_limit();
  EXPECT_THROW(derr_dentry_mb(chain, examples::abc_queries()[0], EntryId{2, 1, 1}), InvalidArgument);
}

TEST(DerrDentryMb, SaturatedPrediction) {
  // B copies A, so p(A=1 | B=1) = 1 and the B(1-B) factor vanishes.
  const BayesNet det(a_to_b(), {{{0.5, 0.5}}, {{1.0, 0.0}, {0.0, 1.0}}});
  const LabeledQuery lq{StatQuery::make({{0, 1}}, {{1, 1}}), 0.3};
  EXPECT_DOUBLE_EQ(answer(det, lq.query), 1.0);
  EXPECT_EQ(derr_dentry_mb(det, lq, EntryId{0, 0, 1}), 0.0);
  EXPECT_EQ(derr_dentry_mb(det, lq, EntryId{1, 1, 1}), 0.0);
}

TEST(DerrDentryMb, AgreesWithGeneralFormOnNaiveBayes) {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4;
    const BayesNet nb = random_cpts(examples::naive_bayes_truth(n).structure(), 1.0, rng);
    Assignment ev;
    for (VarId v = 1; v <= n; ++v) ev.set(v, rng.next() % 2);
    const LabeledQuery lq{StatQuery::make({{0, rng.next() % 2}}, ev), rng.uniform()};
    const EntryIndex index(nb);
    for (std::size_t i = 0; i < index.size(); ++i) {
      const EntryId e = index.id(i);
      if (!consistent_family_entry(nb, lq.query, e)) continue;
      EXPECT_NEAR(derr_dentry_mb(nb, lq, e), derr_dentry(nb, lq, e), 1e-10);
    }
  }
}

TEST(Grad, UniformStartOfWorkedExample) {
  const BayesNet bp = examples::abc_frequency_limit();
  const auto qs = examples::abc_queries();
  const auto g = grad(bp, qs);
  const EntryIndex index(bp);
  // Raw components on X's rows are equal; the simplex projection removes them.
  EXPECT_NEAR(g[index.flat({1, 0, 1})], g[index.flat({1, 0, 0})], 1e-15);
  const auto scores = scores_from_net(bp, 1e-6);
  const auto sg = score_gradient(bp, scores, g, 1e-6);
  for (double x : sg) EXPECT_NEAR(x, 0.0, 1e-12);
  for (std::size_t i = 0; i < index.size(); ++i) {
    EXPECT_LT(oracle::rel_err(g[i], oracle::fd_objective(bp, qs, {0.5, 0.5}, index.id(i))), 1e-5);
  }
}

TEST(Grad, SingleQueryEqualsDerr) {
  Rng rng(46);
  const BayesNet net = random_net({}, rng);
  const auto truth = random_cpts(net.structure(), 1.0, rng);
  const auto qs = label_with(truth, {random_query(net, rng, 1, 0.5)});
  const auto g = grad(net, qs);
  const EntryIndex index(net);
  for (std::size_t i = 0; i < index.size(); ++i) {
    EXPECT_NEAR(g[i], derr_dentry(net, qs[0], index.id(i)), 1e-12);
  }
}

TEST(Grad, BlanketQueriesMatchPerEntrySum) {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    RandomNetOptions opts;
    opts.vars = 6;
    opts.max_arity = 3;
    const BayesNet net = random_net(opts, rng);
    std::vector<LabeledQuery> qs;
    for (int i = 0; i < 3; ++i) qs.push_back({random_blanket_query(net, rng), rng.uniform()});
    const auto g = grad(net, qs);
    const EntryIndex index(net);
    for (std::size_t i = 0; i < index.size(); ++i) {
      double sum = 0.0;
      for (const auto& lq : qs) sum += derr_dentry(net, lq, index.id(i)) / 3.0;
      EXPECT_NEAR(g[i], sum, 1e-10);
    }
  }
}

TEST(Grad, ZeroAtPerfectFit) {
  Rng rng(48);
  const BayesNet net = random_net({}, rng);
  std::vector<StatQuery> qs;
  for (int i = 0; i < 6; ++i) qs.push_back(i % 2 ? random_blanket_query(net, rng) : random_query(net, rng, 2));
  for (double x : grad(net, label_with(net, qs))) EXPECT_EQ(x, 0.0);
}

TEST(Scores, RoundTripAndClamp) {
  Rng rng(49);
  const BayesNet net = random_net({}, rng);
  const double clamp = 1e-6;
  const BayesNet back = net_from_scores(net.structure(), scores_from_net(net, clamp), clamp);
  for (VarId v = 0; v < net.size(); ++v) {
    for (std::size_t r = 0; r < net.row_count(v); ++r) {
      for (ValueId q = 0; q < net.variable(v).arity(); ++q) {
        EXPECT_NEAR(back.cpt(v)[r][q], std::max(net.cpt(v)[r][q], clamp), 1e-9);
      }
    }
  }
  std::vector<double> extreme(EntryIndex(net).size(), 0.0);
  for (std::size_t i = 0; i < extreme.size(); ++i) extreme[i] = i % 2 ? kScoreBound : -kScoreBound;
  const BayesNet pinned = net_from_scores(net.structure(), extreme, clamp);
  ValidateOptions vo;
  vo.clamp = clamp;
  EXPECT_TRUE(validate(pinned, vo).empty());
}

TEST(Scores, ChainRuleMatchesFiniteDifferences) {
  Rng rng(50);
  const double clamp = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    RandomNetOptions opts;
    opts.vars = 4;
    opts.max_arity = 3;
    const BayesNet start = random_net(opts, rng);
    std::vector<StatQuery> raw;
    for (int i = 0; i < 4; ++i) raw.push_back(random_query(start, rng, 1, 0.5));
    const auto qs = label_with(random_cpts(start.structure(), 1.0, rng), raw);
    auto scores = scores_from_net(start, clamp);
    const BayesNet net = net_from_scores(start.structure(), scores, clamp);
    const auto sg = score_gradient(net, scores, grad(net, qs), clamp);
    const double h = 1e-6;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      auto up = scores, down = scores;
      up[i] += h;
      down[i] -= h;
      const double fd = (objective(net_from_scores(start.structure(), up, clamp), qs) -
                         objective(net_from_scores(start.structure(), down, clamp), qs)) /
                        (2 * h);
      EXPECT_NEAR(sg[i], fd, 1e-7 + 1e-5 * std::abs(fd));
    }
  }
}

TEST(FitCpt, WorkedExampleReachesZero) {
  FitOptions opts;
  opts.restarts = 10;
  const auto r = fit_cpt(examples::abc_chain(), examples::abc_queries(), opts);
  EXPECT_LT(r.err, 1e-3);
  EXPECT_LT(true_err(r.net, examples::abc_distribution(), examples::abc_truth()).aggregate, 1e-3);
  EXPECT_NEAR(empirical_err(r.net, examples::abc_queries()).aggregate, r.err, 1e-12);
}

TEST(FitCpt, StartingAtTheTruthTakesNoSteps) {
  Rng rng(51);
  const BayesNet truth = random_net({}, rng);
  std::vector<StatQuery> raw;
  for (int i = 0; i < 5; ++i) raw.push_back(random_query(truth, rng, 1, 0.5));
  FitOptions opts;
  opts.init = InitKind::Given;
  opts.start = truth;
  opts.restarts = 1;
  const auto r = fit_cpt(truth.structure(), label_with(truth, raw), opts);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.err, 1e-20);
}

TEST(FitCpt, BeatsFrequencyEstimateOnQueries) {
  Rng rng(52);
  RandomNetOptions ro;
  ro.vars = 5;
  const BayesNet truth = random_net(ro, rng);
  std::vector<StatQuery> raw;
  for (int i = 0; i < 12; ++i) raw.push_back(random_query(truth, rng, 1, 0.5));
  const auto qs = label_with(truth, raw);
  FitOptions opts;
  opts.restarts = 3;
  opts.init = InitKind::Ofe;
  opts.init_data = forward_sample(truth, 10000, 7);
  const double fitted = fit_cpt(truth.structure(), qs, opts).err;
  const double baseline = empirical_err(ofe(truth.structure(), *opts.init_data, 1.0), qs).aggregate;
  EXPECT_LE(fitted, baseline);
}

TEST(FitCpt, DeterministicAndJobsInvariant) {
  FitOptions opts;
  opts.restarts = 4;
  opts.max_iters = 200;
  opts.seed = 9;
  const auto a = fit_cpt(examples::abc_chain(), examples::abc_queries(), opts);
  const auto b = fit_cpt(examples::abc_chain(), examples::abc_queries(), opts);
  opts.jobs = 3;
  const auto c = fit_cpt(examples::abc_chain(), examples::abc_queries(), opts);
  EXPECT_EQ(a.net.cpts(), b.net.cpts());
  EXPECT_EQ(a.net.cpts(), c.net.cpts());
  EXPECT_EQ(a.best_restart, c.best_restart);
  EXPECT_EQ(a.trace.size(), c.trace.size());
}

TEST(FitCpt, OptionValidation) {
  const auto qs = examples::abc_queries();
  const Structure s = examples::abc_chain();
  FitOptions opts;
  opts.clamp = 0.5;
  EXPECT_THROW(fit_cpt(s, qs, opts), InvalidArgument);
  opts = {};
  opts.restarts = 0;
  EXPECT_THROW(fit_cpt(s, qs, opts), InvalidArgument);
  opts = {};
  opts.init = InitKind::Given;
  EXPECT_THROW(fit_cpt(s, qs, opts), InvalidArgument);
  opts = {};
  EXPECT_THROW(fit_cpt(s, {}, opts), InvalidArgument);
  auto bad = qs;
  bad[0].label = 1.5;
  EXPECT_THROW(fit_cpt(s, bad, opts), InvalidArgument);
}

TEST(FitCpt, MatchesGridSearchOnThreeEntries) {
  // Labels no single net satisfies: the minimum is strictly positive.
  const std::vector<LabeledQuery> qs{
      {StatQuery::make({{0, 1}}, {}), 0.3},
      {StatQuery::make({{1, 1}}, {{0, 1}}), 0.8},
      {StatQuery::make({{0, 1}}, {{1, 1}}), 0.9},
      {StatQuery::make({{1, 1}}, {}), 0.5},
  };
  const double clamp = 1e-6;
  double best = 1.0;
  const int steps = 100;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      for (int k = 0; k <= steps; ++k) {
        auto at = [&](int s) { return std::clamp(static_cast<double>(s) / steps, clamp, 1 - clamp); };
        const BayesNet net(a_to_b(), {{{1 - at(i), at(i)}}, {{1 - at(j), at(j)}, {1 - at(k), at(k)}}});
        best = std::min(best, objective(net, qs));
      }
    }
  }
  ASSERT_GT(best, 1e-3);
  FitOptions opts;
  opts.restarts = 5;
  const auto r = fit_cpt(a_to_b(), qs, opts);
  EXPECT_LE(r.err, best + 1e-9);
}

TEST(FitFromEvents, WorkedExample) {
  std::vector<StatQuery> qs;
  for (const auto& lq : examples::abc_queries()) qs.push_back(lq.query);
  FitOptions opts;
  opts.restarts = 5;
  const auto r = fit_cpt_from_events(examples::abc_chain(), qs, examples::abc_truth(), opts, 0.1, 0.1);
  ASSERT_EQ(r.labels.size(), 2u);
  EXPECT_NEAR(r.labels[0].label, 1.0, 0.05);
  EXPECT_NEAR(r.labels[1].label, 0.0, 0.05);
  EXPECT_EQ(r.per_evidence, bounds::m_prime_d(0.1, 0.1, 2));
  EXPECT_LT(true_err(r.fit.net, examples::abc_distribution(), examples::abc_truth()).aggregate, 0.01);
}

TEST(FitFromEvents, LooseAccuracyIsCheap) {
  std::vector<StatQuery> qs;
  for (const auto& lq : examples::abc_queries()) qs.push_back(lq.query);
  FitOptions opts;
  opts.restarts = 1;
  opts.max_iters = 50;
  const auto r = fit_cpt_from_events(examples::abc_chain(), qs, examples::abc_truth(), opts, 0.5, 0.5);
  EXPECT_EQ(r.per_evidence, bounds::m_prime_d(0.5, 0.5, 2));
  EXPECT_LT(r.tuples_drawn, 1000u);
}

TEST(FitFromEvents, RareEvidenceScalesInverselyWithItsProbability) {
  const double lambda = 0.01;
  const BayesNet source(a_to_b(), {{{1 - lambda, lambda}}, {{0.5, 0.5}, {0.2, 0.8}}});
  const std::vector<StatQuery> qs{StatQuery::make({{1, 1}}, {{0, 1}})};
  FitOptions opts;
  opts.restarts = 1;
  opts.max_iters = 20;
  double total = 0.0;
  const int runs = 10;
  std::size_t per = 0;
  for (int s = 0; s < runs; ++s) {
    opts.seed = 100 + s;
    const auto r = fit_cpt_from_events(a_to_b(), qs, source, opts, 0.5, 0.5);
    per = r.per_evidence;
    total += static_cast<double>(r.tuples_drawn);
    EXPECT_LE(r.tuples_drawn, bounds::m_d(0.5, 0.5, lambda));
  }
  EXPECT_NEAR(total / runs / (static_cast<double>(per) / lambda), 1.0, 0.15);
}
