#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qbn/network.hpp"
#include "qbn/queries.hpp"
#include "qbn/sampling.hpp"

namespace qbn {

// Observed-frequency estimates with additive (Laplace) smoothing alpha:
// e_{q|r} = (n(q,r) + alpha) / (n(r) + alpha * arity). A parent configuration
// that never occurs gets a uniform row. Data columns must follow the
// structure's variables.
BayesNet ofe(const Structure& structure, const Dataset& data, double alpha);

// ---------------------------------------------------------------------------
// Per-entry derivatives. Entries are treated as independent coordinates (no
// row renormalization), so these are the partial derivatives of the
// conditional as a rational function of the CPT entries.

// dB(x|y)/de = (1/e) B(x|y) [B(q,r | x,y) - B(q,r | y)]. Returns 0 without
// inference when the entry's CPT cannot influence the query. Throws
// InvalidArgument for a zero entry, ZeroEvidence for an illegal query.
double db_dentry(const BayesNet& b, const StatQuery& q, const EntryId& e);

// 2 (B(x|y) - label) dB(x|y)/de; exactly 0 when the prediction is correct.
double derr_dentry(const BayesNet& b, const LabeledQuery& lq, const EntryId& e);

// Closed form for Markov-blanket queries:
// 2 (B - label) / e * B (1 - B), for entries whose family contains the target
// variable and whose (q, r) agrees with the query's assignment. Any other
// entry returns 0. Throws InvalidArgument if the query is not a Markov-blanket
// query.
double derr_dentry_mb(const BayesNet& b, const LabeledQuery& lq, const EntryId& e);

// Gradient of Σ_i w_i (B(x_i|y_i) - label_i)^2 over all entries, laid out by
// EntryIndex(b). Empty weights mean 1/|qs| each (the empirical score).
// Markov-blanket queries take the local closed form; entries whose CPT cannot
// influence a query get an exact 0 for that query.
std::vector<double> grad(const BayesNet& b, const std::vector<LabeledQuery>& qs,
                         const std::vector<double>& weights = {});

// Weighted squared error matching grad()'s objective.
double objective(const BayesNet& b, const std::vector<LabeledQuery>& qs,
                 const std::vector<double>& weights = {});

// ---------------------------------------------------------------------------
// Row parameterization used by the fitter: each row is
//   e = clamp + (1 - arity * clamp) * softmax(scores)
// so rows sum to one and every entry stays in [clamp, 1 - clamp].

inline constexpr double kScoreBound = 30.0;

BayesNet net_from_scores(const Structure& structure, const std::vector<double>& scores,
                         double clamp);
// Scores reproducing net's entries (entries below the floor are raised to it).
std::vector<double> scores_from_net(const BayesNet& net, double clamp);
// Chain rule from entry gradient to score gradient.
std::vector<double> score_gradient(const BayesNet& net, const std::vector<double>& scores,
                                   const std::vector<double>& entry_grad, double clamp);

enum class InitKind { Uniform, Ofe, Dirichlet, Given };

struct TraceRow {
  int restart = 0;
  int iteration = 0;
  double err = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct FitOptions {
  InitKind init = InitKind::Dirichlet;
  double dirichlet_alpha = 1.0;
  std::optional<BayesNet> start;      // InitKind::Given
  std::optional<Dataset> init_data;   // InitKind::Ofe
  double ofe_alpha = 1.0;

  int restarts = 10;
  int max_iters = 2000;
  double step = 1.0;          // first trial step
  double max_step = 64.0;     // cap on the growing trial step
  int max_halvings = 30;      // backtracking halvings per iteration
  double tol = 1e-9;          // stop when the score-gradient norm falls below
  double clamp = 1e-6;
  std::uint64_t seed = 42;
  int jobs = 1;               // restarts evaluated concurrently

  // Called after every accepted step with the new net. Must be thread-safe
  // when jobs > 1.
  std::function<void(const BayesNet&, const TraceRow&)> observer;

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct FitResult {
  BayesNet net;
  double err = 0.0;
  int best_restart = 0;
  bool converged = false;           // best restart hit the gradient tolerance
  std::vector<TraceRow> trace;      // every restart, row 0 of each is the start point
};

// Local search over the CPT entries of structure minimizing the (weighted)
// squared error on qs. Restart 0 uses opts.init, later restarts draw a
// Dirichlet(opts.dirichlet_alpha) start. Returns the best restart (lowest
// error, then lowest index).
FitResult fit_cpt(const Structure& structure, const std::vector<LabeledQuery>& qs,
                  const FitOptions& opts, const std::vector<double>& weights = {});

struct EventFitResult {
  FitResult fit;
  std::vector<LabeledQuery> labels;   // estimated labels fed to fit_cpt
  std::size_t per_evidence = 0;       // matches required per evidence pattern
  std::size_t tuples_drawn = 0;
};

// Labels each query by its conditional frequency in tuples drawn from source
// until every evidence pattern has M'_D(eps, delta, |qs|) matches, then fits.
EventFitResult fit_cpt_from_events(const Structure& structure, const std::vector<StatQuery>& qs,
                                   const BayesNet& source, const FitOptions& opts, double eps,
                                   double delta, std::size_t cap = kDefaultDrawCap);

}  // namespace qbn
