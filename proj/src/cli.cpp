#include "qbn/cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "qbn/bounds.hpp"
#include "qbn/errors.hpp"
#include "qbn/experiments.hpp"
#include "qbn/io.hpp"
#include "qbn/learning.hpp"
#include "qbn/sampling.hpp"
#include "qbn/scoring.hpp"

namespace qbn {

namespace {

namespace fs = std::filesystem;

struct Config {
  std::string net, truth, queries, data, out;
  std::uint64_t seed = 42;
  int jobs = 1;
  std::string format = "json";

  // learn
  std::string mode;
  double alpha = 1.0;
  std::string init = "dirichlet";
  int restarts = 10;
  int max_iters = 2000;
  double tol = 1e-9;
  double clamp = 1e-6;

  // sample
  std::size_t n = 0;

  // bounds
  double epsilon = 0.0, delta = 0.0;
  std::optional<double> lambda, c;
  std::optional<std::uint64_t> k_entries, n_vars;

  // repro
  std::string id;
  std::optional<double> attrs, samples, trials;
};

// Usage-level problem detected after flag parsing.
struct UsageError : Error {
  using Error::Error;
};

std::string describe_indices(const std::vector<std::size_t>& ids) {
  if (ids.empty()) return "";
  std::string s = " (query ids:";
  for (auto i : ids) s += " " + std::to_string(i);
  return s + ")";
}

void emit(const Config& cfg, const std::string& name, const std::string& content, std::ostream& out) {
  if (cfg.out.empty()) {
    out << content;
    return;
  }
  fs::create_directories(cfg.out);
  io::write_file((fs::path(cfg.out) / name).string(), content);
}

int cmd_validate(const Config& cfg, std::ostream& out) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_file(cfg.net));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(cfg.net + ": " + e.what());
  }
  auto [net, violations] = io::parse_net(doc);
  if (cfg.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& v : violations) j.push_back({{"location", v.location}, {"message", v.message}});
    out << nlohmann::json{{"valid", violations.empty()}, {"violations", j}}.dump(2) << '\n';
  } else {
    out << "location,message\n";
    for (const auto& v : violations) out << v.location << ',' << v.message << '\n';
  }
  return violations.empty() ? kExitOk : kExitFailure;
}

std::string render_report(const Config& cfg, const BayesNet& net, const ErrReport& report) {
  std::ostringstream buf;
  if (cfg.format == "json") {
    buf << io::report_to_json(net, report).dump(2) << '\n';
  } else {
    io::write_report_csv(report, buf);
  }
  return buf.str();
}

int cmd_eval(const Config& cfg, std::ostream& out, std::ostream& err) {
  const BayesNet net = io::load_net(cfg.net);
  const io::QueryFile qf = io::load_queries(net, cfg.queries);
  ErrReport report;
  if (!cfg.truth.empty()) {
    report = true_err(net, qf.dist, io::load_net(cfg.truth));
  } else if (!cfg.data.empty()) {
    report = empirical_err_from_events(net, qf.queries(), io::load_dataset(net, cfg.data));
  } else if (qf.labels) {
    report = empirical_err(net, qf.labeled(), qf.weights());
  } else {
    throw UsageError("eval needs --truth, --data or a labeled query file");
  }
  emit(cfg, std::string("report.") + cfg.format, render_report(cfg, net, report), out);
  if (report.failures() > 0) {
    err << report.failures() << " queries could not be answered by the net\n";
    return kExitFailure;
  }
  return kExitOk;
}

FitOptions fit_options(const Config& cfg, const BayesNet& structure_net,
                       const std::optional<Dataset>& data) {
  FitOptions opts;
  if (cfg.init == "uniform") {
    opts.init = InitKind::Uniform;
  } else if (cfg.init == "dirichlet") {
    opts.init = InitKind::Dirichlet;
  } else if (cfg.init == "given") {
    opts.init = InitKind::Given;
    opts.start = structure_net;
  } else {
    opts.init = InitKind::Ofe;
    if (!data) throw UsageError("--init ofe needs --data");
    opts.init_data = *data;
    opts.ofe_alpha = cfg.alpha;
  }
  opts.restarts = cfg.restarts;
  opts.max_iters = cfg.max_iters;
  opts.tol = cfg.tol;
  opts.clamp = cfg.clamp;
  opts.seed = cfg.seed;
  opts.jobs = cfg.jobs;
  try {
    opts.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return opts;
}

int cmd_learn(const Config& cfg, std::ostream& out, std::ostream& err) {
  const BayesNet shape = io::load_net(cfg.net);
  const Structure& structure = shape.structure();
  std::optional<Dataset> data;
  if (!cfg.data.empty()) data = io::load_dataset(shape, cfg.data);

  BayesNet learned = shape;
  std::vector<TraceRow> trace;
  if (cfg.mode == "ofe") {
    if (!data) throw UsageError("learn --mode ofe needs --data");
    learned = ofe(structure, *data, cfg.alpha);
  } else {
    if (cfg.queries.empty()) throw UsageError("learn --mode qfit needs --queries");
    const io::QueryFile qf = io::load_queries(shape, cfg.queries);
    std::vector<LabeledQuery> labeled;
    if (qf.labels) {
      labeled = qf.labeled();
    } else if (!cfg.truth.empty()) {
      labeled = label_queries(io::load_net(cfg.truth), qf.queries());
    } else if (data) {
      std::vector<std::size_t> unmatched;
      for (std::size_t i = 0; i < qf.dist.size(); ++i) {
        const StatQuery& q = qf.dist.atoms()[i].query;
        if (data->count(q.evidence) == 0) {
          unmatched.push_back(i);
          continue;
        }
        labeled.push_back({q, cond_freq(*data, q.target, q.evidence)});
      }
      if (!unmatched.empty()) {
        throw UnmatchedEvidence(std::to_string(unmatched.size()) +
                                    " queries have no tuple matching their evidence",
                                unmatched);
      }
    } else {
      throw UsageError("learn --mode qfit needs labels, --truth or --data");
    }
    const FitResult fit = fit_cpt(structure, labeled, fit_options(cfg, shape, data), qf.weights());
    learned = fit.net;
    trace = fit.trace;
    err << "err " << io::format_double(fit.err) << " best_restart " << fit.best_restart
        << (fit.converged ? " converged" : "") << '\n';
  }

  const auto violations = validate(learned);
  if (!violations.empty()) {
    err << "learned net failed validation: " << violations.front().location << ": "
        << violations.front().message << '\n';
    return kExitFailure;
  }
  emit(cfg, "net.json", io::net_to_json(learned).dump(2) + "\n", out);
  if (!cfg.out.empty() && cfg.mode == "qfit") {
    std::ostringstream buf;
    io::write_trace_csv(trace, buf);
    emit(cfg, "trace.csv", buf.str(), out);
  }
  return kExitOk;
}

int cmd_sample(const Config& cfg, std::ostream& out) {
  const BayesNet net = io::load_net(cfg.net);
  std::ostringstream buf;
  io::write_dataset(forward_sample(net, cfg.n, cfg.seed), buf);
  emit(cfg, "data.csv", buf.str(), out);
  return kExitOk;
}

int cmd_bounds(const Config& cfg, std::ostream& out) {
  std::vector<std::pair<std::string, std::uint64_t>> rows;
  try {
    const std::uint64_t msq = bounds::m_sq(cfg.epsilon, cfg.delta);
    rows.emplace_back("M_LSQ", bounds::m_lsq(cfg.epsilon, cfg.delta));
    rows.emplace_back("M_SQ", msq);
    rows.emplace_back("M'_D", bounds::m_prime_d(cfg.epsilon, cfg.delta, msq));
    if (cfg.lambda) rows.emplace_back("M_D", bounds::m_d(cfg.epsilon, cfg.delta, *cfg.lambda));
    if (cfg.k_entries && cfg.n_vars && cfg.c) {
      rows.emplace_back("M'_LSQ", bounds::m_prime_lsq(cfg.epsilon, cfg.delta, *cfg.k_entries,
                                                      *cfg.n_vars, *cfg.c));
    }
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  std::ostringstream buf;
  if (cfg.format == "json") {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, value] : rows) j[name] = value;
    buf << j.dump(2) << '\n';
  } else {
    buf << "bound,value\n";
    for (const auto& [name, value] : rows) buf << name << ',' << value << '\n';
  }
  emit(cfg, std::string("bounds.") + cfg.format, buf.str(), out);
  return kExitOk;
}

int cmd_repro(const Config& cfg, std::ostream& out) {
  std::vector<std::pair<std::string, double>> params;
  if (cfg.attrs) params.emplace_back("n", *cfg.attrs);
  if (cfg.samples) params.emplace_back("N", *cfg.samples);
  if (cfg.trials) params.emplace_back("trials", *cfg.trials);
  ExperimentReport report;
  try {
    report = run_experiment(cfg.id, cfg.seed, cfg.jobs, params);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (!cfg.out.empty()) save_report(report, cfg.out);
  if (cfg.format == "json") {
    out << to_json(report).dump(2) << '\n';
  } else {
    write_rows_csv(report, out);
  }
  return report.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian networks scored and learned against a distribution of queries", "qbn"};
  app.require_subcommand(1);
  Config cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "parallel workers")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--format", cfg.format, "output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", cfg.out, "output directory (default: stdout)");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a net file");
  validate_cmd->add_option("--net", cfg.net, "net file")->required();
  common(validate_cmd);

  auto* eval = app.add_subcommand("eval", "score a net against queries");
  eval->add_option("--net", cfg.net, "hypothesis net")->required();
  eval->add_option("--queries", cfg.queries, "query file")->required();
  auto* truth_opt = eval->add_option("--truth", cfg.truth, "truth net supplying the reference answers");
  eval->add_option("--data", cfg.data, "event tuples supplying the reference answers")
      ->excludes(truth_opt);
  common(eval);

  auto* learn = app.add_subcommand("learn", "fit CPTs for a fixed structure");
  learn->add_option("--net", cfg.net, "structure (any CPTs are the start net for --init given)")->required();
  learn->add_option("--mode", cfg.mode, "ofe or qfit")->required()->check(CLI::IsMember({"ofe", "qfit"}));
  learn->add_option("--queries", cfg.queries, "query file (qfit)");
  learn->add_option("--truth", cfg.truth, "truth net labeling the queries (qfit)");
  learn->add_option("--data", cfg.data, "event tuples");
  learn->add_option("--alpha", cfg.alpha, "additive smoothing for frequency estimates")->capture_default_str();
  learn->add_option("--init", cfg.init, "start point of restart 0")
      ->capture_default_str()
      ->check(CLI::IsMember({"uniform", "dirichlet", "ofe", "given"}));
  learn->add_option("--restarts", cfg.restarts)->capture_default_str();
  learn->add_option("--max-iters", cfg.max_iters)->capture_default_str();
  learn->add_option("--tol", cfg.tol)->capture_default_str();
  learn->add_option("--clamp", cfg.clamp)->capture_default_str();
  common(learn);

  auto* sample = app.add_subcommand("sample", "forward-sample a net to CSV");
  sample->add_option("--net", cfg.net, "net file")->required();
  sample->add_option("--n", cfg.n, "tuple count")->required();
  common(sample);

  auto* bounds_cmd = app.add_subcommand("bounds", "sample-complexity bounds");
  bounds_cmd->add_option("--epsilon", cfg.epsilon)->required();
  bounds_cmd->add_option("--delta", cfg.delta)->required();
  bounds_cmd->add_option("--lambda", cfg.lambda, "evidence probability floor (enables M_D)");
  bounds_cmd->add_option("--K", cfg.k_entries, "CPT entry count (M'_LSQ)");
  bounds_cmd->add_option("--N", cfg.n_vars, "variable count (M'_LSQ)");
  bounds_cmd->add_option("--c", cfg.c, "evidence mass exponent (M'_LSQ)");
  common(bounds_cmd);

  auto* repro = app.add_subcommand("repro", "run a reproduction experiment");
  repro->add_option("--id", cfg.id, "ex4.1, ex4.2, ex4.3, table1 or hoeffding")->required();
  repro->add_option("--n", cfg.attrs, "attribute count (ex4.2, ex4.3)");
  repro->add_option("--N", cfg.samples, "sample size (ex4.3)");
  repro->add_option("--trials", cfg.trials, "trial count (hoeffding)");
  common(repro);

  std::vector<const char*> argv{"qbn"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(cfg, out);
    if (*eval) return cmd_eval(cfg, out, err);
    if (*learn) return cmd_learn(cfg, out, err);
    if (*sample) return cmd_sample(cfg, out);
    if (*bounds_cmd) return cmd_bounds(cfg, out);
    if (*repro) return cmd_repro(cfg, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::InvalidNet& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ZeroEvidence& e) {
    err << "error: " << e.what() << describe_indices(e.indices()) << '\n';
    return kExitFailure;
  } catch (const UnmatchedEvidence& e) {
    err << "error: " << e.what() << describe_indices(e.indices()) << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace qbn
