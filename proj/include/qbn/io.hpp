#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbn/errors.hpp"
#include "qbn/learning.hpp"
#include "qbn/network.hpp"
#include "qbn/queries.hpp"
#include "qbn/sampling.hpp"
#include "qbn/scoring.hpp"

namespace qbn::io {

// Net document that parsed but failed validate().
class InvalidNet : public Error {
 public:
  InvalidNet(const std::string& what, std::vector<Violation> violations)
      : Error(what), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Net document:
//   {"variables":[{"name":"A","domain":["0","1"]},...],
//    "edges":[["A","C"],...],
//    "cpts":{"A":[[0.5,0.5]], "C":[[1,0],[0,1]]}}
// A child's parents are ordered by the first appearance of their edge.
// Without "cpts" the document describes a structure only.

// Parses the document and returns the net plus every violation found
// (unknown edge endpoints are reported too). Throws ParseError on malformed
// JSON shape.
std::pair<std::optional<BayesNet>, std::vector<Violation>> parse_net(const nlohmann::json& doc);
// Throws ParseError or InvalidNet.
BayesNet net_from_json(const nlohmann::json& doc);
BayesNet load_net(const std::string& path);
Structure load_structure(const std::string& path);
nlohmann::json net_to_json(const BayesNet& net);
void save_net(const BayesNet& net, const std::string& path);

// Query document:
//   {"atoms":[{"target":{"C":"1"},"evidence":{"A":"1"},"weight":0.5,"label":1.0}],
//    "patterns":[{"target_vars":["C"],"evidence_vars":["A"],"pinned":{},"weight":0.5}]}
// Values may be given as strings or numbers. When no entry carries a weight,
// every atom and pattern gets an equal share. Labels, if used, must be given
// on every atom and no pattern.
struct QueryFile {
  QueryDistribution dist;
  // Parallel to dist.atoms() when the file is labeled.
  std::optional<std::vector<double>> labels;

  std::vector<LabeledQuery> labeled() const;
  std::vector<StatQuery> queries() const;
  std::vector<double> weights() const;
};

QueryFile parse_queries(const BayesNet& net, const nlohmann::json& doc);
QueryFile load_queries(const BayesNet& net, const std::string& path);
nlohmann::json queries_to_json(const BayesNet& net, const std::vector<LabeledQuery>& qs,
                               const std::vector<double>& weights);

// Dataset CSV: header of variable names (any order), rows of value labels.
// Columns are reordered to the net's variable order.
Dataset read_dataset(const BayesNet& net, std::istream& in);
Dataset load_dataset(const BayesNet& net, const std::string& path);
void write_dataset(const Dataset& data, std::ostream& out);
void save_dataset(const Dataset& data, const std::string& path);

// Shortest representation that parses back to the same double.
std::string format_double(double x);

nlohmann::json report_to_json(const BayesNet& net, const ErrReport& report);
// query_id,weight,hypothesis,reference,sq_error rows then "aggregate,...".
void write_report_csv(const ErrReport& report, std::ostream& out);

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

}  // namespace qbn::io
