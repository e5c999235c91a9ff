#include "qbn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qbn::io {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed for " + path);
}

namespace {

json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string value_label(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  throw ParseError(where + ": value must be a string or an integer");
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing \"" + key + "\"");
  }
  return obj.at(key);
}

}  // namespace

// ---------------------------------------------------------------------------
// Nets

std::pair<std::optional<BayesNet>, std::vector<Violation>> parse_net(const json& doc) {
  if (!doc.is_object()) throw ParseError("net: document must be an object");
  std::vector<Violation> violations;
  Structure s;
  const json& vars = require(doc, "variables", "net");
  if (!vars.is_array()) throw ParseError("net: \"variables\" must be an array");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string where = "variables[" + std::to_string(i) + "]";
    Variable var;
    const json& name = require(vars[i], "name", where);
    if (!name.is_string()) throw ParseError(where + ": name must be a string");
    var.name = name.get<std::string>();
    const json& domain = require(vars[i], "domain", where);
    if (!domain.is_array()) throw ParseError(where + ": domain must be an array");
    for (const auto& label : domain) var.domain.push_back(value_label(label, where));
    s.variables.push_back(std::move(var));
  }
  s.parents.resize(s.variables.size());

  std::map<std::string, VarId> ids;
  for (VarId v = 0; v < s.size(); ++v) ids.emplace(s.variables[v].name, v);

  if (doc.contains("edges")) {
    const json& edges = doc.at("edges");
    if (!edges.is_array()) throw ParseError("net: \"edges\" must be an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string where = "edges[" + std::to_string(i) + "]";
      const json& e = edges[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
        throw ParseError(where + ": edge must be [\"parent\", \"child\"]");
      }
      const auto p = ids.find(e[0].get<std::string>());
      const auto c = ids.find(e[1].get<std::string>());
      if (p == ids.end() || c == ids.end()) {
        violations.push_back({where, "edge references an unknown variable"});
        continue;
      }
      s.parents[c->second].push_back(p->second);
    }
  }

  std::vector<CptRows> cpts(s.size());
  const bool has_cpts = doc.contains("cpts");
  if (has_cpts) {
    const json& tables = doc.at("cpts");
    if (!tables.is_object()) throw ParseError("net: \"cpts\" must be an object");
    for (const auto& [name, rows] : tables.items()) {
      const auto it = ids.find(name);
      if (it == ids.end()) {
        violations.push_back({"cpts." + name, "CPT for an unknown variable"});
        continue;
      }
      if (!rows.is_array()) throw ParseError("cpts." + name + ": rows must be an array");
      for (const auto& row : rows) {
        if (!row.is_array()) throw ParseError("cpts." + name + ": each row must be an array");
        std::vector<double> values;
        for (const auto& x : row) {
          if (!x.is_number()) throw ParseError("cpts." + name + ": entries must be numbers");
          values.push_back(x.get<double>());
        }
        cpts[it->second].push_back(std::move(values));
      }
    }
  }

  BayesNet net = has_cpts ? BayesNet(s, std::move(cpts)) : BayesNet::uniform(s);
  for (auto& v : validate(net)) violations.push_back(std::move(v));
  return {std::move(net), std::move(violations)};
}

BayesNet net_from_json(const json& doc) {
  auto [net, violations] = parse_net(doc);
  if (!violations.empty()) {
    std::string msg = "invalid net:";
    for (const auto& v : violations) msg += "\n  " + v.location + ": " + v.message;
    throw InvalidNet(msg, std::move(violations));
  }
  return std::move(*net);
}

BayesNet load_net(const std::string& path) { return net_from_json(parse_json_file(path)); }

Structure load_structure(const std::string& path) {
  json doc = parse_json_file(path);
  if (doc.is_object()) doc.erase("cpts");
  return net_from_json(doc).structure();
}

json net_to_json(const BayesNet& net) {
  json doc;
  doc["variables"] = json::array();
  doc["edges"] = json::array();
  doc["cpts"] = json::object();
  for (VarId v = 0; v < net.size(); ++v) {
    doc["variables"].push_back({{"name", net.variable(v).name}, {"domain", net.variable(v).domain}});
  }
  for (VarId v = 0; v < net.size(); ++v) {
    for (VarId p : net.parents(v)) {
      doc["edges"].push_back({net.variable(p).name, net.variable(v).name});
    }
    doc["cpts"][net.variable(v).name] = net.cpt(v);
  }
  return doc;
}

void save_net(const BayesNet& net, const std::string& path) {
  write_file(path, net_to_json(net).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Queries

std::vector<LabeledQuery> QueryFile::labeled() const {
  if (!labels) throw InvalidArgument("query file carries no labels");
  std::vector<LabeledQuery> out;
  out.reserve(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) out.push_back({dist.atoms()[i].query, (*labels)[i]});
  return out;
}

std::vector<StatQuery> QueryFile::queries() const {
  std::vector<StatQuery> out;
  out.reserve(dist.size());
  for (const auto& a : dist.atoms()) out.push_back(a.query);
  return out;
}

std::vector<double> QueryFile::weights() const {
  std::vector<double> out;
  out.reserve(dist.size());
  for (const auto& a : dist.atoms()) out.push_back(a.weight);
  return out;
}

namespace {

Assignment parse_assignment(const BayesNet& net, const json& obj, const std::string& where) {
  if (obj.is_null()) return {};
  if (!obj.is_object()) throw ParseError(where + ": assignment must be an object");
  Assignment a;
  for (const auto& [name, value] : obj.items()) {
    const auto v = net.find(name);
    if (!v) throw ParseError(where + ": unknown variable '" + name + "'");
    const auto idx = net.variable(*v).value_index(value_label(value, where));
    if (!idx) throw ParseError(where + ": value not in the domain of " + name);
    a.set(*v, *idx);
  }
  return a;
}

std::vector<VarId> parse_vars(const BayesNet& net, const json& arr, const std::string& where) {
  std::vector<VarId> out;
  if (arr.is_null()) return out;
  if (!arr.is_array()) throw ParseError(where + ": variable list must be an array");
  for (const auto& n : arr) {
    if (!n.is_string()) throw ParseError(where + ": variable names must be strings");
    const auto v = net.find(n.get<std::string>());
    if (!v) throw ParseError(where + ": unknown variable '" + n.get<std::string>() + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

QueryFile parse_queries(const BayesNet& net, const json& doc) {
  if (!doc.is_object()) throw ParseError("queries: document must be an object");
  const json atoms = doc.value("atoms", json::array());
  const json patterns = doc.value("patterns", json::array());
  if (!atoms.is_array() || !patterns.is_array()) {
    throw ParseError("queries: \"atoms\" and \"patterns\" must be arrays");
  }
  const std::size_t entries = atoms.size() + patterns.size();
  if (entries == 0) throw ParseError("queries: no atoms or patterns");

  std::size_t weighted = 0;
  for (const auto& a : atoms) weighted += a.contains("weight") ? 1 : 0;
  for (const auto& p : patterns) weighted += p.contains("weight") ? 1 : 0;
  if (weighted != 0 && weighted != entries) {
    throw ParseError("queries: either every entry or no entry carries a weight");
  }
  const bool uniform = weighted == 0;
  auto weight_of = [&](const json& e, const std::string& where) {
    if (uniform) return 1.0 / static_cast<double>(entries);
    const json& w = e.at("weight");
    if (!w.is_number()) throw ParseError(where + ": weight must be a number");
    return w.get<double>();
  };

  std::size_t labeled = 0;
  for (const auto& a : atoms) labeled += a.contains("label") ? 1 : 0;
  if (labeled != 0 && (labeled != atoms.size() || !patterns.empty())) {
    throw ParseError("queries: labels must be given on every atom and patterns cannot be labeled");
  }

  std::vector<WeightedQuery> flat;
  std::map<StatQuery, double> label_of;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string where = "atoms[" + std::to_string(i) + "]";
    const json& a = atoms[i];
    if (!a.is_object()) throw ParseError(where + ": atom must be an object");
    StatQuery q;
    try {
      q = StatQuery::make(parse_assignment(net, require(a, "target", where), where + ".target"),
                          parse_assignment(net, a.value("evidence", json()), where + ".evidence"));
    } catch (const InvalidArgument& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (labeled) {
      const json& l = a.at("label");
      if (!l.is_number()) throw ParseError(where + ": label must be a number");
      const double label = l.get<double>();
      if (!(label >= 0.0 && label <= 1.0)) throw ParseError(where + ": label outside [0,1]");
      auto [it, inserted] = label_of.emplace(q, label);
      if (!inserted && it->second != label) {
        throw ParseError(where + ": duplicate query with a different label");
      }
    }
    flat.push_back({std::move(q), weight_of(a, where)});
  }
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const std::string where = "patterns[" + std::to_string(i) + "]";
    const json& p = patterns[i];
    if (!p.is_object()) throw ParseError(where + ": pattern must be an object");
    QueryPattern pat;
    pat.target_vars = parse_vars(net, p.value("target_vars", json()), where + ".target_vars");
    pat.evidence_vars = parse_vars(net, p.value("evidence_vars", json()), where + ".evidence_vars");
    pat.pinned = parse_assignment(net, p.value("pinned", json()), where + ".pinned");
    try {
      for (auto& wq : expand_pattern(net, pat, weight_of(p, where))) flat.push_back(std::move(wq));
    } catch (const InvalidArgument& e) {
      throw ParseError(where + ": " + e.what());
    }
  }

  QueryFile out;
  try {
    out.dist = QueryDistribution::from_atoms(std::move(flat));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("queries: ") + e.what());
  }
  if (labeled) {
    std::vector<double> labels;
    for (const auto& a : out.dist.atoms()) labels.push_back(label_of.at(a.query));
    out.labels = std::move(labels);
  }
  return out;
}

QueryFile load_queries(const BayesNet& net, const std::string& path) {
  return parse_queries(net, parse_json_file(path));
}

json queries_to_json(const BayesNet& net, const std::vector<LabeledQuery>& qs,
                     const std::vector<double>& weights) {
  auto assignment = [&](const Assignment& a) {
    json obj = json::object();
    for (const auto& [v, x] : a) obj[net.variable(v).name] = net.variable(v).domain[x];
    return obj;
  };
  json doc;
  doc["atoms"] = json::array();
  for (std::size_t i = 0; i < qs.size(); ++i) {
    doc["atoms"].push_back({{"target", assignment(qs[i].query.target)},
                            {"evidence", assignment(qs[i].query.evidence)},
                            {"weight", weights.at(i)},
                            {"label", qs[i].label}});
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset read_dataset(const BayesNet& net, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset: missing header");
  const auto header = split_csv(line);
  if (header.size() != net.size()) {
    throw ParseError("dataset: header has " + std::to_string(header.size()) + " columns, net has " +
                     std::to_string(net.size()) + " variables");
  }
  std::vector<VarId> column_var;
  std::set<VarId> seen;
  for (const auto& name : header) {
    const auto v = net.find(name);
    if (!v || !seen.insert(*v).second) throw ParseError("dataset: bad header column '" + name + "'");
    column_var.push_back(*v);
  }
  Dataset data(net.structure().variables);
  std::vector<ValueId> tuple(net.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ParseError("dataset line " + std::to_string(lineno) + ": wrong number of columns");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto idx = net.variable(column_var[c]).value_index(cells[c]);
      if (!idx) {
        throw ParseError("dataset line " + std::to_string(lineno) + ": value '" + cells[c] +
                         "' not in the domain of " + header[c]);
      }
      tuple[column_var[c]] = *idx;
    }
    data.push_back(tuple);
  }
  return data;
}

Dataset load_dataset(const BayesNet& net, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_dataset(net, in);
}

void write_dataset(const Dataset& data, std::ostream& out) {
  for (std::size_t c = 0; c < data.width(); ++c) {
    out << (c ? "," : "") << data.variables()[c].name;
  }
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << data.variables()[c].domain[row[c]];
    }
    out << '\n';
  }
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ostringstream buf;
  write_dataset(data, buf);
  write_file(path, buf.str());
}

// ---------------------------------------------------------------------------
// Reports

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json report_to_json(const BayesNet& net, const ErrReport& report) {
  json doc;
  doc["mode"] = to_string(report.mode);
  doc["aggregate"] = report.aggregate;
  doc["failures"] = report.failures();
  doc["queries"] = json::array();
  for (std::size_t i = 0; i < report.per_query.size(); ++i) {
    const auto& row = report.per_query[i];
    json r = {{"query_id", i},
              {"query", describe(net, row.query)},
              {"weight", row.weight},
              {"reference", row.reference}};
    if (row.failure.empty()) {
      r["hypothesis"] = row.hypothesis;
      r["sq_error"] = row.sq_error;
    } else {
      r["hypothesis"] = nullptr;
      r["sq_error"] = nullptr;
      r["failure"] = row.failure;
    }
    doc["queries"].push_back(std::move(r));
  }
  return doc;
}

void write_report_csv(const ErrReport& report, std::ostream& out) {
  out << "query_id,weight,hypothesis,reference,sq_error\n";
  for (std::size_t i = 0; i < report.per_query.size(); ++i) {
    const auto& row = report.per_query[i];
    out << i << ',' << format_double(row.weight) << ',' << format_double(row.hypothesis) << ','
        << format_double(row.reference) << ',' << format_double(row.sq_error) << '\n';
  }
  out << "aggregate,,,," << format_double(report.aggregate) << '\n';
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
  out << "restart,iteration,err,grad_norm,step\n";
  for (const auto& t : trace) {
    out << t.restart << ',' << t.iteration << ',' << format_double(t.err) << ','
        << format_double(t.grad_norm) << ',' << format_double(t.step) << '\n';
  }
}

}  // namespace qbn::io
