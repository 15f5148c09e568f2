#include "etfc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "etfc/errors.hpp"

namespace etfc {

namespace {

using nlohmann::json;

std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

void reject_unknown(const YAML::Node& node, const std::string& section,
                    const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("section '" + section + "' must be a mapping" + where(node));
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + (section.empty() ? key : section + "." + key) + "'" +
                        where(kv.first));
  }
}

YAML::Node require(const YAML::Node& node, const std::string& section, const char* key) {
  const YAML::Node v = node[key];
  if (!v) throw ConfigError("missing required key '" + section + "." + key + "'");
  return v;
}

template <class T>
T scalar(const YAML::Node& v, const std::string& name) {
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("key '" + name + "' has an invalid value" + where(v));
  }
}

Vec vector_of(const YAML::Node& v, int dim, const std::string& name) {
  if (!v.IsSequence() || static_cast<int>(v.size()) != dim)
    throw ConfigError("'" + name + "' must be a list of " + std::to_string(dim) + " numbers" +
                      where(v));
  Vec out(dim);
  for (int c = 0; c < dim; ++c) out[c] = scalar<double>(v[static_cast<std::size_t>(c)], name);
  return out;
}

Points points_of(const YAML::Node& v, int count, int dim, const std::string& name) {
  if (!v.IsSequence() || static_cast<int>(v.size()) != count)
    throw ConfigError("'" + name + "' must list " + std::to_string(count) + " entries" + where(v));
  Points out;
  for (int i = 0; i < count; ++i)
    out.push_back(vector_of(v[static_cast<std::size_t>(i)], dim, name));
  return out;
}

template <class T>
void optional_scalar(const YAML::Node& sec, const std::string& section, const char* key, T& out) {
  if (sec && sec[key]) out = scalar<T>(sec[key], section + "." + key);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const char* file) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
    throw ConfigError(std::string(file) + ": row " + std::to_string(row) + ": bad number '" +
                      cell + "'");
  return v;
}

std::vector<std::string> trace_header(const ScenarioConfig& cfg) {
  const FormationSpec& spec = cfg.formation;
  std::vector<std::string> h{"t"};
  for (int i = 1; i <= spec.agent_count(); ++i) {
    for (int c = 1; c <= spec.dim(); ++c)
      h.push_back("x" + std::to_string(i) + "_" + std::to_string(c));
    if (cfg.mode == Mode::double_integrator)
      for (int c = 1; c <= spec.dim(); ++c)
        h.push_back("q" + std::to_string(i) + "_" + std::to_string(c));
  }
  for (const Edge& e : spec.graph().edges())
    h.push_back("len_" + std::to_string(e.tail + 1) + "_" + std::to_string(e.head + 1));
  return h;
}

std::vector<std::string> trigger_header(const ScenarioConfig& cfg) {
  std::vector<std::string> h{"agent", "t"};
  const int p = cfg.formation.dim();
  const bool dbl = cfg.mode == Mode::double_integrator;
  for (int c = 1; c <= p; ++c) h.push_back((dbl ? "ud_" : "u_") + std::to_string(c));
  if (dbl)
    for (int c = 1; c <= p; ++c) h.push_back("q_" + std::to_string(c));
  h.push_back("error_norm");
  return h;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + v[k];
  return out;
}

std::vector<std::vector<double>> read_rows(std::istream& is, const std::vector<std::string>& header,
                                           const char* file) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(std::string(file) + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv(line) != header)
    throw ConfigError(std::string(file) + ": header does not match the scenario; expected '" +
                      join(header) + "'");
  std::vector<std::vector<double>> rows;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw ConfigError(std::string(file) + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " columns, expected " +
                        std::to_string(header.size()));
    std::vector<double> r;
    r.reserve(cells.size());
    for (const auto& c : cells) r.push_back(parse_cell(c, row, file));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ConfigError("scenario must be a YAML mapping");
  reject_unknown(root, "",
                 {"format_version", "mode", "formation", "initial", "controller", "analysis",
                  "simulation"});

  const int version = scalar<int>(require(root, "", "format_version"), "format_version");
  if (version != kScenarioFormatVersion)
    throw ConfigError("unsupported format_version " + std::to_string(version) + "; expected " +
                      std::to_string(kScenarioFormatVersion));

  const std::string mode_name = scalar<std::string>(require(root, "", "mode"), "mode");
  Mode mode;
  if (mode_name == "single")
    mode = Mode::single;
  else if (mode_name == "double")
    mode = Mode::double_integrator;
  else
    throw ConfigError("mode must be 'single' or 'double', got '" + mode_name + "'");

  const YAML::Node f = require(root, "", "formation");
  reject_unknown(f, "formation", {"p", "delta", "edges", "d"});
  const int p = scalar<int>(require(f, "formation", "p"), "formation.p");
  if (p < 1) throw ConfigError("formation.p must be at least 1");
  const double delta = scalar<double>(require(f, "formation", "delta"), "formation.delta");
  if (!(delta > 0.0)) throw ConfigError("formation.delta must be positive");

  const YAML::Node init = require(root, "", "initial");
  reject_unknown(init, "initial", {"x0", "q0"});
  const YAML::Node x0n = require(init, "initial", "x0");
  if (!x0n.IsSequence() || x0n.size() < 2)
    throw ConfigError("initial.x0 must list at least two agents");
  const int n = static_cast<int>(x0n.size());

  const YAML::Node en = require(f, "formation", "edges");
  const YAML::Node dn = require(f, "formation", "d");
  if (!en.IsSequence() || !dn.IsSequence() || en.size() != dn.size())
    throw ConfigError("formation.edges and formation.d must be lists of equal length");
  std::vector<Edge> edges;
  std::vector<Vec> d;
  for (std::size_t k = 0; k < en.size(); ++k) {
    const YAML::Node e = en[k];
    if (!e.IsSequence() || e.size() != 2)
      throw ConfigError("formation.edges entries must be [i, j] pairs" + where(e));
    edges.push_back({scalar<int>(e[0], "formation.edges") - 1, scalar<int>(e[1], "formation.edges") - 1});
    d.push_back(vector_of(dn[k], p, "formation.d"));
  }

  Graph graph = [&] {
    try {
      return Graph(n, edges);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("formation.edges: ") + e.what());
    }
  }();
  ScenarioConfig cfg(FormationSpec(std::move(graph), p, std::move(d), delta));
  cfg.mode = mode;
  cfg.x0 = points_of(x0n, n, p, "initial.x0");
  if (init["q0"]) {
    if (mode != Mode::double_integrator) throw ConfigError("initial.q0 is only valid in double mode");
    cfg.q0 = points_of(init["q0"], n, p, "initial.q0");
  } else if (mode == Mode::double_integrator) {
    cfg.q0.assign(static_cast<std::size_t>(n), Vec::Zero(p));
  }

  const YAML::Node c = require(root, "", "controller");
  reject_unknown(c, "controller", {"alpha", "beta", "beta0_source", "beta1", "k3"});
  cfg.alpha = scalar<double>(require(c, "controller", "alpha"), "controller.alpha");
  cfg.beta = scalar<double>(require(c, "controller", "beta"), "controller.beta");
  if (c["beta0_source"]) {
    const std::string src = scalar<std::string>(c["beta0_source"], "controller.beta0_source");
    if (src == "conservative")
      cfg.conservative_beta0 = true;
    else if (src != "exact")
      throw ConfigError("controller.beta0_source must be 'exact' or 'conservative'");
  }
  if (c["beta1"] || c["k3"]) {
    if (mode != Mode::double_integrator)
      throw ConfigError("controller.beta1 and controller.k3 are only valid in double mode");
    if (c["beta1"]) cfg.beta1 = scalar<double>(c["beta1"], "controller.beta1");
    if (c["k3"]) cfg.k3 = scalar<double>(c["k3"], "controller.k3");
  }

  if (const YAML::Node a = root["analysis"]) {
    reject_unknown(a, "analysis", {"a", "b", "speed_tolerance"});
    optional_scalar(a, "analysis", "a", cfg.a);
    if (a["b"]) cfg.b = scalar<double>(a["b"], "analysis.b");
    optional_scalar(a, "analysis", "speed_tolerance", cfg.speed_tolerance);
  }
  if (const YAML::Node s = root["simulation"]) {
    reject_unknown(s, "simulation", {"horizon", "sample_dt", "tol_root", "h_scan", "guard"});
    optional_scalar(s, "simulation", "horizon", cfg.horizon);
    optional_scalar(s, "simulation", "sample_dt", cfg.sample_dt);
    optional_scalar(s, "simulation", "tol_root", cfg.tol.tol_root);
    optional_scalar(s, "simulation", "h_scan", cfg.tol.h_scan);
    optional_scalar(s, "simulation", "guard", cfg.tol.guard);
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read scenario " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str());
}

int output_precision() {
  const char* env = std::getenv(kPrecisionEnv);
  if (!env || !*env) return kDefaultPrecision;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 17)
    throw ConfigError(std::string(kPrecisionEnv) + " must be an integer in 1..17, got '" + env + "'");
  return static_cast<int>(v);
}

std::string format_number(double v, int digits) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) return "0";
  // Round to the requested significant digits first so the exponent is final.
  char sci[64];
  std::snprintf(sci, sizeof sci, "%.*e", digits - 1, v);
  const int exponent = std::atoi(std::strchr(sci, 'e') + 1);
  const int decimals = std::max(0, digits - 1 - exponent);
  std::string s(static_cast<std::size_t>(decimals + std::max(exponent, 0) + 32), '\0');
  const int len = std::snprintf(s.data(), s.size(), "%.*f", decimals, std::strtod(sci, nullptr));
  s.resize(static_cast<std::size_t>(len));
  return s;
}

void write_trace_csv(std::ostream& os, const ScenarioConfig& cfg,
                     const std::vector<TraceSample>& trace, int digits) {
  os << join(trace_header(cfg)) << '\n';
  const bool dbl = cfg.mode == Mode::double_integrator;
  for (const TraceSample& s : trace) {
    os << format_number(s.time, digits);
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      for (Eigen::Index c = 0; c < s.positions[i].size(); ++c)
        os << ',' << format_number(s.positions[i][c], digits);
      if (dbl)
        for (Eigen::Index c = 0; c < s.velocities[i].size(); ++c)
          os << ',' << format_number(s.velocities[i][c], digits);
    }
    for (double len : s.edge_lengths) os << ',' << format_number(len, digits);
    os << '\n';
  }
}

void write_triggers_csv(std::ostream& os, const ScenarioConfig& cfg,
                        const std::vector<TriggerRecord>& triggers, int digits) {
  os << join(trigger_header(cfg)) << '\n';
  const bool dbl = cfg.mode == Mode::double_integrator;
  for (const TriggerRecord& r : triggers) {
    os << r.agent + 1 << ',' << format_number(r.time, digits);
    for (Eigen::Index c = 0; c < r.control.size(); ++c) os << ',' << format_number(r.control[c], digits);
    if (dbl)
      for (Eigen::Index c = 0; c < r.velocity.size(); ++c)
        os << ',' << format_number(r.velocity[c], digits);
    os << ',' << format_number(r.error_norm, digits) << '\n';
  }
}

std::vector<TraceSample> read_trace_csv(std::istream& is, const ScenarioConfig& cfg) {
  const FormationSpec& spec = cfg.formation;
  const int n = spec.agent_count();
  const int p = spec.dim();
  const bool dbl = cfg.mode == Mode::double_integrator;
  std::vector<TraceSample> trace;
  for (const auto& row : read_rows(is, trace_header(cfg), "trace.csv")) {
    TraceSample s;
    s.time = row[0];
    std::size_t col = 1;
    for (int i = 0; i < n; ++i) {
      Vec x(p);
      for (int c = 0; c < p; ++c) x[c] = row[col++];
      s.positions.push_back(x);
      if (dbl) {
        Vec q(p);
        for (int c = 0; c < p; ++c) q[c] = row[col++];
        s.velocities.push_back(q);
      }
    }
    for (int k = 0; k < spec.graph().edge_count(); ++k) {
      const Edge& e = spec.graph().edge(k);
      s.edge_lengths.push_back((s.positions[static_cast<std::size_t>(e.tail)] -
                                s.positions[static_cast<std::size_t>(e.head)])
                                   .norm());
      s.edge_errors.push_back(edge_error(spec, s.positions, k).norm());
    }
    s.threshold = cfg.alpha * std::exp(-cfg.beta * s.time);
    trace.push_back(std::move(s));
  }
  return trace;
}

std::vector<TriggerRecord> read_triggers_csv(std::istream& is, const ScenarioConfig& cfg) {
  const int n = cfg.formation.agent_count();
  const int p = cfg.formation.dim();
  const bool dbl = cfg.mode == Mode::double_integrator;
  std::vector<TriggerRecord> out;
  std::size_t row_no = 1;
  for (const auto& row : read_rows(is, trigger_header(cfg), "triggers.csv")) {
    ++row_no;
    TriggerRecord r;
    const double agent = row[0];
    if (agent != std::floor(agent) || agent < 1 || agent > n)
      throw ConfigError("triggers.csv: row " + std::to_string(row_no) + ": agent out of range");
    r.agent = static_cast<int>(agent) - 1;
    r.time = row[1];
    std::size_t col = 2;
    r.control = Vec(p);
    for (int c = 0; c < p; ++c) r.control[c] = row[col++];
    if (dbl) {
      r.velocity = Vec(p);
      for (int c = 0; c < p; ++c) r.velocity[c] = row[col++];
    }
    r.error_norm = row[col];
    out.push_back(std::move(r));
  }
  return out;
}

json bounds_json(const ScenarioConfig& cfg, const Controller& ctl, const BoundSet& b) {
  json j;
  j["mode"] = to_string(ctl.mode);
  j["beta0"] = ctl.beta0.beta0;
  j["beta0_conservative"] = ctl.beta0.conservative;
  j["beta0_used"] = cfg.conservative_beta0 ? ctl.beta0.conservative : ctl.beta0.beta0;
  j["delta0"] = ctl.beta0.delta0;
  j["rho2"] = ctl.beta0.rho2;
  if (ctl.gains) {
    const GainSet& g = *ctl.gains;
    j["gains"] = {{"beta1", g.beta1}, {"k0", g.k0},         {"k1", g.k1}, {"k2", g.k2},
                  {"k3", g.k3},       {"k4", g.k4},         {"rho2_P", g.rho2_p},
                  {"P", {{g.k0, g.k1}, {g.k1, g.k2}}}};
  }
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j[ctl.mode == Mode::single ? "a" : "b"] = b.free_constant;
  j["k_nu"] = b.k_nu;
  j["V0"] = b.v0;
  j["k_V"] = b.k_v;
  j["envelope_at_horizon"] = b.envelope(cfg.horizon);
  const Graph& g = cfg.formation.graph();
  json edges = json::array();
  for (int k = 0; k < g.edge_count(); ++k) {
    json e{{"edge", {g.edge(k).tail + 1, g.edge(k).head + 1}},
           {"margin", cfg.formation.margin(k)},
           {"k_ij", b.k_edge[static_cast<std::size_t>(k)]}};
    if (!b.c_q_edge.empty()) e["c_q_ij"] = b.c_q_edge[static_cast<std::size_t>(k)];
    edges.push_back(e);
  }
  j["edges"] = edges;
  json agents = json::array();
  for (std::size_t i = 0; i < b.c_agent.size(); ++i)
    agents.push_back({{"agent", i + 1}, {"c_i", b.c_agent[i]}, {"xi_i", b.xi_agent[i]}});
  j["agents"] = agents;
  return j;
}

json report_json(const Report& report) {
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    json e{{"name", c.name}, {"passed", c.passed}, {"worst_time", c.worst_time}, {"detail", c.detail}};
    e["worst_margin"] = std::isfinite(c.worst_margin) ? json(c.worst_margin) : json(nullptr);
    checks.push_back(e);
  }
  return {{"all_passed", report.all_passed()}, {"checks", checks}};
}

void write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                       const RunResult& result, const Report& report, int digits) {
  std::filesystem::create_directories(dir);
  {
    std::ostringstream os;
    write_trace_csv(os, cfg, result.trace, digits);
    write_file(dir / "trace.csv", os.str());
  }
  {
    std::ostringstream os;
    write_triggers_csv(os, cfg, result.triggers, digits);
    write_file(dir / "triggers.csv", os.str());
  }
  write_file(dir / "bounds.json", bounds_json(cfg, result.controller, result.bounds).dump(2) + "\n");
  write_file(dir / "report.json", report_json(report).dump(2) + "\n");

  const FormationSpec& spec = cfg.formation;
  const int n = spec.agent_count();
  const std::filesystem::path plot = dir / "plot";
  std::filesystem::create_directories(plot);

  // One polyline per agent.
  for (int i = 0; i < n; ++i) {
    std::ostringstream os;
    os << "t";
    for (int c = 1; c <= spec.dim(); ++c) os << ",x_" << c;
    os << '\n';
    for (const TraceSample& s : result.trace) {
      os << format_number(s.time, digits);
      const Vec& x = s.positions[static_cast<std::size_t>(i)];
      for (Eigen::Index c = 0; c < x.size(); ++c) os << ',' << format_number(x[c], digits);
      os << '\n';
    }
    write_file(plot / ("trajectory_agent" + std::to_string(i + 1) + ".csv"), os.str());
  }

  std::ostringstream raster;
  raster << "agent,t\n";
  for (const TriggerRecord& r : result.triggers)
    raster << r.agent + 1 << ',' << format_number(r.time, digits) << '\n';
  write_file(plot / "trigger_raster.csv", raster.str());

  // Target shape placed on the terminal centroid, for overlaying.
  const Feasibility feas = check_feasible(spec);
  const Points& xt = result.trace.back().positions;
  Vec shift = Vec::Zero(spec.dim());
  for (int i = 0; i < n; ++i)
    shift += xt[static_cast<std::size_t>(i)] - feas.witness[static_cast<std::size_t>(i)];
  shift /= n;
  std::ostringstream target;
  target << "agent";
  for (int c = 1; c <= spec.dim(); ++c) target << ",x_" << c;
  target << '\n';
  for (int i = 0; i < n; ++i) {
    target << i + 1;
    const Vec tau = feas.witness[static_cast<std::size_t>(i)] + shift;
    for (Eigen::Index c = 0; c < tau.size(); ++c) target << ',' << format_number(tau[c], digits);
    target << '\n';
  }
  write_file(plot / "target_formation.csv", target.str());
}

}  // namespace etfc
