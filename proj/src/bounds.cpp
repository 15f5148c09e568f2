#include "etfc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "etfc/errors.hpp"
#include "etfc/graph.hpp"
#include "etfc/tension.hpp"

namespace etfc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bounds are evaluated analytically, up to the pole itself.
EdgeTension exact_tension(const FormationSpec& spec, int k) { return edge_tension(spec, k, 0.0); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Tracks the worst (smallest) margin of one check.
class Worst {
 public:
  explicit Worst(std::string name) { result_.name = std::move(name); }

  void observe(double margin, double time, const std::string& where) {
    if (!seen_ || margin < result_.worst_margin) {
      seen_ = true;
      result_.worst_margin = margin;
      result_.worst_time = time;
      where_ = where;
    }
  }

  CheckResult finish(bool passed, const std::string& extra = {}) {
    result_.passed = passed;
    if (!seen_) result_.worst_margin = kInf;
    std::ostringstream s;
    if (seen_) s << "worst margin " << fmt(result_.worst_margin) << " at t=" << fmt(result_.worst_time);
    if (!where_.empty()) s << " (" << where_ << ")";
    if (!extra.empty()) s << (seen_ ? "; " : "") << extra;
    result_.detail = s.str();
    return result_;
  }

  double margin() const { return seen_ ? result_.worst_margin : kInf; }

 private:
  CheckResult result_;
  std::string where_;
  bool seen_ = false;
};

std::string edge_label(const FormationSpec& spec, int k) {
  const Edge& e = spec.graph().edge(k);
  return "edge (" + std::to_string(e.tail + 1) + "," + std::to_string(e.head + 1) + ")";
}

}  // namespace

Beta0Info compute_beta0(const FormationSpec& spec) {
  const Graph& g = spec.graph();
  const Eigen::MatrixXd d = incidence(g, Orientation::canonical(g));
  Beta0Info out;
  out.rho2 = rho2(d * d.transpose());
  out.delta0 = check_margins(spec).delta0;
  out.beta0 = out.rho2 / out.delta0;
  const double n = g.node_count();
  out.conservative = 4.0 / (n * (n - 1.0) * spec.radius());
  return out;
}

double BoundSet::envelope(double t) const { return 2.0 * std::sqrt(k_v) * std::exp(-rate * t); }

double edge_length_bound(double k_nu, double rho) {
  return -k_nu + std::sqrt(k_nu * k_nu + 2.0 * k_nu * rho);
}

double disagreement(const FormationSpec& spec, const Points& x0) {
  spec.check_points(x0, "x0");
  const Points tau = check_feasible(spec).witness;
  Vec mean = Vec::Zero(spec.dim());
  for (std::size_t i = 0; i < x0.size(); ++i) mean += x0[i] - tau[i];
  mean /= static_cast<double>(x0.size());
  double v = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) v += (x0[i] - tau[i] - mean).squaredNorm();
  return 0.5 * v;
}

double disagreement_double(const FormationSpec& spec, const Points& x0, const Points& q0,
                           const Eigen::Matrix2d& p) {
  spec.check_points(x0, "x0");
  spec.check_points(q0, "q0");
  const Points tau = check_feasible(spec).witness;
  const double n = static_cast<double>(x0.size());
  Vec ybar = Vec::Zero(spec.dim());
  Vec qbar = Vec::Zero(spec.dim());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    ybar += x0[i] - tau[i];
    qbar += q0[i];
  }
  ybar /= n;
  qbar /= n;
  double v = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const Vec y = x0[i] - tau[i] - ybar;
    const Vec q = q0[i] - qbar;
    v += p(0, 0) * y.squaredNorm() + 2.0 * p(0, 1) * y.dot(q) + p(1, 1) * q.squaredNorm();
  }
  return 0.5 * v;
}

BoundSet compute_bounds_single(const FormationSpec& spec, const Points& x0,
                               const SingleParams& params, double a) {
  if (!(a > 0.0 && a < 1.0))
    throw ConfigError("proof constant a=" + fmt(a) + " must lie in (0,1)");
  params.validate();
  const Graph& g = spec.graph();
  const double n = g.node_count();
  const double alpha = params.alpha;
  const double beta = params.beta;

  BoundSet b;
  b.mode = Mode::single;
  const Beta0Info info = compute_beta0(spec);
  b.beta0 = params.beta0;
  b.delta0 = info.delta0;
  b.free_constant = a;
  b.rate = beta;
  b.k_nu = total_tension(spec, x0, 0.0) + n * alpha * alpha / (8.0 * a * beta);
  for (int k = 0; k < g.edge_count(); ++k)
    b.k_edge.push_back(edge_length_bound(b.k_nu, spec.margin(k)));
  b.v0 = disagreement(spec, x0);
  b.k_v = b.v0 + n * alpha * alpha / (8.0 * params.beta0 * (params.beta0 - beta));

  const double root_kv = std::sqrt(b.k_v);
  // sum_{l in N_i} 2 f_il(k_il) sqrt(k_V)
  std::vector<double> speed(static_cast<std::size_t>(g.node_count()), 0.0);
  for (int i = 0; i < g.node_count(); ++i)
    for (int k : g.incident_edges(i))
      speed[static_cast<std::size_t>(i)] +=
          2.0 * exact_tension(spec, k).omega(b.k_edge[static_cast<std::size_t>(k)]) * root_kv;

  for (int i = 0; i < g.node_count(); ++i) {
    double c = 0.0;
    const auto nbrs = g.neighbors(i);
    const auto edges = g.incident_edges(i);
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
      const int k = edges[s];
      const double gk = exact_tension(spec, k).g_bound(b.k_edge[static_cast<std::size_t>(k)]);
      c += gk * (2.0 * alpha + speed[static_cast<std::size_t>(i)] +
                 speed[static_cast<std::size_t>(nbrs[s])]);
    }
    b.c_agent.push_back(c);
    b.xi_agent.push_back(alpha / (c + alpha * beta));
  }
  return b;
}

BoundSet compute_bounds_double(const FormationSpec& spec, const Points& x0, const Points& q0,
                               const GainSet& gains, const DoubleParams& params, double b_const) {
  if (!(b_const > 0.0 && b_const < gains.k3))
    throw ConfigError("proof constant b=" + fmt(b_const) + " must lie in (0,k3=" +
                      fmt(gains.k3) + ")");
  params.validate(gains);
  spec.check_points(q0, "q0");
  const Graph& g = spec.graph();
  const double n = g.node_count();
  const double alpha = params.alpha;
  const double beta = params.beta;

  BoundSet b;
  b.mode = Mode::double_integrator;
  const Beta0Info info = compute_beta0(spec);
  b.beta0 = info.beta0;
  b.delta0 = info.delta0;
  b.free_constant = b_const;
  b.rate = beta;
  b.k_nu = total_tension_double(spec, x0, q0, gains.k1, 0.0) +
           n * alpha * alpha / (8.0 * b_const * beta);
  for (int k = 0; k < g.edge_count(); ++k)
    b.k_edge.push_back(edge_length_bound(b.k_nu / gains.k1, spec.margin(k)));
  b.v0 = disagreement_double(spec, x0, q0, gains.p());
  b.k_v = b.v0 + n * alpha * alpha /
                     (8.0 * gains.beta1 * ((2.0 - gains.k4) * gains.rho2_p - beta));

  const double root_kv = std::sqrt(b.k_v);
  auto f_at = [&](int k) {
    return exact_tension(spec, k).omega(b.k_edge[static_cast<std::size_t>(k)]);
  };
  std::vector<double> f_sum(static_cast<std::size_t>(g.node_count()), 0.0);
  for (int i = 0; i < g.node_count(); ++i)
    for (int k : g.incident_edges(i)) f_sum[static_cast<std::size_t>(i)] += f_at(k);

  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edge(k);
    const double inner = (gains.k1 + gains.k2) * (f_sum[static_cast<std::size_t>(e.tail)] +
                                                  f_sum[static_cast<std::size_t>(e.head)]) +
                         gains.k3;
    b.c_q_edge.push_back(2.0 * alpha + 2.0 * inner * root_kv);
  }

  for (int i = 0; i < g.node_count(); ++i) {
    double c = 0.0;
    for (int k : g.incident_edges(i)) {
      const EdgeTension t = exact_tension(spec, k);
      const double kij = b.k_edge[static_cast<std::size_t>(k)];
      c += 2.0 * gains.k1 * t.g_bound(kij) * root_kv + 4.0 * gains.k2 * t.h_bound(kij) * b.k_v +
           gains.k2 * t.omega(kij) * b.c_q_edge[static_cast<std::size_t>(k)];
    }
    b.c_agent.push_back(c);
    b.xi_agent.push_back(alpha / (c + alpha * beta));
  }
  return b;
}

bool Report::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* Report::find(const std::string& name) const {
  for (const CheckResult& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

Report certify_trace(const FormationSpec& spec, const std::vector<TraceSample>& trace,
                     const std::vector<TriggerRecord>& triggers, const BoundSet& bounds,
                     const CertifyOptions& opts) {
  const Graph& g = spec.graph();
  const int n = g.node_count();
  const int m = g.edge_count();
  const bool dbl = opts.mode == Mode::double_integrator;
  if (dbl && !opts.gains) throw std::invalid_argument("double-mode certification needs gains");
  Report report;

  // Horizon and ordering.
  {
    Worst w("horizon_complete");
    bool ok = !trace.empty();
    std::string extra;
    if (ok) {
      const double end_tol = 1e-9 * std::max(1.0, opts.horizon);
      if (trace.front().time != 0.0) {
        ok = false;
        extra = "trace does not start at t=0";
      }
      const double shortfall = opts.horizon - trace.back().time;
      w.observe(-std::abs(shortfall), trace.back().time, "final sample vs horizon");
      if (std::abs(shortfall) > end_tol) {
        ok = false;
        extra = "trace ends at t=" + fmt(trace.back().time) + ", horizon is " + fmt(opts.horizon);
      }
      for (std::size_t s = 1; s < trace.size(); ++s)
        if (!(trace[s].time > trace[s - 1].time)) {
          ok = false;
          extra = "sample times not strictly increasing at t=" + fmt(trace[s].time);
          break;
        }
      for (int i = 0; i < n; ++i) {
        const bool fired = std::any_of(triggers.begin(), triggers.end(), [&](const TriggerRecord& r) {
          return r.agent == i && r.time == 0.0;
        });
        if (!fired) {
          ok = false;
          extra = "agent " + std::to_string(i + 1) + " has no trigger at t=0";
        }
      }
    } else {
      extra = "empty trace";
    }
    report.checks.push_back(w.finish(ok, extra));
  }
  if (trace.empty()) return report;

  // Per-agent trigger schedule.
  std::vector<std::vector<const TriggerRecord*>> per_agent(static_cast<std::size_t>(n));
  for (const TriggerRecord& r : triggers) {
    if (r.agent < 0 || r.agent >= n) throw std::invalid_argument("trigger for unknown agent");
    per_agent[static_cast<std::size_t>(r.agent)].push_back(&r);
  }
  for (auto& list : per_agent)
    std::stable_sort(list.begin(), list.end(),
                     [](const TriggerRecord* a, const TriggerRecord* b) { return a->time < b->time; });

  Worst connectivity("connectivity");
  Worst length_bound("edge_length_bound");
  Worst weight_bound("weight_bound");
  Worst envelope("exponential_envelope");
  Worst rule("trigger_rule");
  bool weight_ok = true;
  bool rule_ok = true;
  std::string rule_extra;

  std::vector<double> f_at_k(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k)
    f_at_k[static_cast<std::size_t>(k)] =
        exact_tension(spec, k).omega(bounds.k_edge[static_cast<std::size_t>(k)]);

  for (const TraceSample& s : trace) {
    const double t = s.time;
    const double env = bounds.envelope(t);
    for (int k = 0; k < m; ++k) {
      const Edge& e = g.edge(k);
      const std::string where = edge_label(spec, k);
      const Vec& xi = s.positions[static_cast<std::size_t>(e.tail)];
      const Vec& xj = s.positions[static_cast<std::size_t>(e.head)];
      const double len = (xi - xj).norm();
      const double y = edge_error(spec, s.positions, k).norm();
      connectivity.observe(spec.radius() - len, t, where);
      length_bound.observe(bounds.k_edge[static_cast<std::size_t>(k)] - y, t, where);
      try {
        const double w = edge_tension(spec, k, opts.guard).omega(y);
        weight_bound.observe(f_at_k[static_cast<std::size_t>(k)] - w, t, where);
      } catch (const ConnectivityViolation&) {
        weight_bound.observe(-kInf, t, where);
        weight_ok = false;
      }
      double z = y;
      if (dbl) {
        const double dq = (s.velocities[static_cast<std::size_t>(e.tail)] -
                           s.velocities[static_cast<std::size_t>(e.head)])
                              .norm();
        z = std::hypot(y, dq);
      }
      envelope.observe(env - z, t, where);
    }

    const double threshold = opts.alpha * std::exp(-opts.beta * t);
    for (int i = 0; i < n; ++i) {
      const auto& list = per_agent[static_cast<std::size_t>(i)];
      const auto it = std::upper_bound(list.begin(), list.end(), t,
                                       [](double v, const TriggerRecord* r) { return v < r->time; });
      const std::string where = "agent " + std::to_string(i + 1);
      if (it == list.begin()) {
        rule_ok = false;
        rule_extra = "no control known for " + where + " at t=" + fmt(t);
        continue;
      }
      const TriggerRecord& last = **(it - 1);
      double err = kInf;
      try {
        err = dbl ? error_double_from_state(spec, *opts.gains, i, s.positions, s.velocities,
                                            last.control, opts.guard)
                        .norm()
                  : error_single_from_state(spec, i, s.positions, last.control, opts.guard).norm();
      } catch (const ConnectivityViolation&) {
      }
      rule.observe(threshold - err, t, where);
    }
  }

  report.checks.push_back(connectivity.finish(connectivity.margin() > 0.0,
                                              "radius " + fmt(spec.radius())));
  report.checks.push_back(length_bound.finish(length_bound.margin() >= 0.0));
  report.checks.push_back(weight_bound.finish(weight_ok && weight_bound.margin() > 0.0));
  report.checks.push_back(envelope.finish(envelope.margin() >= -opts.slack,
                                          "k_V=" + fmt(bounds.k_v) + ", rate " + fmt(bounds.rate)));
  report.checks.push_back(rule.finish(rule_ok && rule.margin() >= -opts.slack, rule_extra));

  // Inter-event floor and event count.
  {
    Worst gap("min_trigger_gap");
    for (int i = 0; i < n; ++i) {
      const auto& list = per_agent[static_cast<std::size_t>(i)];
      for (std::size_t k = 1; k < list.size(); ++k)
        gap.observe(list[k]->time - list[k - 1]->time - bounds.xi_agent[static_cast<std::size_t>(i)],
                    list[k]->time, "agent " + std::to_string(i + 1));
    }
    report.checks.push_back(gap.finish(gap.margin() > 0.0));

    double cap = n;
    for (double xi : bounds.xi_agent) cap += opts.horizon / xi;
    Worst count("event_count");
    count.observe(cap - static_cast<double>(triggers.size()), opts.horizon, "");
    report.checks.push_back(count.finish(static_cast<double>(triggers.size()) < cap,
                                         std::to_string(triggers.size()) + " triggers, cap " +
                                             fmt(cap)));
  }

  // Terminal convergence.
  {
    const TraceSample& last = trace.back();
    const double env = bounds.envelope(last.time);
    Worst terminal("terminal_formation");
    for (int k = 0; k < m; ++k)
      terminal.observe(env - edge_error(spec, last.positions, k).norm(), last.time,
                       edge_label(spec, k));
    report.checks.push_back(terminal.finish(terminal.margin() >= 0.0,
                                            "envelope at end " + fmt(env)));
    if (dbl) {
      Worst speed("speed_decay");
      for (int i = 0; i < n; ++i)
        speed.observe(env + opts.speed_tolerance - last.velocities[static_cast<std::size_t>(i)].norm(),
                      last.time, "agent " + std::to_string(i + 1));
      report.checks.push_back(speed.finish(speed.margin() >= 0.0,
                                           "tolerance " + fmt(opts.speed_tolerance)));
    }
  }
  return report;
}

}  // namespace etfc
