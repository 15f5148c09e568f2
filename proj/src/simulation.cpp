#include "etfc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "etfc/errors.hpp"
#include "etfc/tension.hpp"

namespace etfc {

namespace {

std::size_t slot_of(const Graph& g, int agent, int neighbor) {
  const auto nb = g.neighbors(agent);
  return static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), neighbor) - nb.begin());
}

class Engine {
 public:
  Engine(const ScenarioConfig& cfg, const Controller& ctl, const RunOptions& opts)
      : cfg_(cfg), ctl_(ctl), opts_(opts), spec_(cfg.formation), g_(spec_.graph()),
        n_(g_.node_count()), x_(cfg.x0), dbl_(ctl.mode == Mode::double_integrator) {
    const Vec zero = Vec::Zero(spec_.dim());
    q_ = dbl_ ? cfg.q0 : Points{};
    control_.assign(static_cast<std::size_t>(n_), zero);
    candidate_.assign(static_cast<std::size_t>(n_), std::nullopt);
    if (dbl_)
      kd_.resize(static_cast<std::size_t>(n_));
    else
      ks_.resize(static_cast<std::size_t>(n_));
    // Before the first trigger every agent holds zero input and zero-input
    // neighbor data sensed at t = 0.
    for (int i = 0; i < n_; ++i) {
      const std::size_t iu = static_cast<std::size_t>(i);
      const Points rel = relative_to_neighbors(spec_, i, x_);
      const auto nb = g_.neighbors(i);
      if (dbl_) {
        DoubleKnowledge& k = kd_[iu];
        k.agent = i;
        k.feedforward = zero;
        for (std::size_t s = 0; s < nb.size(); ++s)
          k.neighbors.push_back({nb[s], 0.0, rel[s], q_[iu] - q_[static_cast<std::size_t>(nb[s])], zero});
      } else {
        SingleKnowledge& k = ks_[iu];
        k.agent = i;
        k.control = zero;
        for (std::size_t s = 0; s < nb.size(); ++s) k.neighbors.push_back({nb[s], 0.0, rel[s], zero});
      }
    }
  }

  void execute(RunResult& out) {
    for (int i = 0; i < n_; ++i) guarded(i, 0.0, [&] { fire(i, out); });
    for (int i = 0; i < n_; ++i) guarded(i, 0.0, [&] { refresh(i); });

    std::size_t events = static_cast<std::size_t>(n_);
    for (;;) {
      int next = -1;
      for (int i = 0; i < n_; ++i) {
        const auto& c = candidate_[static_cast<std::size_t>(i)];
        if (c && (next < 0 || *c < *candidate_[static_cast<std::size_t>(next)])) next = i;
      }
      if (next < 0) break;
      const double t = *candidate_[static_cast<std::size_t>(next)];
      if (++events > opts_.max_events) {
        std::ostringstream msg;
        msg << "event budget of " << opts_.max_events << " exhausted";
        throw SimulationFault(msg.str(), t, next);
      }
      guarded(next, t, [&] {
        advance(t);
        fire(next, out);
        refresh(next);
        for (int j : g_.neighbors(next)) refresh(j);
      });
    }
    guarded(-1, cfg_.horizon, [&] { advance(cfg_.horizon); });
  }

 private:
  template <class F>
  void guarded(int agent, double t, F&& f) {
    try {
      f();
    } catch (const SimulationFault&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationFault(e.what(), t, agent);
    }
  }

  void advance(double t) {
    const double dt = t - now_;
    if (dt <= 0.0) return;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i) {
      if (dbl_)
        propagate_double(x_[i], q_[i], control_[i], ctl_.gains->k3, dt);
      else
        x_[i] = propagate_single(x_[i], control_[i], dt);
    }
    now_ = t;
  }

  double held_error(int i) const {
    const std::size_t iu = static_cast<std::size_t>(i);
    if (dbl_) return error_double(spec_, *ctl_.gains, kd_[iu], now_, cfg_.tol.guard).norm();
    return error_single(spec_, ks_[iu], now_, cfg_.tol.guard).norm();
  }

  void fire(int i, RunResult& out) {
    const std::size_t iu = static_cast<std::size_t>(i);
    const auto nb = g_.neighbors(i);
    TriggerRecord rec;
    rec.agent = i;
    rec.time = now_;
    rec.error_norm = held_error(i);
    rec.payload_positions = relative_to_neighbors(spec_, i, x_);

    if (dbl_) {
      for (int j : nb) rec.payload_velocities.push_back(q_[iu] - q_[static_cast<std::size_t>(j)]);
      const Vec ud = feedforward_double(spec_, *ctl_.gains, i, rec.payload_positions,
                                        rec.payload_velocities, cfg_.tol.guard);
      DoubleKnowledge& k = kd_[iu];
      k.last_trigger = now_;
      k.feedforward = ud;
      for (std::size_t s = 0; s < nb.size(); ++s) {
        const std::size_t ju = static_cast<std::size_t>(nb[s]);
        k.neighbors[s] = {nb[s], now_, rec.payload_positions[s], rec.payload_velocities[s],
                          control_[ju]};
        DoublePayload& back = kd_[ju].neighbors[slot_of(g_, nb[s], i)];
        back = {i, now_, -rec.payload_positions[s], -rec.payload_velocities[s], ud};
      }
      control_[iu] = ud;
      rec.velocity = q_[iu];
    } else {
      const Vec u = control_single(spec_, i, rec.payload_positions, cfg_.tol.guard);
      SingleKnowledge& k = ks_[iu];
      k.last_trigger = now_;
      k.control = u;
      for (std::size_t s = 0; s < nb.size(); ++s) {
        const std::size_t ju = static_cast<std::size_t>(nb[s]);
        k.neighbors[s] = {nb[s], now_, rec.payload_positions[s], control_[ju]};
        SinglePayload& back = ks_[ju].neighbors[slot_of(g_, nb[s], i)];
        back = {i, now_, -rec.payload_positions[s], u};
      }
      control_[iu] = u;
    }
    rec.control = control_[iu];
    out.triggers.push_back(std::move(rec));
    out.segments.push_back({now_, x_, q_, control_});
  }

  void refresh(int i) {
    const std::size_t iu = static_cast<std::size_t>(i);
    candidate_[iu] =
        dbl_ ? next_trigger_time_double(ctl_.dbl, spec_, *ctl_.gains, kd_[iu], now_, cfg_.horizon,
                                        cfg_.tol)
             : next_trigger_time_single(ctl_.single, spec_, ks_[iu], now_, cfg_.horizon, cfg_.tol);
    // A crossing at the current instant for an agent that just fired would
    // repeat forever; its error is zero there by construction.
    if (candidate_[iu] && *candidate_[iu] <= now_ && just_fired(i)) candidate_[iu] = std::nullopt;
  }

  bool just_fired(int i) const {
    const std::size_t iu = static_cast<std::size_t>(i);
    return dbl_ ? kd_[iu].last_trigger == now_ : ks_[iu].last_trigger == now_;
  }

  const ScenarioConfig& cfg_;
  const Controller& ctl_;
  const RunOptions& opts_;
  const FormationSpec& spec_;
  const Graph& g_;
  int n_;
  Points x_;
  Points q_;
  Points control_;
  double now_ = 0.0;
  bool dbl_;
  std::vector<SingleKnowledge> ks_;
  std::vector<DoubleKnowledge> kd_;
  std::vector<std::optional<double>> candidate_;
};

template <bool Parallel>
std::vector<TraceSample> sample_trace(const ScenarioConfig& cfg, const Controller& ctl,
                                      const std::vector<Segment>& segments,
                                      const std::vector<double>& times) {
  std::vector<TraceSample> out(times.size());
  const long count = static_cast<long>(times.size());
  if constexpr (Parallel) {
    // Exceptions may not leave the parallel region; keep the first by index.
    std::vector<std::exception_ptr> faults(times.size());
#pragma omp parallel for schedule(static)
    for (long k = 0; k < count; ++k) {
      try {
        out[static_cast<std::size_t>(k)] =
            sample_at(cfg, ctl, segments, times[static_cast<std::size_t>(k)]);
      } catch (...) {
        faults[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
    for (const auto& f : faults)
      if (f) std::rethrow_exception(f);
  } else {
    for (long k = 0; k < count; ++k)
      out[static_cast<std::size_t>(k)] = sample_at(cfg, ctl, segments, times[static_cast<std::size_t>(k)]);
  }
  return out;
}

BatchItem run_one(const ScenarioConfig& cfg) {
  BatchItem item;
  try {
    RunOptions opts;
    opts.sampling = Execution::serial;
    item.result = run(cfg, opts);
    item.report = certify_trace(cfg.formation, item.result.trace, item.result.triggers,
                                item.result.bounds, certify_options(cfg, item.result.controller));
    item.ok = true;
  } catch (const std::exception& e) {
    item.error = e.what();
  }
  return item;
}

}  // namespace

RunResult run(const ScenarioConfig& cfg, const RunOptions& opts) {
  RunResult out;
  out.controller = resolve(cfg);
  out.bounds = compute_bounds(cfg, out.controller);

  Engine engine(cfg, out.controller, opts);
  engine.execute(out);

  std::stable_sort(out.triggers.begin(), out.triggers.end(),
                   [](const TriggerRecord& a, const TriggerRecord& b) {
                     return a.time < b.time || (a.time == b.time && a.agent < b.agent);
                   });
  const std::vector<double> times = sample_times(cfg.horizon, cfg.sample_dt, out.triggers);
  out.trace = opts.sampling == Execution::parallel
                  ? sample_trace_parallel(cfg, out.controller, out.segments, times)
                  : sample_trace_serial(cfg, out.controller, out.segments, times);
  return out;
}

std::vector<double> sample_times(double horizon, double dt,
                                 const std::vector<TriggerRecord>& triggers) {
  std::vector<double> times;
  const auto steps = static_cast<long>(std::floor(horizon / dt + 1e-9));
  times.reserve(static_cast<std::size_t>(steps) + triggers.size() + 2);
  for (long k = 0; k <= steps; ++k) times.push_back(std::min(static_cast<double>(k) * dt, horizon));
  if (times.back() < horizon) times.push_back(horizon);
  for (const TriggerRecord& r : triggers)
    if (r.time <= horizon) times.push_back(r.time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

TraceSample sample_at(const ScenarioConfig& cfg, const Controller& ctl,
                      const std::vector<Segment>& segments, double t) {
  const auto it = std::upper_bound(segments.begin(), segments.end(), t,
                                   [](double v, const Segment& s) { return v < s.start; });
  if (it == segments.begin()) throw SimulationFault("no state before t", t, -1);
  const Segment& seg = *(it - 1);
  const FormationSpec& spec = cfg.formation;
  const bool dbl = ctl.mode == Mode::double_integrator;
  const double dt = t - seg.start;

  TraceSample s;
  s.time = t;
  s.positions = seg.x;
  if (dbl) s.velocities = seg.q;
  for (std::size_t i = 0; i < s.positions.size(); ++i) {
    if (dbl)
      propagate_double(s.positions[i], s.velocities[i], seg.control[i], ctl.gains->k3, dt);
    else
      s.positions[i] = propagate_single(s.positions[i], seg.control[i], dt);
  }
  const Graph& g = spec.graph();
  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edge(k);
    s.edge_lengths.push_back(
        (s.positions[static_cast<std::size_t>(e.tail)] - s.positions[static_cast<std::size_t>(e.head)])
            .norm());
    s.edge_errors.push_back(edge_error(spec, s.positions, k).norm());
  }
  for (int i = 0; i < g.node_count(); ++i) {
    const Vec& held = seg.control[static_cast<std::size_t>(i)];
    s.error_norms.push_back(
        dbl ? error_double_from_state(spec, *ctl.gains, i, s.positions, s.velocities, held,
                                      cfg.tol.guard)
                  .norm()
            : error_single_from_state(spec, i, s.positions, held, cfg.tol.guard).norm());
  }
  s.threshold = ctl.threshold(t);
  return s;
}

std::vector<TraceSample> sample_trace_serial(const ScenarioConfig& cfg, const Controller& ctl,
                                             const std::vector<Segment>& segments,
                                             const std::vector<double>& times) {
  return sample_trace<false>(cfg, ctl, segments, times);
}

std::vector<TraceSample> sample_trace_parallel(const ScenarioConfig& cfg, const Controller& ctl,
                                               const std::vector<Segment>& segments,
                                               const std::vector<double>& times) {
  return sample_trace<true>(cfg, ctl, segments, times);
}

Report replay_check(const ScenarioConfig& cfg, const std::vector<TraceSample>& trace,
                    const std::vector<TriggerRecord>& triggers) {
  const Controller ctl = resolve(cfg);
  const BoundSet bounds = compute_bounds(cfg, ctl);
  return certify_trace(cfg.formation, trace, triggers, bounds, certify_options(cfg, ctl));
}

std::vector<BatchItem> run_batch_serial(const std::vector<ScenarioConfig>& cfgs) {
  std::vector<BatchItem> out(cfgs.size());
  for (std::size_t k = 0; k < cfgs.size(); ++k) out[k] = run_one(cfgs[k]);
  return out;
}

std::vector<BatchItem> run_batch_parallel(const std::vector<ScenarioConfig>& cfgs) {
  std::vector<BatchItem> out(cfgs.size());
  const long count = static_cast<long>(cfgs.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < count; ++k)
    out[static_cast<std::size_t>(k)] = run_one(cfgs[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace etfc
