#include "ihdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ihdp/incremental_model.hpp"

namespace ihdp {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::vanilla:
      return "vanilla";
    case Mode::ts:
      return "ts";
    case Mode::ts_filter:
      return "ts_filter";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "vanilla") return Mode::vanilla;
  if (name == "ts") return Mode::ts;
  if (name == "ts_filter") return Mode::ts_filter;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

std::size_t RunConfig::steps() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

void RunConfig::validate() const {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(reference.period > 0.0)) throw std::invalid_argument("reference period must be positive");
  if (!(std::abs(reference.amplitude) <= kAeroValidityDeg)) {
    throw std::invalid_argument("reference amplitude must stay within 20 deg");
  }
  if (trace_stride == 0) throw std::invalid_argument("trace stride must be >= 1");
  if (!(rls_forgetting > 0.0 && rls_forgetting <= 1.0)) {
    throw std::invalid_argument("RLS forgetting factor must lie in (0, 1]");
  }
  if (!(rls_p0 > 0.0)) throw std::invalid_argument("RLS initial covariance must be positive");
  higher.validate();
  lower.validate();
  filter.validate();
  plant.validate();
}

ReferenceSample reference(double t, const RunConfig& cfg) {
  const double w = 2.0 * std::numbers::pi / cfg.reference.period;
  return {cfg.reference.amplitude * std::sin(w * t),
          cfg.reference.amplitude * std::sin(w * (t + cfg.dt))};
}

std::vector<double> SimulationTrace::column(double TraceRecord::*field,
                                            double t0, double t1) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const TraceRecord& r : records) {
    if (r.t >= t0 && r.t < t1) out.push_back(r.*field);
  }
  return out;
}

namespace {

bool finite_record(const TraceRecord& r) {
  for (double v : {r.alpha, r.q, r.delta, r.delta_cmd, r.q_ref_raw, r.q_ref,
                   r.c1, r.c2, r.td1, r.td2, r.z1, r.z2, r.k1, r.k2, r.F1,
                   r.G1, r.F2, r.G2, r.ts1, r.ts2}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> copy_params(const Approximator& net) {
  const auto p = net.parameters();
  return {p.begin(), p.end()};
}

}  // namespace

SimulationTrace run(const RunConfig& input) {
  input.validate();
  RunConfig cfg = input;
  if (cfg.mode == Mode::vanilla) {
    cfg.higher.ts_weight = 0.0;
    cfg.lower.ts_weight = 0.0;
  }
  const double dt = cfg.dt;
  const std::size_t steps = cfg.steps();

  Rng rng(cfg.seed);
  Agent higher(cfg.higher, rng);
  Agent lower(cfg.lower, rng);
  IncrementalModel model =
      IncrementalModel::with_defaults(dt, cfg.rls_forgetting, cfg.rls_p0);
  FilterState filter = cfg.filter;
  const bool filtering = cfg.mode == Mode::ts_filter;

  SimulationTrace trace;
  trace.mode = cfg.mode;
  trace.seed = cfg.seed;
  trace.dt = dt;
  trace.records.reserve(steps);

  VehicleState x{};
  ActuatorState act = cfg.actuator;
  act.delta = 0.0;
  VehicleState x_prev = x;
  double delta_prev = act.delta;  // deflection applied over the previous step
  bool have_prev = false;

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const ReferenceSample ref = reference(t, cfg);
    const Sensitivities sens = model.sensitivities();
    const double d_alpha = have_prev ? x.alpha - x_prev.alpha : 0.0;
    const double d_q = have_prev ? x.q - x_prev.q : 0.0;
    const double delta_now = act.delta;

    TraceRecord rec;
    rec.t = t;
    rec.alpha = x.alpha;
    rec.q = x.q;
    rec.alpha_ref = ref.now;
    rec.e_alpha = x.alpha - ref.now;
    rec.F1 = sens.F1;
    rec.G1 = sens.G1;
    rec.F2 = sens.F2;
    rec.G2 = sens.G2;

    // higher level: alpha tracking through the virtual pitch-rate command
    LevelInputs hi;
    hi.state = x.alpha;
    hi.error = rec.e_alpha;
    hi.aux = delta_now;
    hi.reference_next = ref.next;
    hi.d_state = d_alpha;
    hi.F = sens.F1;
    hi.G = sens.G1;
    hi.action_prev = have_prev ? x_prev.q : x.q;
    hi.aux_next = delta_now;
    const StepResult hs = higher.step(hi);
    rec.q_ref_raw = hs.action;

    if (filtering) {
      if (k == 0) {
        filter.reset(hs.action);
      } else {
        filter = filter_step(filter, hs.action, dt);
      }
      rec.q_ref = filter.d1;
      rec.q_ref_rate = filter.d2;
    } else {
      rec.q_ref = hs.action;
    }
    rec.e_q = x.q - rec.q_ref;

    // lower level: pitch-rate tracking through the deflection command
    const IncrementPrediction free = model.predict(d_alpha, d_q, 0.0);
    LevelInputs lo;
    lo.state = x.q;
    lo.error = rec.e_q;
    lo.aux = x.alpha;
    lo.reference_next = rec.q_ref;
    lo.d_state = d_q;
    lo.F = sens.F2;
    lo.G = sens.G2;
    lo.action_prev = delta_now;
    lo.aux_next = x.alpha + free.d_alpha_next;
    const StepResult ls = lower.step(lo);
    rec.delta_cmd = ls.action;

    act = actuator_step(act, ls.action, dt);
    rec.delta = act.delta;
    const VehicleState x_next = rk4_step(x, act.delta, dt, cfg.plant);

    if (have_prev) {
      IncrementRecord inc;
      inc.d_alpha = d_alpha;
      inc.d_q = d_q;
      inc.d_delta = act.delta - delta_prev;
      inc.d_alpha_next = x_next.alpha - x.alpha;
      inc.d_q_next = x_next.q - x.q;
      model.rls_update(inc);
    }

    rec.c1 = hs.cost;
    rec.c2 = ls.cost;
    rec.td1 = hs.td_error;
    rec.td2 = ls.td_error;
    rec.ts1 = hs.ts_penalty;
    rec.ts2 = ls.ts_penalty;
    rec.dq_ref_pred = hs.ts_raw;
    rec.ddelta_pred = ls.ts_raw;
    rec.z1 = hs.z_out;
    rec.z2 = ls.z_out;
    rec.k1 = hs.sensitivity;
    rec.k2 = ls.sensitivity;
    rec.critic_iters1 = hs.critic_iters;
    rec.actor_iters1 = hs.actor_iters;
    rec.critic_iters2 = ls.critic_iters;
    rec.actor_iters2 = ls.actor_iters;

    if (cfg.param_stride != 0 && k % cfg.param_stride == 0) {
      trace.snapshots.push_back({t, copy_params(higher.critic()),
                                 copy_params(higher.actor()),
                                 copy_params(lower.critic()),
                                 copy_params(lower.actor())});
    }

    const bool ok = hs.finite && ls.finite && finite_record(rec) &&
                    std::isfinite(x_next.alpha) && std::isfinite(x_next.q);
    if (!ok || std::abs(x_next.alpha) > cfg.divergence_alpha) {
      trace.diverged = true;
      std::ostringstream msg;
      msg << "diverged at t=" << t << " s: alpha=" << x_next.alpha
          << " q=" << x_next.q
          << (ok ? " (alpha beyond divergence bound)" : " (non-finite value)");
      trace.diagnostic = msg.str();
      if (finite_record(rec)) trace.records.push_back(rec);
      break;
    }
    trace.records.push_back(rec);

    x_prev = x;
    x = x_next;
    delta_prev = act.delta;
    have_prev = true;
  }
  return trace;
}

std::vector<SimulationTrace> run_batch(const std::vector<RunConfig>& cfgs,
                                       unsigned max_threads) {
  std::vector<SimulationTrace> out(cfgs.size());
  if (cfgs.empty()) return out;
  unsigned workers = max_threads != 0 ? max_threads : std::thread::hardware_concurrency();
  workers = std::clamp(workers, 1u, static_cast<unsigned>(cfgs.size()));

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cfgs.size());
  auto work = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        out[i] = run(cfgs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

SmoothnessReport report_for(const SimulationTrace& trace, double t0) {
  const auto q_ref = trace.column(&TraceRecord::q_ref, t0);
  const auto delta = trace.column(&TraceRecord::delta_cmd, t0);
  const auto z1 = trace.column(&TraceRecord::z1, t0);
  const auto z2 = trace.column(&TraceRecord::z2, t0);
  const auto c1 = trace.column(&TraceRecord::c1, t0);
  const auto c2 = trace.column(&TraceRecord::c2, t0);
  const auto k1 = trace.column(&TraceRecord::k1, t0);
  const auto k2 = trace.column(&TraceRecord::k2, t0);
  const auto e = trace.column(&TraceRecord::e_alpha, t0);
  ReportInputs in;
  in.q_ref = q_ref;
  in.delta_cmd = delta;
  in.z_high = z1;
  in.z_low = z2;
  in.c1 = c1;
  in.c2 = c2;
  in.k1 = k1;
  in.k2 = k2;
  in.e_alpha = e;
  in.dt = trace.dt;
  return smoothness_report(in);
}

std::vector<std::pair<std::string, double>> metrics(const SmoothnessReport& r) {
  return {{"mean_dq_ref", r.mean_dq_ref},
          {"max_dq_ref", r.max_dq_ref},
          {"mean_ddelta", r.mean_ddelta},
          {"max_ddelta", r.max_ddelta},
          {"band_energy_q_ref", r.band_energy_q_ref},
          {"band_energy_delta", r.band_energy_delta},
          {"saturation_high", r.saturation_high},
          {"saturation_low", r.saturation_low},
          {"mean_c1", r.mean_c1},
          {"mean_c2", r.mean_c2},
          {"mean_abs_k1", r.mean_abs_k1},
          {"max_abs_k1", r.max_abs_k1},
          {"mean_abs_k2", r.mean_abs_k2},
          {"max_abs_k2", r.max_abs_k2},
          {"rms_e_alpha", r.rms_e_alpha}};
}

Comparison compare(const std::vector<SimulationTrace>& traces, double t0) {
  if (traces.size() < 2) throw std::invalid_argument("compare needs at least two traces");
  for (const auto& tr : traces) {
    if (tr.dt != traces.front().dt) {
      throw std::invalid_argument("traces have different time steps");
    }
  }
  Comparison c;
  for (const auto& tr : traces) c.reports.push_back(report_for(tr, t0));
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t j = i + 1; j < traces.size(); ++j) {
      ReportDelta d{i, j, {}};
      const auto a = metrics(c.reports[i]);
      const auto b = metrics(c.reports[j]);
      for (std::size_t m = 0; m < a.size(); ++m) {
        const double base = a[m].second;
        const double diff = b[m].second - base;
        d.relative.emplace_back(a[m].first, diff == 0.0 ? 0.0 : diff / std::abs(base));
      }
      c.deltas.push_back(std::move(d));
    }
  }
  return c;
}

}  // namespace ihdp
