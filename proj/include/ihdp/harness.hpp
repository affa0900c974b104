#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ihdp/agents.hpp"
#include "ihdp/analysis.hpp"
#include "ihdp/command_filter.hpp"
#include "ihdp/dynamics.hpp"

namespace ihdp {

enum class Mode { vanilla, ts, ts_filter };

std::string_view to_string(Mode m);
// Throws std::invalid_argument on an unknown name.
Mode parse_mode(std::string_view name);

struct ReferenceConfig {
  double amplitude = 10.0;  // deg
  double period = 10.0;     // s
};

struct RunConfig {
  Mode mode = Mode::ts;
  double duration = 40.0;
  double dt = 0.001;
  std::uint64_t seed = 1;
  ReferenceConfig reference;
  AgentConfig higher = AgentConfig::higher_defaults();
  AgentConfig lower = AgentConfig::lower_defaults();
  FilterState filter;
  PhysicalParams plant;
  ActuatorState actuator;
  double rls_forgetting = 0.995;
  double rls_p0 = 1e6;
  // |alpha| beyond this is treated as divergence (the aero model is
  // meaningless long before it).
  double divergence_alpha = 90.0;
  std::size_t trace_stride = 1;   // rows written to trace.csv
  std::size_t param_stride = 100; // steps between parameter snapshots, 0 = off
  std::filesystem::path output_dir = "out";

  std::size_t steps() const;
  void validate() const;
};

struct ReferenceSample {
  double now = 0.0;
  double next = 0.0;
};

// A sin(2 pi t / P) at t and t + dt.
ReferenceSample reference(double t, const RunConfig& cfg);

struct TraceRecord {
  double t = 0.0;
  double alpha = 0.0;
  double q = 0.0;
  double delta = 0.0;       // deflection applied over [t, t + dt]
  double delta_cmd = 0.0;   // lower actor output
  double alpha_ref = 0.0;
  double q_ref_raw = 0.0;   // higher actor output
  double q_ref = 0.0;       // reference tracked by the lower agent
  double q_ref_rate = 0.0;  // filter derivative state, 0 without the filter
  double e_alpha = 0.0;
  double e_q = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double td1 = 0.0;
  double td2 = 0.0;
  double ts1 = 0.0;  // weighted TS penalty, higher level
  double ts2 = 0.0;
  double dq_ref_pred = 0.0;   // |v(x_pred) - v(x)|, higher level
  double ddelta_pred = 0.0;   // same for the lower level
  double z1 = 0.0;   // higher actor output pre-activation
  double z2 = 0.0;
  double k1 = 0.0;   // d q_ref / d e_alpha
  double k2 = 0.0;   // d delta / d e_q
  double F1 = 0.0;
  double G1 = 0.0;
  double F2 = 0.0;
  double G2 = 0.0;
  int critic_iters1 = 0;
  int actor_iters1 = 0;
  int critic_iters2 = 0;
  int actor_iters2 = 0;
};

struct ParamSnapshot {
  double t = 0.0;
  std::vector<double> critic1;
  std::vector<double> actor1;
  std::vector<double> critic2;
  std::vector<double> actor2;
};

struct SimulationTrace {
  Mode mode = Mode::ts;
  std::uint64_t seed = 0;
  double dt = 0.001;
  std::vector<TraceRecord> records;
  std::vector<ParamSnapshot> snapshots;
  bool diverged = false;
  std::string diagnostic;

  // Column extraction for analysis, optionally restricted to t in [t0, t1).
  std::vector<double> column(double TraceRecord::*field, double t0 = 0.0,
                             double t1 = 1e300) const;
};

SimulationTrace run(const RunConfig& cfg);

// Runs each config on its own thread; results keep the input order.
std::vector<SimulationTrace> run_batch(const std::vector<RunConfig>& cfgs,
                                       unsigned max_threads = 0);

SmoothnessReport report_for(const SimulationTrace& trace, double t0 = 0.0);

struct ReportDelta {
  std::size_t base = 0;
  std::size_t other = 0;
  // (other - base) / base per metric, 0 when both are 0.
  std::vector<std::pair<std::string, double>> relative;
};

struct Comparison {
  std::vector<SmoothnessReport> reports;
  std::vector<ReportDelta> deltas;
};

// Named metrics of a report, in a fixed order.
std::vector<std::pair<std::string, double>> metrics(const SmoothnessReport& r);

// Throws std::invalid_argument for fewer than two traces or mismatched dt.
Comparison compare(const std::vector<SimulationTrace>& traces, double t0 = 0.0);

}  // namespace ihdp
