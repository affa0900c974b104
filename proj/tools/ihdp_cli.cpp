// Command-line front end: run, batch, compare, spectrum.
//
// Settings are layered: built-in defaults, then --config FILE (JSON), then any
// flag given explicitly. IHDP_OUTPUT_ROOT, when set, prefixes relative output
// directories.
//
// Exit codes: 0 success, 1 bad configuration or input, 2 a run diverged.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ihdp/harness.hpp"
#include "ihdp/trace_io.hpp"

using namespace ihdp;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kDiverged = 2;

// A flag bound to a scratch RunConfig plus the copy that moves its value into
// the real one, applied only when the flag was given.
struct Binding {
  CLI::Option* option;
  std::function<void(RunConfig&, const RunConfig&)> copy;
};

struct ConfigFlags {
  RunConfig scratch;
  std::string mode = "ts";
  std::string output_dir;
  std::string config_file;
  std::vector<Binding> bindings;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* output_opt = nullptr;
};

template <typename T>
void bind_flag(CLI::App& app, ConfigFlags& f, const std::string& name, T RunConfig::*field,
          const std::string& help) {
  CLI::Option* o = app.add_option(name, f.scratch.*field, help);
  f.bindings.push_back({o, [field](RunConfig& dst, const RunConfig& src) {
                          dst.*field = src.*field;
                        }});
}

template <typename S, typename T>
void bind_flag(CLI::App& app, ConfigFlags& f, const std::string& name, S RunConfig::*group,
          T S::*field, const std::string& help) {
  CLI::Option* o = app.add_option(name, f.scratch.*group.*field, help);
  f.bindings.push_back({o, [group, field](RunConfig& dst, const RunConfig& src) {
                          dst.*group.*field = src.*group.*field;
                        }});
}

void add_agent_flags(CLI::App& app, ConfigFlags& f, const std::string& level,
                     AgentConfig RunConfig::*group) {
  const std::string p = "--" + level + "-";
  bind_flag(app, f, p + "critic-lr", group, &AgentConfig::critic_lr, "critic learning rate");
  bind_flag(app, f, p + "actor-lr", group, &AgentConfig::actor_lr, "actor learning rate");
  bind_flag(app, f, p + "gamma", group, &AgentConfig::gamma, "discount factor");
  bind_flag(app, f, p + "tau", group, &AgentConfig::tau, "target critic update factor");
  bind_flag(app, f, p + "control-weight", group, &AgentConfig::control_weight,
       "control penalty weight");
  bind_flag(app, f, p + "ts-weight", group, &AgentConfig::ts_weight, "temporal smoothness weight");
  bind_flag(app, f, p + "policy-iters", group, &AgentConfig::policy_iters,
       "critic/actor rounds per step");
  bind_flag(app, f, p + "critic-threshold", group, &AgentConfig::critic_loss_threshold,
       "critic loss stopping threshold");
  bind_flag(app, f, p + "max-updates", group, &AgentConfig::max_updates,
       "update cap per phase");
  bind_flag(app, f, p + "hidden", group, &AgentConfig::hidden, "hidden units");
  bind_flag(app, f, p + "init-range", group, &AgentConfig::init_range,
       "uniform initialization half-width");
}

void add_config_flags(CLI::App& app, ConfigFlags& f) {
  app.add_option("--config", f.config_file, "JSON config file")->check(CLI::ExistingFile);
  f.mode_opt = app.add_option("--mode", f.mode, "vanilla, ts or ts_filter")
                   ->check(CLI::IsMember({"vanilla", "ts", "ts_filter"}));
  f.output_opt = app.add_option("--output-dir", f.output_dir, "output directory");
  bind_flag(app, f, "--duration", &RunConfig::duration, "simulated seconds");
  bind_flag(app, f, "--dt", &RunConfig::dt, "step size [s]");
  bind_flag(app, f, "--seed", &RunConfig::seed, "random seed");
  bind_flag(app, f, "--ref-amplitude", &RunConfig::reference, &ReferenceConfig::amplitude,
       "alpha reference amplitude [deg]");
  bind_flag(app, f, "--ref-period", &RunConfig::reference, &ReferenceConfig::period,
       "alpha reference period [s]");
  add_agent_flags(app, f, "higher", &RunConfig::higher);
  add_agent_flags(app, f, "lower", &RunConfig::lower);
  bind_flag(app, f, "--filter-zeta", &RunConfig::filter, &FilterState::zeta, "filter damping");
  bind_flag(app, f, "--filter-omega-n", &RunConfig::filter, &FilterState::omega_n,
       "filter natural frequency [rad/s]");
  {
    CLI::Option* o = app.add_flag("--filter-squared-damping",
                                  f.scratch.filter.squared_damping,
                                  "use the 2 zeta wn^2 damping term");
    f.bindings.push_back({o, [](RunConfig& d, const RunConfig& s) {
                            d.filter.squared_damping = s.filter.squared_damping;
                          }});
  }
  bind_flag(app, f, "--rls-forgetting", &RunConfig::rls_forgetting, "RLS forgetting factor");
  bind_flag(app, f, "--rls-p0", &RunConfig::rls_p0, "RLS initial covariance");
  bind_flag(app, f, "--divergence-alpha", &RunConfig::divergence_alpha,
       "abort when |alpha| exceeds this [deg]");
  bind_flag(app, f, "--trace-stride", &RunConfig::trace_stride, "write every n-th step");
  bind_flag(app, f, "--param-stride", &RunConfig::param_stride,
       "steps between parameter snapshots, 0 = none");
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path with_root(fs::path dir) {
  const char* root = std::getenv("IHDP_OUTPUT_ROOT");
  if (root != nullptr && *root != '\0' && dir.is_relative()) return fs::path(root) / dir;
  return dir;
}

RunConfig resolve(const ConfigFlags& f) {
  RunConfig cfg;
  if (!f.config_file.empty()) apply_config_json(cfg, slurp(f.config_file));
  if (f.mode_opt->count() > 0) cfg.mode = parse_mode(f.mode);
  if (f.output_opt->count() > 0) cfg.output_dir = f.output_dir;
  for (const Binding& b : f.bindings) {
    if (b.option->count() > 0) b.copy(cfg, f.scratch);
  }
  cfg.output_dir = with_root(cfg.output_dir);
  cfg.validate();
  return cfg;
}

void print_report(const std::string& label, const SimulationTrace& t) {
  const SmoothnessReport r = report_for(t);
  std::printf("%-24s %6zu steps%s  rms_e %.3f  mean|dq_ref| %.4f  band(q_ref) %.3e  "
              "sat_high %.1f%%\n",
              label.c_str(), t.records.size(), t.diverged ? " DIVERGED" : "",
              r.rms_e_alpha, r.mean_dq_ref, r.band_energy_q_ref, 100.0 * r.saturation_high);
  if (t.diverged) std::fprintf(stderr, "%s: %s\n", label.c_str(), t.diagnostic.c_str());
}

int cmd_run(const ConfigFlags& f) {
  const RunConfig cfg = resolve(f);
  const SimulationTrace t = run(cfg);
  write_run(cfg.output_dir, cfg, t);
  print_report(cfg.output_dir.string(), t);
  return t.diverged ? kDiverged : kOk;
}

int cmd_batch(const ConfigFlags& f, int seeds, std::uint64_t first_seed,
              const std::vector<std::string>& modes, unsigned threads) {
  const RunConfig base = resolve(f);
  std::vector<RunConfig> cfgs;
  std::vector<std::string> labels;
  for (const std::string& m : modes) {
    for (int s = 0; s < seeds; ++s) {
      RunConfig c = base;
      c.mode = parse_mode(m);
      c.seed = first_seed + static_cast<std::uint64_t>(s);
      labels.push_back(m + "_seed" + std::to_string(c.seed));
      c.output_dir = base.output_dir / labels.back();
      cfgs.push_back(std::move(c));
    }
  }
  const std::vector<SimulationTrace> traces = run_batch(cfgs, threads);
  bool diverged = false;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    write_run(cfgs[i].output_dir, cfgs[i], traces[i]);
    print_report(labels[i], traces[i]);
    diverged = diverged || traces[i].diverged;
  }
  if (traces.size() >= 2) {
    std::ofstream os(base.output_dir / "comparison.json", std::ios::binary);
    os << comparison_json(labels, compare(traces));
  }
  return diverged ? kDiverged : kOk;
}

SimulationTrace load_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot read " + path);
  try {
    return read_trace_csv(is);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(with_root(out), std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write " + out);
  os << text;
}

int cmd_compare(const std::vector<std::string>& files, std::vector<std::string> labels,
                double t0, const std::string& out) {
  if (labels.empty()) labels = files;
  if (labels.size() != files.size()) {
    throw std::invalid_argument("need one label per trace");
  }
  std::vector<SimulationTrace> traces;
  for (const std::string& f : files) traces.push_back(load_trace(f));
  emit(out, comparison_json(labels, compare(traces, t0)));
  return kOk;
}

double TraceRecord::*column_by_name(const std::string& name) {
  static const std::vector<std::pair<std::string, double TraceRecord::*>> columns{
      {"q_ref", &TraceRecord::q_ref},         {"q_ref_raw", &TraceRecord::q_ref_raw},
      {"delta_cmd", &TraceRecord::delta_cmd}, {"delta", &TraceRecord::delta},
      {"alpha", &TraceRecord::alpha},         {"q", &TraceRecord::q},
      {"e_alpha", &TraceRecord::e_alpha},     {"e_q", &TraceRecord::e_q},
      {"z1", &TraceRecord::z1},               {"z2", &TraceRecord::z2},
      {"k1", &TraceRecord::k1},               {"k2", &TraceRecord::k2}};
  for (const auto& [n, field] : columns) {
    if (n == name) return field;
  }
  throw std::invalid_argument("no spectrum for column '" + name + "'");
}

int cmd_spectrum(const std::string& file, const std::string& column, double t0, double t1,
                 bool hann, const std::string& out) {
  const SimulationTrace t = load_trace(file);
  const std::vector<double> x = t.column(column_by_name(column), t0, t1);
  const Spectrum sp = fft_magnitude(x, 1.0 / t.dt, hann ? Window::hann : Window::none);
  std::ostringstream os;
  write_spectrum_csv(os, sp);
  emit(out, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascaded incremental HDP flight-control simulator"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate one closed-loop run");
  add_config_flags(*run_cmd, run_flags);

  ConfigFlags batch_flags;
  int seeds = 5;
  std::uint64_t first_seed = 1;
  std::vector<std::string> modes{"vanilla", "ts", "ts_filter"};
  unsigned threads = 0;
  CLI::App* batch_cmd = app.add_subcommand("batch", "simulate modes x seeds concurrently");
  add_config_flags(*batch_cmd, batch_flags);
  batch_cmd->add_option("--seeds", seeds, "seeds per mode")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--first-seed", first_seed, "first seed");
  batch_cmd->add_option("--modes", modes, "modes to run")
      ->check(CLI::IsMember({"vanilla", "ts", "ts_filter"}));
  batch_cmd->add_option("--threads", threads, "worker threads, 0 = all cores");

  std::vector<std::string> cmp_files, cmp_labels;
  double cmp_t0 = 0.0;
  std::string cmp_out;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "smoothness reports for saved traces");
  cmp_cmd->add_option("traces", cmp_files, "trace.csv files")->required()->expected(2, -1);
  cmp_cmd->add_option("--labels", cmp_labels, "one label per trace");
  cmp_cmd->add_option("--t0", cmp_t0, "ignore records before this time [s]");
  cmp_cmd->add_option("-o,--out", cmp_out, "output JSON file, default stdout");

  std::string sp_file, sp_column = "q_ref", sp_out;
  double sp_t0 = 0.0, sp_t1 = 1e300;
  bool sp_hann = false;
  CLI::App* sp_cmd = app.add_subcommand("spectrum", "magnitude spectrum of a trace column");
  sp_cmd->add_option("trace", sp_file, "trace.csv file")->required();
  sp_cmd->add_option("--column", sp_column, "column to transform");
  sp_cmd->add_option("--t0", sp_t0, "window start [s]");
  sp_cmd->add_option("--t1", sp_t1, "window end [s]");
  sp_cmd->add_flag("--hann", sp_hann, "apply a Hann window");
  sp_cmd->add_option("-o,--out", sp_out, "output CSV file, default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags);
    if (*batch_cmd) return cmd_batch(batch_flags, seeds, first_seed, modes, threads);
    if (*cmp_cmd) return cmd_compare(cmp_files, cmp_labels, cmp_t0, cmp_out);
    if (*sp_cmd) return cmd_spectrum(sp_file, sp_column, sp_t0, sp_t1, sp_hann, sp_out);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
  return kConfigError;
}
