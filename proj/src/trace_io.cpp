#include "ihdp/trace_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include <json.hpp>

namespace ihdp {

namespace {

struct Column {
  std::string_view name;
  double TraceRecord::*real = nullptr;
  int TraceRecord::*count = nullptr;
};

constexpr std::array kColumns{
    Column{"t", &TraceRecord::t},
    Column{"alpha", &TraceRecord::alpha},
    Column{"q", &TraceRecord::q},
    Column{"delta", &TraceRecord::delta},
    Column{"delta_cmd", &TraceRecord::delta_cmd},
    Column{"alpha_ref", &TraceRecord::alpha_ref},
    Column{"q_ref_raw", &TraceRecord::q_ref_raw},
    Column{"q_ref", &TraceRecord::q_ref},
    Column{"q_ref_rate", &TraceRecord::q_ref_rate},
    Column{"e_alpha", &TraceRecord::e_alpha},
    Column{"e_q", &TraceRecord::e_q},
    Column{"c1", &TraceRecord::c1},
    Column{"c2", &TraceRecord::c2},
    Column{"td1", &TraceRecord::td1},
    Column{"td2", &TraceRecord::td2},
    Column{"ts1", &TraceRecord::ts1},
    Column{"ts2", &TraceRecord::ts2},
    Column{"dq_ref_pred", &TraceRecord::dq_ref_pred},
    Column{"ddelta_pred", &TraceRecord::ddelta_pred},
    Column{"z1", &TraceRecord::z1},
    Column{"z2", &TraceRecord::z2},
    Column{"k1", &TraceRecord::k1},
    Column{"k2", &TraceRecord::k2},
    Column{"F1", &TraceRecord::F1},
    Column{"G1", &TraceRecord::G1},
    Column{"F2", &TraceRecord::F2},
    Column{"G2", &TraceRecord::G2},
    Column{"critic_iters1", nullptr, &TraceRecord::critic_iters1},
    Column{"actor_iters1", nullptr, &TraceRecord::actor_iters1},
    Column{"critic_iters2", nullptr, &TraceRecord::critic_iters2},
    Column{"actor_iters2", nullptr, &TraceRecord::actor_iters2},
};

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json agent_json(const AgentConfig& a) {
  return {{"critic_lr", a.critic_lr},
          {"actor_lr", a.actor_lr},
          {"gamma", a.gamma},
          {"tau", a.tau},
          {"control_weight", a.control_weight},
          {"ts_weight", a.ts_weight},
          {"policy_iters", a.policy_iters},
          {"critic_loss_threshold", a.critic_loss_threshold},
          {"max_updates", a.max_updates},
          {"action_scale", a.action_scale},
          {"hidden", a.hidden},
          {"init_range", a.init_range}};
}

nlohmann::json report_json(const SmoothnessReport& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : metrics(r)) j[name] = number_or_null(value);
  return j;
}

using Json = nlohmann::json;

void reject_unknown(const Json& j, std::initializer_list<std::string_view> known,
                    std::string_view where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("unknown config key '" + std::string(where) + key + "'");
    }
  }
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
  }
}

void apply_agent(const Json& j, AgentConfig& a, std::string_view where) {
  reject_unknown(j,
                 {"critic_lr", "actor_lr", "gamma", "tau", "control_weight", "ts_weight",
                  "policy_iters", "critic_loss_threshold", "max_updates", "action_scale",
                  "hidden", "init_range"},
                 where);
  take(j, "critic_lr", a.critic_lr);
  take(j, "actor_lr", a.actor_lr);
  take(j, "gamma", a.gamma);
  take(j, "tau", a.tau);
  take(j, "control_weight", a.control_weight);
  take(j, "ts_weight", a.ts_weight);
  take(j, "policy_iters", a.policy_iters);
  take(j, "critic_loss_threshold", a.critic_loss_threshold);
  take(j, "max_updates", a.max_updates);
  take(j, "action_scale", a.action_scale);
  take(j, "hidden", a.hidden);
  take(j, "init_range", a.init_range);
}

}  // namespace

void apply_config_json(RunConfig& cfg, std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"mode", "seed", "dt", "duration", "reference", "higher", "lower", "filter",
                  "rls", "divergence_alpha", "trace_stride", "param_stride", "output_dir",
                  // written by summary.json, ignored on input
                  "steps_planned", "steps_completed", "diverged", "diagnostic", "report",
                  "report_after_10s"},
                 "");
  if (j.contains("mode")) {
    std::string mode;
    take(j, "mode", mode);
    cfg.mode = parse_mode(mode);
  }
  take(j, "seed", cfg.seed);
  take(j, "dt", cfg.dt);
  take(j, "duration", cfg.duration);
  take(j, "divergence_alpha", cfg.divergence_alpha);
  take(j, "trace_stride", cfg.trace_stride);
  take(j, "param_stride", cfg.param_stride);
  if (j.contains("output_dir")) {
    std::string dir;
    take(j, "output_dir", dir);
    cfg.output_dir = dir;
  }
  if (j.contains("reference")) {
    const Json& r = j["reference"];
    reject_unknown(r, {"amplitude", "period"}, "reference.");
    take(r, "amplitude", cfg.reference.amplitude);
    take(r, "period", cfg.reference.period);
  }
  if (j.contains("higher")) apply_agent(j["higher"], cfg.higher, "higher.");
  if (j.contains("lower")) apply_agent(j["lower"], cfg.lower, "lower.");
  if (j.contains("filter")) {
    const Json& f = j["filter"];
    reject_unknown(f, {"enabled", "zeta", "omega_n", "squared_damping"}, "filter.");
    take(f, "zeta", cfg.filter.zeta);
    take(f, "omega_n", cfg.filter.omega_n);
    take(f, "squared_damping", cfg.filter.squared_damping);
  }
  if (j.contains("rls")) {
    const Json& r = j["rls"];
    reject_unknown(r, {"forgetting", "p0"}, "rls.");
    take(r, "forgetting", cfg.rls_forgetting);
    take(r, "p0", cfg.rls_p0);
  }
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace,
                     std::size_t stride) {
  if (stride == 0) stride = 1;
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    os << (c ? "," : "") << kColumns[c].name;
  }
  os << '\n';
  std::string line;
  for (std::size_t i = 0; i < trace.records.size(); i += stride) {
    const TraceRecord& r = trace.records[i];
    line.clear();
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      if (c) line += ',';
      if (kColumns[c].real) {
        line += format_number(r.*kColumns[c].real);
      } else {
        line += std::to_string(r.*kColumns[c].count);
      }
    }
    line += '\n';
    os << line;
  }
}

SimulationTrace read_trace_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("empty trace file");
  const auto names = split(header, ',');
  std::vector<int> index(names.size(), -1);
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      if (names[i] == kColumns[c].name) index[i] = static_cast<int>(c);
    }
  }
  SimulationTrace trace;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != names.size()) throw std::runtime_error("ragged trace row");
    TraceRecord r;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (index[i] < 0) continue;
      const Column& col = kColumns[static_cast<std::size_t>(index[i])];
      const double v = parse_double(cells[i]);
      if (col.real) {
        r.*col.real = v;
      } else {
        r.*col.count = static_cast<int>(v);
      }
    }
    trace.records.push_back(r);
  }
  if (trace.records.size() >= 2) {
    trace.dt = trace.records[1].t - trace.records[0].t;
  }
  return trace;
}

void write_params_csv(std::ostream& os, const SimulationTrace& trace) {
  os << "t,network,index,value\n";
  for (const ParamSnapshot& s : trace.snapshots) {
    const std::array<std::pair<std::string_view, const std::vector<double>*>, 4> nets{
        {{"critic1", &s.critic1}, {"actor1", &s.actor1},
         {"critic2", &s.critic2}, {"actor2", &s.actor2}}};
    for (const auto& [name, values] : nets) {
      for (std::size_t k = 0; k < values->size(); ++k) {
        os << format_number(s.t) << ',' << name << ',' << k << ','
           << format_number((*values)[k]) << '\n';
      }
    }
  }
}

void write_spectrum_csv(std::ostream& os, const Spectrum& sp) {
  os << "freq_hz,magnitude\n";
  for (std::size_t k = 0; k < sp.freqs.size(); ++k) {
    os << format_number(sp.freqs[k]) << ',' << format_number(sp.magnitudes[k]) << '\n';
  }
}

std::string summary_json(const RunConfig& cfg, const SimulationTrace& trace) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(cfg.mode));
  j["seed"] = cfg.seed;
  j["dt"] = cfg.dt;
  j["duration"] = cfg.duration;
  j["steps_planned"] = cfg.steps();
  j["steps_completed"] = trace.records.size();
  j["diverged"] = trace.diverged;
  j["diagnostic"] = trace.diagnostic;
  j["reference"] = {{"amplitude", cfg.reference.amplitude},
                    {"period", cfg.reference.period}};
  j["higher"] = agent_json(cfg.higher);
  j["lower"] = agent_json(cfg.lower);
  if (cfg.mode == Mode::vanilla) {
    j["higher"]["ts_weight"] = 0.0;
    j["lower"]["ts_weight"] = 0.0;
  }
  j["filter"] = {{"enabled", cfg.mode == Mode::ts_filter},
                 {"zeta", cfg.filter.zeta},
                 {"omega_n", cfg.filter.omega_n},
                 {"squared_damping", cfg.filter.squared_damping}};
  j["rls"] = {{"forgetting", cfg.rls_forgetting}, {"p0", cfg.rls_p0}};
  j["divergence_alpha"] = cfg.divergence_alpha;
  j["trace_stride"] = cfg.trace_stride;
  j["param_stride"] = cfg.param_stride;
  j["report"] = report_json(report_for(trace));
  j["report_after_10s"] = report_json(report_for(trace, 10.0));
  return j.dump(2) + "\n";
}

std::string comparison_json(const std::vector<std::string>& labels,
                            const Comparison& cmp) {
  nlohmann::json j;
  j["runs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < cmp.reports.size(); ++i) {
    j["runs"].push_back({{"label", i < labels.size() ? labels[i] : std::to_string(i)},
                         {"report", report_json(cmp.reports[i])}});
  }
  j["relative_changes"] = nlohmann::json::array();
  for (const ReportDelta& d : cmp.deltas) {
    nlohmann::json rel = nlohmann::json::object();
    for (const auto& [name, value] : d.relative) rel[name] = number_or_null(value);
    j["relative_changes"].push_back({{"base", labels.at(d.base)},
                                     {"other", labels.at(d.other)},
                                     {"relative", rel}});
  }
  return j.dump(2) + "\n";
}

void write_run(const std::filesystem::path& dir, const RunConfig& cfg,
               const SimulationTrace& trace) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "trace.csv", std::ios::binary);
    write_trace_csv(f, trace, cfg.trace_stride);
    if (!f) throw std::runtime_error("failed writing " + (dir / "trace.csv").string());
  }
  if (!trace.snapshots.empty()) {
    std::ofstream f(dir / "params.csv", std::ios::binary);
    write_params_csv(f, trace);
  }
  std::ofstream f(dir / "summary.json", std::ios::binary);
  f << summary_json(cfg, trace);
  if (!f) throw std::runtime_error("failed writing " + (dir / "summary.json").string());
}

}  // namespace ihdp
