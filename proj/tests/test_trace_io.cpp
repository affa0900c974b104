#include "ihdp/trace_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace ihdp;

namespace {

SimulationTrace sample_trace() {
  RunConfig c;
  c.duration = 0.2;
  c.param_stride = 50;
  return run(c);
}

}  // namespace

TEST(TraceIo, NumbersRoundTrip) {
  for (double v : {0.0, -0.0, 1.0, 0.1, -3.25e-17, 1.0 / 3.0, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(20.0), "20");
}

TEST(TraceIo, TraceCsvRoundTrip) {
  const SimulationTrace t = sample_trace();
  std::stringstream ss;
  write_trace_csv(ss, t);
  const SimulationTrace back = read_trace_csv(ss);
  ASSERT_EQ(back.records.size(), t.records.size());
  EXPECT_DOUBLE_EQ(back.dt, t.dt);
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const TraceRecord& a = t.records[i];
    const TraceRecord& b = back.records[i];
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.q_ref, b.q_ref);
    EXPECT_EQ(a.z1, b.z1);
    EXPECT_EQ(a.G2, b.G2);
    EXPECT_EQ(a.actor_iters2, b.actor_iters2);
  }
  std::stringstream again;
  write_trace_csv(again, back);
  std::stringstream original;
  write_trace_csv(original, t);
  EXPECT_EQ(again.str(), original.str());
}

TEST(TraceIo, TraceCsvLayout) {
  const SimulationTrace t = sample_trace();
  std::stringstream ss;
  write_trace_csv(ss, t, 10);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header.rfind("t,alpha,q,delta,delta_cmd,alpha_ref,q_ref_raw,q_ref,", 0), 0u);
  int rows = 0;
  for (std::string line; std::getline(ss, line);) ++rows;
  EXPECT_EQ(rows, 20);
}

TEST(TraceIo, MalformedTraceIsRejected) {
  std::stringstream ragged("t,alpha\n0,1\n0.001\n");
  EXPECT_THROW(read_trace_csv(ragged), std::runtime_error);
  std::stringstream garbage("t,alpha\n0,abc\n");
  EXPECT_THROW(read_trace_csv(garbage), std::runtime_error);
  std::stringstream empty("");
  EXPECT_THROW(read_trace_csv(empty), std::runtime_error);
}

TEST(TraceIo, ParamsCsv) {
  const SimulationTrace t = sample_trace();
  std::stringstream ss;
  write_params_csv(ss, t);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "t,network,index,value");
  std::getline(ss, line);
  EXPECT_EQ(line.rfind("0,critic1,0,", 0), 0u);
  int rows = 1;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 4 * (29 + 36 + 29 + 36));
}

TEST(TraceIo, SpectrumCsv) {
  const std::vector<double> x{1.0, 0.0, -1.0, 0.0};
  std::stringstream ss;
  write_spectrum_csv(ss, fft_magnitude(x, 4.0));
  EXPECT_EQ(ss.str(), "freq_hz,magnitude\n0,0\n1,2\n2,0\n");
}

TEST(TraceIo, SummaryJson) {
  RunConfig c;
  c.mode = Mode::vanilla;
  c.duration = 0.2;
  const SimulationTrace t = run(c);
  const auto j = nlohmann::json::parse(summary_json(c, t));
  EXPECT_EQ(j["mode"], "vanilla");
  EXPECT_EQ(j["seed"], 1);
  EXPECT_EQ(j["steps_completed"], 200);
  EXPECT_EQ(j["diverged"], false);
  EXPECT_EQ(j["higher"]["ts_weight"], 0.0);
  EXPECT_TRUE(j["report"].contains("mean_dq_ref"));
  EXPECT_EQ(summary_json(c, t), summary_json(c, run(c)));
}

TEST(TraceIo, WriteRunCreatesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "ihdp_trace_io_test";
  std::filesystem::remove_all(dir);
  RunConfig c;
  c.duration = 0.1;
  c.param_stride = 50;
  write_run(dir, c, run(c));
  EXPECT_TRUE(std::filesystem::exists(dir / "trace.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "params.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  std::filesystem::remove_all(dir);
}

TEST(TraceIo, ComparisonJson) {
  RunConfig c;
  c.duration = 0.2;
  const SimulationTrace a = run(c);
  c.mode = Mode::vanilla;
  const SimulationTrace b = run(c);
  const auto j = nlohmann::json::parse(comparison_json({"ts", "vanilla"}, compare({a, b})));
  ASSERT_EQ(j["runs"].size(), 2u);
  EXPECT_EQ(j["relative_changes"][0]["base"], "ts");
  EXPECT_EQ(j["relative_changes"][0]["other"], "vanilla");
}

TEST(TraceIo, SummaryFeedsBackAsConfig) {
  RunConfig c;
  c.mode = Mode::ts_filter;
  c.seed = 42;
  c.duration = 0.1;
  c.higher.actor_lr = 3e-6;
  c.lower.hidden = 9;
  c.filter.omega_n = 15.0;
  c.rls_forgetting = 0.99;
  c.param_stride = 7;
  RunConfig back;
  apply_config_json(back, summary_json(c, run(c)));
  EXPECT_EQ(back.mode, Mode::ts_filter);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.duration, 0.1);
  EXPECT_EQ(back.higher.actor_lr, 3e-6);
  EXPECT_EQ(back.lower.hidden, 9u);
  EXPECT_EQ(back.filter.omega_n, 15.0);
  EXPECT_EQ(back.rls_forgetting, 0.99);
  EXPECT_EQ(back.param_stride, 7u);
}

TEST(TraceIo, ConfigOverlayKeepsUnsetFields) {
  RunConfig c;
  apply_config_json(c, R"({"seed": 9, "higher": {"gamma": 0.5}})");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.higher.gamma, 0.5);
  EXPECT_EQ(c.higher.actor_lr, 5e-7);
  EXPECT_EQ(c.mode, Mode::ts);
  apply_config_json(c, "{}");
  EXPECT_EQ(c.seed, 9u);
}

TEST(TraceIo, BadConfigIsRejected) {
  RunConfig c;
  EXPECT_THROW(apply_config_json(c, R"({"sed": 1})"), std::invalid_argument);
  EXPECT_THROW(apply_config_json(c, R"({"higher": {"lr": 1}})"), std::invalid_argument);
  EXPECT_THROW(apply_config_json(c, R"({"duration": "long"})"), std::invalid_argument);
  EXPECT_THROW(apply_config_json(c, R"({"mode": "fast"})"), std::invalid_argument);
  EXPECT_THROW(apply_config_json(c, "{"), std::invalid_argument);
  EXPECT_THROW(apply_config_json(c, "[1]"), std::invalid_argument);
}
