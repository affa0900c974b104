#include "ihdp/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ihdp/trace_io.hpp"

using namespace ihdp;

namespace {

RunConfig short_config(Mode mode, double seconds, std::uint64_t seed = 1) {
  RunConfig c;
  c.mode = mode;
  c.duration = seconds;
  c.seed = seed;
  c.param_stride = 0;
  return c;
}

void freeze(RunConfig& c) {
  c.higher.critic_lr = c.higher.actor_lr = 0.0;
  c.lower.critic_lr = c.lower.actor_lr = 0.0;
}

std::string csv(const SimulationTrace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

}  // namespace

TEST(Harness, ModeNames) {
  for (Mode m : {Mode::vanilla, Mode::ts, Mode::ts_filter}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_mode("fast"), std::invalid_argument);
}

TEST(Harness, ConfigValidation) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.steps(), 40000u);
  c.duration = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.dt = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.reference.amplitude = 25.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.higher.gamma = 2.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Harness, Reference) {
  const RunConfig c;
  const ReferenceSample r0 = reference(0.0, c);
  EXPECT_EQ(r0.now, 0.0);
  EXPECT_NEAR(r0.next, 10.0 * 2.0 * std::numbers::pi * 0.001 / 10.0, 1e-9);
  const ReferenceSample quarter = reference(2.5, c);
  EXPECT_NEAR(quarter.now, 10.0, 1e-12);
  EXPECT_NEAR(quarter.next, 10.0, 1e-5);
  const ReferenceSample half = reference(5.0, c);
  EXPECT_NEAR(half.now, 0.0, 1e-12);
  EXPECT_LT(half.next, 0.0);
}

TEST(Harness, InferenceOnlyRunIsWellFormed) {
  RunConfig c = short_config(Mode::ts, 40.0);
  freeze(c);
  c.param_stride = 1000;
  const SimulationTrace t = run(c);
  ASSERT_FALSE(t.diverged) << t.diagnostic;
  ASSERT_EQ(t.records.size(), 40000u);
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    ASSERT_GT(t.records[i].t, t.records[i - 1].t);
  }
  // nothing learns: no updates are taken and the weights never move
  for (const TraceRecord& r : t.records) {
    ASSERT_EQ(r.actor_iters1 + r.actor_iters2 + r.critic_iters1 + r.critic_iters2, 0);
  }
  ASSERT_EQ(t.snapshots.size(), 40u);
  for (const ParamSnapshot& s : t.snapshots) {
    EXPECT_EQ(s.critic1, t.snapshots.front().critic1);
    EXPECT_EQ(s.actor1, t.snapshots.front().actor1);
    EXPECT_EQ(s.critic2, t.snapshots.front().critic2);
    EXPECT_EQ(s.actor2, t.snapshots.front().actor2);
  }
}

TEST(Harness, ZeroActorsFollowOpenLoopDynamics) {
  RunConfig c = short_config(Mode::vanilla, 1.0);
  freeze(c);
  c.higher.init_range = 0.0;
  c.lower.init_range = 0.0;
  const SimulationTrace t = run(c);
  for (const TraceRecord& r : t.records) {
    ASSERT_EQ(r.q_ref, 0.0);
    ASSERT_EQ(r.delta_cmd, 0.0);
    ASSERT_EQ(r.alpha, 0.0);
    ASSERT_EQ(r.q, 0.0);
  }
}

TEST(Harness, RecordsAreFiniteAndBounded) {
  for (Mode m : {Mode::vanilla, Mode::ts, Mode::ts_filter}) {
    const SimulationTrace t = run(short_config(m, 1.5, 3));
    ASSERT_FALSE(t.diverged) << t.diagnostic;
    ASSERT_EQ(t.records.size(), 1500u);
    for (const TraceRecord& r : t.records) {
      ASSERT_LT(std::abs(r.q_ref_raw), 20.0);
      ASSERT_LT(std::abs(r.delta_cmd), 20.0);
      ASSERT_LE(std::abs(r.delta), 20.0);
      ASSERT_TRUE(std::isfinite(r.alpha) && std::isfinite(r.q) && std::isfinite(r.c1) &&
                  std::isfinite(r.td2) && std::isfinite(r.k1));
      if (m == Mode::vanilla) {
        ASSERT_EQ(r.ts1, 0.0);
        ASSERT_EQ(r.ts2, 0.0);
      }
      if (m != Mode::ts_filter) {
        ASSERT_EQ(r.q_ref, r.q_ref_raw);
      }
    }
  }
}

TEST(Harness, FilterStartsOnFirstCommand) {
  const SimulationTrace t = run(short_config(Mode::ts_filter, 0.2));
  EXPECT_EQ(t.records.front().q_ref, t.records.front().q_ref_raw);
  EXPECT_EQ(t.records.front().q_ref_rate, 0.0);
}

TEST(Harness, VanillaAndTsAgreeWhenActorsAreFrozen) {
  RunConfig a = short_config(Mode::vanilla, 1.0);
  RunConfig b = short_config(Mode::ts, 1.0);
  a.higher.actor_lr = a.lower.actor_lr = 0.0;
  b.higher.actor_lr = b.lower.actor_lr = 0.0;
  const SimulationTrace ta = run(a);
  const SimulationTrace tb = run(b);
  ASSERT_EQ(ta.records.size(), tb.records.size());
  bool ts_active = false;
  for (std::size_t i = 0; i < ta.records.size(); ++i) {
    EXPECT_EQ(ta.records[i].q_ref, tb.records[i].q_ref);
    EXPECT_EQ(ta.records[i].alpha, tb.records[i].alpha);
    EXPECT_EQ(ta.records[i].c2, tb.records[i].c2);
    EXPECT_EQ(ta.records[i].ts1, 0.0);
    ts_active = ts_active || tb.records[i].ts1 > 0.0;
  }
  EXPECT_TRUE(ts_active);
}

TEST(Harness, VanillaAndTsShareStartUntilTsActs) {
  const SimulationTrace ta = run(short_config(Mode::vanilla, 0.05));
  const SimulationTrace tb = run(short_config(Mode::ts, 0.05));
  std::size_t first = tb.records.size();
  for (std::size_t i = 0; i < tb.records.size(); ++i) {
    if (tb.records[i].dq_ref_pred > 0.0 || tb.records[i].ddelta_pred > 0.0) {
      first = i;
      break;
    }
  }
  for (std::size_t i = 0; i < first; ++i) {
    EXPECT_EQ(ta.records[i].q_ref, tb.records[i].q_ref);
    EXPECT_EQ(ta.records[i].delta_cmd, tb.records[i].delta_cmd);
  }
}

TEST(Harness, Determinism) {
  const RunConfig c = short_config(Mode::ts_filter, 1.0, 7);
  EXPECT_EQ(csv(run(c)), csv(run(c)));
  const RunConfig d = short_config(Mode::ts_filter, 1.0, 8);
  EXPECT_NE(csv(run(c)), csv(run(d)));
}

TEST(Harness, BatchKeepsOrderAndMatchesSerialRuns) {
  std::vector<RunConfig> cfgs;
  for (std::uint64_t s = 1; s <= 3; ++s) cfgs.push_back(short_config(Mode::ts, 0.3, s));
  const auto batch = run_batch(cfgs, 3);
  ASSERT_EQ(batch.size(), 3u);
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    EXPECT_EQ(batch[i].seed, cfgs[i].seed);
    EXPECT_EQ(csv(batch[i]), csv(run(cfgs[i])));
  }
}

TEST(Harness, ParameterSnapshots) {
  RunConfig c = short_config(Mode::ts, 0.25);
  c.param_stride = 100;
  const SimulationTrace t = run(c);
  ASSERT_EQ(t.snapshots.size(), 3u);
  EXPECT_EQ(t.snapshots[1].t, t.records[100].t);
  EXPECT_EQ(t.snapshots[0].critic1.size(), 29u);
  EXPECT_EQ(t.snapshots[0].actor2.size(), 36u);
}

TEST(Harness, DivergenceIsReported) {
  RunConfig c = short_config(Mode::vanilla, 2.0);
  freeze(c);
  c.divergence_alpha = 1e-6;  // any motion counts
  c.higher.init_range = 0.5;
  c.lower.init_range = 0.5;
  const SimulationTrace t = run(c);
  EXPECT_TRUE(t.diverged);
  EXPECT_LT(t.records.size(), c.steps());
  EXPECT_NE(t.diagnostic.find("diverged"), std::string::npos);
}

TEST(Harness, CompareWithItselfIsZero) {
  const SimulationTrace t = run(short_config(Mode::ts, 0.5));
  const Comparison c = compare({t, t});
  ASSERT_EQ(c.deltas.size(), 1u);
  for (const auto& [name, value] : c.deltas[0].relative) EXPECT_EQ(value, 0.0) << name;
}

TEST(Harness, CompareRejectsBadInput) {
  const SimulationTrace t = run(short_config(Mode::ts, 0.1));
  EXPECT_THROW(compare({t}), std::invalid_argument);
  SimulationTrace other = t;
  other.dt = 0.002;
  EXPECT_THROW(compare({t, other}), std::invalid_argument);
}

TEST(Harness, ConstantTraceHasNoIncrementsOrBandEnergy) {
  SimulationTrace t;
  for (int i = 0; i < 2000; ++i) {
    TraceRecord r;
    r.t = i * 0.001;
    r.q_ref = 4.0;
    r.delta_cmd = -2.0;
    t.records.push_back(r);
  }
  const SmoothnessReport r = report_for(t);
  EXPECT_EQ(r.mean_dq_ref, 0.0);
  EXPECT_EQ(r.mean_ddelta, 0.0);
  EXPECT_LT(r.band_energy_q_ref, 1e-20);
  EXPECT_LT(r.band_energy_delta, 1e-20);
  const Comparison c = compare({t, t});
  EXPECT_EQ(c.reports.size(), 2u);
}

TEST(Harness, ReportWindowStartsAtT0) {
  SimulationTrace t;
  for (int i = 0; i < 100; ++i) {
    TraceRecord r;
    r.t = i * 0.001;
    r.e_alpha = i < 50 ? 100.0 : 1.0;
    t.records.push_back(r);
  }
  EXPECT_DOUBLE_EQ(report_for(t, 0.0495).rms_e_alpha, 1.0);
}
