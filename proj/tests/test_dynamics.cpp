#include <gtest/gtest.h>

#include <cmath>

#include "vpdecay/dynamics.hpp"

using namespace vpdecay;

namespace {
ParticleEnsemble pair_ensemble() {
  // two like charges pushing apart, different species
  SpeciesParticles a({0, 1.0, 1.0}, {{-0.5, 0.0, 0.0}}, {{0.0, 0.1, 0.0}}, std::vector<double>{1.0});
  SpeciesParticles b({1, 1.0, 2.0}, {{0.5, 0.1, 0.0}}, {{0.0, 0.0, -0.1}}, std::vector<double>{1.0});
  return {a, b};
}

FieldConfig direct_cfg() {
  FieldConfig c;
  c.method = FieldMethod::direct;
  c.softening = 0.2;
  c.remove_net_force = false;
  return c;
}

Vec3 position_after(double t_end, int steps) {
  Integrator it(Snapshot::from_g_frame(0.0, pair_ensemble()), direct_cfg());
  for (int k = 0; k < steps; ++k) it.step(t_end / steps);
  return it.snapshot().physical_positions(0)[0];
}
}  // namespace

TEST(LogSpaced, EndpointsExact) {
  const auto t = log_spaced(10.0, 160.0, 12);
  ASSERT_EQ(t.size(), 12u);
  EXPECT_EQ(t.front(), 10.0);
  EXPECT_EQ(t.back(), 160.0);
  EXPECT_NEAR(t[1] / t[0], std::pow(16.0, 1.0 / 11.0), 1e-14);
  EXPECT_THROW(log_spaced(0.0, 1.0, 3), std::invalid_argument);
}

TEST(StepPolicy, GeometricAfterOne) {
  StepPolicy p{0.05, 0.05, 1.0};
  EXPECT_EQ(p.dt_at(0.5), 0.05);
  EXPECT_DOUBLE_EQ(p.dt_at(10.0), 0.5);
  EXPECT_EQ(p.dt_at(100.0), 1.0);
}

TEST(Integrator, FreeParticleExact) {
  SpeciesParticles a({0, 1.0, 1.0}, {{0.25, 0.0, -1.0}}, {{0.5, -0.25, 2.0}}, std::vector<double>{1.0});
  Integrator it(Snapshot::from_g_frame(0.0, {a}), direct_cfg());
  for (int k = 0; k < 8; ++k) it.step(0.125);
  const Snapshot s = it.snapshot();
  EXPECT_EQ(s.time(), 1.0);
  // a single particle feels no force; the g-frame position is unchanged
  EXPECT_NEAR(s.ensemble()[0].positions()[0][0], 0.25, 1e-15);
  EXPECT_NEAR(s.physical_positions(0)[0][2], 1.0, 1e-15);
}

TEST(Integrator, SecondOrderConvergence) {
  const Vec3 x1 = position_after(2.0, 20);
  const Vec3 x2 = position_after(2.0, 40);
  const Vec3 x4 = position_after(2.0, 80);
  const double ratio = norm(x1 - x2) / norm(x2 - x4);
  EXPECT_NEAR(ratio, 4.0, 0.5);
}

TEST(Integrator, MomentumConservedByDirectSum) {
  Integrator it(Snapshot::from_g_frame(0.0, pair_ensemble()), direct_cfg());
  const Vec3 p0 = total_momentum(it.snapshot().ensemble());
  for (int k = 0; k < 50; ++k) it.step(0.05);
  const Vec3 p1 = total_momentum(it.snapshot().ensemble());
  EXPECT_LT(norm(p1 - p0), 1e-14);
  EXPECT_EQ(it.field_evaluations(), 51u);
}

TEST(Step, RequiresPositiveDt) {
  const Snapshot s = Snapshot::from_g_frame(0.0, pair_ensemble());
  EXPECT_THROW(step(s, 0.0, direct_cfg()), std::invalid_argument);
  EXPECT_THROW(step(s, -0.1, direct_cfg()), std::invalid_argument);
  EXPECT_NEAR(step(s, 0.1, direct_cfg()).time(), 0.1, 1e-15);
}

TEST(Run, HitsOutputTimesExactly) {
  RunConfig rc;
  rc.t_end = 3.0;
  rc.output_times = {0.7, 1.3, 3.0};
  rc.steps = {0.25, 0.2, 0.3};
  rc.field = direct_cfg();
  rc.field.probe_resolution = 8;
  std::vector<double> seen;
  const RunResult r = run(pair_ensemble(), rc, [&](const Snapshot& s, const TimeSeriesRow&) { seen.push_back(s.time()); });
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0], 0.7);
  EXPECT_EQ(seen[1], 1.3);
  EXPECT_EQ(seen[2], 3.0);
  EXPECT_EQ(r.snapshots.size(), 3u);
  for (const auto& row : r.series.rows()) EXPECT_EQ(row.total_charge, 2.0);
}

TEST(RunConfig, Validation) {
  RunConfig rc;
  rc.t_end = 0.5;
  EXPECT_THROW(rc.validate(), std::invalid_argument);
  rc = RunConfig{};
  rc.output_times = {20.0, 10.0};
  EXPECT_THROW(rc.validate(), std::invalid_argument);
  rc = RunConfig{};
  EXPECT_EQ(rc.resolved_output_times().size(), 12u);
}

TEST(TimeSeries, AppendAndColumns) {
  TimeSeries ts;
  ts.append({1.0, 2.0, 3.0, 3.0, 1.0, 0.0, {}, false});
  EXPECT_THROW(ts.append({1.0, 2.0, 3.0, 3.0, 1.0, 0.0, {}, false}), std::invalid_argument);
  EXPECT_EQ(ts.column("sup_E").front(), 3.0);
  EXPECT_THROW(ts.column("nope"), std::invalid_argument);
}

TEST(AssumptionA, Monitor) {
  TimeSeries ts;
  const double vals[] = {0.5, 1.0, 0.8, 0.7, 0.6};
  const double ts_[] = {1.0, 5.0, 10.0, 20.0, 40.0};
  for (int i = 0; i < 5; ++i) ts.append({ts_[i], 0.0, 0.0, vals[i], 0.0, 0.0, {}, false});
  const auto r = monitor_assumption_A(ts);
  EXPECT_EQ(r.sup, 1.0);
  EXPECT_EQ(r.t_at_sup, 5.0);
  EXPECT_TRUE(r.holds);
  ts.append({80.0, 0.0, 0.0, 0.65, 0.0, 0.0, {}, false});
  EXPECT_FALSE(monitor_assumption_A(ts).holds);
}

TEST(Support, DiameterOfBox) {
  SpeciesParticles a({0, 1.0, 1.0}, {{0.0, 0.0, 0.0}, {1.0, 2.0, 2.0}}, {{0, 0, 0}, {0, 0, 0}},
                     std::vector<double>{1.0, 1.0});
  EXPECT_DOUBLE_EQ(support_diameter({a}), 3.0);
}
