#include <gtest/gtest.h>

#include <cmath>

#include "vpdecay/diagnostics.hpp"
#include "vpdecay/quadrature.hpp"

using namespace vpdecay;

TEST(Kernel, NormalizedAndDifferentiable) {
  EXPECT_NEAR(integrate_gauss([](double u) { return kde_kernel(u); }, -1.0, 1.0, 16), 1.0, 1e-14);
  EXPECT_EQ(kde_kernel(1.0), 0.0);
  const double h = 1e-5;
  for (int k = 0; k < 5; ++k) {
    const double fd = (kde_kernel(0.3 + h, k) - kde_kernel(0.3 - h, k)) / (2 * h);
    EXPECT_NEAR(kde_kernel(0.3, k + 1), fd, 1e-6 * (1.0 + std::abs(fd))) << "order " << k;
  }
  EXPECT_THROW(kde_kernel(0.0, 7), std::invalid_argument);
}

TEST(Density, GridIntegralEqualsCharge) {
  SpeciesParticles a({0, 1.0, 1.0}, {{0.1, -0.2, 0.3}, {0.4, 0.0, -0.1}}, {{0, 0, 0}, {0, 0, 0}},
                     std::vector<double>{0.7, 0.4});
  SpeciesParticles b({1, -1.0, 1.0}, {{-0.3, 0.2, 0.05}}, {{0, 0, 0}}, std::vector<double>{0.5});
  const Snapshot s = Snapshot::from_g_frame(0.0, {a, b});
  const Grid3 g = Grid3::cube(-1.0, 1.0, 41);
  const DensityField d = density(s, g, 0.2);
  EXPECT_NEAR(d.integral(), 0.6, 1e-13);
  EXPECT_EQ(d.outside_fraction, 0.0);
  EXPECT_GT(d.noise, 0.0);
  EXPECT_THROW(density(s, g, 0.01), std::invalid_argument);
}

// Reference values: tests/oracle/oracle.py.
TEST(Oracle, FreeStreamDensityMatchesIndependentQuadrature) {
  const InitialData d = build_initial_data(InitialDataSpec::for_order(1));
  const OracleValues o = free_stream_density(d, 10.0, std::vector<Vec3>{{2.0, 1.0, -1.0}});
  EXPECT_NEAR(o.values[0], 0.00013467451651668659122, 1e-12 * 0.000134675);
  EXPECT_LT(o.error, 1e-12);
}

TEST(Oracle, GridAndPointVersionsAgree) {
  const InitialData d = build_initial_data(InitialDataSpec::for_order(2));
  const Grid3 g = free_stream_grid(d, 20.0, 9);
  const DensityField f = free_stream_density(d, 20.0, g);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < g.size(); i += 37) pts.push_back(g.node(i));
  const OracleValues o = free_stream_density(d, 20.0, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) EXPECT_EQ(o.values[k], f.values[k * 37]);
}

TEST(Limit, AnalyticProfilesMatchOracle) {
  const Vec3 v{0.3, 0.1, -0.2};
  const InitialData d1 = build_initial_data(InitialDataSpec::for_order(1));
  EXPECT_NEAR(analytic_rho_ell(d1, 1, v), 1.6742826265940775, 1e-12);
  EXPECT_NEAR(analytic_rho_ell(d1, 0, v), 0.0, 1e-14);
  const InitialData d2 = build_initial_data(InitialDataSpec::for_order(2));
  EXPECT_NEAR(analytic_rho_ell(d2, 2, v), -1.8628675430937846618, 1e-12);
}

namespace {
// successive error ratios of t^{3+l} rho(t, t v) against the limit under t doubling
std::vector<double> doubling_ratios(const InitialData& d, int ell, const Vec3& v) {
  const double lim = analytic_rho_ell(d, ell, v);
  std::vector<double> err;
  for (double t : {50.0, 100.0, 200.0}) {
    const double r = std::pow(t, 3 + ell) * free_stream_density(d, t, std::vector<Vec3>{t * v}).values[0];
    err.push_back(std::abs(r - lim));
  }
  return {err[1] / err[0], err[2] / err[1]};
}
}  // namespace

TEST(Limit, RescaledDensityOffsetCenterConvergesAtFirstOrder) {
  InitialDataSpec spec = InitialDataSpec::for_order(1);
  spec.center = {0.5, 0.25, 0.0};
  for (double r : doubling_ratios(build_initial_data(spec), 1, {0.3, 0.1, -0.2})) EXPECT_NEAR(r, 0.5, 0.1);
}

TEST(Limit, RescaledDensityCenteredConvergesAtSecondOrder) {
  // first-order correction carries the x-centroid, which vanishes here
  for (double r : doubling_ratios(build_initial_data(InitialDataSpec::for_order(1)), 1, {0.3, 0.1, -0.2}))
    EXPECT_NEAR(r, 0.25, 0.05);
}

TEST(Moments, TableIntegratesToSpeciesNumber) {
  const ParticleEnsemble e = construct_ensemble(InitialDataSpec::for_order(1));
  const Snapshot s = Snapshot::from_g_frame(5.0, e);
  const Grid3 vg = Grid3::cube(-1.3, 1.3, 27);
  const auto tables = moment_table(s, 0, vg, 2.5 * vg.axes[0].spacing());
  ASSERT_EQ(tables.size(), 2u);
  for (std::size_t a = 0; a < 2; ++a) {
    double sum = 0.0;
    for (double x : tables[a].values) sum += x * vg.cell_volume();
    EXPECT_NEAR(sum, e[a].number(), 1e-11);
  }
  EXPECT_THROW(moment_table(s, 4, vg, 0.3), std::invalid_argument);
}

TEST(Moments, TestedMomentIsDirectSum) {
  SpeciesParticles a({0, 1.0, 1.0}, {{0.2, -0.1, 0.4}, {-0.3, 0.5, 0.0}}, {{0.1, 0.0, 0.2}, {-0.2, 0.3, 0.1}},
                     std::vector<double>{0.6, 0.9});
  const Snapshot s = Snapshot::from_g_frame(3.0, {a});
  const Vec3 c{0.05, 0.0, -0.1};
  const double w = 0.4;
  const TestFunction phi = gaussian_test_function(c, w);
  auto g = [&](const Vec3& v) { return std::exp(-dot(v - c, v - c) / (2 * w * w)); };
  const double m0 = 0.6 * g({0.1, 0.0, 0.2}) + 0.9 * g({-0.2, 0.3, 0.1});
  EXPECT_NEAR(tested_moment(s, 0, phi)[0], m0, 1e-15);
  // order 1: sum_j w_j X_j . grad phi(V_j)
  double m1 = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    const Vec3 V = a.velocities()[j];
    const Vec3 X = a.positions()[j];
    m1 += a.weights()[j] * g(V) * dot(X, (-1.0 / (w * w)) * (V - c));
  }
  EXPECT_NEAR(tested_moment(s, 1, phi)[0], m1, 1e-14);
}

TEST(Moments, RhoEllCombinesSpecies) {
  MomentTable a, b;
  a.grid = b.grid = Grid3::cube(-1.0, 1.0, 5);
  a.values.assign(125, 2.0);
  b.values.assign(125, 0.5);
  a.species = 0;
  b.species = 1;
  const LimitProfile p = rho_ell({a, b}, {1.0, -1.0});
  EXPECT_DOUBLE_EQ(p.scalar[62], 1.5);
  EXPECT_NEAR(rho_ell_at(p, 10.0, {1.0, 2.0, 0.0}), 1.5, 1e-14);
}
