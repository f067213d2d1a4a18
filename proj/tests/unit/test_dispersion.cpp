#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tbhom/coefficients.hpp"
#include "tbhom/dispersion.hpp"
#include "tbhom/oracle1d.hpp"

using namespace tbhom;

TEST(Eigenvalue, ClosedForms) {
  auto D1 = DispersionModel::isotropic(2, {1.0}, 1);
  EXPECT_NEAR(eigenvalue(D1, {0.3, 0.4}), 0.25, 1e-15);
  auto D3 = DispersionModel::isotropic(1, {1.0, 0.0, 1.0}, 3);
  EXPECT_NEAR(eigenvalue(D3, {0.5, 0}), 0.1875, 1e-15);
  EXPECT_NEAR(dispersion_Lambda(D3, {0.5, 0}), std::sqrt(0.1875), 1e-15);
  EXPECT_EQ(eigenvalue(D3, {0, 0}), 0.0);
}

TEST(Eigenvalue, EvenAndOddOrdersAgree) {
  auto D2 = DispersionModel::isotropic(2, {1.3, 0.0}, 2);
  auto D3 = DispersionModel::isotropic(2, {1.3, 0.0, 0.4}, 3);
  auto D4 = DispersionModel::isotropic(2, {1.3, 0.0, 0.4, 0.0}, 4);
  auto D5 = DispersionModel::isotropic(2, {1.3, 0.0, 0.4, 0.0, 0.1}, 5);
  for (double k : {0.1, 0.35, 0.6}) {
    Vec kv{0.8 * k, -0.6 * k};
    const double s2 = (kv[0] * kv[0] + kv[1] * kv[1]);
    EXPECT_NEAR(eigenvalue(D5, kv) - eigenvalue(D4, kv), 0.1 * s2 * s2 * s2, 1e-15);
    EXPECT_EQ(eigenvalue(D2, kv), eigenvalue(D2, {-kv[0], -kv[1]}));
    EXPECT_EQ(eigenvalue(D3, kv), eigenvalue(D4, kv));
  }
}

TEST(Kmax, ClosedForms) {
  auto D = DispersionModel::isotropic(1, {1.0}, 1);
  EXPECT_DOUBLE_EQ(compute_kmax(D, 1.0), 1.0);
  auto D4 = DispersionModel::isotropic(1, {1.0, 0.0, 1.0, 0.0}, 4);
  EXPECT_NEAR(compute_kmax(D4, 1.0), std::sqrt(3.0) / 2, 1e-9);
  EXPECT_DOUBLE_EQ(compute_kmax(D4, 0.5), 0.5);
  auto D2d = DispersionModel::isotropic(2, {1.0, 0.0, 1.0, 0.0}, 4);
  EXPECT_NEAR(D2d.kmax, std::sqrt(3.0) / 2, 1e-9);
}

TEST(Cutoff, ProfileShape) {
  CutoffSpec s{0.8, 2};
  EXPECT_EQ(cutoff(s, 0.0), 1.0);
  EXPECT_EQ(cutoff(s, 0.4), 1.0);
  EXPECT_EQ(cutoff(s, 0.8), 0.0);
  EXPECT_EQ(cutoff(s, 2.0), 0.0);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = cutoff(s, 0.4 + 0.4 * i / 100.0);
    EXPECT_LE(v, prev);
    EXPECT_GE(v, 0.0);
    prev = v;
  }
  const double mid = cutoff(s, 0.6);
  EXPECT_GT(mid, 0.0);
  EXPECT_LT(mid, 1.0);
}

TEST(Lambda, NegativeEigenvalueIsAnError) {
  auto D = DispersionModel::isotropic(1, {1.0, 0.0, 1.0}, 3);
  EXPECT_THROW(dispersion_Lambda(D, {2.0, 0}), ConsistencyError);
}

TEST(Lambda, ParityOnReconstructedModel) {
  TorusGrid g(2, 32);
  auto D = reconstruct_dispersion(checkerboard_coefficient(g), 4);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int i = 0; i < 20; ++i) {
    Vec k{u(rng), u(rng)};
    EXPECT_NEAR(dispersion_Lambda(D, k), dispersion_Lambda(D, {-k[0], -k[1]}), 1e-15);
  }
}

TEST(TaylorBloch, WaveAssembly) {
  TorusGrid g(1, 256);
  auto a = laminate_coefficient(g, 1.0, 4.0);
  auto h = build_hierarchy(a, {1, 0}, 3);
  auto m0 = taylor_bloch_wave(h, 0.0);
  EXPECT_EQ(m0.psi.re.data(), Field::constant(g, 1.0).data());
  EXPECT_EQ(m0.psi.im.max_abs(), 0.0);
  const double k = 0.1;
  auto m = taylor_bloch_wave(h, k, 2);
  Field re = Field::constant(g, 1.0) - k * k * h.phi[2];
  Field im = k * h.phi[1];
  EXPECT_LE((m.psi.re - re).max_abs(), 1e-15);
  EXPECT_LE((m.psi.im - im).max_abs(), 1e-15);
  // Against oracle fields at the grid nodes (jump sampling limits the field accuracy).
  auto o = correctors_1d(Profile1D::laminate(1, 4), 2);
  Field ore = Field::constant(g, 1.0) - k * k * sample_on(o.phi[2], g);
  EXPECT_LE((m.psi.re - ore).norm_l2(), 1e-5);
  auto hc = build_hierarchy(constant_coefficient(g, 2.0), {1, 0}, 3);
  auto mc = taylor_bloch_wave(hc, 0.4);
  EXPECT_EQ(mc.psi.im.max_abs(), 0.0);
  EXPECT_EQ(mc.psi.re.data(), Field::constant(g, 1.0).data());
}

TEST(Eigendefect, ConstantCoefficientsVanish) {
  TorusGrid g(2, 16);
  auto a = constant_coefficient(g, 1.0);
  auto h = build_hierarchy(a, {0.6, 0.8}, 3);
  auto m = eigendefect(h, a, 0.3);
  EXPECT_EQ(m.defect.norm_l2(), 0.0);
  EXPECT_LE(eigendefect_residual(h, a, 0.7).relative, 1e-12);
}

TEST(Eigendefect, KappaZeroKeepsDivergencePart) {
  TorusGrid g(2, 32);
  auto a = checkerboard_coefficient(g);
  auto h = build_hierarchy(a, {0.6, 0.8}, 2);
  auto m = eigendefect(h, a, 0.0);
  EXPECT_EQ(m.defect.im.max_abs(), 0.0);
  EXPECT_GT(m.defect.re.norm_l2(), 0.0);
}

TEST(Eigendefect, SmoothFieldIdentityAndGauge) {
  TorusGrid g(2, 64);
  auto a = checkerboard_coefficient(g);
  auto h = build_hierarchy(a, {0.6, 0.8}, 3);
  const double r = eigendefect_residual(h, a, 0.3).relative;
  EXPECT_LE(r, 1e-8);
  auto shifted = h;
  for (double& v : shifted.chi[3].data()) v += 0.7;
  EXPECT_NEAR(eigendefect_residual(shifted, a, 0.3).relative, r, 1e-12);
}

TEST(Eigendefect, ResidualDecreasesUnderRefinement) {
  double prev = 1e300;
  for (int n : {16, 32, 64}) {
    TorusGrid g(2, n);
    auto a = checkerboard_coefficient(g);
    auto h = build_hierarchy(a, {1, 0}, 2);
    const double r = eigendefect_residual(h, a, 0.3).relative;
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(DispersionCurve, CsvShape) {
  auto D = DispersionModel::isotropic(1, {1.6, 0.0, 0.012}, 3);
  auto csv = dispersion_curve_csv(D, 5);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}
