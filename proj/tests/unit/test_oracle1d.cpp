#include <gtest/gtest.h>

#include <cmath>

#include "tbhom/coefficients.hpp"
#include "tbhom/oracle1d.hpp"

using namespace tbhom;

TEST(HarmonicMean, ClosedForms) {
  EXPECT_NEAR(harmonic_mean(Profile1D::constant(2.5)), 2.5, 1e-15);
  EXPECT_NEAR(harmonic_mean(Profile1D::laminate(1, 4)), 1.6, 1e-15);
  EXPECT_NEAR(harmonic_mean(Profile1D::laminate(1, 9)), 1.8, 1e-15);
}

TEST(Oracle, ConstantProfileIsTrivial) {
  auto o = correctors_1d(Profile1D::constant(3.0), 4);
  EXPECT_NEAR(o.lambda[0], 3.0, 1e-15);
  for (int j = 1; j < 4; ++j) EXPECT_NEAR(o.lambda[j], 0.0, 1e-15);
  for (int j = 1; j <= 4; ++j)
    for (double v : o.phi[j].values()) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Oracle, LaminateValues) {
  // Exact rational values from symbolic integration of the piecewise polynomials.
  auto o = correctors_1d(Profile1D::laminate(1, 4), 5);
  EXPECT_NEAR(o.lambda[0], 8.0 / 5.0, 1e-14);
  EXPECT_NEAR(o.lambda[1], 0.0, 1e-12);
  EXPECT_NEAR(o.lambda[2], 3.0 / 250.0, 1e-14);
  EXPECT_NEAR(o.lambda[3], 0.0, 1e-12);
  EXPECT_NEAR(o.lambda[4], -51.0 / 50000.0, 1e-14);
  EXPECT_LE(o.flux_identity_residual, 1e-12);
  EXPECT_NEAR(lambda2_square(o), o.lambda[2], 1e-10);
}

TEST(Oracle, QuadratureRefinementIsInvariant) {
  auto a = correctors_1d(Profile1D::laminate(1, 4), 4);
  Profile1D fine = Profile1D::laminate(1, 4);
  fine.breaks = {0.0, 0.125, 0.25, 0.5, 0.75, 1.0};
  fine.values = {1, 1, 1, 4, 4};
  auto b = correctors_1d(fine, 4);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(a.lambda[j], b.lambda[j], 1e-12);
}

TEST(Oracle, SmoothProfileMatchesSpectral) {
  auto o = correctors_1d(Profile1D::smooth([](double x) { return 2 + std::sin(2 * M_PI * x); }), 4);
  TorusGrid g(1, 256);
  auto a = checkerboard_coefficient(g);
  auto c = compare_with_spectral(o, build_hierarchy(a, {1, 0}, 4));
  for (double v : c.phi_gap) EXPECT_LE(v, 1e-8);
  for (double v : c.chi_gap) EXPECT_LE(v, 1e-8);
  for (double v : c.lambda_gap) EXPECT_LE(v, 1e-8);
}

TEST(Oracle, ConstantProfileComparison) {
  auto o = correctors_1d(Profile1D::constant(2.0), 3);
  TorusGrid g(1, 64);
  auto c = compare_with_spectral(o, build_hierarchy(constant_coefficient(g, 2.0), {1, 0}, 3));
  for (double v : c.phi_gap) EXPECT_LE(v, 1e-12);
  for (double v : c.lambda_gap) EXPECT_LE(v, 1e-12);
}

TEST(Oracle, PanelCalculus) {
  auto f = PanelFunction::sample({0.0, 0.3, 1.0}, [](double x) { return x * x; });
  EXPECT_NEAR(f.mean(), 1.0 / 3.0, 1e-15);
  auto F = f.antiderivative();
  EXPECT_NEAR(F(0.7), 0.343 / 3.0, 1e-15);
  EXPECT_NEAR(F.at_end(), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(correctors_1d(Profile1D::constant(1.0), 7), ConfigurationError);
}
