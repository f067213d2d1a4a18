// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "tbhom/coefficients.hpp"
#include "tbhom/transport.hpp"

using namespace tbhom;

namespace {

const double pi = std::numbers::pi;

CoefficientField unit_box_coefficient(const BoxGrid& box, double value = 1.0) {
  return box_coefficient(constant_coefficient(TorusGrid(box.dim, box.points_per_period()), value), box);
}

}  // namespace

TEST(GaussianData, NormPeakSymmetryAndFit) {
  auto box = BoxGrid::resolved(1, 32.0, 1.0, 16);
  Field G = gaussian_data(1.0, box);
  EXPECT_NEAR(G.norm_l2() * G.norm_l2(), 1 / std::sqrt(pi), 1e-12);
  const std::size_t mid = std::size_t(box.n / 2);
  EXPECT_NEAR(G(mid), 1 / std::sqrt(pi), 1e-15);
  for (std::size_t k = 1; k < mid; ++k) EXPECT_DOUBLE_EQ(G(mid + k), G(mid - k));
  EXPECT_THROW(gaussian_data(1.0, BoxGrid::resolved(1, 8.0, 1.0, 16)), ConfigurationError);
  // 2D peak (lambda / pi)^{d/2}
  auto box2 = BoxGrid::resolved(2, 16.0, 1.0, 16);
  Field G2 = gaussian_data(2.0, box2);
  EXPECT_NEAR(G2.max_abs(), 2.0 / pi, 1e-15);
  EXPECT_NEAR(G2.norm_l2() * G2.norm_l2(), 1 / pi, 1e-12);
}

TEST(Moments, ClosedFormAndHomogeneity) {
  auto box = BoxGrid::resolved(1, 32.0, 1.0, 16);
  Field G = gaussian_data(1.0, box);
  // int (1+|x|)^2 G^2 = pi^{-1/2} + 2/pi + pi^{-1/2}/2
  const double exact = std::sqrt(1 / std::sqrt(pi) + 2 / pi + 0.5 / std::sqrt(pi));
  EXPECT_NEAR(exact, 1.21775, 5e-6);
  const double m = moment_M(G, 1.0, box.center());
  std::printf("M(1,0) = %.8f, closed form %.8f\n", m, exact);
  EXPECT_NEAR(m / exact, 1.0, 1e-3);
  EXPECT_EQ(moment_M(Field(box.torus()), 1.0, box.center()), 0.0);
  EXPECT_NEAR(moment_M(2.0 * G, 1.0, box.center()), 2 * m, 1e-14);
  // Monotone under a pointwise increase of |u|.
  Field H = G;
  for (std::size_t i = 0; i < H.nodes(); i += 7) H(i) *= -1.5;
  EXPECT_GT(moment_M(H, 1.0, box.center()), m);
}

TEST(Moments, WindowedAverage) {
  std::vector<double> t, M;
  for (int i = 0; i <= 64; ++i) {
    t.push_back(i / 32.0);
    M.push_back(3.0);
  }
  EXPECT_NEAR(windowed_moment(t, M, 0.5, 1.0), 3.0, 1e-14);
  EXPECT_NEAR(windowed_moment(t, M, 0.25, 0.5), 3.0 * std::sqrt(0.5), 1e-14);
  // Linear M^2 is integrated exactly, including an unaligned window start.
  for (std::size_t i = 0; i < t.size(); ++i) M[i] = std::sqrt(1 + t[i]);
  EXPECT_NEAR(windowed_moment(t, M, 0.3, 1.0), std::sqrt(1.0 + 0.3 + 0.5), 1e-13);
  EXPECT_THROW(windowed_moment(t, M, 1.5, 1.0), ConfigurationError);
  std::vector<double> sparse_t{0, 0.5, 1.0}, sparse_M{1, 1, 1};
  EXPECT_THROW(windowed_moment(sparse_t, sparse_M, 0.0, 1.0), ConfigurationError);
}

TEST(Moments, TrajectoryConsistencyAndFreeTransport) {
  auto box = BoxGrid::resolved(1, 32.0, 1.0, 16);
  auto a = unit_box_coefficient(box);
  Field G = gaussian_data(1.0, box);
  FineWaveOptions fo;
  fo.scheme = FineScheme::spectral;
  fo.snapshot_interval = 1.0 / 32;
  auto traj = solve_fine_wave(a, box, G, Field(box.torus()), nullptr, 4.0, fo);
  std::vector<double> times, M;
  for (const auto& s : traj.snapshots) {
    times.push_back(s.t);
    M.push_back(moment_M(s.u, 1.0, box.center()));
  }
  for (double T : {0.0, 1.0, 3.0})
    EXPECT_NEAR(moment_script_M(traj, 1.0, T), windowed_moment(times, M, T, 1.0), 1e-12);
  // d'Alembert: u(t) = (G(x - t) + G(x + t)) / 2 with unit speed; the leapfrog
  // phase error makes the moment gap second order in dt.
  const Vec c = box.center();
  Field exact = Field::from_function(box.torus(), [&](const Vec& x) {
    auto g = [](double y) { return std::exp(-0.5 * y * y) / std::sqrt(pi); };
    return 0.5 * (g(x[0] - c[0] - 4.0) + g(x[0] - c[0] + 4.0));
  });
  const double m_exact = moment_M(exact, 1.0, c);
  const double gap = std::abs(moment_M(traj.snapshots.back().u, 1.0, c) - m_exact) / m_exact;
  FineWaveOptions half = fo;
  half.dt = traj.dt / 2;
  auto fine = solve_fine_wave(a, box, G, Field(box.torus()), nullptr, 4.0, half);
  const double gap_half = std::abs(moment_M(fine.snapshots.back().u, 1.0, c) - m_exact) / m_exact;
  std::printf("moment gap at t = 4: %.3e (dt), %.3e (dt/2)\n", gap, gap_half);
  EXPECT_LE(gap, 1e-3);
  EXPECT_NEAR(gap / gap_half, 4.0, 0.2);
  // Window [0, 1/lambda] stays within a factor 4 of the closed-form M(lambda, 0).
  const double m0 = std::sqrt(1 / std::sqrt(pi) + 2 / pi + 0.5 / std::sqrt(pi));
  const double w0 = moment_script_M(traj, 1.0, 0.0);
  EXPECT_GT(w0, m0 / 4);
  EXPECT_LT(w0, 4 * m0);
  EXPECT_THROW(moment_script_M(traj, 1.0, 3.5), ConfigurationError);
}

TEST(Moments, MomentRunMatchesStoredTrajectory) {
  auto box = BoxGrid::resolved(1, 32.0, 1.0, 16);
  auto a = unit_box_coefficient(box);
  MomentRunOptions mo;
  mo.scheme = FineScheme::spectral;
  auto rep = moment_run(a, box, 1.0, 4.0, 1.0, mo);
  EXPECT_TRUE(rep.valid());
  FineWaveOptions fo;
  fo.scheme = FineScheme::spectral;
  fo.snapshot_interval = 4.0 / 128;
  auto traj = solve_fine_wave(a, box, gaussian_data(1.0, box), Field(box.torus()), nullptr, 4.0, fo);
  EXPECT_NEAR(rep.window(2.0), moment_script_M(traj, 1.0, 2.0), 1e-12);
  // Too long for the box: the guard flags the run.
  EXPECT_FALSE(moment_run(a, box, 1.0, 14.0, 1.0, mo).valid());
}

TEST(Ballistic, DefectBoundAndRegimeFlag) {
  ErrorBudget b;
  b.order = 2;
  EXPECT_NEAR(ballistic_defect_bound(b, 0.125, 0.0, 1.0), 0.125, 1e-15);
  EXPECT_GT(ballistic_defect_bound(b, 0.125, 1.5, 1.0), 1.0);

  TorusGrid cell(1, 16);
  auto a = constant_coefficient(cell, 1.0);
  auto D = DispersionModel::isotropic(1, {1.0, 0.0}, 2);
  auto rep = ballistic_experiment(a, D, {0.5}, 1.5, 1.0, 2);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_FALSE(rep.rows[0].conclusive);
  EXPECT_TRUE(rep.rows[0].valid);
  EXPECT_NE(ballistic_csv(rep).find("eps,T,t0,L,script_M,ratio,defect_bound,valid,conclusive"), std::string::npos);
}

TEST(Ballistic, ConstantCoefficientIsEpsIndependent) {
  // Same rescaled window t0 = 4 reached from two eps values.
  TorusGrid cell(1, 16);
  auto a = constant_coefficient(cell, 1.0);
  auto D = DispersionModel::isotropic(1, {1.0, 0.0}, 2);
  BallisticOptions opt;
  opt.L = 32;
  auto r1 = ballistic_experiment(a, D, {0.5}, 0.0, 2.0, 2, opt);
  auto r2 = ballistic_experiment(a, D, {0.25}, 0.0, 1.0, 2, opt);
  EXPECT_DOUBLE_EQ(r1.rows[0].t0, r2.rows[0].t0);
  EXPECT_NEAR(r1.rows[0].script_M / r2.rows[0].script_M, 1.0, 1e-3);
}

TEST(Ballistic, LaminateRatioDoesNotDegenerate) {
  TorusGrid cell(1, 16);
  auto a = laminate_coefficient(cell, 1.0, 4.0);
  auto set = build_corrector_set(a, 2);
  auto rep = ballistic_experiment(a, set.model, {0.125, 0.0625}, 0.0, 1.0, 2);
  for (const auto& r : rep.rows) {
    std::printf("eps %.4f t0 %.1f L %.0f script_M %.4f ratio %.4f bound %.4f valid %d\n", r.eps, r.t0, r.L, r.script_M,
                r.ratio, r.defect_bound, int(r.valid));
    EXPECT_TRUE(r.valid);
  }
  EXPECT_GE(rep.rows[1].ratio, 0.8 * rep.rows[0].ratio);
}
