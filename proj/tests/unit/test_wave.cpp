#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "tbhom/coefficients.hpp"
#include "tbhom/oracle1d.hpp"
#include "tbhom/wave.hpp"

using namespace tbhom;
using std::numbers::pi;

namespace {

Field single_mode(const BoxGrid& b, int axis = 0, int freq = 1) {
  return Field::from_function(b.torus(), [&](const Vec& x) { return std::sin(2 * pi * freq * x[axis] / b.L); });
}

double rel(const Field& a, const Field& b) { return (a - b).norm_l2() / std::max(b.norm_l2(), 1e-300); }

}  // namespace

TEST(BoxGrid, Validation) {
  EXPECT_NO_THROW(BoxGrid(1, 1.0, 128, 1.0 / 8));
  EXPECT_THROW(BoxGrid(1, 1.0, 64, 1.0 / 8), ConfigurationError);  // 8 points per period
  EXPECT_THROW(BoxGrid(1, 1.0, 100, 0.25), ConfigurationError);
  EXPECT_THROW(BoxGrid(1, 1.0, 128, 0.3), ConfigurationError);
  auto b = BoxGrid::resolved(2, 2.0, 0.5, 16);
  EXPECT_EQ(b.n, 64);
  EXPECT_EQ(b.periods(), 4);
}

TEST(BoxGrid, CoefficientTiling) {
  TorusGrid cell(1, 16);
  auto a = laminate_coefficient(cell, 1.0, 4.0);
  BoxGrid box(1, 2.0, 128, 0.25);
  auto ab = box_coefficient(a, box);
  for (std::size_t i = 0; i < ab.grid().nodes(); ++i) {
    const double y = std::fmod(box.torus().coord(i)[0] / box.eps, 1.0);
    EXPECT_EQ(ab.entry(i, 0, 0), y < 0.5 - 1e-12 ? 1.0 : 4.0);
  }
}

TEST(FineWave, SingleModeDalembert) {
  // a = Id, u(t) = cos(2 pi t / L) sin(2 pi x / L); second order in dt and h.
  double prev = 0;
  for (int n : {64, 128, 256}) {
    BoxGrid box(1, 1.0, n, 1.0 / 4);
    auto a = constant_coefficient(box.torus(), 1.0);
    Field u0 = single_mode(box);
    FineWaveOptions opt;
    opt.snapshot_interval = 0.25;
    auto tr = solve_fine_wave(a, box, u0, Field(box.torus()), nullptr, 1.0, opt);
    double err = 0;
    for (const auto& s : tr.snapshots) err = std::max(err, (s.u - std::cos(2 * pi * s.t) * u0).max_abs());
    EXPECT_LT(err, 2e-3);
    if (prev > 0) EXPECT_NEAR(prev / err, 4.0, 0.3);
    prev = err;
    EXPECT_LE(tr.energy_drift, 1e-6);
  }
}

TEST(FineWave, ZeroDataStaysZero) {
  BoxGrid box(2, 1.0, 32, 0.5);
  auto a = box_coefficient(checkerboard_coefficient(TorusGrid(2, 16)), box);
  Field z(box.torus());
  auto tr = solve_fine_wave(a, box, z, z, nullptr, 0.5, {});
  for (const auto& s : tr.snapshots) EXPECT_EQ(s.u.max_abs(), 0.0);
  FineWaveOptions sp;
  sp.scheme = FineScheme::spectral;
  tr = solve_fine_wave(a, box, z, z, nullptr, 0.5, sp);
  EXPECT_EQ(tr.snapshots.back().u.max_abs(), 0.0);
}

TEST(FineWave, CflAndInstability) {
  BoxGrid box(1, 1.0, 64, 0.25);
  auto a = constant_coefficient(box.torus(), 1.0);
  FineWaveOptions opt;
  opt.dt = 2 * stable_time_step(a, FineScheme::finite_difference);
  Field u0 = single_mode(box);
  EXPECT_THROW(solve_fine_wave(a, box, u0, Field(box.torus()), nullptr, 1.0, opt), ConfigurationError);
  // Off-diagonal coefficients need the spectral scheme.
  auto off_diagonal_fd = [] {
    BoxGrid b2(2, 1.0, 32, 0.5);
    Field m(b2.torus(), Rank::symmetric);
    for (std::size_t i = 0; i < m.nodes(); ++i) m(i, 0) = 3, m(i, 1) = 0.5, m(i, 2) = 3;
    fine_operator(CoefficientField(m), Field(b2.torus()), FineScheme::finite_difference);
  };
  EXPECT_THROW(off_diagonal_fd(),
      ConfigurationError);
}

TEST(FineWave, EnergyAndL2BoundOnLaminate) {
  BoxGrid box(1, 4.0, 512, 0.25);
  auto a = box_coefficient(laminate_coefficient(TorusGrid(1, 32), 1.0, 4.0), box);
  Field u0 = gaussian_bump(box, 0.5);
  for (FineScheme s : {FineScheme::finite_difference, FineScheme::spectral}) {
    FineWaveOptions opt;
    opt.scheme = s;
    opt.snapshot_interval = 0.5;
    auto tr = solve_fine_wave(a, box, u0, Field(box.torus()), nullptr, 4.0, opt);
    EXPECT_LE(tr.energy_drift, 1e-6) << to_string(s);
    EXPECT_LE(tr.max_l2_ratio, 1 + 1e-6) << to_string(s);
    EXPECT_EQ(tr.snapshots.size(), 9u);
  }
}

TEST(FineWave, ObserverStreamsWithoutStoring) {
  BoxGrid box(1, 1.0, 64, 0.25);
  auto a = constant_coefficient(box.torus(), 2.0);
  FineWaveOptions opt;
  opt.snapshot_interval = 0.1;
  opt.store_snapshots = false;
  int seen = 0;
  auto tr = solve_fine_wave(a, box, single_mode(box), Field(box.torus()), nullptr, 1.0, opt,
                            [&](const Snapshot&) { ++seen; });
  EXPECT_EQ(seen, 11);
  EXPECT_TRUE(tr.snapshots.empty());
  EXPECT_EQ(tr.energy.size(), 11u);
}

TEST(Homogenized, ConstantCoefficientsAndCutoff) {
  BoxGrid box(1, 8.0, 512, 0.25);
  auto D = DispersionModel::isotropic(1, {2.0}, 1);
  Field u0 = single_mode(box, 0, 1);
  const double k = 2 * pi / box.L;
  auto spec = CutoffSpec::from(D);
  Field w = homogenized_wave_field(D, spec, u0, box.eps, 1.7);
  EXPECT_LE(rel(w, std::cos(std::sqrt(2.0) * k * 1.7) * u0), 1e-13);
  EXPECT_LE(rel(homogenized_wave_field(D, spec, u0, box.eps, 0.0), filtered_data(spec, u0, box.eps)), 1e-15);
  auto D2 = DispersionModel::isotropic(1, {1.6, 0.0}, 2);
  auto D3 = DispersionModel::isotropic(1, {1.6, 0.0, 0.012}, 3);
  Field g = gaussian_bump(box, 0.7);
  auto w2 = homogenized_wave_field(D2, CutoffSpec::from(D2), g, box.eps, 3.0);
  auto w3 = homogenized_wave_field(D3, CutoffSpec::from(D3), g, box.eps, 3.0);
  auto D4 = DispersionModel::isotropic(1, {1.6, 0.0, 0.012, 0.0}, 4);
  auto w4 = homogenized_wave_field(D4, CutoffSpec::from(D4), g, box.eps, 3.0);
  EXPECT_EQ((w3 - w4).max_abs(), 0.0);
  EXPECT_GT((w2 - w3).max_abs(), 0.0);
}

TEST(Homogenized, TimeReversibility) {
  BoxGrid box(2, 2.0, 64, 0.5);
  auto D = reconstruct_dispersion(checkerboard_coefficient(TorusGrid(2, 32)), 4);
  Field u0 = gaussian_bump(box, 0.3);
  const double gamma = choose_gamma(D);
  std::vector<ModePropagator> props{homogenized_propagator(D, CutoffSpec::from(D), box.eps, box.torus()),
                                    regularized_propagator(D, gamma, box.eps, box.torus()),
                                    boussinesq_propagator(D.P[0], boussinesq_decomposition(D), box.eps, box.torus())};
  for (const auto& p : props) {
    auto [u, v] = p.evolve(u0, Field(box.torus()), 2.3);
    auto [ub, vb] = p.evolve(u, v, -2.3);
    EXPECT_LE(rel(ub, u0), 1e-12);
    EXPECT_LE(vb.norm_l2(), 1e-12 * std::max(v.norm_l2(), u0.norm_l2()));
  }
}

TEST(Dressing, ConstantAndOrderZero) {
  TorusGrid cell(2, 16);
  auto tc = tensorize_correctors(constant_coefficient(cell, 1.5), 2);
  BoxGrid box(2, 2.0, 64, 0.5);
  Field u0 = gaussian_bump(box, 0.3);
  auto D = DispersionModel::isotropic(2, {1.5, 0.0}, 2);
  auto spec = CutoffSpec::from(D);
  EXPECT_LE(rel(well_prepared_data(tc, spec, u0, box.eps, 2), filtered_data(spec, u0, box.eps)), 1e-15);
  auto tc2 = tensorize_correctors(checkerboard_coefficient(cell), 2);
  EXPECT_EQ(well_prepared_data(tc2, spec, u0, box.eps, 0).data(), filtered_data(spec, u0, box.eps).data());
  EXPECT_THROW(well_prepared_data(tc2, spec, u0, box.eps, 3), ConfigurationError);
  // Constant a: the ansatz is the homogenized field.
  EXPECT_LE(rel(taylor_bloch_ansatz(tc, D, spec, u0, box.eps, 2, 0.8), homogenized_wave_field(D, spec, u0, box.eps, 0.8)),
            1e-15);
}

TEST(Dressing, LaminateMatchesOracleAssembly) {
  // u_{0,eps} + eps phi_1(x/eps) u'_{0,eps}, phi_1 from the piecewise-polynomial oracle.
  const int ppp = 64;
  TorusGrid cell(1, ppp);
  auto tc = tensorize_correctors(laminate_coefficient(cell, 1.0, 4.0), 1);
  auto box = BoxGrid::resolved(1, 8.0, 0.5, ppp);
  auto D = DispersionModel::isotropic(1, {1.6}, 1);
  auto spec = CutoffSpec::from(D);
  Field u0 = gaussian_bump(box, 1.0);
  Field f0 = filtered_data(spec, u0, box.eps);
  auto o = correctors_1d(Profile1D::laminate(1, 4), 1);
  Field phi1 = box_field(sample_on(o.phi[1], cell), box);
  Field df0 = derivative(f0, 0);
  Field expect = f0 + box.eps * (phi1 * df0);
  Field got = well_prepared_data(oracle_tensors(o, cell), spec, u0, box.eps, 1);
  EXPECT_LE(rel(got, expect), 1e-8);
  // Spectral phi_1 of the sampled laminate differs from the exact one by O(h) near the jumps.
  const double gap = rel(well_prepared_data(tc, spec, u0, box.eps, 1), expect);
  std::printf("spectral vs oracle dressing gap at %d points per period: %.3e\n", ppp, gap);
  EXPECT_LE(gap, 2e-3);
}

TEST(Dressing, AnsatzAtZeroAndSingleMode) {
  TorusGrid cell(1, 32);
  auto a = checkerboard_coefficient(cell);
  auto set = build_corrector_set(a, 3);
  BoxGrid box(1, 2.0, 256, 0.125);
  Field u0 = gaussian_bump(box, 0.4);
  auto spec = CutoffSpec::from(set.model);
  EXPECT_LE(rel(taylor_bloch_ansatz(set.tensors, set.model, spec, u0, box.eps, 3, 0.0),
                well_prepared_data(set.tensors, spec, u0, box.eps, 3)),
            1e-10);
  // One mode sin(k x): the ansatz is omega cos(Lambda t / eps) Im[e^{ikx} psi_{eps k}(x/eps)].
  Field s = single_mode(box, 0, 1);
  const double k = 2 * pi / box.L, t = 0.9;
  auto& h = set.hierarchies.at(0);
  const double lam = dispersion_Lambda(set.model, {box.eps * k, 0}) / box.eps;
  const double w = cutoff(spec, box.eps * k);
  Field expect(box.torus());
  for (std::size_t i = 0; i < expect.nodes(); ++i) {
    const double x = box.torus().coord(i)[0];
    std::complex<double> psi = 0, ik = {0, box.eps * k}, p = 1;
    for (int j = 0; j <= 3; ++j, p *= ik) psi += p * box_field(h.phi[j], box)(i);
    expect(i) = w * std::cos(lam * t) * std::imag(std::exp(std::complex<double>(0, k * x)) * psi);
  }
  EXPECT_LE(rel(taylor_bloch_ansatz(set.tensors, set.model, spec, s, box.eps, 3, t), expect), 1e-12);
}

TEST(Gamma, ClosedFormsAndCoercivity) {
  EXPECT_EQ(choose_gamma(DispersionModel::isotropic(1, {1.6, 0.0}, 2)), 0.0);
  EXPECT_EQ(choose_gamma(DispersionModel::isotropic(2, {1.0, 0.0, 0.0, 0.0}, 4)), 0.0);
  auto D = DispersionModel::isotropic(1, {1.0, 0.0, 1.0, 0.0}, 4);
  const double g = choose_gamma(D);
  EXPECT_NEAR(g, 2.0, 1e-9);
  const int m = regularization_power(4);
  EXPECT_EQ(m, 2);
  for (double s = 1e-3; s < 1e3; s *= 1.01) {
    const double lhs = s * s - std::pow(s, 4) + 0.5 * g * std::pow(s, 6);
    EXPECT_GE(lhs, 0.5 * (s * s + std::pow(s, 6)) * (1 - 1e-9));
  }
  // Coercivity on box modes for a reconstructed 2D model.
  auto D2 = reconstruct_dispersion(checkerboard_coefficient(TorusGrid(2, 32)), 4);
  const double g2 = choose_gamma(D2);
  EXPECT_GT(g2, 0.0);
  const int m2 = regularization_power(4);
  for (double eps : {1.0, 0.25}) {
    BoxGrid box(2, 4.0, 256, eps);
    for (const Mode& md : Spectral::of(box.torus()).modes()) {
      const double k2 = md.k[0] * md.k[0] + md.k[1] * md.k[1];
      const double bound = 0.5 * (k2 + std::pow(eps, 2 * m2) * std::pow(k2, m2 + 1));
      EXPECT_GE(regularized_symbol(D2, g2, eps, md.k), bound * (1 - 1e-12));
    }
  }
}

TEST(Regularized, ReducesToClassicalAndChecksPositivity) {
  BoxGrid box(1, 4.0, 256, 0.25);
  Field u0 = gaussian_bump(box, 0.5);
  auto D1 = DispersionModel::isotropic(1, {1.6}, 1);
  auto w = solve_homogenized_wave_regularized(D1, 0.0, u0, box.eps, {0.0, 1.3});
  EXPECT_EQ(w[0].data().size(), u0.data().size());
  EXPECT_LE(rel(w[0], u0), 1e-15);
  Field expect = apply_multiplier(u0, [](const Mode& m) { return cplx(std::cos(std::sqrt(1.6) * std::abs(m.k[0]) * 1.3)); });
  EXPECT_LE(rel(w[1], expect), 1e-14);
  auto D4 = DispersionModel::isotropic(1, {1.0, 0.0, 1.0, 0.0}, 4);
  BoxGrid fine(1, 4.0, 1024, 0.25);
  EXPECT_THROW(regularized_propagator(D4, 0.0, 1.0, fine.torus()), PositivityError);
  EXPECT_NO_THROW(regularized_propagator(D4, choose_gamma(D4), 1.0, fine.torus()));
}

TEST(Boussinesq, DecompositionExamples) {
  auto D0 = DispersionModel::isotropic(2, {1.3, 0.0, 0.0}, 3);
  auto bt0 = boussinesq_decomposition(D0);
  EXPECT_EQ(bt0.beta, 0.0);
  for (double c : bt0.c.coeffs) EXPECT_EQ(c, 0.0);
  auto D1 = DispersionModel::isotropic(1, {1.6, 0.0, 0.012}, 3);
  auto bt1 = boussinesq_decomposition(D1);
  EXPECT_NEAR(bt1.beta, 0.012 / 1.6, 1e-17);
  EXPECT_NEAR(bt1.c.coeffs[0], 0.0, 1e-17);
  auto D2 = reconstruct_dispersion(checkerboard_coefficient(TorusGrid(2, 32)), 4);
  auto bt = boussinesq_decomposition(D2);
  EXPECT_LE(bt.identity_residual, 1e-10);
  for (const Vec& e : half_circle_directions(64)) {
    EXPECT_GE(bt.c(e), -1e-12);
    EXPECT_GE(bt.b(e), 0.0);
  }
}

TEST(Boussinesq, TaylorCoefficientsMatchDispersion) {
  auto D = reconstruct_dispersion(checkerboard_coefficient(TorusGrid(2, 32)), 4);
  auto bt = boussinesq_decomposition(D);
  for (const Vec& e : half_circle_directions(7, 0.3)) {
    auto q = boussinesq_taylor(D.P[0], bt, e, 2);
    EXPECT_NEAR(q[0], D.P[0](e), 1e-14);
    EXPECT_NEAR(q[1], -D.P[2](e), 1e-14);
    // Independent numerical check of the kappa^4 coefficient by Richardson extrapolation.
    auto c4 = [&](double kap) {
      const Vec k{kap * e[0], kap * e[1]};
      return (boussinesq_frequency_squared(D.P[0], bt, 1.0, k) - D.P[0](e) * kap * kap) / std::pow(kap, 4);
    };
    const double r = (4 * c4(1e-2) - c4(2e-2)) / 3;
    EXPECT_NEAR(r, -D.P[2](e), 1e-6 * std::abs(D.P[2](e)) + 1e-12);
  }
  BoxGrid box(1, 4.0, 256, 0.25);
  Field u0 = gaussian_bump(box, 0.5);
  auto D1 = DispersionModel::isotropic(1, {1.6, 0.0, 0.0}, 3);
  auto w = solve_boussinesq_wave(D1.P[0], boussinesq_decomposition(D1), u0, 0.25, {0.0, 2.0});
  EXPECT_LE(rel(w[0], u0), 1e-15);
  auto c = solve_homogenized_wave_regularized(DispersionModel::isotropic(1, {1.6}, 1), 0.0, u0, 0.25, {2.0});
  EXPECT_LE(rel(w[1], c[0]), 1e-14);
}

TEST(SourceTerm, ZeroConstantAndClosedForm) {
  BoxGrid box(1, 4.0, 512, 0.125);
  auto D = DispersionModel::isotropic(1, {1.6, 0.0}, 2);
  auto spec = CutoffSpec::from(D);
  auto zero = SourceTerm::pulse(Field(box.torus()));
  auto z = source_term_fields(D, nullptr, spec, zero, box.eps, 2, 2.0, false);
  EXPECT_EQ(z.u.max_abs(), 0.0);

  Field g = single_mode(box);
  auto f = SourceTerm::pulse(g);
  const double k = 2 * pi / box.L, om = std::sqrt(1.6) * k;
  ASSERT_EQ(cutoff(spec, box.eps * k), 1.0);
  for (double t : {0.4, 1.0, 3.7}) {
    auto s = source_term_fields(D, nullptr, spec, f, box.eps, 2, t, false);
    // Oracle: adaptive Gauss-Kronrod on the one-dimensional Duhamel integral.
    const double upper = std::min(t, 1.0);
    auto amp = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double sv) { return std::sin(om * (t - sv)) / om; }, 0.0, upper, 10, 1e-14);
    auto vel = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double sv) { return std::cos(om * (t - sv)); }, 0.0, upper, 10, 1e-14);
    EXPECT_LE(rel(s.u, amp * g), 1e-12) << t;
    EXPECT_LE(rel(s.v, vel * g), 1e-12) << t;
  }
  // Constant a: dressed and simplified agree.
  auto tc = tensorize_correctors(constant_coefficient(TorusGrid(1, 16), 1.6), 2);
  auto d = source_term_fields(D, &tc, spec, f, box.eps, 2, 2.0, true);
  auto p = source_term_fields(D, &tc, spec, f, box.eps, 2, 2.0, false);
  EXPECT_LE(rel(d.u, p.u), 1e-15);
  SourceQuadrature coarse;
  coarse.panels = 1;
  coarse.max_phase_per_panel = 0.1;
  EXPECT_THROW(source_term_fields(D, nullptr, spec, f, box.eps, 2, 2.0, false, coarse), ConfigurationError);
}

TEST(SourceTerm, FineSolverAgreesForConstantCoefficients) {
  BoxGrid box(1, 4.0, 512, 0.125);
  auto a = box_coefficient(constant_coefficient(TorusGrid(1, 16), 1.6), box);
  Field g = single_mode(box);
  auto f = SourceTerm::pulse(g);
  FineWaveOptions opt;
  opt.scheme = FineScheme::spectral;
  opt.snapshot_interval = 0.5;
  auto tr = solve_fine_wave(a, box, Field(box.torus()), Field(box.torus()), &f, 2.0, opt);
  auto D = DispersionModel::isotropic(1, {1.6}, 1);
  for (const auto& s : tr.snapshots) {
    auto ap = source_term_fields(D, nullptr, CutoffSpec::from(D), f, box.eps, 1, s.t, false);
    EXPECT_LE((s.u - ap.u).norm_l2(), 5e-3 * std::max(ap.u.norm_l2(), 1e-3)) << s.t;
  }
}

TEST(ErrorReport, BudgetAndZeroError) {
  ErrorBudget b;
  b.order = 2;
  EXPECT_DOUBLE_EQ(b.mu(5.0), 1.0);
  EXPECT_DOUBLE_EQ(b.curve(0.1, 3.0), 0.1 + 0.01 * 3.0);
  ErrorBudget b2{2, 0.5, 1.0, 1.0};
  EXPECT_NEAR(b2.mu(0), std::log(2.0), 1e-15);  // formula taken verbatim
  EXPECT_GE(b2.mu(2), b2.mu(1));
  BoxGrid box(1, 1.0, 64, 0.25);
  auto a = constant_coefficient(box.torus(), 1.0);
  FineWaveOptions opt;
  opt.snapshot_interval = 0.25;
  auto tr = solve_fine_wave(a, box, single_mode(box), Field(box.torus()), nullptr, 1.0, opt);
  auto exact = [&](double t) {
    for (const auto& s : tr.snapshots)
      if (s.t == t) return ApproxState{s.u, s.v};
    return ApproxState{};
  };
  auto rep = error_report(tr, exact, b, true);
  EXPECT_EQ(rep.sup_l2, 0.0);
  EXPECT_EQ(rep.sup_energy, 0.0);
  EXPECT_EQ(rep.rows.size(), 5u);
  auto csv = error_report_csv(rep, "cfg");
  EXPECT_NE(csv.find("t,l2_err,energy_err,budget"), std::string::npos);
  // Constant a against the homogenized field: only the time-stepping error remains.
  auto D = DispersionModel::isotropic(1, {1.0}, 1);
  auto rep2 = error_report(tr, [&](double t) { return ApproxState{homogenized_wave_field(D, CutoffSpec{4.0, 1}, single_mode(box), 0.25, t), {}}; }, b);
  EXPECT_LE(rep2.sup_l2, 2e-3);
}

TEST(Guard, WrapFormula) {
  BoxGrid box(1, 32.0, 512, 1.0);
  Field u0 = gaussian_bump(box, 1.0);
  auto g = wrap_guard(u0, box, 2.0, 4.0);
  // Mass outside r of exp(-x^2) is erfc(r): r0 with erfc(r0) = 1e-8.
  EXPECT_NEAR(g.r0, 4.05, 0.1);
  EXPECT_TRUE(g.ok);
  EXPECT_NEAR(g.max_T, (16 - g.r0) / 2, 1e-12);
  EXPECT_FALSE(wrap_guard(u0, box, g.max_T + 0.1, 4.0).ok);
}
