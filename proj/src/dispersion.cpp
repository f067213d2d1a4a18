// SPDX-License-Identifier: MIT
#include "tbhom/dispersion.hpp"

#include <cmath>
#include <sstream>

namespace tbhom {

using cd = std::complex<double>;

ComplexField& ComplexField::axpy(cd s, const Field& f) {
  re.axpy(s.real(), f);
  im.axpy(s.imag(), f);
  return *this;
}

ComplexField& ComplexField::axpy(cd s, const ComplexField& f) {
  re.axpy(s.real(), f.re).axpy(-s.imag(), f.im);
  im.axpy(s.imag(), f.re).axpy(s.real(), f.im);
  return *this;
}

double ComplexField::norm_l2() const { return std::hypot(re.norm_l2(), im.norm_l2()); }

double eigenvalue(const DispersionModel& D, const Vec& k) {
  double s = 0;
  for (int j = 0; j < D.order && j < int(D.P.size()); j += 2) s += ((j / 2) % 2 ? -1.0 : 1.0) * D.P[j](k);
  return s;
}

double compute_kmax(const DispersionModel& D, double cap) {
  if (!(cap > 0)) throw ConfigurationError("K_max cap must be positive");
  double best = cap;
  for (const Vec& e : D.check_directions()) {
    auto ratio = [&](double kap) {
      if (kap == 0) return D.P.at(0)(e);
      return eigenvalue(D, {kap * e[0], kap * e[1]}) / (kap * kap);
    };
    const int steps = 4096;
    double prev = 0;
    for (int s = 1; s <= steps; ++s) {
      const double kap = cap * s / steps;
      if (ratio(kap) < 0.25) {
        double lo = prev, hi = kap;
        while (hi - lo > 1e-10) {
          const double mid = 0.5 * (lo + hi);
          (ratio(mid) >= 0.25 ? lo : hi) = mid;
        }
        best = std::min(best, lo);
        break;
      }
      prev = kap;
    }
  }
  return best;
}

double cutoff(const CutoffSpec& spec, double r) {
  const double K = spec.kmax;
  if (r <= 0.5 * K) return 1.0;
  if (r >= K) return 0.0;
  auto A = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
  const double t = (K - r) / (0.5 * K);
  return A(t) / (A(t) + A(1 - t));
}

double dispersion_Lambda(const DispersionModel& D, const Vec& k) {
  const double lam = eigenvalue(D, k);
  if (lam < 0) {
    std::ostringstream os;
    os << "negative eigenvalue " << lam << " at |k| = " << std::hypot(k[0], k[1]) << " (K_max = " << D.kmax << ")";
    throw ConsistencyError(os.str());
  }
  return std::sqrt(lam);
}

namespace {

cd ipow(double kappa, int j) { return std::pow(cd(0, kappa), j); }

int resolve_order(const CorrectorHierarchy& h, int order) {
  if (order < 0) return h.order;
  if (order > h.order) throw ConfigurationError("requested order exceeds the hierarchy order");
  return order;
}

cd complex_eigenvalue(const CorrectorHierarchy& h, double kappa, int L) {
  cd s = 0;
  for (int j = 0; j < L; ++j) s += ipow(kappa, j) * h.lambda[j];
  return kappa * kappa * s;
}

// Packed symmetric field applied to a vector field (no ellipticity checks).
Field apply_packed(const Field& packed, const Field& v) {
  const int d = v.grid().dim;
  Field out(v.grid(), Rank::vector);
  for (std::size_t i = 0; i < v.nodes(); ++i) {
    if (d == 1) {
      out(i) = packed(i) * v(i);
    } else {
      out(i, 0) = packed(i, 0) * v(i, 0) + packed(i, 1) * v(i, 1);
      out(i, 1) = packed(i, 1) * v(i, 0) + packed(i, 2) * v(i, 1);
    }
  }
  return out;
}

Field vec_const(const TorusGrid& g, const Vec& e, const Field& s) {
  Field out(g, Rank::vector);
  for (int m = 0; m < g.dim; ++m) out.set_component(m, e[m] * s);
  return out;
}

Field dot_e(const Field& v, const Vec& e) {
  Field out(v.grid());
  for (int m = 0; m < v.components(); ++m) out.axpy(e[m], v.component(m));
  return out;
}

// Assembles the eigendefect from fields that live on one grid; `prod` is the
// product rule used for nodal products (projected on the cell grid, plain on a refined grid).
ComplexField assemble_defect(const std::vector<Field>& phi, const Field& sigma_l, const Field& chi_l,
                             const Field& a_packed, const std::vector<double>& lambda, const Vec& e, double kappa,
                             int L, bool projected) {
  const TorusGrid& g = phi[0].grid();
  auto maybe_project = [&](const Field& f) { return projected ? project(f) : f; };
  Field ae = apply_packed(a_packed, vec_const(g, e, Field::constant(g, 1.0)));
  Field ae_phi(g, Rank::vector);
  for (int m = 0; m < g.dim; ++m) ae_phi.set_component(m, ae.component(m) * phi[L]);
  ae_phi = maybe_project(ae_phi);
  Field flux = ae_phi - skew_times(sigma_l, e) + gradient(chi_l);
  ComplexField d(g);
  d.re = divergence(flux);
  d.axpy(cd(0, kappa), dot_e(ae_phi, e));
  for (int j = 1; j <= L; ++j)
    for (int l = L - j; l <= L - 1; ++l) d.axpy(-cd(0, kappa) * ipow(kappa, j + l - L) * lambda[l], phi[j]);
  return d;
}

}  // namespace

TaylorBlochMode taylor_bloch_wave(const CorrectorHierarchy& h, double kappa, int order) {
  const int L = resolve_order(h, order);
  TaylorBlochMode m;
  m.k = {kappa * h.e[0], kappa * h.e[1]};
  m.order = L;
  m.psi = ComplexField(h.grid());
  for (int j = 0; j <= L; ++j) m.psi.axpy(ipow(kappa, j), h.phi[j]);
  const cd lam = complex_eigenvalue(h, kappa, L);
  m.eigenvalue = lam.real();
  m.eigenvalue_imag = lam.imag();
  return m;
}

TaylorBlochMode eigendefect(const CorrectorHierarchy& h, const CoefficientField& a, double kappa, int order) {
  TaylorBlochMode m = taylor_bloch_wave(h, kappa, order);
  m.defect = assemble_defect(h.phi, h.sigma[m.order], h.chi[m.order], a.packed(), h.lambda, h.e, kappa, m.order, true);
  return m;
}

EigendefectResidual eigendefect_residual(const CorrectorHierarchy& h, const CoefficientField& a, double kappa,
                                         int order, int refine) {
  const int L = resolve_order(h, order);
  auto lift = [&](const Field& f) { return refine == 1 ? f : upsample(f, refine); };
  std::vector<Field> phi;
  for (int j = 0; j <= L; ++j) phi.push_back(lift(h.phi[j]));
  const Field sigma = lift(h.sigma[L]);
  const Field chi = lift(h.chi[L]);
  const Field ap = lift(a.packed());
  const TorusGrid& g = phi[0].grid();
  const Vec e = h.e;
  const bool projected = refine == 1;
  auto maybe_project = [&](const Field& f) { return projected ? project(f) : f; };

  ComplexField psi(g);
  for (int j = 0; j <= L; ++j) psi.axpy(ipow(kappa, j), phi[j]);

  // (grad + i k) psi
  Field gr = gradient(psi.re), gi = gradient(psi.im);
  gr -= vec_const(g, {kappa * e[0], kappa * e[1]}, psi.im);
  gi += vec_const(g, {kappa * e[0], kappa * e[1]}, psi.re);
  Field fr = maybe_project(apply_packed(ap, gr)), fi = maybe_project(apply_packed(ap, gi));
  // -(grad + i k).(fr + i fi)
  ComplexField lhs(g);
  lhs.re = -1.0 * divergence(fr) + dot_e(fi, {kappa * e[0], kappa * e[1]});
  lhs.im = -1.0 * divergence(fi) - dot_e(fr, {kappa * e[0], kappa * e[1]});

  ComplexField d = assemble_defect(phi, sigma, chi, ap, h.lambda, e, kappa, L, projected);
  const cd lam = complex_eigenvalue(h, kappa, L);
  ComplexField rhs(g);
  rhs.axpy(lam, psi);
  rhs.axpy(-ipow(kappa, L + 1), d);

  ComplexField diff = lhs;
  diff.axpy(-1.0, rhs);
  EigendefectResidual r;
  r.lhs_norm = lhs.norm_l2();
  r.diff_norm = diff.norm_l2();
  ComplexField lp(g);
  lp.axpy(lam, psi);
  const double scale = std::max(r.lhs_norm, lp.norm_l2());
  r.relative = scale > 0 ? r.diff_norm / scale : r.diff_norm;
  return r;
}

std::string dispersion_curve_csv(const DispersionModel& D, int samples) {
  std::ostringstream os;
  os.precision(17);
  os << "direction,e1,e2,kappa,Lambda\n";
  for (std::size_t i = 0; i < D.directions.size(); ++i) {
    const Vec& e = D.directions[i];
    for (int s = 0; s < samples; ++s) {
      const double kap = D.kmax * s / (samples - 1);
      os << i << ',' << e[0] << ',' << e[1] << ',' << kap << ',' << dispersion_Lambda(D, {kap * e[0], kap * e[1]})
         << '\n';
    }
  }
  return os.str();
}

}  // namespace tbhom
