// SPDX-License-Identifier: MIT
// Truncated Bloch eigenvalues, Taylor-Bloch waves and eigendefects, frequency cutoff.
#pragma once

#include <complex>
#include <string>

#include "tbhom/correctors.hpp"

namespace tbhom {

struct ComplexField {
  Field re, im;
  ComplexField() = default;
  explicit ComplexField(const TorusGrid& g) : re(g), im(g) {}
  ComplexField(Field r, Field i) : re(std::move(r)), im(std::move(i)) {}
  const TorusGrid& grid() const { return re.grid(); }
  ComplexField& axpy(std::complex<double> s, const Field& f);  // += s f
  ComplexField& axpy(std::complex<double> s, const ComplexField& f);
  double norm_l2() const;
};

// kappa^2 sum_{j<l, j even} (-1)^{j/2} kappa^j P_j(e), i.e. sum (-1)^{j/2} P_j(k).
double eigenvalue(const DispersionModel& D, const Vec& k);

// Largest radius K <= cap with |k|^{-2} eigenvalue(k) >= 1/4 for all |k| <= K.
double compute_kmax(const DispersionModel& D, double cap = 1.0);

struct CutoffSpec {
  double kmax = 1.0;
  int order = 1;
  static CutoffSpec from(const DispersionModel& D) { return {D.kmax, D.order}; }
};

// Smooth radial filter: 1 on [0, K/2], 0 on [K, inf).
double cutoff(const CutoffSpec& spec, double r);

// sqrt(eigenvalue); raises ConsistencyError on a negative eigenvalue.
double dispersion_Lambda(const DispersionModel& D, const Vec& k);

struct TaylorBlochMode {
  Vec k{0, 0};
  int order = 1;
  ComplexField psi;
  double eigenvalue = 0;
  double eigenvalue_imag = 0;  // odd-order contributions; zero up to solver noise
  ComplexField defect;
};

// psi = sum_{j<=l} (i kappa)^j phi_j, kappa along the hierarchy direction.
TaylorBlochMode taylor_bloch_wave(const CorrectorHierarchy& h, double kappa, int order = -1);
TaylorBlochMode eigendefect(const CorrectorHierarchy& h, const CoefficientField& a, double kappa, int order = -1);

struct EigendefectResidual {
  double relative = 0;
  double lhs_norm = 0;
  double diff_norm = 0;
};
// Both sides of -(grad+ik).a(grad+ik)psi = lambda psi - (i kappa)^{l+1} d assembled on a
// grid refined by `refine` (band-limited interpolation of the cell fields).
EigendefectResidual eigendefect_residual(const CorrectorHierarchy& h, const CoefficientField& a, double kappa,
                                         int order = -1, int refine = 2);

// CSV rows (direction, kappa, Lambda) for kappa in [0, kmax].
std::string dispersion_curve_csv(const DispersionModel& D, int samples = 101);

}  // namespace tbhom
