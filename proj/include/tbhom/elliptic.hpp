// SPDX-License-Identifier: MIT
// Higher-order homogenized elliptic equations on a periodic box, the two-scale
// expansion w_l(v), residuum identities and gradient-error rates.
#pragma once
#include <functional>
#include <string>
#include <vector>

#include "tbhom/wave.hpp"

namespace tbhom {

// Rejects right-hand sides whose mean exceeds 1e-12 relative to their L2 norm.
void require_zero_mean(const Field& f, const char* what);

// sum_{j<=l} eps^j phi_j(x/eps) . grad^j f
Field prepared_rhs(const TensorizedCorrectors& tc, const Field& f, double eps, int order);

// -div(a grad u) = rhs with `a` already on the box grid; zero-mean solution.
Field solve_fine_elliptic(const CoefficientField& a, const Field& rhs, const SolverOptions& opt = {},
                          SolveInfo* info = nullptr);

// Per-mode division by the regularized symbol of the order-D.order operator.
Field solve_homogenized_elliptic(const DispersionModel& D, double gamma, const Field& f, double eps);

// (P0 + eps^2 c) u^ = (1 + eps^2 b) f^ mode by mode.
Field solve_boussinesq_elliptic(const HomogeneousPoly& P0, const BoussinesqTensors& bt, const Field& f, double eps);

// The model truncated to order l <= D.order.
DispersionModel truncate_model(const DispersionModel& D, int order);

struct TwoScaleExpansion {
  int order = 0;
  double eps = 1;
  Field v;
  Field w;       // sum_j eps^j phi_j(x/eps) . grad^j v
  Field grad_w;  // product rule with the cell gradients of phi_j
  Field S;       // sum_{p+j<l, j>=1} eps^{p+j} (phi_j (x) abar_p) . grad^{p+j+2} v
};
TwoScaleExpansion two_scale_expansion(const TensorizedCorrectors& tc, const DispersionModel& D, const Field& v,
                                      double eps, int order);

// Relative L2 gaps between -div(a grad w_l(v)) and the closed-form residuum
// representations, all assembled on a grid refined by `refine`.
struct ResiduumReport {
  int order = 0;
  double eps = 1;
  int refine = 2;
  double lhs_norm = 0;
  bool has_low_order = false;  // the short form applies for l <= 2
  double low_order = 0;        // short form with abar_0 only
  double chi_form = 0;         // form with S_l and grad chi_l
  double first_form = 0;       // form with S_{l-1} and grad chi_{l-1}
  double chi_rewrite = 0;      // gap between the two forms, i.e. the chi equation residual
  double max_residual() const;
};
// `a_cell` and the correctors live on the unit cell; v on a box whose period is a multiple of eps.
ResiduumReport residuum_identity_check(const TensorizedCorrectors& tc, const DispersionModel& D,
                                       const CoefficientField& a_cell, const Field& v, double eps, int order,
                                       int refine = 2);

struct EllipticRateOptions {
  bool prepared = true;     // dress the fine right-hand side
  bool boussinesq = false;  // homogenized solve via the Boussinesq form instead of the regularized one
  double L = 1.0;
  int points_per_period = 16;
  SolverOptions solver{1e-12, 10000};
};

struct EllipticRateRow {
  double eps = 0;
  double grad_error = 0;  // ||grad(u_fine - w_l(u_hom))||
  double grad_norm = 0;   // ||grad u_fine||
  int iterations = 0;
};
struct EllipticRateReport {
  int order = 0;
  double gamma = 0;
  bool prepared = true, boussinesq = false;
  std::vector<EllipticRateRow> rows;
  double fitted_order = 0;  // least-squares slope of log error against log eps
};

EllipticRateReport elliptic_rate_error(const TensorizedCorrectors& tc, const DispersionModel& D,
                                  const CoefficientField& a_cell, const std::function<double(const Vec&)>& f,
                                  const std::vector<double>& eps_list, int order, double gamma,
                                  const EllipticRateOptions& opt = {});
double fitted_order(const std::vector<double>& eps, const std::vector<double>& err);
std::string elliptic_rate_csv(const EllipticRateReport& r, const std::string& header_comment = {});

}  // namespace tbhom
