// SPDX-License-Identifier: MIT
#include "tbhom/elliptic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tbhom {

void require_zero_mean(const Field& f, const char* what) {
  const double m = f.mean();
  const double scale = std::max(f.norm_l2(), std::numeric_limits<double>::min());
  if (std::abs(m) > 1e-12 * std::max(scale, 1.0)) {
    std::ostringstream os;
    os << what << " has mean " << m << "; periodic problems need zero-mean data";
    throw SolvabilityError(os.str());
  }
}

namespace {

void check_order(const TensorizedCorrectors& tc, int order) {
  if (order < 0) throw ConfigurationError("expansion order must be nonnegative");
  if (order > tc.order) {
    std::ostringstream os;
    os << "tensorized correctors available to order " << tc.order << ", requested " << order;
    throw ConfigurationError(os.str());
  }
}

void check_model(const DispersionModel& D, int order) {
  if (int(D.P.size()) < order) {
    std::ostringstream os;
    os << "homogenized tensors available to order " << D.P.size() << ", requested " << order;
    throw ConfigurationError(os.str());
  }
}

// Cell fields at x/eps on `box`, optionally band-limited refinement of the cell grid first.
std::vector<Field> on_box(const std::vector<Field>& cell, double eps, const TorusGrid& box, int refine) {
  std::vector<Field> out;
  out.reserve(cell.size());
  for (const Field& c : cell) out.push_back(cell_at_scale(refine > 1 ? upsample(c, refine) : c, eps, box));
  return out;
}

// Cell-variable derivative along `axis`, then placed on the box.
std::vector<Field> cell_derivative_on_box(const std::vector<Field>& cell, int axis, double eps, const TorusGrid& box,
                                          int refine) {
  std::vector<Field> d;
  d.reserve(cell.size());
  for (const Field& c : cell) d.push_back(derivative(c, axis));
  return on_box(d, eps, box, refine);
}

// abar_p . grad^{p+2} f from the monomial coefficients of P_p.
Field abar_apply(const HomogeneousPoly& P, const Field& f) {
  Field out(f.grid());
  if (P.dim == 1) {
    out.axpy(P.coeffs.at(0), derivative_multi(f, P.degree, 0));
    return out;
  }
  for (int m = 0; m <= P.degree; ++m)
    if (P.coeffs[m] != 0) out.axpy(P.coeffs[m], derivative_multi(f, P.degree - m, m));
  return out;
}

Field zero_mean(Field f) {
  const double m = f.mean();
  for (double& x : f.data()) x -= m;
  return f;
}

// Every corrector ingredient of the two-scale expansion evaluated on one box grid.
struct BoxCorrectors {
  int dim = 1;
  double eps = 1;
  std::vector<std::vector<Field>> phi;                    // [j]
  std::vector<std::array<std::vector<Field>, 2>> dphi;    // [j][axis], cell-variable gradient
  std::vector<std::vector<Field>> sigma;                  // [j], 2D only
  std::vector<std::array<std::vector<Field>, 2>> dchi;    // [j][axis]

  BoxCorrectors(const TensorizedCorrectors& tc, double eps_, const TorusGrid& box, int order, int refine,
                bool with_sigma_chi)
      : dim(tc.dim), eps(eps_) {
    for (int j = 0; j <= order; ++j) {
      phi.push_back(on_box(tc.phi[j], eps, box, refine));
      std::array<std::vector<Field>, 2> dp;
      for (int a = 0; a < dim; ++a) dp[a] = cell_derivative_on_box(tc.phi[j], a, eps, box, refine);
      dphi.push_back(std::move(dp));
      if (!with_sigma_chi) continue;
      sigma.push_back(dim == 2 ? on_box(tc.sigma[j], eps, box, refine) : std::vector<Field>{});
      std::array<std::vector<Field>, 2> dc;
      for (int a = 0; a < dim; ++a) dc[a] = cell_derivative_on_box(tc.chi[j], a, eps, box, refine);
      dchi.push_back(std::move(dc));
    }
  }

  Field w(const Field& v, int order) const {
    Field out = v;
    double s = 1;
    for (int j = 1; j <= order; ++j) {
      s *= eps;
      out.axpy(s, TensorizedCorrectors::contract(phi[j], j, v));
    }
    return out;
  }

  // grad v + sum_j eps^j [eps^-1 (grad_y phi_j)(x/eps) . grad^j v + phi_j . grad^j grad v]
  Field grad_w(const Field& v, int order) const {
    Field g = gradient(v);
    std::array<Field, 2> dv;
    for (int a = 0; a < dim; ++a) dv[a] = g.component(a);
    for (int a = 0; a < dim; ++a) {
      Field ga = dv[a];
      double s = 1;
      for (int j = 1; j <= order; ++j) {
        s *= eps;
        ga.axpy(s / eps, TensorizedCorrectors::contract(dphi[j][a], j, v));
        ga.axpy(s, TensorizedCorrectors::contract(phi[j], j, dv[a]));
      }
      g.set_component(a, ga);
    }
    return g;
  }

  // sum_{p=0}^{m-2} sum_{j=1}^{m-1-p} eps^{p+j} phi_j . grad^j (abar_p . grad^{p+2} v)
  Field S(const DispersionModel& D, const Field& v, int m) const {
    Field out(v.grid());
    for (int p = 0; p <= m - 2; ++p) {
      if (p % 2 == 1) continue;  // odd tensors vanish
      const Field ap = abar_apply(D.P.at(p), v);
      for (int j = 1; j <= m - 1 - p; ++j)
        out.axpy(std::pow(eps, p + j), TensorizedCorrectors::contract(phi[j], j, ap));
    }
    return out;
  }
};

DispersionModel checked_truncation(const DispersionModel& D, int order) {
  if (order < 1) throw ConfigurationError("homogenized order must be at least 1");
  check_model(D, order);
  return truncate_model(D, order);
}

}  // namespace

DispersionModel truncate_model(const DispersionModel& D, int order) {
  check_model(D, order);
  DispersionModel out = D;
  out.order = order;
  out.P.resize(order);
  if (int(out.fit_residual.size()) > order) out.fit_residual.resize(order);
  return out;
}

Field prepared_rhs(const TensorizedCorrectors& tc, const Field& f, double eps, int order) {
  check_order(tc, order);
  require_zero_mean(f, "right-hand side");
  return dress(tc, f, eps, order);
}

Field solve_fine_elliptic(const CoefficientField& a, const Field& rhs, const SolverOptions& opt, SolveInfo* info) {
  if (a.grid() != rhs.grid()) throw ConfigurationError("coefficient and right-hand side grids differ");
  require_zero_mean(rhs, "right-hand side");
  return solve_elliptic(a, rhs, opt, info);
}

Field solve_homogenized_elliptic(const DispersionModel& D, double gamma, const Field& f, double eps) {
  require_zero_mean(f, "right-hand side");
  if (f.grid().dim != D.dim) throw ConfigurationError("model and field dimensions differ");
  return apply_multiplier(f, [&](const Mode& m) {
    if (m.freq[0] == 0 && m.freq[1] == 0) return cplx(0);
    const double s = regularized_symbol(D, gamma, eps, m.k);
    if (!(s > 0)) {
      std::ostringstream os;
      os << "homogenized symbol " << s << " at mode (" << m.freq[0] << ", " << m.freq[1] << ") is not positive";
      throw PositivityError(os.str());
    }
    return cplx(1.0 / s);
  });
}

Field solve_boussinesq_elliptic(const HomogeneousPoly& P0, const BoussinesqTensors& bt, const Field& f, double eps) {
  require_zero_mean(f, "right-hand side");
  const double e2 = eps * eps;
  return apply_multiplier(f, [&](const Mode& m) {
    if (m.freq[0] == 0 && m.freq[1] == 0) return cplx(0);
    return cplx((1 + e2 * bt.b(m.k)) / (P0(m.k) + e2 * bt.c(m.k)));
  });
}

TwoScaleExpansion two_scale_expansion(const TensorizedCorrectors& tc, const DispersionModel& D, const Field& v,
                                      double eps, int order) {
  check_order(tc, order);
  check_model(D, std::max(order - 1, 0));
  if (tc.dim != v.grid().dim) throw ConfigurationError("corrector and field dimensions differ");
  const BoxCorrectors bc(tc, eps, v.grid(), order, 1, false);
  TwoScaleExpansion out;
  out.order = order;
  out.eps = eps;
  out.v = v;
  out.w = bc.w(v, order);
  out.grad_w = bc.grad_w(v, order);
  out.S = bc.S(D, v, order);
  return out;
}

double ResiduumReport::max_residual() const {
  double m = std::max({chi_form, first_form, chi_rewrite});
  if (has_low_order) m = std::max(m, low_order);
  return m;
}

ResiduumReport residuum_identity_check(const TensorizedCorrectors& tc, const DispersionModel& D,
                                       const CoefficientField& a_cell, const Field& v, double eps, int order,
                                       int refine) {
  if (order < 1) throw ConfigurationError("residuum identities need order >= 1");
  if (refine < 1) throw ConfigurationError("refinement factor must be positive");
  check_order(tc, order);
  check_model(D, order);
  if (a_cell.grid() != tc.grid()) throw ConfigurationError("coefficient and correctors must share the cell grid");
  const int dim = tc.dim;

  const Field vr = refine > 1 ? upsample(v, refine) : v;
  const TorusGrid& g = vr.grid();
  const BoxCorrectors bc(tc, eps, g, order, refine, true);
  std::vector<Field> a_entries;
  for (int c = 0; c < a_cell.packed().components(); ++c) a_entries.push_back(a_cell.packed().component(c));
  const std::vector<Field> A = on_box(a_entries, eps, g, refine);
  auto a_entry = [&](int i, int k) -> const Field& {
    if (dim == 1) return A[0];
    return A[i == k ? (i == 0 ? 0 : 2) : 1];
  };

  std::array<Field, 2> dv;
  for (int a = 0; a < dim; ++a) dv[a] = derivative(vr, a);
  auto div = [&](const std::array<Field, 2>& B) {
    Field out(g);
    for (int a = 0; a < dim; ++a) out += derivative(B[a], a);
    return out;
  };

  // Left side: -div(a grad w_l) with the product-rule gradient.
  const Field gw = bc.grad_w(vr, order);
  std::array<Field, 2> flux;
  for (int i = 0; i < dim; ++i) {
    flux[i] = Field(g);
    for (int k = 0; k < dim; ++k) flux[i] += a_entry(i, k) * gw.component(k);
  }
  Field lhs = div(flux);
  lhs *= -1.0;

  // eps^m [(a (x) phi_m - sigma_m (+ grad chi_m)) . grad^{m+1} v], cell-variable gradients.
  auto bracket = [&](int m, bool with_chi) {
    std::array<Field, 2> pk;
    for (int k = 0; k < dim; ++k) pk[k] = TensorizedCorrectors::contract(bc.phi[m], m, dv[k]);
    std::array<Field, 2> B;
    for (int i = 0; i < dim; ++i) {
      B[i] = Field(g);
      for (int k = 0; k < dim; ++k) B[i] += a_entry(i, k) * pk[k];
      if (with_chi) B[i] += TensorizedCorrectors::contract(bc.dchi[m][i], m + 1, vr);
    }
    if (dim == 2) {
      // sigma_01 = s, sigma_10 = -s; first index free, second contracted
      B[0] -= TensorizedCorrectors::contract(bc.sigma[m], m, dv[1]);
      B[1] += TensorizedCorrectors::contract(bc.sigma[m], m, dv[0]);
    }
    for (int i = 0; i < dim; ++i) B[i] *= std::pow(eps, m);
    return B;
  };
  // eps^m grad chi_m . grad^{m+2} v
  auto chi_dot = [&](int m) {
    Field out(g);
    for (int i = 0; i < dim; ++i) out += TensorizedCorrectors::contract(bc.dchi[m][i], m + 1, dv[i]);
    out *= std::pow(eps, m);
    return out;
  };

  Field abar_sum(g);
  for (int j = 0; j < order; j += 2) abar_sum.axpy(std::pow(eps, j), abar_apply(D.P[j], vr));

  ResiduumReport r;
  r.order = order;
  r.eps = eps;
  r.refine = refine;
  r.lhs_norm = lhs.norm_l2();
  const double scale = r.lhs_norm > 0 ? r.lhs_norm : 1.0;

  const Field b_plain = div(bracket(order, false));
  // eps^{l-1} grad chi_{l-1} . grad^{l+1} v
  Field first_form = -1.0 * abar_sum - bc.S(D, vr, order - 1) - b_plain;
  if (order >= 2) {
    Field t(g);
    for (int i = 0; i < dim; ++i) t += TensorizedCorrectors::contract(bc.dchi[order - 1][i], order, dv[i]);
    first_form.axpy(std::pow(eps, order - 1), t);
  }
  r.first_form = (lhs - first_form).norm_l2() / scale;

  Field chi_form = -1.0 * abar_sum - bc.S(D, vr, order) + chi_dot(order) - div(bracket(order, true));
  r.chi_form = (lhs - chi_form).norm_l2() / scale;
  r.chi_rewrite = (chi_form - first_form).norm_l2() / scale;

  if (order <= 2) {
    r.has_low_order = true;
    Field low = -1.0 * abar_apply(D.P[0], vr) - b_plain;
    r.low_order = (lhs - low).norm_l2() / scale;
  }
  return r;
}

double fitted_order(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size() || eps.size() < 2) throw ConfigurationError("order fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0) || !(err[i] > 0)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(eps[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0) throw ConfigurationError("order fit needs distinct eps values");
  return (n * sxy - sx * sy) / den;
}

EllipticRateReport elliptic_rate_error(const TensorizedCorrectors& tc, const DispersionModel& D,
                                  const CoefficientField& a_cell, const std::function<double(const Vec&)>& f,
                                  const std::vector<double>& eps_list, int order, double gamma,
                                  const EllipticRateOptions& opt) {
  if (eps_list.empty()) throw ConfigurationError("empty eps sweep");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigurationError("eps sweep must be strictly decreasing");
  check_order(tc, order);
  const DispersionModel Dl = checked_truncation(D, order);
  BoussinesqTensors bt;
  if (opt.boussinesq) bt = boussinesq_decomposition(D);

  EllipticRateReport rep;
  rep.order = order;
  rep.gamma = gamma;
  rep.prepared = opt.prepared;
  rep.boussinesq = opt.boussinesq;
  const int ppp = opt.points_per_period > 0 ? opt.points_per_period : a_cell.grid().n;
  std::vector<double> es, errs;
  for (double eps : eps_list) {
    const BoxGrid box = BoxGrid::resolved(tc.dim, opt.L, eps, ppp);
    const TorusGrid g = box.torus();
    const Field fb = zero_mean(Field::from_function(g, f));
    const CoefficientField A = box_coefficient(a_cell, box);
    const Field rhs = opt.prepared ? prepared_rhs(tc, fb, eps, order) : fb;
    SolveInfo info;
    const Field u = solve_fine_elliptic(A, zero_mean(rhs), opt.solver, &info);
    const Field uh = opt.boussinesq ? solve_boussinesq_elliptic(D.P.at(0), bt, fb, eps)
                                    : solve_homogenized_elliptic(Dl, gamma, fb, eps);
    const TwoScaleExpansion ts = two_scale_expansion(tc, D, uh, eps, order);
    const Field gu = gradient(u);
    EllipticRateRow row;
    row.eps = eps;
    row.grad_error = (gu - ts.grad_w).norm_l2();
    row.grad_norm = gu.norm_l2();
    row.iterations = info.iterations;
    rep.rows.push_back(row);
    es.push_back(eps);
    errs.push_back(row.grad_error);
  }
  rep.fitted_order = es.size() >= 2 ? fitted_order(es, errs) : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

std::string elliptic_rate_csv(const EllipticRateReport& r, const std::string& header_comment) {
  std::ostringstream os;
  os.precision(12);
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "# order=" << r.order << " gamma=" << r.gamma << " prepared=" << (r.prepared ? 1 : 0)
     << " boussinesq=" << (r.boussinesq ? 1 : 0) << " fitted_order=" << r.fitted_order << "\n";
  os << "eps,grad_error,grad_norm,iterations\n";
  for (const auto& row : r.rows)
    os << row.eps << "," << row.grad_error << "," << row.grad_norm << "," << row.iterations << "\n";
  return os.str();
}

}  // namespace tbhom
