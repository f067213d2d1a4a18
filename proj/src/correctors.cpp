// SPDX-License-Identifier: MIT
#include "tbhom/correctors.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "tbhom/dispersion.hpp"

namespace tbhom {

namespace {

// Projected product of a vector field with a scalar field.
Field vec_times_scalar(const Field& v, const Field& s) {
  Field out(v.grid(), Rank::vector);
  for (int m = 0; m < v.components(); ++m) {
    auto dst = out.comp(m);
    auto a = v.comp(m);
    auto b = s.comp(0);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a[i] * b[i];
  }
  return project(out);
}

Field dot_const(const Field& v, const Vec& e) {
  Field out(v.grid());
  for (int m = 0; m < v.components(); ++m) {
    auto src = v.comp(m);
    auto dst = out.comp(0);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += e[m] * src[i];
  }
  return out;
}

double mean_product(const Field& u, const Field& v) {
  double s = 0;
  for (std::size_t i = 0; i < u.data().size(); ++i) s += u.data()[i] * v.data()[i];
  return s / double(u.nodes());
}

// mean(grad u . a grad v)
double energy_form(const CoefficientField& a, const Field& gu, const Field& gv) {
  return mean_product(gu, a.apply(gv));
}

}  // namespace

Field skew_times(const Field& sigma, const Vec& e) {
  const TorusGrid& g = sigma.grid();
  Field out(g, Rank::vector);
  if (g.dim == 1) return out;
  auto s = sigma.comp(0);
  auto o1 = out.comp(0), o2 = out.comp(1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    o1[i] = s[i] * e[1];
    o2[i] = -s[i] * e[0];
  }
  return out;
}

Field skew_divergence(const Field& sigma) {
  const TorusGrid& g = sigma.grid();
  Field out(g, Rank::vector);
  if (g.dim == 1) return out;
  Field s = sigma.component(0);
  out.set_component(0, derivative(s, 1));
  out.set_component(1, -1.0 * derivative(s, 0));
  return out;
}

Field skew_entry(const Field& sigma, int m, int n) {
  const TorusGrid& g = sigma.grid();
  if (g.dim == 1 || m == n) return Field(g);
  Field s = sigma.component(0);
  return m < n ? s : -1.0 * s;
}

CorrectorHierarchy build_hierarchy(const CoefficientField& a, const Vec& e_in, int order, const HierarchyOptions& opt) {
  if (order < 1) throw ConfigurationError("corrector order must be >= 1");
  const TorusGrid& g = a.grid();
  Vec e = e_in;
  if (g.dim == 1) e[1] = 0;
  const double len = std::hypot(e[0], e[1]);
  if (std::abs(len - 1) > 1e-12) throw ConfigurationError("corrector direction must be a unit vector");

  CorrectorHierarchy h;
  h.e = e;
  h.order = order;
  h.phi.push_back(Field::constant(g, 1.0));
  h.sigma.emplace_back(g, Rank::skew);
  h.chi.emplace_back(g);
  h.q.emplace_back(g, Rank::vector);
  const Field ae = project(a.apply_const(e));

  for (int j = 1; j <= order; ++j) {
    const Field& phi_prev = h.phi[j - 1];
    const Field grad_chi_prev = gradient(h.chi[j - 1]);
    const Field sigma_e_prev = skew_times(h.sigma[j - 1], e);
    const Field ae_phi = j == 1 ? ae : vec_times_scalar(a.apply_const(e), phi_prev);

    Field flux = ae_phi - sigma_e_prev + grad_chi_prev;
    SolveInfo info;
    Field phi_j;
    try {
      phi_j = solve_div_a_grad(a, flux, opt.solver, &info);
    } catch (const ConvergenceError& err) {
      throw ConvergenceError("corrector level " + std::to_string(j) + ": " + err.what(), err.residual(),
                             err.iterations());
    }
    h.solves.push_back(info);

    Field flux_j = project(a.apply(gradient(phi_j))) + ae_phi;  // a(grad phi_j + e phi_{j-1})
    Vec at{flux_j.mean(0), g.dim == 2 ? flux_j.mean(1) : 0.0};
    h.atilde.push_back(at);
    h.lambda.push_back(e[0] * at[0] + e[1] * at[1]);

    Field q = flux_j + grad_chi_prev - sigma_e_prev;
    for (int m = 0; m < g.dim; ++m)
      for (double& v : q.comp(m)) v -= at[m];

    Field sigma_j(g, Rank::skew);
    if (g.dim == 2) {
      Field curl = derivative(q.component(1), 0) - derivative(q.component(0), 1);
      sigma_j.set_component(0, solve_poisson(curl));
    }

    Field chi_j(g);
    if (j >= 2) {
      Field rhs = dot_const(grad_chi_prev, e);
      for (int p = 1; p <= j - 1; ++p) rhs.axpy(h.lambda[j - 1 - p], h.phi[p]);
      chi_j = solve_poisson(rhs);
    }

    h.phi.push_back(std::move(phi_j));
    h.q.push_back(std::move(q));
    h.sigma.push_back(std::move(sigma_j));
    h.chi.push_back(std::move(chi_j));
  }
  return h;
}

LambdaIdentityReport verify_lambda_identities(const CorrectorHierarchy& h, const CoefficientField& a) {
  LambdaIdentityReport r;
  const int L = h.order;
  const Vec e = h.e;
  r.lambda0 = h.lambda.at(0);
  for (int j = 1; j < int(h.lambda.size()); j += 2) r.odd_lambdas.push_back({j, std::abs(h.lambda[j])});

  std::vector<Field> grads;
  for (const Field& p : h.phi) grads.push_back(gradient(p));
  const Field eae = dot_const(a.apply_const(e), e);
  auto A = [&](int j, int l) { return energy_form(a, grads[j], grads[l]); };
  auto B = [&](int j, int l) { return mean_product(h.phi[j] * h.phi[l], eae); };
  auto C = [&](int j, int l) { return mean_product(h.phi[j], h.phi[l]); };
  auto lam = [&](int j) { return h.lambda.at(j); };
  auto make = [](std::string name, double lhs, double rhs, double scale) {
    IdentityCheck c{std::move(name), lhs, rhs, std::abs(lhs - rhs), 0};
    c.rel_residual = c.abs_residual / std::max({std::abs(lhs), std::abs(rhs), scale});
    return c;
  };
  // Cauchy-Schwarz size of the leading quadratic form, used when both sides vanish by symmetry.
  std::vector<double> gnorm;
  for (const Field& gr : grads) gnorm.push_back(std::sqrt(mean_product(gr, gr)));
  auto cs_scale = [&](int j, int l) { return a.Lambda() * gnorm[j] * gnorm[l] + 1e-300; };
  const double floor_scale = 1e-14 * r.lambda0;

  for (int j = 1; j <= L; ++j) {
    for (int l = j + 1; l <= L; ++l) {
      const double lhs = A(j, l) - B(j - 1, l - 1);
      double rhs = -A(j + 1, l - 1) + B(j, l - 2);
      for (int m = 1; m <= j - 1; ++m) rhs -= lam(j - 1 - m) * C(l - 1, m);
      for (int m = 1; m <= l - 2; ++m) rhs -= lam(l - 2 - m) * C(m, j);
      r.pair_identities.push_back(
          make("pair(" + std::to_string(j) + "," + std::to_string(l) + ")", lhs, rhs, cs_scale(j, l)));
    }
  }
  for (int j = 1; j <= L - 1; ++j) {
    const double lhs = A(j, j + 1) - B(j - 1, j);
    double rhs = 0;
    for (int m = 1; m <= j - 1; ++m) rhs -= lam(j - 1 - m) * C(m, j);
    r.adjacent_identities.push_back(make("adjacent(" + std::to_string(j) + ")", lhs, rhs, cs_scale(j, j + 1)));
  }
  if (L >= 3) {
    r.has_lambda2 = true;
    r.lambda2_def = lam(2);
    Field w = h.phi[2] - 0.5 * product(h.phi[1], h.phi[1]);
    Field gw = gradient(w);
    r.lambda2_square = energy_form(a, gw, gw);
    r.lambda2_rel_gap = std::abs(r.lambda2_def - r.lambda2_square) /
                        std::max({std::abs(r.lambda2_def), std::abs(r.lambda2_square), floor_scale});
  }
  if (L >= 5) {
    r.has_lambda4 = true;
    r.lambda4_def = lam(4);
    const Field p2sq = h.phi[2] * h.phi[2];
    r.lambda4_formula = -A(3, 3) + mean_product(p2sq, eae) - lam(0) * p2sq.mean() + lam(2) * C(1, 1);
    r.lambda4_rel_gap = std::abs(r.lambda4_def - r.lambda4_formula) /
                        std::max({std::abs(r.lambda4_def), std::abs(r.lambda4_formula), floor_scale});
  }
  return r;
}

StructureReport check_structure(const CorrectorHierarchy& h) {
  StructureReport s;
  const int d = h.dim();
  for (int j = 1; j <= h.order; ++j) {
    const Field& q = h.q[j];
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n)
        s.max_skew_violation =
            std::max(s.max_skew_violation, (skew_entry(h.sigma[j], m, n) + skew_entry(h.sigma[j], n, m)).max_abs());
    // q_j vanishes identically in 1D and for constant coefficients; below 1e-3 of the
    // homogenized flux scale both errors are measured against that scale, not roundoff.
    const double floor = 1e-3 * std::abs(h.lambda[0]) * std::sqrt(q.grid().cell_volume());
    const double qn = std::max(q.norm_l2(), floor);
    const double mis = (skew_divergence(h.sigma[j]) - q).norm_l2();
    s.max_flux_mismatch = std::max(s.max_flux_mismatch, qn > 0 ? mis / qn : mis);
    double gq = 0;
    for (int m = 0; m < d; ++m) {
      Field gm = gradient(q.component(m));
      gq += gm.norm_l2() * gm.norm_l2();
    }
    gq = std::max(std::sqrt(gq), 2 * std::numbers::pi / q.grid().period * floor);
    const double dv = divergence(q).norm_l2();
    s.max_divergence = std::max(s.max_divergence, gq > 0 ? dv / gq : dv);
    for (int m = 0; m < d; ++m) s.max_q_mean = std::max(s.max_q_mean, std::abs(q.mean(m)));
    s.max_field_mean = std::max({s.max_field_mean, std::abs(h.phi[j].mean()), std::abs(h.chi[j].mean())});
    for (int c = 0; c < h.sigma[j].components(); ++c)
      s.max_field_mean = std::max(s.max_field_mean, std::abs(h.sigma[j].mean(c)));
  }
  return s;
}

// ---------------------------------------------------------------------------

Field TensorizedCorrectors::contract(const std::vector<Field>& coeffs, int degree, const Field& v) {
  Field out(v.grid());
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    if (coeffs[m].max_abs() == 0) continue;
    Field dv = derivative_multi(v, degree - int(m), int(m));
    out += coeffs[m] * dv;
  }
  return out;
}

namespace {

Field evaluate_fit(const std::vector<Field>& coeffs, int degree, const Vec& e) {
  const TorusGrid& g = coeffs.at(0).grid();
  Field out(g, coeffs[0].components());
  auto mono = monomials(g.dim, degree, e);
  for (std::size_t m = 0; m < coeffs.size(); ++m) out.axpy(mono[m], coeffs[m]);
  return out;
}

std::vector<Field> fit_fields(const std::vector<const Field*>& samples, int degree, const DirectionFit& fit) {
  const Eigen::MatrixXd& pinv = fit.pinv();
  const Field& f0 = *samples.at(0);
  std::vector<Field> out;
  for (int m = 0; m < fit.terms(); ++m) {
    Field c(f0.grid(), f0.components());
    if (f0.rank() != Rank::generic && f0.rank() != Rank::scalar) c = Field(f0.grid(), f0.rank());
    for (std::size_t i = 0; i < samples.size(); ++i) c.axpy(pinv(m, i), *samples[i]);
    out.push_back(std::move(c));
  }
  (void)degree;
  return out;
}

double fit_residual(const std::vector<Field>& coeffs, int degree, const std::vector<const Field*>& samples,
                    const std::vector<Vec>& dirs) {
  double r = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i]->components() == 0) continue;
    const double n = samples[i]->norm_l2();
    const double gap = (evaluate_fit(coeffs, degree, dirs[i]) - *samples[i]).norm_l2();
    r = std::max(r, n > 0 ? gap / n : gap);
  }
  return r;
}

}  // namespace

Field TensorizedCorrectors::phi_along(int j, const Vec& e) const { return evaluate_fit(phi.at(j), j, e); }
Field TensorizedCorrectors::sigma_along(int j, const Vec& e) const {
  if (dim == 1) return Field(grid(), Rank::skew);
  return evaluate_fit(sigma.at(j), j, e);
}
Field TensorizedCorrectors::chi_along(int j, const Vec& e) const { return evaluate_fit(chi.at(j), j + 1, e); }

std::vector<Vec> default_directions(int dim, int order) {
  if (dim == 1) return {Vec{1, 0}};
  return half_circle_directions(2 * order + 4);
}

namespace {

std::vector<CorrectorHierarchy> build_all(const CoefficientField& a, int order, const std::vector<Vec>& dirs,
                                          const HierarchyOptions& opt, int workers) {
  std::vector<CorrectorHierarchy> hs(dirs.size());
  const int nw = std::max(1, std::min<int>(workers, int(dirs.size())));
  if (nw == 1) {
    for (std::size_t i = 0; i < dirs.size(); ++i) hs[i] = build_hierarchy(a, dirs[i], order, opt);
    return hs;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex fm;
  std::vector<std::thread> pool;
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < dirs.size(); i = next++) {
        try {
          hs[i] = build_hierarchy(a, dirs[i], order, opt);
        } catch (...) {
          std::lock_guard<std::mutex> lock(fm);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return hs;
}

}  // namespace

TensorizedCorrectors fit_tensors(const std::vector<CorrectorHierarchy>& hs) {
  if (hs.empty()) throw ConfigurationError("no hierarchies to tensorize");
  TensorizedCorrectors t;
  t.dim = hs[0].dim();
  t.order = hs[0].order;
  for (const auto& h : hs) t.directions.push_back(h.e);
  if (t.dim == 1 && hs[0].e[0] < 0) throw ConfigurationError("1D tensorization expects the direction +1");
  for (int j = 0; j <= t.order; ++j) {
    std::vector<const Field*> ph, sg, ch;
    for (const auto& h : hs) {
      ph.push_back(&h.phi[j]);
      sg.push_back(&h.sigma[j]);
      ch.push_back(&h.chi[j]);
    }
    DirectionFit fj(t.dim, j, t.directions), fj1(t.dim, j + 1, t.directions);
    t.phi.push_back(fit_fields(ph, j, fj));
    t.chi.push_back(fit_fields(ch, j + 1, fj1));
    if (t.dim == 2) t.sigma.push_back(fit_fields(sg, j, fj));
    else t.sigma.push_back({});
    double res = fit_residual(t.phi[j], j, ph, t.directions);
    res = std::max(res, fit_residual(t.chi[j], j + 1, ch, t.directions));
    if (t.dim == 2) res = std::max(res, fit_residual(t.sigma[j], j, sg, t.directions));
    t.residual.push_back(res);
  }
  return t;
}

DispersionModel fit_dispersion(const std::vector<CorrectorHierarchy>& hs, double kmax_cap) {
  if (hs.empty()) throw ConfigurationError("no hierarchies to fit");
  DispersionModel D;
  D.dim = hs[0].dim();
  D.order = hs[0].order;
  D.kmax_cap = kmax_cap;
  for (const auto& h : hs) D.directions.push_back(h.e);
  double lam0_min = 1e300, lam0_max = 0;
  for (const auto& h : hs) {
    lam0_min = std::min(lam0_min, h.lambda[0]);
    lam0_max = std::max(lam0_max, h.lambda[0]);
  }
  for (int j = 0; j < D.order; ++j) {
    std::vector<double> y;
    for (const auto& h : hs) y.push_back(h.lambda[j]);
    DirectionFit fit(D.dim, j + 2, D.directions);
    auto c = fit.coefficients(y);
    const double res = fit.residual(c, y) / lam0_max;
    D.fit_residual.push_back(res);
    if (res > 1e-6)
      throw ReconstructionError("fit residual " + std::to_string(res) + " for the degree-" + std::to_string(j + 2) +
                                " tensor exceeds 1e-6");
    HomogeneousPoly p{D.dim, j + 2, c};
    if (j % 2 == 1) {
      const double mag = p.max_abs_on(D.directions);
      if (mag > 1e-6 * lam0_min)
        throw ReconstructionError("odd-order tensor " + std::to_string(j) + " has magnitude " + std::to_string(mag));
      p = HomogeneousPoly::zero(D.dim, j + 2);
    }
    D.P.push_back(p);
  }
  D.Gamma_bar = 0;
  for (const auto& p : D.P) D.Gamma_bar = std::max(D.Gamma_bar, p.max_abs_on(D.check_directions()));
  D.kmax = compute_kmax(D, kmax_cap);
  return D;
}

CorrectorSet build_corrector_set(const CoefficientField& a, int order, std::vector<Vec> dirs,
                                 const HierarchyOptions& opt, int workers) {
  if (dirs.empty()) dirs = default_directions(a.dim(), order);
  CorrectorSet s;
  s.hierarchies = build_all(a, order, dirs, opt, workers);
  s.tensors = fit_tensors(s.hierarchies);
  s.model = fit_dispersion(s.hierarchies);
  return s;
}

DispersionModel reconstruct_dispersion(const CoefficientField& a, int order, std::vector<Vec> dirs,
                                       const HierarchyOptions& opt, int workers) {
  if (dirs.empty()) dirs = default_directions(a.dim(), order);
  return fit_dispersion(build_all(a, order, dirs, opt, workers));
}

TensorizedCorrectors tensorize_correctors(const CoefficientField& a, int order, std::vector<Vec> dirs,
                                          const HierarchyOptions& opt, int workers) {
  if (dirs.empty()) dirs = default_directions(a.dim(), order);
  return fit_tensors(build_all(a, order, dirs, opt, workers));
}

std::vector<double> holdout_errors(const CoefficientField& a, const TensorizedCorrectors& t, const Vec& e,
                                   const HierarchyOptions& opt) {
  CorrectorHierarchy h = build_hierarchy(a, e, t.order, opt);
  std::vector<double> out;
  for (int j = 0; j <= t.order; ++j) {
    const double n = h.phi[j].norm_l2();
    const double gap = (t.phi_along(j, e) - h.phi[j]).norm_l2();
    out.push_back(n > 0 ? gap / n : gap);
  }
  return out;
}

Field periodize(const Field& cell, const TorusGrid& box) {
  const TorusGrid& g = cell.grid();
  if (box.dim != g.dim) throw ConfigurationError("periodize: dimension mismatch");
  const double ratio = box.period / g.period;
  const int periods = int(std::lround(ratio));
  if (periods < 1 || std::abs(ratio - periods) > 1e-9 * ratio)
    throw ConfigurationError("periodize: box side must be an integer number of periods");
  if (box.n % periods != 0) throw ConfigurationError("periodize: grid points per period must be an integer");
  const int ppp = box.n / periods;
  Field src = cell;
  if (ppp < g.n && g.n % ppp == 0) {
    // Exact node values by subsampling.
    TorusGrid sg(g.dim, ppp, g.period);
    const int step = g.n / ppp;
    Field sub(sg, cell.components());
    for (int c = 0; c < cell.components(); ++c) {
      auto s = cell.comp(c);
      auto d = sub.comp(c);
      if (g.dim == 1) {
        for (int i = 0; i < ppp; ++i) d[i] = s[std::size_t(i) * step];
      } else {
        for (int i = 0; i < ppp; ++i)
          for (int k = 0; k < ppp; ++k) d[std::size_t(i) * ppp + k] = s[std::size_t(i) * step * g.n + std::size_t(k) * step];
      }
    }
    src = cell.rank() == Rank::generic ? sub : Field(sg, cell.rank(), std::move(sub.data()));
  } else if (ppp != g.n) {
    src = resample(cell, ppp);
  }
  Field tiled = tile(src, periods);
  if (tiled.grid() == box) return tiled;
  return Field(box, tiled.rank() == Rank::generic ? Rank::scalar : tiled.rank(), std::move(tiled.data()));
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json grid_json(const TorusGrid& g) { return {{"dim", g.dim}, {"n", g.n}, {"period", g.period}}; }

nlohmann::json fields_json(const std::vector<Field>& fs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : fs) arr.push_back(f.data());
  return arr;
}

std::vector<Field> fields_from(const nlohmann::json& arr, const TorusGrid& g, Rank rank) {
  std::vector<Field> out;
  for (const auto& v : arr) out.emplace_back(g, rank, v.get<std::vector<double>>());
  return out;
}

}  // namespace

nlohmann::json hierarchy_to_json(const CorrectorHierarchy& h) {
  nlohmann::json j;
  j["format"] = "tbhom-hierarchy-1";
  j["grid"] = grid_json(h.grid());
  j["e"] = {h.e[0], h.e[1]};
  j["order"] = h.order;
  j["lambda"] = h.lambda;
  nlohmann::json at = nlohmann::json::array();
  for (const Vec& v : h.atilde) at.push_back({v[0], v[1]});
  j["atilde"] = at;
  j["phi"] = fields_json(h.phi);
  j["sigma"] = fields_json(h.sigma);
  j["chi"] = fields_json(h.chi);
  j["q"] = fields_json(h.q);
  return j;
}

CorrectorHierarchy hierarchy_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "tbhom-hierarchy-1") throw ConfigurationError("not a hierarchy bundle");
  const auto& gj = j.at("grid");
  TorusGrid g(gj.at("dim").get<int>(), gj.at("n").get<int>(), gj.at("period").get<double>());
  CorrectorHierarchy h;
  auto e = j.at("e").get<std::vector<double>>();
  h.e = {e.at(0), e.at(1)};
  h.order = j.at("order").get<int>();
  h.lambda = j.at("lambda").get<std::vector<double>>();
  for (const auto& v : j.at("atilde")) h.atilde.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  h.phi = fields_from(j.at("phi"), g, Rank::scalar);
  h.sigma = fields_from(j.at("sigma"), g, Rank::skew);
  h.chi = fields_from(j.at("chi"), g, Rank::scalar);
  h.q = fields_from(j.at("q"), g, Rank::vector);
  return h;
}

void save_hierarchy(const CorrectorHierarchy& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  out << hierarchy_to_json(h).dump();
}

CorrectorHierarchy load_hierarchy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read " + path);
  return hierarchy_from_json(nlohmann::json::parse(in));
}

std::string lambda_table_csv(const std::vector<CorrectorHierarchy>& hs) {
  std::ostringstream os;
  os.precision(17);
  os << "direction,e1,e2,j,lambda\n";
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = 0; j < hs[i].lambda.size(); ++j)
      os << i << ',' << hs[i].e[0] << ',' << hs[i].e[1] << ',' << j << ',' << hs[i].lambda[j] << '\n';
  return os.str();
}

std::string dispersion_table_csv(const DispersionModel& m) {
  std::ostringstream os;
  os.precision(17);
  os << "j,degree,monomial,coefficient,fit_residual\n";
  for (std::size_t j = 0; j < m.P.size(); ++j)
    for (std::size_t c = 0; c < m.P[j].coeffs.size(); ++c)
      os << j << ',' << m.P[j].degree << ',' << c << ',' << m.P[j].coeffs[c] << ',' << m.fit_residual[j] << '\n';
  return os.str();
}

}  // namespace tbhom
