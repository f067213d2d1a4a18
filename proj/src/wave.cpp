// SPDX-License-Identifier: MIT
#include "tbhom/wave.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace tbhom {

// ---------------------------------------------------------------- box grid

BoxGrid::BoxGrid(int dim_, double L_, int n_, double eps_) : dim(dim_), L(L_), n(n_), eps(eps_) {
  if (dim != 1 && dim != 2) throw ConfigurationError("box dimension must be 1 or 2");
  if (!(L > 0) || !(eps > 0)) throw ConfigurationError("box side and eps must be positive");
  if (!is_power_of_two(n) || n < 8) throw ConfigurationError("box points per axis must be a power of two >= 8");
  const double r = L / eps;
  const long p = std::lround(r);
  if (p < 1 || std::abs(r - double(p)) > 1e-9 * r)
    throw ConfigurationError("eps must divide the box side (eps = L / integer)");
  if (n % p != 0) throw ConfigurationError("grid points per period must be an integer");
  if (n / p < 16) throw ConfigurationError("at least 16 grid points per period eps are required");
}

BoxGrid BoxGrid::resolved(int dim, double L, double eps, int ppp) {
  const long p = std::lround(L / eps);
  return BoxGrid(dim, L, int(p * ppp), eps);
}

int BoxGrid::periods() const { return int(std::lround(L / eps)); }

namespace {

Field with_period(const Field& cell, double period) {
  TorusGrid g(cell.grid().dim, cell.grid().n, period);
  if (cell.rank() != Rank::generic) return Field(g, cell.rank(), cell.data());
  Field out(g, cell.components());
  out.data() = cell.data();
  return out;
}

}  // namespace

Field cell_at_scale(const Field& cell, double eps, const TorusGrid& box) {
  if (cell.grid().period != 1.0) throw ConfigurationError("cell fields must live on the unit cell");
  return periodize(with_period(cell, eps), box);
}

Field box_field(const Field& cell, const BoxGrid& box) { return cell_at_scale(cell, box.eps, box.torus()); }

CoefficientField box_coefficient(const CoefficientField& cell, const BoxGrid& box) {
  return CoefficientField(box_field(cell.packed(), box), cell.Lambda());
}

Field gaussian_bump(const BoxGrid& box, double width) {
  const Vec c = box.center();
  const double L = box.L;
  return Field::from_function(box.torus(), [&](const Vec& x) {
    double r2 = 0;
    for (int a = 0; a < box.dim; ++a) {
      double d = x[a] - c[a];
      d -= L * std::round(d / L);
      r2 += d * d;
    }
    return std::exp(-r2 / (2 * width * width));
  });
}

// ---------------------------------------------------------------- sources

Field SourceTerm::at(double t, const TorusGrid& g) const {
  if (t < 0 || t >= support_end) return Field(g);
  return shape(t, g);
}

Field SourceTerm::shape(double t, const TorusGrid& g) const {
  Field out(g);
  for (const auto& term : terms) {
    if (term.profile.grid() != g) throw ConfigurationError("source profile grid mismatch");
    out.axpy(term.envelope(t), term.profile);
  }
  return out;
}

SourceTerm SourceTerm::pulse(Field profile, double support_end) {
  SourceTerm s;
  s.support_end = support_end;
  s.terms.push_back({[](double) { return 1.0; }, std::move(profile)});
  return s;
}

std::string to_string(FineScheme s) { return s == FineScheme::spectral ? "spectral" : "finite_difference"; }

FineScheme fine_scheme_from_string(const std::string& s) {
  if (s == "spectral") return FineScheme::spectral;
  if (s == "finite_difference" || s == "fd") return FineScheme::finite_difference;
  throw ConfigurationError("unknown fine scheme '" + s + "'");
}

// ---------------------------------------------------------------- fine solver

double max_nodal_norm(const CoefficientField& a) {
  const Field& p = a.packed();
  const int d = a.dim();
  double best = 0;
  std::array<double, 3> m{};
  for (std::size_t i = 0; i < p.nodes(); ++i) {
    for (int c = 0; c < p.components(); ++c) m[c] = p(i, c);
    best = std::max(best, std::abs(sym_eigen_range(d, m.data())[1]));
  }
  return best;
}

double stable_time_step(const CoefficientField& a, FineScheme scheme, double cfl) {
  const TorusGrid& g = a.grid();
  const double base = cfl * g.h() / (std::sqrt(double(g.dim)) * std::sqrt(max_nodal_norm(a)));
  // The spectral operator's top eigenvalue is (pi/2)^2 larger than the FD one.
  return scheme == FineScheme::spectral ? base * 2.0 / std::numbers::pi : base;
}

namespace {

// Flux-form differences with harmonic means of a_ii on cell faces.
class FdOperator {
 public:
  explicit FdOperator(const CoefficientField& a) : g_(a.grid()) {
    if (!a.is_diagonal(1e-14))
      throw ConfigurationError("finite-difference scheme needs a diagonal coefficient; use the spectral scheme");
    const std::size_t N = g_.nodes();
    const int n = g_.n;
    for (int ax = 0; ax < g_.dim; ++ax) {
      auto aii = a.packed().comp(ax == 0 ? 0 : 2);
      face_[ax].resize(N);
      for (std::size_t i = 0; i < N; ++i) {
        const std::size_t j = neighbour(i, ax, +1, n);
        face_[ax][i] = 2 * aii[i] * aii[j] / (aii[i] + aii[j]);
      }
    }
    flux_.resize(N);
  }

  void apply(std::span<const double> u, std::span<double> out) {
    const std::size_t N = g_.nodes();
    const int n = g_.n;
    const double ih2 = 1.0 / (g_.h() * g_.h());
    std::fill(out.begin(), out.end(), 0.0);
    for (int ax = 0; ax < g_.dim; ++ax) {
      for (std::size_t i = 0; i < N; ++i) flux_[i] = face_[ax][i] * (u[neighbour(i, ax, +1, n)] - u[i]);
      for (std::size_t i = 0; i < N; ++i) out[i] -= (flux_[i] - flux_[neighbour(i, ax, -1, n)]) * ih2;
    }
  }

 private:
  std::size_t neighbour(std::size_t i, int ax, int s, int n) const {
    if (g_.dim == 1) return (i + n + s) % n;
    const std::size_t r = i / n, c = i % n;
    if (ax == 0) return ((r + n + s) % n) * n + c;
    return r * n + (c + n + s) % n;
  }

  TorusGrid g_;
  std::vector<double> face_[2];
  std::vector<double> flux_;
};

struct FineOperator {
  FineScheme scheme;
  const CoefficientField& a;
  std::unique_ptr<FdOperator> fd;

  FineOperator(const CoefficientField& a_, FineScheme s) : scheme(s), a(a_) {
    if (s == FineScheme::finite_difference) fd = std::make_unique<FdOperator>(a);
  }
  void apply(const Field& u, Field& out) {
    if (fd) {
      fd->apply(u.comp(0), out.comp(0));
    } else {
      out = apply_div_a_grad(a, u);
    }
  }
};

double sumsq(const Field& f) {
  double s = 0;
  for (double v : f.data()) s += v * v;
  return s;
}

}  // namespace

Field fine_operator(const CoefficientField& a, const Field& u, FineScheme scheme) {
  FineOperator op(a, scheme);
  Field out(a.grid());
  op.apply(u, out);
  return out;
}

WaveTrajectory solve_fine_wave(const CoefficientField& a, const BoxGrid& box, const Field& u0, const Field& v0,
                               const SourceTerm* f, double T, const FineWaveOptions& opt,
                               const SnapshotObserver& observer) {
  const TorusGrid g = box.torus();
  if (a.grid() != g) throw ConfigurationError("solve_fine_wave: coefficient must live on the box grid");
  if (u0.grid() != g || v0.grid() != g) throw ConfigurationError("solve_fine_wave: data must live on the box grid");
  if (!(T >= 0)) throw ConfigurationError("solve_fine_wave: final time must be nonnegative");
  if (f && f->empty()) f = nullptr;

  const double dt_max = stable_time_step(a, opt.scheme, opt.cfl);
  if (opt.dt > 0 && opt.dt > dt_max * (1 + 1e-12)) {
    std::ostringstream os;
    os << "CFL violated: dt = " << opt.dt << " exceeds the stable step " << dt_max;
    throw ConfigurationError(os.str());
  }
  const double dt_target = opt.dt > 0 ? opt.dt : dt_max;
  const double interval = opt.snapshot_interval > 0 ? opt.snapshot_interval : T;
  long per_snap = 1, nsnap = 0;
  if (T > 0) {
    per_snap = std::max<long>(1, long(std::ceil(interval / dt_target - 1e-9)));
    nsnap = std::lround(T / interval);
    if (std::abs(double(nsnap) * interval - T) > 1e-9 * T)
      throw ConfigurationError("final time must be a multiple of the snapshot interval");
  }
  const double dt = T > 0 ? interval / double(per_snap) : dt_target;
  const long nsteps = nsnap * per_snap;

  WaveTrajectory traj;
  traj.grid = box;
  traj.scheme = opt.scheme;
  traj.dt = dt;
  traj.steps = nsteps;

  FineOperator A(a, opt.scheme);
  const double hd = g.cell_volume() / double(g.nodes());
  auto energy_of = [&](const Field& up, const Field& u, const Field& Au) {
    double kin = 0, pot = 0;
    for (std::size_t i = 0; i < up.data().size(); ++i) {
      const double d = (up.data()[i] - u.data()[i]) / dt;
      kin += d * d;
      pot += up.data()[i] * Au.data()[i];
    }
    return 0.5 * hd * (kin + pot);
  };
  auto emit = [&](Snapshot&& s, double energy) {
    traj.energy.push_back({s.t, energy});
    if (observer) observer(s);
    if (opt.store_snapshots) traj.snapshots.push_back(std::move(s));
  };

  const double u0sq = sumsq(u0);
  Field Au(g);
  A.apply(u0, Au);
  Field um = u0;
  Field u = u0;
  u.axpy(dt, v0);
  {
    Field rhs = f ? f->at(0.0, g) : Field(g);
    rhs -= Au;
    u.axpy(0.5 * dt * dt, rhs);
  }
  double E = energy_of(u, um, Au);
  double E_ref = (f && f->support_end > 0) ? -1.0 : E;
  double drift = 0;
  emit(Snapshot{0.0, 0, u0, v0}, E);
  if (u0sq > 0) traj.max_l2_ratio = std::max(1.0, std::sqrt(sumsq(u) / u0sq));

  Field up(g);
  for (long n = 1; n <= nsteps; ++n) {
    const double t = double(n) * dt;
    A.apply(u, Au);
    // Fraction of the step cell [t - dt/2, t + dt/2] inside the support keeps the
    // switch-off second order accurate.
    const double inside = f ? std::clamp((f->support_end - (t - 0.5 * dt)) / dt, 0.0, 1.0) : 0.0;
    const bool forced = inside > 0;
    Field src = forced ? f->shape(std::min(t, f->support_end), g) : Field();
    if (forced && inside < 1) src *= inside;
    {
      auto& U = u.data();
      auto& UM = um.data();
      auto& UP = up.data();
      const auto& AU = Au.data();
      const double dt2 = dt * dt;
      if (forced) {
        const auto& S = src.data();
        for (std::size_t i = 0; i < U.size(); ++i) UP[i] = 2 * U[i] - UM[i] + dt2 * (S[i] - AU[i]);
      } else {
        for (std::size_t i = 0; i < U.size(); ++i) UP[i] = 2 * U[i] - UM[i] - dt2 * AU[i];
      }
    }
    const double upsq = sumsq(up);
    if (!std::isfinite(upsq)) throw InstabilityError("fine wave solver produced a non-finite value", std::size_t(n));
    if (u0sq > 0) traj.max_l2_ratio = std::max(traj.max_l2_ratio, std::sqrt(upsq / u0sq));
    E = energy_of(up, u, Au);
    if (!forced) {
      if (E_ref < 0) E_ref = E;
      if (E_ref > 0) drift = std::max(drift, std::abs(E - E_ref) / E_ref);
    }
    if (n % per_snap == 0) {
      Field v = up;
      v -= um;
      v *= 1.0 / (2 * dt);
      emit(Snapshot{t, n, u, std::move(v)}, E);
    }
    std::swap(um, u);
    std::swap(u, up);
  }
  traj.energy_drift = drift;
  if (drift > opt.energy_tolerance) {
    std::ostringstream os;
    os << "discrete energy drift " << drift << " exceeds " << opt.energy_tolerance;
    traj.warnings.push_back(os.str());
  }
  return traj;
}

// ---------------------------------------------------------------- propagators

ModePropagator::ModePropagator(const TorusGrid& g, std::vector<double> freq, std::vector<double> weight)
    : grid_(g), freq_(std::move(freq)), weight_(std::move(weight)) {
  const std::size_t nh = Spectral::of(g).half_size();
  if (freq_.size() != nh || weight_.size() != nh) throw ConfigurationError("propagator symbol size mismatch");
}

namespace {

Field apply_half(const TorusGrid& g, const Field& u, const std::function<cplx(std::size_t)>& m) {
  if (u.grid() != g || u.components() != 1) throw ConfigurationError("propagator: scalar field on its grid expected");
  Spectral& sp = Spectral::of(g);
  std::vector<cplx> buf(sp.half_size());
  sp.forward(u.comp(0), buf.data());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= m(i);
  Field out(g);
  sp.inverse(buf.data(), out.comp(0));
  return out;
}

// sin(w t) / w, continuous at w = 0.
double sinc_t(double w, double t) {
  const double x = w * t;
  if (std::abs(x) < 1e-8) return t * (1 - x * x / 6);
  return std::sin(x) / w;
}

}  // namespace

Field ModePropagator::displacement(const Field& u0, double t) const {
  return apply_half(grid_, u0, [&](std::size_t i) { return cplx(weight_[i] * std::cos(freq_[i] * t)); });
}

Field ModePropagator::velocity(const Field& u0, double t) const {
  return apply_half(grid_, u0, [&](std::size_t i) { return cplx(-weight_[i] * freq_[i] * std::sin(freq_[i] * t)); });
}

std::pair<Field, Field> ModePropagator::evolve(const Field& u, const Field& v, double t) const {
  Spectral& sp = Spectral::of(grid_);
  const std::size_t nh = sp.half_size();
  std::vector<cplx> uh(nh), vh(nh), uo(nh), vo(nh);
  sp.forward(u.comp(0), uh.data());
  sp.forward(v.comp(0), vh.data());
  for (std::size_t i = 0; i < nh; ++i) {
    const double w = freq_[i], c = std::cos(w * t);
    uo[i] = c * uh[i] + sinc_t(w, t) * vh[i];
    vo[i] = -w * std::sin(w * t) * uh[i] + c * vh[i];
  }
  Field U(grid_), V(grid_);
  sp.inverse(uo.data(), U.comp(0));
  sp.inverse(vo.data(), V.comp(0));
  return {std::move(U), std::move(V)};
}

ModePropagator homogenized_propagator(const DispersionModel& D, const CutoffSpec& spec, double eps,
                                      const TorusGrid& g) {
  if (D.dim != g.dim) throw ConfigurationError("dispersion model and grid dimensions differ");
  const auto& modes = Spectral::of(g).modes();
  std::vector<double> freq(modes.size()), weight(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Vec ek{eps * modes[i].k[0], eps * modes[i].k[1]};
    const double w = cutoff(spec, std::hypot(ek[0], ek[1]));
    weight[i] = w;
    freq[i] = w > 0 ? dispersion_Lambda(D, ek) / eps : 0.0;
  }
  return ModePropagator(g, std::move(freq), std::move(weight));
}

Field homogenized_wave_field(const DispersionModel& D, const CutoffSpec& spec, const Field& u0, double eps,
                             double t) {
  return homogenized_propagator(D, spec, eps, u0.grid()).displacement(u0, t);
}

Field filtered_data(const CutoffSpec& spec, const Field& u0, double eps) {
  return apply_multiplier(u0, [&](const Mode& m) { return cplx(cutoff(spec, eps * std::hypot(m.k[0], m.k[1]))); });
}

Field dress(const TensorizedCorrectors& tc, const Field& v, double eps, int order) {
  if (order < 0) throw ConfigurationError("dressing order must be nonnegative");
  if (order > tc.order) {
    std::ostringstream os;
    os << "tensorized correctors available to order " << tc.order << ", requested " << order;
    throw ConfigurationError(os.str());
  }
  if (tc.dim != v.grid().dim) throw ConfigurationError("corrector and field dimensions differ");
  Field out = v;
  double scale = 1;
  for (int j = 1; j <= order; ++j) {
    scale *= eps;
    std::vector<Field> coeffs;
    coeffs.reserve(tc.phi[j].size());
    for (const Field& c : tc.phi[j]) coeffs.push_back(cell_at_scale(c, eps, v.grid()));
    out.axpy(scale, TensorizedCorrectors::contract(coeffs, j, v));
  }
  return out;
}

Field well_prepared_data(const TensorizedCorrectors& tc, const CutoffSpec& spec, const Field& u0, double eps,
                         int order) {
  return dress(tc, filtered_data(spec, u0, eps), eps, order);
}

Field taylor_bloch_ansatz(const TensorizedCorrectors& tc, const DispersionModel& D, const CutoffSpec& spec,
                          const Field& u0, double eps, int order, double t) {
  return dress(tc, homogenized_wave_field(D, spec, u0, eps, t), eps, order);
}

Field taylor_bloch_velocity(const TensorizedCorrectors& tc, const DispersionModel& D, const CutoffSpec& spec,
                            const Field& u0, double eps, int order, double t) {
  return dress(tc, homogenized_propagator(D, spec, eps, u0.grid()).velocity(u0, t), eps, order);
}

// ---------------------------------------------------------------- regularization

int regularization_power(int order) { return (order - 1) / 2 + 1; }

double regularized_symbol(const DispersionModel& D, double gamma, double eps, const Vec& k) {
  const int m = regularization_power(D.order);
  const double k2 = k[0] * k[0] + k[1] * k[1];
  const double base = eigenvalue(D, {eps * k[0], eps * k[1]}) / (eps * eps);
  return base + gamma * std::pow(eps, 2 * m) * std::pow(k2, m + 1);
}

namespace {

// Coefficients p_j of s^j (j even) in |k|^-2 eigenvalue(s e), s = eps|k|.
std::vector<double> radial_coefficients(const DispersionModel& D, const Vec& e) {
  std::vector<double> p(std::max(1, D.order), 0.0);
  for (int j = 0; j < D.order && j < int(D.P.size()); j += 2) p[j] = ((j / 2) % 2 ? -1.0 : 1.0) * D.P[j](e);
  return p;
}

double poly_eval(const std::vector<double>& p, double s) {
  double v = 0;
  for (int j = int(p.size()) - 1; j >= 0; --j) v = v * s + p[j];
  return v;
}

std::vector<Vec> sphere_directions(const DispersionModel& D) {
  if (D.dim == 1) return {Vec{1, 0}};
  return D.check_directions();
}

// max over s > 0 of a smooth function with a single interior regime of interest:
// log-spaced scan followed by golden-section refinement of the best bracket.
double maximize_on_halfline(const std::function<double(double)>& g) {
  const int n = 4000;
  const double lo = std::log(1e-4), hi = std::log(1e4);
  double best = -std::numeric_limits<double>::infinity();
  int ib = 0;
  std::vector<double> xs(n + 1);
  for (int i = 0; i <= n; ++i) {
    xs[i] = lo + (hi - lo) * i / n;
    const double v = g(std::exp(xs[i]));
    if (v > best) best = v, ib = i;
  }
  double a = xs[std::max(0, ib - 1)], b = xs[std::min(n, ib + 1)];
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 100; ++it) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    if (g(std::exp(c)) > g(std::exp(d))) b = d; else a = c;
  }
  return std::max(best, g(std::exp(0.5 * (a + b))));
}

}  // namespace

double choose_gamma(const DispersionModel& D) {
  const int l = D.order;
  if (l <= 2) return 0.0;
  const int m = regularization_power(l);
  const auto dirs = sphere_directions(D);

  // Is the truncated symbol already >= |k|^2 / 2?
  bool coercive = true;
  for (const Vec& e : dirs) {
    auto p = radial_coefficients(D, e);
    int lead = int(p.size()) - 1;
    while (lead > 0 && p[lead] == 0) --lead;
    if (p[lead] < 0) {
      coercive = false;
      break;
    }
    const double worst = -maximize_on_halfline([&](double s) { return 0.5 - poly_eval(p, s); });
    if (worst < 0) {
      coercive = false;
      break;
    }
  }
  if (coercive) return 0.0;

  // Minimal gamma with p(s) s^2 + gamma s^{2m+2} >= (s^2 + s^{2m+2}) / 2 for all s.
  double gmin = 0;
  for (const Vec& e : dirs) {
    auto p = radial_coefficients(D, e);
    auto need = [&](double s) { return 0.5 + (0.5 - poly_eval(p, s)) * std::pow(s, -2 * m); };
    gmin = std::max(gmin, maximize_on_halfline(need));
  }
  return 2 * gmin;
}

ModePropagator regularized_propagator(const DispersionModel& D, double gamma, double eps, const TorusGrid& g) {
  if (gamma < 0) throw ConfigurationError("gamma must be nonnegative");
  const auto& modes = Spectral::of(g).modes();
  std::vector<double> freq(modes.size()), weight(modes.size(), 1.0);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double s = regularized_symbol(D, gamma, eps, modes[i].k);
    if (s < 0) {
      std::ostringstream os;
      os << "regularized symbol " << s << " < 0 at mode (" << modes[i].freq[0] << ", " << modes[i].freq[1]
         << "); increase gamma";
      throw PositivityError(os.str());
    }
    freq[i] = std::sqrt(s);
  }
  return ModePropagator(g, std::move(freq), std::move(weight));
}

std::vector<Field> solve_homogenized_wave_regularized(const DispersionModel& D, double gamma, const Field& u0,
                                                      double eps, const std::vector<double>& times) {
  auto prop = regularized_propagator(D, gamma, eps, u0.grid());
  std::vector<Field> out;
  for (double t : times) out.push_back(prop.displacement(u0, t));
  return out;
}

// ---------------------------------------------------------------- Boussinesq

namespace {

HomogeneousPoly multiply(const HomogeneousPoly& a, const HomogeneousPoly& b) {
  HomogeneousPoly r = HomogeneousPoly::zero(a.dim, a.degree + b.degree);
  if (a.dim == 1) {
    r.coeffs[0] = a.coeffs[0] * b.coeffs[0];
    return r;
  }
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs.size(); ++j) r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
  return r;
}

}  // namespace

BoussinesqTensors boussinesq_decomposition(const HomogeneousPoly& P0, const HomogeneousPoly& P2,
                                           std::vector<Vec> directions) {
  const int d = P0.dim;
  if (P0.degree != 2 || P2.degree != 4 || P2.dim != d)
    throw ConfigurationError("Boussinesq decomposition needs a quadratic P0 and a quartic P2");
  if (d == 1) {
    directions = {Vec{1, 0}};
  } else {
    auto extra = half_circle_directions(64);
    directions.insert(directions.end(), extra.begin(), extra.end());
  }
  BoussinesqTensors bt;
  double p2max = 0, p0max = 0;
  for (const Vec& e : directions) {
    const double p0 = P0(e);
    if (p0 < 1 - 1e-12) throw ConfigurationError("P0(e) >= 1 expected (ellipticity of the homogenized matrix)");
    bt.beta = std::max(bt.beta, P2(e) / p0);
    p2max = std::max(p2max, std::abs(P2(e)));
    p0max = std::max(p0max, p0);
  }
  bt.b = HomogeneousPoly::zero(d, 2);
  if (d == 1) {
    bt.b.coeffs[0] = bt.beta;
  } else {
    bt.b.coeffs[0] = bt.beta;
    bt.b.coeffs[2] = bt.beta;
  }
  bt.c = multiply(bt.b, P0);
  for (std::size_t i = 0; i < bt.c.coeffs.size(); ++i) bt.c.coeffs[i] -= P2.coeffs[i];

  const double scale = std::max({p2max, bt.beta * p0max, 1e-300});
  bt.min_b = bt.min_c = std::numeric_limits<double>::infinity();
  for (const Vec& e : directions) {
    const double b = bt.b(e), c = bt.c(e);
    bt.min_b = std::min(bt.min_b, b);
    bt.min_c = std::min(bt.min_c, c);
    bt.identity_residual = std::max(bt.identity_residual, std::abs(P2(e) - (b * P0(e) - c)) / scale);
  }
  if (bt.min_b < 0 || bt.min_c < -1e-12 * scale || bt.identity_residual > 1e-10) {
    std::ostringstream os;
    os << "Boussinesq decomposition failed: min b " << bt.min_b << ", min c " << bt.min_c << ", identity residual "
       << bt.identity_residual;
    throw DecompositionError(os.str());
  }
  return bt;
}

BoussinesqTensors boussinesq_decomposition(const DispersionModel& D) {
  HomogeneousPoly P2 = D.order >= 3 ? D.P.at(2) : HomogeneousPoly::zero(D.dim, 4);
  return boussinesq_decomposition(D.P.at(0), P2, D.dim == 2 ? D.directions : std::vector<Vec>{});
}

double boussinesq_frequency_squared(const HomogeneousPoly& P0, const BoussinesqTensors& bt, double eps,
                                    const Vec& k) {
  const double e2 = eps * eps;
  return (P0(k) + e2 * bt.c(k)) / (1 + e2 * bt.b(k));
}

std::vector<double> boussinesq_taylor(const HomogeneousPoly& P0, const BoussinesqTensors& bt, const Vec& e,
                                      int terms) {
  // (P0 x + c x^2) / (1 + b x) in powers of x = kappa^2.
  const double p0 = P0(e), c = bt.c(e), b = bt.b(e);
  std::vector<double> q(std::max(terms, 0));
  for (int n = 0; n < terms; ++n) {
    const double num = n == 0 ? p0 : (n == 1 ? c : 0.0);
    q[n] = num - (n > 0 ? b * q[n - 1] : 0.0);
  }
  return q;
}

ModePropagator boussinesq_propagator(const HomogeneousPoly& P0, const BoussinesqTensors& bt, double eps,
                                     const TorusGrid& g) {
  const auto& modes = Spectral::of(g).modes();
  std::vector<double> freq(modes.size()), weight(modes.size(), 1.0);
  for (std::size_t i = 0; i < modes.size(); ++i)
    freq[i] = std::sqrt(std::max(0.0, boussinesq_frequency_squared(P0, bt, eps, modes[i].k)));
  return ModePropagator(g, std::move(freq), std::move(weight));
}

std::vector<Field> solve_boussinesq_wave(const HomogeneousPoly& P0, const BoussinesqTensors& bt, const Field& u0,
                                         double eps, const std::vector<double>& times) {
  auto prop = boussinesq_propagator(P0, bt, eps, u0.grid());
  std::vector<Field> out;
  for (double t : times) out.push_back(prop.displacement(u0, t));
  return out;
}

// ---------------------------------------------------------------- source term

SourceFields source_term_fields(const DispersionModel& D, const TensorizedCorrectors* tc, const CutoffSpec& spec,
                                const SourceTerm& f, double eps, int order, double t, bool dressed,
                                const SourceQuadrature& q) {
  if (f.empty()) throw ConfigurationError("source_term_fields: empty source (pass a zero profile instead)");
  const TorusGrid& g = f.terms.front().profile.grid();
  SourceFields out{Field(g), Field(g)};
  const double tau = std::clamp(t, 0.0, f.support_end);
  if (dressed && !tc) throw ConfigurationError("dressed source fields need tensorized correctors");
  if (tau <= 0) return out;

  auto prop = homogenized_propagator(D, spec, eps, g);
  const auto& freq = prop.frequencies();
  const auto& weight = prop.weights();
  double wmax = 0;
  for (std::size_t i = 0; i < freq.size(); ++i)
    if (weight[i] > 0) wmax = std::max(wmax, freq[i]);
  int panels = q.panels;
  if (panels <= 0) {
    panels = std::max(1, int(std::ceil(wmax * tau / q.max_phase_per_panel)));
  } else if (wmax * tau / panels > q.max_phase_per_panel * (1 + 1e-12)) {
    std::ostringstream os;
    os << "time quadrature too coarse: frequency " << wmax << " times panel width " << tau / panels << " exceeds "
       << q.max_phase_per_panel;
    throw ConfigurationError(os.str());
  }
  if (q.nodes_per_panel != 16) throw ConfigurationError("source quadrature supports 16 nodes per panel");
  using G = boost::math::quadrature::gauss<double, 16>;
  std::vector<double> sx, sw;
  for (int p = 0; p < panels; ++p) {
    const double a = tau * p / panels, b = tau * (p + 1) / panels;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < G::abscissa().size(); ++i)
      for (double sgn : {-1.0, 1.0}) {
        sx.push_back(mid + sgn * half * G::abscissa()[i]);
        sw.push_back(half * G::weights()[i]);
      }
  }

  Spectral& sp = Spectral::of(g);
  const std::size_t nh = sp.half_size();
  std::vector<cplx> Uh(nh), Vh(nh), gh(nh);
  std::vector<double> env(sx.size());
  for (const auto& term : f.terms) {
    sp.forward(term.profile.comp(0), gh.data());
    for (std::size_t n = 0; n < sx.size(); ++n) env[n] = term.envelope(sx[n]) * sw[n];
    for (std::size_t i = 0; i < nh; ++i) {
      if (weight[i] == 0) continue;
      double I = 0, J = 0;
      for (std::size_t n = 0; n < sx.size(); ++n) {
        const double r = t - sx[n];
        I += env[n] * sinc_t(freq[i], r);
        J += env[n] * std::cos(freq[i] * r);
      }
      Uh[i] += weight[i] * I * gh[i];
      Vh[i] += weight[i] * J * gh[i];
    }
  }
  sp.inverse(Uh.data(), out.u.comp(0));
  sp.inverse(Vh.data(), out.v.comp(0));
  if (dressed) {
    out.u = dress(*tc, out.u, eps, order);
    out.v = dress(*tc, out.v, eps, order);
  }
  return out;
}

// ---------------------------------------------------------------- error reports

double ErrorBudget::mu(double t) const {
  return std::pow(1 + t, alpha1) * std::pow(std::log(2 + t), alpha2);
}

double ErrorBudget::curve(double eps, double t) const {
  return prefactor * (eps + std::pow(eps, order) * t * mu(t / eps));
}

double ErrorBudget::source_curve(double eps, double T) const {
  const double el = std::pow(eps, order);
  return prefactor * (std::max(eps, el * mu(1 / eps)) + el * T * mu(T / eps));
}

namespace {

double energy_norm(const Field& u, const Field& v, double T) {
  const Field gu = gradient(u);
  const double gn = gu.norm_l2(), vn = v.norm_l2(), un = u.norm_l2();
  return std::sqrt(vn * vn + gn * gn + un * un / (T * T));
}

}  // namespace

ErrorTracker::ErrorTracker(ApproxFn approx, ErrorBudget budget, double eps, double T_norm, bool energy)
    : approx_(std::move(approx)), budget_(budget), T_norm_(T_norm) {
  report_.eps = eps;
  report_.has_energy = energy;
  if (energy && !(T_norm > 0)) throw ConfigurationError("energy norm needs a positive final time");
}

void ErrorTracker::operator()(const Snapshot& s) {
  ApproxState a = approx_(s.t);
  if (a.u.grid() != s.u.grid()) throw ConfigurationError("error report: grid mismatch");
  ErrorRow row;
  row.t = s.t;
  Field e = s.u - a.u;
  row.l2_err = e.norm_l2();
  row.ref_l2 = s.u.norm_l2();
  row.budget = budget_.curve(report_.eps, s.t);
  if (report_.has_energy) {
    if (a.v.grid() != s.u.grid()) throw ConfigurationError("error report: approximation velocity missing");
    row.energy_err = energy_norm(e, s.v - a.v, T_norm_);
    row.ref_energy = energy_norm(s.u, s.v, T_norm_);
  }
  report_.sup_l2 = std::max(report_.sup_l2, row.l2_err);
  report_.sup_energy = std::max(report_.sup_energy, row.energy_err);
  report_.sup_ref_l2 = std::max(report_.sup_ref_l2, row.ref_l2);
  report_.sup_ref_energy = std::max(report_.sup_ref_energy, row.ref_energy);
  report_.rows.push_back(row);
}

ErrorReport error_report(const WaveTrajectory& ref, const ApproxFn& approx, const ErrorBudget& budget, bool energy) {
  const double T = ref.snapshots.empty() ? 0.0 : ref.snapshots.back().t;
  ErrorTracker tr(approx, budget, ref.grid.eps, T > 0 ? T : 1.0, energy);
  for (const auto& s : ref.snapshots) tr(s);
  return tr.report();
}

std::string error_report_csv(const ErrorReport& r, const std::string& header_comment) {
  std::ostringstream os;
  os.precision(12);
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "t,l2_err,energy_err,budget\n";
  for (const auto& row : r.rows) os << row.t << "," << row.l2_err << "," << row.energy_err << "," << row.budget << "\n";
  return os.str();
}

// ---------------------------------------------------------------- guard and export

WrapGuard wrap_guard(const Field& u0, const BoxGrid& box, double T, double Gamma_bar, double mass_tol) {
  const TorusGrid g = box.torus();
  if (u0.grid() != g) throw ConfigurationError("wrap_guard: data must live on the box grid");
  const Vec c = box.center();
  std::vector<std::pair<double, double>> rm(u0.nodes());
  double total = 0;
  for (std::size_t i = 0; i < u0.nodes(); ++i) {
    const Vec x = g.coord(i);
    double r2 = 0;
    for (int a = 0; a < box.dim; ++a) {
      double d = x[a] - c[a];
      d -= box.L * std::round(d / box.L);
      r2 += d * d;
    }
    const double m = u0(i) * u0(i);
    rm[i] = {std::sqrt(r2), m};
    total += m;
  }
  std::sort(rm.begin(), rm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  WrapGuard wg;
  double outside = 0;
  for (const auto& [r, m] : rm) {
    if (outside + m > mass_tol * total) {
      wg.r0 = r;
      break;
    }
    outside += m;
  }
  wg.speed = std::sqrt(std::max(Gamma_bar, 0.0));
  wg.max_T = wg.speed > 0 ? (box.L / 2 - wg.r0) / wg.speed : std::numeric_limits<double>::infinity();
  wg.ok = wg.r0 + T * wg.speed < box.L / 2;
  return wg;
}

void write_snapshots(const WaveTrajectory& traj, const std::string& prefix) {
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw ConfigurationError("cannot write " + prefix + ".bin");
  nlohmann::json side;
  side["format"] = "tbhom-snapshots-1";
  side["layout"] = "per snapshot: u then v, float64 little-endian, row-major nodes (axis 0 slowest)";
  side["grid"] = {{"dim", traj.grid.dim}, {"L", traj.grid.L}, {"n", traj.grid.n}, {"eps", traj.grid.eps}};
  side["dt"] = traj.dt;
  side["steps"] = traj.steps;
  side["scheme"] = to_string(traj.scheme);
  side["energy_drift"] = traj.energy_drift;
  nlohmann::json times = nlohmann::json::array();
  for (const auto& s : traj.snapshots) {
    times.push_back(s.t);
    bin.write(reinterpret_cast<const char*>(s.u.data().data()), std::streamsize(s.u.data().size() * sizeof(double)));
    bin.write(reinterpret_cast<const char*>(s.v.data().data()), std::streamsize(s.v.data().size() * sizeof(double)));
  }
  side["times"] = times;
  std::ofstream js(prefix + ".json");
  js << side.dump(2) << "\n";
}

}  // namespace tbhom
