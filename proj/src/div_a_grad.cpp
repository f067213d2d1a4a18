// SPDX-License-Identifier: MIT
#include "tbhom/div_a_grad.hpp"

#include <cmath>
#include <string>

namespace tbhom {

namespace {

cplx dsym(const Mode& m, int axis) {
  if (m.nyquist[axis]) return 0.0;
  return cplx(0, m.k[axis]);
}

struct Workspace {
  std::vector<cplx> uh, fh[2], acc;
  std::vector<double> g[2], flux[2];
  explicit Workspace(const TorusGrid& gr, std::size_t nh) : uh(nh), acc(nh) {
    for (int a = 0; a < 2; ++a) {
      fh[a].resize(nh);
      g[a].resize(gr.nodes());
      flux[a].resize(gr.nodes());
    }
  }
};

void apply_into(const CoefficientField& a, std::span<const double> u, std::span<double> out, Workspace& w) {
  const TorusGrid& gr = a.grid();
  Spectral& sp = Spectral::of(gr);
  const auto& modes = sp.modes();
  const std::size_t nh = sp.half_size(), N = gr.nodes();
  const int d = gr.dim;
  sp.forward(u, w.uh.data());
  for (int ax = 0; ax < d; ++ax) {
    for (std::size_t i = 0; i < nh; ++i) w.acc[i] = w.uh[i] * dsym(modes[i], ax);
    sp.inverse(w.acc.data(), w.g[ax]);
  }
  const Field& p = a.packed();
  if (d == 1) {
    auto a11 = p.comp(0);
    for (std::size_t i = 0; i < N; ++i) w.flux[0][i] = a11[i] * w.g[0][i];
  } else {
    auto a11 = p.comp(0), a12 = p.comp(1), a22 = p.comp(2);
    for (std::size_t i = 0; i < N; ++i) {
      w.flux[0][i] = a11[i] * w.g[0][i] + a12[i] * w.g[1][i];
      w.flux[1][i] = a12[i] * w.g[0][i] + a22[i] * w.g[1][i];
    }
  }
  for (int ax = 0; ax < d; ++ax) sp.forward(w.flux[ax], w.fh[ax].data());
  for (std::size_t i = 0; i < nh; ++i) {
    if (modes[i].any_nyquist()) {
      w.acc[i] = 0;
      continue;
    }
    cplx s = 0;
    for (int ax = 0; ax < d; ++ax) s += dsym(modes[i], ax) * w.fh[ax][i];
    w.acc[i] = -s;
  }
  sp.inverse(w.acc.data(), out);
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Projected rhs in the range of the operator: Nyquist modes and mean removed.
Field clean_rhs(const Field& rhs) {
  return apply_multiplier(rhs, [](const Mode& m) -> cplx {
    return (m.any_nyquist() || (m.freq[0] == 0 && m.freq[1] == 0)) ? 0.0 : 1.0;
  });
}

}  // namespace

Field apply_div_a_grad(const CoefficientField& a, const Field& u) {
  if (u.grid() != a.grid() || u.components() != 1)
    throw ConfigurationError("apply_div_a_grad: scalar field on the coefficient grid expected");
  Workspace w(a.grid(), Spectral::of(a.grid()).half_size());
  Field out(a.grid());
  apply_into(a, u.comp(0), out.comp(0), w);
  return out;
}

Field solve_elliptic(const CoefficientField& a, const Field& rhs_in, const SolverOptions& opt, SolveInfo* info) {
  const TorusGrid& gr = a.grid();
  if (rhs_in.grid() != gr || rhs_in.components() != 1)
    throw ConfigurationError("solve_elliptic: scalar rhs on the coefficient grid expected");
  const Field b = clean_rhs(rhs_in);
  const std::size_t N = gr.nodes();
  Field x(gr);
  const double bnorm = std::sqrt(dot(b.comp(0), b.comp(0)));
  if (info) *info = {};
  if (bnorm == 0) return x;

  Spectral& sp = Spectral::of(gr);
  const auto& modes = sp.modes();
  const auto am = a.mean_matrix();
  const int d = gr.dim;
  std::vector<cplx> zh(sp.half_size());
  auto precond = [&](std::span<const double> r, std::span<double> z) {
    sp.forward(r, zh.data());
    for (std::size_t i = 0; i < zh.size(); ++i) {
      const Mode& m = modes[i];
      double q = am[0] * m.k[0] * m.k[0];
      if (d == 2) q += 2 * am[1] * m.k[0] * m.k[1] + am[3] * m.k[1] * m.k[1];
      zh[i] = (m.any_nyquist() || q == 0) ? 0.0 : zh[i] / q;
    }
    sp.inverse(zh.data(), z);
  };

  Workspace w(gr, sp.half_size());
  std::vector<double> r(b.comp(0).begin(), b.comp(0).end()), z(N), p(N), Ap(N);
  precond(r, z);
  p = z;
  double rz = dot(r, z);
  int it = 0;
  double rel = 1.0;
  for (; it < opt.max_iter; ++it) {
    rel = std::sqrt(dot(r, r)) / bnorm;
    if (rel <= opt.rel_tol) break;
    apply_into(a, p, Ap, w);
    const double alpha = rz / dot(p, Ap);
    auto xs = x.comp(0);
    for (std::size_t i = 0; i < N; ++i) {
      xs[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
  }
  // True residual of the returned iterate.
  apply_into(a, x.comp(0), Ap, w);
  double rr = 0;
  for (std::size_t i = 0; i < N; ++i) rr += (b.comp(0)[i] - Ap[i]) * (b.comp(0)[i] - Ap[i]);
  const double true_rel = std::sqrt(rr) / bnorm;
  if (info) *info = {it, true_rel};
  if (it >= opt.max_iter && rel > opt.rel_tol)
    throw ConvergenceError("elliptic solve did not converge: residual " + std::to_string(rel), rel, it);
  const double m = x.mean();
  for (double& v : x.comp(0)) v -= m;
  return x;
}

Field solve_div_a_grad(const CoefficientField& a, const Field& flux, const SolverOptions& opt, SolveInfo* info) {
  if (flux.grid() != a.grid() || flux.components() != a.dim())
    throw ConfigurationError("solve_div_a_grad: vector flux on the coefficient grid expected");
  return solve_elliptic(a, divergence(project(flux)), opt, info);
}

}  // namespace tbhom
