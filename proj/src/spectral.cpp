// SPDX-License-Identifier: MIT
#include "tbhom/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace tbhom {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int signed_freq(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace

Spectral::Spectral(const TorusGrid& g) : grid_(g) {
  const int n = g.n;
  nreal_ = g.nodes();
  nhalf_ = g.dim == 1 ? std::size_t(n / 2 + 1) : std::size_t(n) * (n / 2 + 1);
  std::lock_guard<std::mutex> lock(planner_mutex());
  rbuf_ = fftw_alloc_real(nreal_);
  auto* c = fftw_alloc_complex(nhalf_);
  cbuf_ = c;
  if (g.dim == 1) {
    fwd_ = fftw_plan_dft_r2c_1d(n, rbuf_, c, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n, c, rbuf_, FFTW_ESTIMATE);
  } else {
    fwd_ = fftw_plan_dft_r2c_2d(n, n, rbuf_, c, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(n, n, c, rbuf_, FFTW_ESTIMATE);
  }
  const double k0 = 2 * std::numbers::pi / g.period;
  modes_.resize(nhalf_);
  if (g.dim == 1) {
    for (int j = 0; j <= n / 2; ++j) {
      Mode& m = modes_[j];
      m.freq = {j, 0};
      m.k = {k0 * j, 0};
      m.nyquist = {j == n / 2, false};
      m.weight = (j == 0 || j == n / 2) ? 1 : 2;
    }
  } else {
    const int nh = n / 2 + 1;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < nh; ++j) {
        Mode& m = modes_[std::size_t(i) * nh + j];
        const int fi = signed_freq(i, n);
        m.freq = {fi, j};
        m.k = {k0 * fi, k0 * j};
        m.nyquist = {i == n / 2, j == n / 2};
        m.weight = (j == 0 || j == n / 2) ? 1 : 2;
      }
    }
  }
}

Spectral::~Spectral() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

Spectral& Spectral::of(const TorusGrid& g) {
  thread_local std::map<std::tuple<int, int, double>, std::unique_ptr<Spectral>> cache;
  auto key = std::make_tuple(g.dim, g.n, g.period);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Spectral>(g)).first;
  return *it->second;
}

void Spectral::forward(std::span<const double> in, cplx* out) {
  std::copy(in.begin(), in.end(), rbuf_);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  const auto* c = static_cast<const cplx*>(cbuf_);
  std::copy(c, c + nhalf_, out);
}

void Spectral::inverse(const cplx* in, std::span<double> out) {
  auto* c = static_cast<cplx*>(cbuf_);
  std::copy(in, in + nhalf_, c);
  fftw_execute(static_cast<fftw_plan>(inv_));
  const double s = 1.0 / double(nreal_);
  for (std::size_t i = 0; i < nreal_; ++i) out[i] = rbuf_[i] * s;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<cplx> c2c(const TorusGrid& g, const cplx* in, int sign) {
  const std::size_t N = g.nodes();
  std::vector<cplx> out(N);
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* buf = fftw_alloc_complex(N);
  fftw_plan p = g.dim == 1 ? fftw_plan_dft_1d(g.n, buf, buf, sign, FFTW_ESTIMATE)
                           : fftw_plan_dft_2d(g.n, g.n, buf, buf, sign, FFTW_ESTIMATE);
  std::copy(in, in + N, reinterpret_cast<cplx*>(buf));
  fftw_execute(p);
  std::copy(reinterpret_cast<cplx*>(buf), reinterpret_cast<cplx*>(buf) + N, out.begin());
  fftw_destroy_plan(p);
  fftw_free(buf);
  return out;
}

}  // namespace

Spectrum spectral_forward(const Field& f) {
  const TorusGrid& g = f.grid();
  if (!is_power_of_two(g.n)) throw ConfigurationError("spectral transform needs a power-of-two grid");
  Spectrum s{g, f.components(), {}};
  s.values.reserve(f.data().size());
  const double scale = std::pow(g.h(), g.dim);
  std::vector<cplx> tmp(g.nodes());
  for (int c = 0; c < f.components(); ++c) {
    auto src = f.comp(c);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = src[i];
    auto out = c2c(g, tmp.data(), FFTW_FORWARD);
    for (auto& v : out) s.values.push_back(v * scale);
  }
  return s;
}

std::vector<cplx> spectral_inverse_complex(const Spectrum& s) {
  const TorusGrid& g = s.grid;
  if (!is_power_of_two(g.n)) throw ConfigurationError("spectral transform needs a power-of-two grid");
  const std::size_t N = g.nodes();
  if (s.values.size() != N * s.components) throw ConfigurationError("spectrum size mismatch");
  const double scale = 1.0 / (std::pow(g.h(), g.dim) * double(N));
  std::vector<cplx> res;
  res.reserve(s.values.size());
  for (int c = 0; c < s.components; ++c) {
    auto out = c2c(g, s.values.data() + c * N, FFTW_BACKWARD);
    for (auto& v : out) res.push_back(v * scale);
  }
  return res;
}

Field spectral_inverse(const Spectrum& s, double* imag_residue) {
  auto z = spectral_inverse_complex(s);
  Field f(s.grid, s.components);
  double im = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    f.data()[i] = z[i].real();
    im = std::max(im, std::abs(z[i].imag()));
  }
  if (imag_residue) *imag_residue = im;
  return f;
}

Field apply_multiplier(const Field& f, const std::function<cplx(const Mode&)>& m) {
  const TorusGrid& g = f.grid();
  Spectral& sp = Spectral::of(g);
  std::vector<cplx> buf(sp.half_size());
  Field out(g, f.components());
  const auto& modes = sp.modes();
  for (int c = 0; c < f.components(); ++c) {
    sp.forward(f.comp(c), buf.data());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= m(modes[i]);
    sp.inverse(buf.data(), out.comp(c));
  }
  if (f.rank() != Rank::generic) return Field(g, f.rank(), std::move(out.data()));
  return out;
}

namespace {

cplx deriv_symbol(const Mode& m, int p1, int p2) {
  if ((p1 > 0 && m.nyquist[0]) || (p2 > 0 && m.nyquist[1])) return 0.0;
  cplx s = 1.0;
  for (int i = 0; i < p1; ++i) s *= cplx(0, m.k[0]);
  for (int i = 0; i < p2; ++i) s *= cplx(0, m.k[1]);
  return s;
}

}  // namespace

Field derivative_multi(const Field& f, int p1, int p2) {
  if (f.grid().dim == 1 && p2 > 0) throw ConfigurationError("derivative along axis 1 on a 1D grid");
  if (p1 == 0 && p2 == 0) return f;
  return apply_multiplier(f, [&](const Mode& m) { return deriv_symbol(m, p1, p2); });
}

Field derivative(const Field& f, int axis) {
  if (axis < 0 || axis >= f.grid().dim) throw ConfigurationError("derivative axis out of range");
  return axis == 0 ? derivative_multi(f, 1, 0) : derivative_multi(f, 0, 1);
}

Field derivative(const Field& f, std::span<const int> axes) {
  int p[2] = {0, 0};
  for (int a : axes) {
    if (a < 0 || a >= f.grid().dim) throw ConfigurationError("derivative axis out of range");
    ++p[a];
  }
  return derivative_multi(f, p[0], p[1]);
}

Field gradient(const Field& u) {
  if (u.components() != 1) throw ConfigurationError("gradient of a scalar field expected");
  const TorusGrid& g = u.grid();
  Spectral& sp = Spectral::of(g);
  std::vector<cplx> uh(sp.half_size()), buf(sp.half_size());
  sp.forward(u.comp(0), uh.data());
  Field out(g, Rank::vector);
  const auto& modes = sp.modes();
  for (int a = 0; a < g.dim; ++a) {
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] = uh[i] * deriv_symbol(modes[i], a == 0, a == 1);
    sp.inverse(buf.data(), out.comp(a));
  }
  return out;
}

Field divergence(const Field& v) {
  const TorusGrid& g = v.grid();
  if (v.components() != g.dim) throw ConfigurationError("divergence of a vector field expected");
  Spectral& sp = Spectral::of(g);
  std::vector<cplx> acc(sp.half_size(), 0.0), buf(sp.half_size());
  const auto& modes = sp.modes();
  for (int a = 0; a < g.dim; ++a) {
    sp.forward(v.comp(a), buf.data());
    for (std::size_t i = 0; i < buf.size(); ++i) acc[i] += buf[i] * deriv_symbol(modes[i], a == 0, a == 1);
  }
  Field out(g);
  sp.inverse(acc.data(), out.comp(0));
  return out;
}

Field laplacian(const Field& f) {
  return apply_multiplier(f, [](const Mode& m) { return cplx(-(m.k[0] * m.k[0] + m.k[1] * m.k[1])); });
}

Field project(const Field& f) {
  return apply_multiplier(f, [](const Mode& m) { return m.any_nyquist() ? 0.0 : 1.0; });
}

Field product(const Field& u, const Field& v) { return project(u * v); }

Field solve_poisson(const Field& rhs, const PoissonOptions& opt, std::vector<double>* discarded) {
  const TorusGrid& g = rhs.grid();
  if (discarded) discarded->clear();
  for (int c = 0; c < rhs.components(); ++c) {
    const double m = rhs.mean(c);
    double scale = 0;
    for (double x : rhs.comp(c)) scale = std::max(scale, std::abs(x));
    if (opt.strict && std::abs(m) > opt.mean_tol * std::max(1.0, scale))
      throw SolvabilityError("Poisson right-hand side has non-zero cell mean " + std::to_string(m));
    if (discarded) discarded->push_back(m);
  }
  (void)g;
  return apply_multiplier(rhs, [](const Mode& m) -> cplx {
    const double k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1];
    return k2 == 0 ? 0.0 : 1.0 / k2;
  });
}

double cell_average(const Field& f, int c) { return f.mean(c); }

std::vector<double> cell_average_all(const Field& f) {
  std::vector<double> out(f.components());
  for (int c = 0; c < f.components(); ++c) out[c] = f.mean(c);
  return out;
}

Field resample(const Field& f, int n_new) {
  const TorusGrid& g = f.grid();
  TorusGrid ng(g.dim, n_new, g.period);
  if (n_new == g.n) return f;
  const int n = g.n;
  const std::size_t Nold = g.nodes(), Nnew = ng.nodes();
  Field out(ng, f.components());
  auto fold = [](int fr, int m) { return fr < 0 ? fr + m : fr; };
  for (int c = 0; c < f.components(); ++c) {
    std::vector<cplx> in(Nold);
    auto src = f.comp(c);
    for (std::size_t i = 0; i < Nold; ++i) in[i] = src[i];
    auto sh = c2c(g, in.data(), FFTW_FORWARD);
    std::vector<cplx> nh(Nnew, 0.0);
    // Each old frequency pair maps to one or two new positions; an old Nyquist
    // index is split evenly between +n/2 and -n/2 when refining.
    auto targets = [&](int i) {
      std::vector<std::pair<int, double>> t;
      int fr = signed_freq(i, n);
      if (n_new > n) {
        if (i == n / 2) {
          t.push_back({n / 2, 0.5});
          t.push_back({-n / 2, 0.5});
        } else {
          t.push_back({fr, 1.0});
        }
      } else if (std::abs(fr) < n_new / 2) {
        t.push_back({fr, 1.0});
      }
      return t;
    };
    const double scale = double(Nnew) / double(Nold);
    if (g.dim == 1) {
      for (int i = 0; i < n; ++i)
        for (auto [fr, w] : targets(i)) nh[fold(fr, n_new)] += sh[i] * w * scale;
    } else {
      for (int i = 0; i < n; ++i)
        for (auto [f1, w1] : targets(i))
          for (int j = 0; j < n; ++j)
            for (auto [f2, w2] : targets(j))
              nh[std::size_t(fold(f1, n_new)) * n_new + fold(f2, n_new)] += sh[std::size_t(i) * n + j] * w1 * w2 * scale;
    }
    auto z = c2c(ng, nh.data(), FFTW_BACKWARD);
    auto dst = out.comp(c);
    for (std::size_t i = 0; i < Nnew; ++i) dst[i] = z[i].real() / double(Nnew);
  }
  if (f.rank() != Rank::generic) return Field(ng, f.rank(), std::move(out.data()));
  return out;
}

Field upsample(const Field& f, int factor) {
  if (factor < 1 || !is_power_of_two(factor)) throw ConfigurationError("upsample factor must be a power of two");
  return resample(f, f.grid().n * factor);
}

double inner(const Field& u, const Field& v) {
  if (u.grid() != v.grid() || u.components() != v.components()) throw ConfigurationError("inner: shape mismatch");
  double s = 0;
  for (std::size_t i = 0; i < u.data().size(); ++i) s += u.data()[i] * v.data()[i];
  return s * std::pow(u.grid().h(), u.grid().dim);
}

}  // namespace tbhom
