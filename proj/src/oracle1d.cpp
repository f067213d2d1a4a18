// SPDX-License-Identifier: MIT
#include "tbhom/oracle1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

namespace tbhom {

namespace {

constexpr int Q = PanelFunction::kNodes;

// Reference nodes/weights on [-1, 1], barycentric weights and the
// node-to-node integration matrix S(i,k) = int_{-1}^{t_i} l_k(t) dt.
struct Rule {
  std::array<double, Q> t{}, w{}, bary{};
  Eigen::MatrixXd S;
  Rule() {
    using G = boost::math::quadrature::gauss<double, Q>;
    const auto& x = G::abscissa();
    const auto& wt = G::weights();
    int k = 0;
    for (int i = int(x.size()) - 1; i >= 0; --i) {
      t[k] = -x[i];
      w[k++] = wt[i];
    }
    for (std::size_t i = (Q % 2 ? 1 : 0); i < x.size(); ++i) {
      t[k] = x[i];
      w[k++] = wt[i];
    }
    for (int i = 0; i < Q; ++i) {
      double p = 1;
      for (int j = 0; j < Q; ++j)
        if (j != i) p *= (t[i] - t[j]);
      bary[i] = 1.0 / p;
    }
    // Legendre Vandermonde V(i,n) = P_n(t_i); integrals of P_n from -1.
    Eigen::MatrixXd V(Q, Q), I(Q, Q);
    for (int i = 0; i < Q; ++i) {
      std::vector<double> P(Q + 1);
      P[0] = 1;
      P[1] = t[i];
      for (int n = 1; n < Q; ++n) P[n + 1] = ((2 * n + 1) * t[i] * P[n] - n * P[n - 1]) / (n + 1);
      for (int n = 0; n < Q; ++n) {
        V(i, n) = P[n];
        I(i, n) = n == 0 ? t[i] + 1 : (P[n + 1] - P[n - 1]) / (2 * n + 1);
      }
    }
    S = I * V.inverse();
  }
};

const Rule& rule() {
  static const Rule r;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

Profile1D Profile1D::constant(double c) {
  Profile1D p;
  p.values = {c};
  return p;
}

Profile1D Profile1D::laminate(double a1, double a2, double fraction) {
  Profile1D p;
  p.breaks = {0.0, fraction, 1.0};
  p.values = {a1, a2};
  return p;
}

Profile1D Profile1D::smooth(std::function<double(double)> f, int panels) {
  Profile1D p;
  p.piecewise = false;
  p.fn = std::move(f);
  p.panels = panels;
  p.breaks.clear();
  for (int i = 0; i <= panels; ++i) p.breaks.push_back(double(i) / panels);
  p.values.clear();
  return p;
}

Profile1D Profile1D::from_spec(const CoefficientSpec& s) {
  if (s.type == "constant" || s.type == "diagonal") return constant(s.values.at(0));
  if (s.type == "laminate") return laminate(s.values.at(0), s.values.at(1), s.fraction);
  if (s.type == "checkerboard") {
    CoefficientSpec c = s;
    return smooth([c](double x) { return c.eval(1, {x, 0})[0]; });
  }
  throw ConfigurationError("no 1D oracle profile for coefficient type " + s.type);
}

double Profile1D::operator()(double x) const {
  x -= std::floor(x);
  if (!piecewise) return fn(x);
  auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  std::size_t seg = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - breaks.begin() - 1, 0), values.size() - 1);
  return values[seg];
}

// ---------------------------------------------------------------------------

PanelFunction::PanelFunction(std::vector<double> edges) : edges_(std::move(edges)) {
  vals_.assign((edges_.size() - 1) * Q, 0.0);
}

std::vector<double> PanelFunction::nodes() const {
  const Rule& r = rule();
  std::vector<double> x;
  x.reserve(vals_.size());
  for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
    const double c = 0.5 * (edges_[p] + edges_[p + 1]), hw = 0.5 * (edges_[p + 1] - edges_[p]);
    for (int i = 0; i < Q; ++i) x.push_back(c + hw * r.t[i]);
  }
  return x;
}

PanelFunction PanelFunction::sample(std::vector<double> edges, const std::function<double(double)>& f) {
  PanelFunction out(std::move(edges));
  auto x = out.nodes();
  for (std::size_t i = 0; i < x.size(); ++i) out.vals_[i] = f(x[i]);
  return out;
}

double PanelFunction::mean() const {
  const Rule& r = rule();
  double s = 0;
  for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
    const double hw = 0.5 * (edges_[p + 1] - edges_[p]);
    for (int i = 0; i < Q; ++i) s += hw * r.w[i] * vals_[p * Q + i];
  }
  return s / (edges_.back() - edges_.front());
}

PanelFunction PanelFunction::antiderivative() const {
  const Rule& r = rule();
  PanelFunction out(edges_);
  double base = 0;
  for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
    const double hw = 0.5 * (edges_[p + 1] - edges_[p]);
    double total = 0;
    for (int i = 0; i < Q; ++i) {
      double s = 0;
      for (int k = 0; k < Q; ++k) s += r.S(i, k) * vals_[p * Q + k];
      out.vals_[p * Q + i] = base + hw * s;
      total += r.w[i] * vals_[p * Q + i];
    }
    base += hw * total;
  }
  return out;
}

double PanelFunction::operator()(double x) const {
  const Rule& r = rule();
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  std::size_t p = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - edges_.begin() - 1, 0), edges_.size() - 2);
  const double c = 0.5 * (edges_[p] + edges_[p + 1]), hw = 0.5 * (edges_[p + 1] - edges_[p]);
  const double t = (x - c) / hw;
  double num = 0, den = 0;
  for (int i = 0; i < Q; ++i) {
    const double d = t - r.t[i];
    if (d == 0) return vals_[p * Q + i];
    const double w = r.bary[i] / d;
    num += w * vals_[p * Q + i];
    den += w;
  }
  return num / den;
}

double PanelFunction::at_end() const {
  const Rule& r = rule();
  const std::size_t p = edges_.size() - 2;
  double num = 0, den = 0;
  for (int i = 0; i < Q; ++i) {
    const double w = r.bary[i] / (1.0 - r.t[i]);
    num += w * vals_[p * Q + i];
    den += w;
  }
  return num / den;
}

PanelFunction& PanelFunction::operator+=(const PanelFunction& o) {
  for (std::size_t i = 0; i < vals_.size(); ++i) vals_[i] += o.vals_[i];
  return *this;
}
PanelFunction& PanelFunction::operator-=(const PanelFunction& o) {
  for (std::size_t i = 0; i < vals_.size(); ++i) vals_[i] -= o.vals_[i];
  return *this;
}
PanelFunction& PanelFunction::operator*=(double s) {
  for (double& v : vals_) v *= s;
  return *this;
}
PanelFunction PanelFunction::operator*(const PanelFunction& o) const {
  PanelFunction out = *this;
  for (std::size_t i = 0; i < vals_.size(); ++i) out.vals_[i] *= o.vals_[i];
  return out;
}
PanelFunction& PanelFunction::add_constant(double c) {
  for (double& v : vals_) v += c;
  return *this;
}
PanelFunction PanelFunction::map(const std::function<double(double, double)>& f) const {
  PanelFunction out = *this;
  auto x = nodes();
  for (std::size_t i = 0; i < vals_.size(); ++i) out.vals_[i] = f(x[i], vals_[i]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Panel values of a piecewise profile use the segment value directly so that
// nodes never straddle a jump.
PanelFunction profile_values(const Profile1D& p) {
  PanelFunction a(p.breaks);
  if (p.piecewise) {
    for (std::size_t s = 0; s < p.values.size(); ++s)
      for (int i = 0; i < Q; ++i) a.values()[s * Q + i] = p.values[s];
    return a;
  }
  return PanelFunction::sample(p.breaks, p.fn);
}

}  // namespace

double harmonic_mean(const Profile1D& p) {
  PanelFunction inv = profile_values(p).map([](double, double v) { return 1.0 / v; });
  return 1.0 / inv.mean();
}

Oracle1D correctors_1d(const Profile1D& p, int order) {
  if (order < 1 || order > 6) throw ConfigurationError("oracle order must lie in 1..6");
  Oracle1D o;
  o.profile = p;
  o.order = order;
  const PanelFunction a = profile_values(p);
  const PanelFunction ainv = a.map([](double, double v) { return 1.0 / v; });
  const double mean_ainv = ainv.mean();
  PanelFunction zero(p.breaks), one(p.breaks);
  one.add_constant(1.0);
  o.phi.push_back(one);
  o.dphi.push_back(zero);
  o.chi = {zero, zero};
  o.dchi = {zero, zero};

  for (int j = 1; j <= order; ++j) {
    const PanelFunction& dchi_prev = o.dchi[j - 1];
    // a (phi_j' + phi_{j-1}) = lambda_{j-1} - chi_{j-1}' with phi_j' of zero mean.
    const double lam = ((dchi_prev * ainv).mean() + o.phi[j - 1].mean()) / mean_ainv;
    o.lambda.push_back(lam);
    PanelFunction dphi = dchi_prev;
    dphi *= -1.0;
    dphi.add_constant(lam);
    dphi = dphi * ainv;
    dphi -= o.phi[j - 1];
    PanelFunction phi = dphi.antiderivative();
    phi.add_constant(-phi.mean());
    o.dphi.push_back(dphi);
    o.phi.push_back(phi);

    if (j >= 2) {
      // -chi_j'' = chi_{j-1}' + sum_p lambda_{j-1-p} phi_p
      PanelFunction r = dchi_prev;
      for (int pp = 1; pp <= j - 1; ++pp) {
        PanelFunction t = o.phi[pp];
        t *= o.lambda[j - 1 - pp];
        r += t;
      }
      PanelFunction dchi = r.antiderivative();
      dchi *= -1.0;
      dchi.add_constant(-dchi.mean());
      PanelFunction chi = dchi.antiderivative();
      chi.add_constant(-chi.mean());
      o.dchi.push_back(dchi);
      o.chi.push_back(chi);
    }
  }
  // Pointwise flux identity (the one-dimensional q vanishes).
  for (int j = 1; j <= order; ++j) {
    PanelFunction f = o.dphi[j];
    f += o.phi[j - 1];
    f = f * a;
    f.add_constant(-o.lambda[j - 1]);
    f += o.dchi[j - 1];
    for (double v : f.values()) o.flux_identity_residual = std::max(o.flux_identity_residual, std::abs(v));
  }
  return o;
}

double lambda2_square(const Oracle1D& o) {
  if (o.order < 3) throw ConfigurationError("lambda_2 needs an oracle of order >= 3");
  PanelFunction dw = o.dphi[2];
  dw -= o.phi[1] * o.dphi[1];
  return (dw * dw * profile_values(o.profile)).mean();
}

Field sample_on(const PanelFunction& f, const TorusGrid& g) {
  if (g.dim != 1 || g.period != 1.0) throw ConfigurationError("oracle fields live on the 1D unit cell");
  return Field::from_function(g, [&](const Vec& x) { return f(x[0]); });
}

TensorizedCorrectors oracle_tensors(const Oracle1D& o, const TorusGrid& cell) {
  TensorizedCorrectors t;
  t.dim = 1;
  t.order = o.order;
  t.directions = {Vec{1, 0}};
  for (int j = 0; j <= o.order; ++j) {
    t.phi.push_back({sample_on(o.phi[j], cell)});
    t.chi.push_back({sample_on(o.chi[j], cell)});
    t.sigma.push_back({});
    t.residual.push_back(0.0);
  }
  return t;
}

OracleComparison compare_with_spectral(const Oracle1D& o, const CorrectorHierarchy& h) {
  if (h.dim() != 1) throw ConfigurationError("oracle comparison needs a 1D hierarchy");
  if (h.e[0] < 0) throw ConfigurationError("oracle comparison expects the direction +1");
  OracleComparison c;
  const int L = std::min(o.order, h.order);
  const TorusGrid& g = h.grid();
  for (int j = 0; j <= L; ++j) {
    c.phi_gap.push_back((sample_on(o.phi[j], g) - h.phi[j]).norm_l2());
    c.chi_gap.push_back((sample_on(o.chi[j], g) - h.chi[j]).norm_l2());
  }
  for (int j = 0; j < L; ++j) {
    c.lambda_oracle.push_back(o.lambda[j]);
    c.lambda_spectral.push_back(h.lambda[j]);
    c.lambda_gap.push_back(std::abs(o.lambda[j] - h.lambda[j]));
  }
  return c;
}

std::string oracle_lambda_csv(const Oracle1D& o) {
  std::ostringstream os;
  os.precision(17);
  os << "j,lambda\n";
  for (std::size_t j = 0; j < o.lambda.size(); ++j) os << j << ',' << o.lambda[j] << '\n';
  return os.str();
}

}  // namespace tbhom
