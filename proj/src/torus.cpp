// SPDX-License-Identifier: MIT
#include "tbhom/torus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tbhom {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

TorusGrid::TorusGrid(int dim_, int n_, double period_) : dim(dim_), n(n_), period(period_) {
  if (dim != 1 && dim != 2) throw ConfigurationError("grid dimension must be 1 or 2");
  if (!is_power_of_two(n) || n < 8)
    throw ConfigurationError("points per axis must be a power of two >= 8, got " + std::to_string(n));
  if (!(period > 0)) throw ConfigurationError("grid period must be positive");
}

Vec TorusGrid::coord(std::size_t idx) const {
  if (dim == 1) return {h() * double(idx), 0.0};
  return {h() * double(idx / n), h() * double(idx % n)};
}

double TorusGrid::cell_volume() const { return dim == 1 ? period : period * period; }

int components_for(Rank r, int dim) {
  switch (r) {
    case Rank::scalar: return 1;
    case Rank::vector: return dim;
    case Rank::symmetric: return dim * (dim + 1) / 2;
    case Rank::skew: return dim * (dim - 1) / 2;
    case Rank::generic: break;
  }
  throw ConfigurationError("generic rank needs an explicit component count");
}

Field::Field(const TorusGrid& g, Rank rank)
    : grid_(g), rank_(rank), ncomp_(components_for(rank, g.dim)), data_(ncomp_ * g.nodes(), 0.0) {}

Field::Field(const TorusGrid& g, int components)
    : grid_(g), rank_(Rank::generic), ncomp_(components), data_(std::size_t(components) * g.nodes(), 0.0) {
  if (components == 1) rank_ = Rank::scalar;
}

Field::Field(const TorusGrid& g, Rank rank, std::vector<double> values)
    : grid_(g), rank_(rank), ncomp_(components_for(rank, g.dim)), data_(std::move(values)) {
  if (data_.size() != ncomp_ * g.nodes())
    throw ConfigurationError("field value count does not match grid and rank");
}

Field Field::from_function(const TorusGrid& g, const std::function<double(const Vec&)>& f) {
  Field out(g);
  for (std::size_t i = 0; i < g.nodes(); ++i) out.data_[i] = f(g.coord(i));
  return out;
}

Field Field::constant(const TorusGrid& g, double c) {
  Field out(g);
  std::fill(out.data_.begin(), out.data_.end(), c);
  return out;
}

Field Field::component(int c) const {
  Field out(grid_);
  auto src = comp(c);
  std::copy(src.begin(), src.end(), out.data_.begin());
  return out;
}

void Field::set_component(int c, const Field& scalar) {
  if (scalar.grid() != grid_ || scalar.components() != 1)
    throw ConfigurationError("set_component: scalar field on the same grid expected");
  std::copy(scalar.data_.begin(), scalar.data_.end(), data_.begin() + c * nodes());
}

void Field::check_compatible(const Field& o) const {
  if (o.grid_ != grid_ || o.ncomp_ != ncomp_) throw ConfigurationError("field shape mismatch");
}

Field& Field::operator+=(const Field& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
  return *this;
}

Field Field::operator*(const Field& o) const {
  if (ncomp_ != 1 || o.ncomp_ != 1 || o.grid_ != grid_)
    throw ConfigurationError("nodewise product needs two scalar fields on one grid");
  Field out(grid_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * o.data_[i];
  return out;
}

double Field::mean(int c) const {
  double s = 0;
  for (double v : comp(c)) s += v;
  return s / double(nodes());
}

double Field::norm_l2() const {
  double s = 0;
  for (double v : data_) s += v * v;
  return std::sqrt(s * std::pow(grid_.h(), grid_.dim));
}

double Field::max_abs() const {
  double m = 0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field tile(const Field& f, int n_periods) {
  if (n_periods < 1) throw ConfigurationError("tile: period count must be positive");
  const TorusGrid& g = f.grid();
  TorusGrid box(g.dim, g.n * n_periods, g.period * n_periods);
  Field out(box, f.components());
  const std::size_t N = box.n;
  for (int c = 0; c < f.components(); ++c) {
    auto src = f.comp(c);
    auto dst = out.comp(c);
    if (g.dim == 1) {
      for (std::size_t i = 0; i < N; ++i) dst[i] = src[i % g.n];
    } else {
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) dst[i * N + j] = src[(i % g.n) * g.n + (j % g.n)];
    }
  }
  if (f.rank() != Rank::generic) return Field(box, f.rank(), std::move(out.data()));
  return out;
}

std::array<double, 2> sym_eigen_range(int dim, const double* p) {
  if (dim == 1) return {p[0], p[0]};
  const double tr = 0.5 * (p[0] + p[2]);
  const double r = std::hypot(0.5 * (p[0] - p[2]), p[1]);
  return {tr - r, tr + r};
}

CoefficientField::CoefficientField(Field packed, double Lambda) : values_(std::move(packed)) {
  const int d = values_.grid().dim;
  if (values_.components() != d * (d + 1) / 2)
    throw ConfigurationError("coefficient field needs packed symmetric components");
  double maxnorm = 0;
  const int nc = values_.components();
  std::vector<double> node(nc);
  for (std::size_t i = 0; i < values_.nodes(); ++i) {
    for (int c = 0; c < nc; ++c) node[c] = values_(i, c);
    auto [lo, hi] = sym_eigen_range(d, node.data());
    if (!(lo >= 1.0 - 1e-12))
      throw ConfigurationError("coefficient field violates ellipticity bound 1 at node " + std::to_string(i));
    maxnorm = std::max(maxnorm, hi);
  }
  if (Lambda > 0) {
    if (maxnorm > Lambda * (1 + 1e-12))
      throw ConfigurationError("coefficient field exceeds the stated bound Lambda");
    Lambda_ = Lambda;
  } else {
    Lambda_ = maxnorm;
  }
}

double CoefficientField::entry(std::size_t node, int i, int j) const {
  if (dim() == 1) return values_(node, 0);
  if (i == j) return values_(node, i == 0 ? 0 : 2);
  return values_(node, 1);
}

std::array<double, 4> CoefficientField::mean_matrix() const {
  if (dim() == 1) return {values_.mean(0), 0, 0, 0};
  return {values_.mean(0), values_.mean(1), values_.mean(1), values_.mean(2)};
}

bool CoefficientField::is_diagonal(double tol) const {
  if (dim() == 1) return true;
  for (double v : values_.comp(1))
    if (std::abs(v) > tol) return false;
  return true;
}

bool CoefficientField::is_constant(double tol) const {
  for (int c = 0; c < values_.components(); ++c) {
    auto s = values_.comp(c);
    auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    if (*hi - *lo > tol) return false;
  }
  return true;
}

Field CoefficientField::apply(const Field& v) const {
  if (v.grid() != grid() || v.components() != dim())
    throw ConfigurationError("coefficient apply: vector field on the coefficient grid expected");
  Field out(grid(), Rank::vector);
  const std::size_t N = grid().nodes();
  if (dim() == 1) {
    for (std::size_t i = 0; i < N; ++i) out(i) = values_(i) * v(i);
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      const double a11 = values_(i, 0), a12 = values_(i, 1), a22 = values_(i, 2);
      const double v1 = v(i, 0), v2 = v(i, 1);
      out(i, 0) = a11 * v1 + a12 * v2;
      out(i, 1) = a12 * v1 + a22 * v2;
    }
  }
  return out;
}

Field CoefficientField::apply_const(const Vec& e) const {
  Field out(grid(), Rank::vector);
  const std::size_t N = grid().nodes();
  if (dim() == 1) {
    for (std::size_t i = 0; i < N; ++i) out(i) = values_(i) * e[0];
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      out(i, 0) = values_(i, 0) * e[0] + values_(i, 1) * e[1];
      out(i, 1) = values_(i, 1) * e[0] + values_(i, 2) * e[1];
    }
  }
  return out;
}

CoefficientField CoefficientField::tile(int n_periods) const {
  return CoefficientField(tbhom::tile(values_, n_periods), Lambda_);
}

}  // namespace tbhom
