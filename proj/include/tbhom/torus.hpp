// SPDX-License-Identifier: MIT
// Grids and sampled fields on the d-torus, d in {1, 2}.
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tbhom/errors.hpp"

namespace tbhom {

using Vec = std::array<double, 2>;  // second entry unused when dim == 1

struct TorusGrid {
  int dim = 1;
  int n = 64;            // points per axis, power of two
  double period = 1.0;

  TorusGrid() = default;
  TorusGrid(int dim, int n, double period = 1.0);

  double h() const { return period / n; }
  std::size_t nodes() const { return dim == 1 ? std::size_t(n) : std::size_t(n) * n; }
  // Physical coordinates of node `idx` (row-major, axis 0 slowest).
  Vec coord(std::size_t idx) const;
  double cell_volume() const;
  bool operator==(const TorusGrid& o) const {
    return dim == o.dim && n == o.n && period == o.period;
  }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

bool is_power_of_two(int n);

enum class Rank { scalar, vector, symmetric, skew, generic };

int components_for(Rank r, int dim);

// Real samples, component-major storage.
class Field {
 public:
  Field() = default;
  Field(const TorusGrid& g, Rank rank = Rank::scalar);
  Field(const TorusGrid& g, int components);
  Field(const TorusGrid& g, Rank rank, std::vector<double> values);

  static Field from_function(const TorusGrid& g, const std::function<double(const Vec&)>& f);
  static Field constant(const TorusGrid& g, double c);

  const TorusGrid& grid() const { return grid_; }
  Rank rank() const { return rank_; }
  int components() const { return ncomp_; }
  std::size_t nodes() const { return grid_.nodes(); }

  std::span<double> comp(int c) { return {data_.data() + c * nodes(), nodes()}; }
  std::span<const double> comp(int c) const { return {data_.data() + c * nodes(), nodes()}; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  double& operator()(std::size_t node, int c = 0) { return data_[c * nodes() + node]; }
  double operator()(std::size_t node, int c = 0) const { return data_[c * nodes() + node]; }

  // Scalar field holding component c.
  Field component(int c) const;
  void set_component(int c, const Field& scalar);

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);
  Field& axpy(double s, const Field& o);  // this += s*o

  // Nodewise product of two scalar fields (no projection).
  Field operator*(const Field& o) const;

  double mean(int c = 0) const;
  double norm_l2() const;  // sqrt(h^d sum |u|^2) over all components
  double max_abs() const;

 private:
  void check_compatible(const Field& o) const;
  TorusGrid grid_;
  Rank rank_ = Rank::scalar;
  int ncomp_ = 1;
  std::vector<double> data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

// Symmetric matrix field in packed upper-triangle order
// (d=1: a11; d=2: a11, a12, a22), checked for ellipticity >= 1 and norm <= Lambda.
class CoefficientField {
 public:
  CoefficientField() = default;
  // Lambda <= 0 means: use the max nodal spectral norm.
  CoefficientField(Field packed, double Lambda = 0.0);

  const TorusGrid& grid() const { return values_.grid(); }
  int dim() const { return grid().dim; }
  const Field& packed() const { return values_; }
  double Lambda() const { return Lambda_; }
  double entry(std::size_t node, int i, int j) const;
  // Cell mean matrix, row-major d x d.
  std::array<double, 4> mean_matrix() const;
  bool is_diagonal(double tol = 0.0) const;
  bool is_constant(double tol = 0.0) const;

  // (a v) for a vector field v; returns a vector field.
  Field apply(const Field& v) const;
  // (a e) for a constant vector e.
  Field apply_const(const Vec& e) const;

  // Periodic tiling of the cell field onto a box with n_periods cells per axis.
  CoefficientField tile(int n_periods) const;

 private:
  Field values_;
  double Lambda_ = 1.0;
};

// Periodic tiling of a cell field onto a box of n_periods cells per axis.
Field tile(const Field& f, int n_periods);

// Minimal and maximal eigenvalue of a symmetric 2x2 (or 1x1) packed matrix.
std::array<double, 2> sym_eigen_range(int dim, const double* packed);

}  // namespace tbhom
