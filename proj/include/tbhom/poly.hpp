// SPDX-License-Identifier: MIT
// Homogeneous polynomials in a direction e (monomial basis e1^(deg-m) e2^m).
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tbhom/torus.hpp"

namespace tbhom {

struct HomogeneousPoly {
  int dim = 1;
  int degree = 0;
  std::vector<double> coeffs;  // d=1: one entry; d=2: degree+1 entries

  static HomogeneousPoly zero(int dim, int degree);
  double operator()(const Vec& k) const;
  // |k|^{-degree} P(k) maximized in absolute value over the directions.
  double max_abs_on(const std::vector<Vec>& dirs) const;
};

// Monomial values e1^(deg-m) e2^m, m = 0..deg (or just e1^deg in 1D).
std::vector<double> monomials(int dim, int degree, const Vec& e);

// Least-squares map from direction samples to monomial coefficients.
class DirectionFit {
 public:
  DirectionFit(int dim, int degree, const std::vector<Vec>& dirs);
  int terms() const { return int(pinv_.rows()); }
  const Eigen::MatrixXd& pinv() const { return pinv_; }
  // Coefficients from samples (one value per direction).
  std::vector<double> coefficients(const std::vector<double>& samples) const;
  // Max over directions of |fit - sample| / scale.
  double residual(const std::vector<double>& coeffs, const std::vector<double>& samples) const;

 private:
  int dim_, degree_;
  std::vector<Vec> dirs_;
  Eigen::MatrixXd pinv_;
};

std::vector<Vec> half_circle_directions(int count, double offset = 0.0);

}  // namespace tbhom
