// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "tbhom/poly.hpp"

namespace tbhom {

// Homogenized tensors as direction polynomials P_j(k) = a_j . k^(j+2), j < order.
struct DispersionModel {
  int dim = 1;
  int order = 1;  // truncation order l
  std::vector<HomogeneousPoly> P;
  std::vector<double> fit_residual;  // relative, per j
  double Gamma_bar = 0;              // max_j max_e |P_j(e)|
  double kmax = 1.0;
  double kmax_cap = 1.0;
  std::vector<Vec> directions;       // sample set used for fits, K_max, gamma and b

  // lambdas[j] = P_j(e) for every unit e (isotropic model), odd entries ignored.
  static DispersionModel isotropic(int dim, const std::vector<double>& lambdas, int order, double kmax_cap = 1.0);

  double P_at(int j, const Vec& k) const { return j < int(P.size()) ? P[j](k) : 0.0; }
  // Directions used for bounds over the sphere: the sample set plus a uniform set in 2D.
  std::vector<Vec> check_directions() const;
};

}  // namespace tbhom
