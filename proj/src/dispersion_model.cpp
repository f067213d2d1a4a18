// SPDX-License-Identifier: MIT
#include "tbhom/dispersion_model.hpp"

#include <cmath>

#include "tbhom/dispersion.hpp"

namespace tbhom {

namespace {

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

DispersionModel DispersionModel::isotropic(int dim, const std::vector<double>& lambdas, int order, double kmax_cap) {
  if (int(lambdas.size()) < order) throw ConfigurationError("isotropic model needs lambda_0..lambda_{l-1}");
  DispersionModel D;
  D.dim = dim;
  D.order = order;
  D.kmax_cap = kmax_cap;
  D.directions = dim == 1 ? std::vector<Vec>{{1, 0}} : half_circle_directions(2 * order + 4);
  for (int j = 0; j < order; ++j) {
    HomogeneousPoly p = HomogeneousPoly::zero(dim, j + 2);
    if (j % 2 == 0) {
      if (dim == 1) {
        p.coeffs[0] = lambdas[j];
      } else {
        const int n = (j + 2) / 2;  // lambda |e|^{2n}
        for (int i = 0; i <= n; ++i) p.coeffs[2 * i] = lambdas[j] * binom(n, i);
      }
    }
    D.P.push_back(p);
    D.fit_residual.push_back(0);
  }
  for (const auto& p : D.P) D.Gamma_bar = std::max(D.Gamma_bar, p.max_abs_on(D.check_directions()));
  D.kmax = compute_kmax(D, kmax_cap);
  return D;
}

std::vector<Vec> DispersionModel::check_directions() const {
  if (dim == 1) return {Vec{1, 0}};
  std::vector<Vec> d = directions;
  auto extra = half_circle_directions(64);
  d.insert(d.end(), extra.begin(), extra.end());
  return d;
}

}  // namespace tbhom
