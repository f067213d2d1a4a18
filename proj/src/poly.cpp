// SPDX-License-Identifier: MIT
#include "tbhom/poly.hpp"

#include <cmath>
#include <numbers>

namespace tbhom {

HomogeneousPoly HomogeneousPoly::zero(int dim, int degree) {
  return {dim, degree, std::vector<double>(dim == 1 ? 1 : degree + 1, 0.0)};
}

std::vector<double> monomials(int dim, int degree, const Vec& e) {
  if (dim == 1) return {std::pow(e[0], degree)};
  std::vector<double> m(degree + 1);
  for (int i = 0; i <= degree; ++i) m[i] = std::pow(e[0], degree - i) * std::pow(e[1], i);
  return m;
}

double HomogeneousPoly::operator()(const Vec& k) const {
  auto m = monomials(dim, degree, k);
  double s = 0;
  for (std::size_t i = 0; i < m.size(); ++i) s += coeffs[i] * m[i];
  return s;
}

double HomogeneousPoly::max_abs_on(const std::vector<Vec>& dirs) const {
  double m = 0;
  for (const Vec& e : dirs) m = std::max(m, std::abs((*this)(e)));
  return m;
}

DirectionFit::DirectionFit(int dim, int degree, const std::vector<Vec>& dirs)
    : dim_(dim), degree_(degree), dirs_(dirs) {
  const int nt = dim == 1 ? 1 : degree + 1;
  if (int(dirs.size()) < nt)
    throw ConfigurationError("direction sample too small for a degree-" + std::to_string(degree) + " fit");
  Eigen::MatrixXd V(dirs.size(), nt);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    auto m = monomials(dim, degree, dirs[i]);
    for (int c = 0; c < nt; ++c) V(i, c) = m[c];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(V);
  cod.setThreshold(1e-10);
  if (cod.rank() < nt) throw ConfigurationError("rank-deficient direction set for a degree-" + std::to_string(degree) + " fit");
  pinv_ = cod.pseudoInverse();
}

std::vector<double> DirectionFit::coefficients(const std::vector<double>& samples) const {
  Eigen::Map<const Eigen::VectorXd> y(samples.data(), samples.size());
  Eigen::VectorXd c = pinv_ * y;
  return {c.data(), c.data() + c.size()};
}

double DirectionFit::residual(const std::vector<double>& coeffs, const std::vector<double>& samples) const {
  double r = 0;
  HomogeneousPoly p{dim_, degree_, coeffs};
  for (std::size_t i = 0; i < dirs_.size(); ++i) r = std::max(r, std::abs(p(dirs_[i]) - samples[i]));
  return r;
}

std::vector<Vec> half_circle_directions(int count, double offset) {
  std::vector<Vec> d(count);
  for (int i = 0; i < count; ++i) {
    const double th = std::numbers::pi * (i + offset) / count;
    d[i] = {std::cos(th), std::sin(th)};
  }
  return d;
}

}  // namespace tbhom
