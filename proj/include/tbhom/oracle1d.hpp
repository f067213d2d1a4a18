// SPDX-License-Identifier: MIT
// One-dimensional reference hierarchy by successive integration on
// Gauss-Legendre panels. Exact for piecewise-constant profiles.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tbhom/coefficients.hpp"
#include "tbhom/correctors.hpp"

namespace tbhom {

struct Profile1D {
  bool piecewise = true;
  std::vector<double> breaks{0.0, 1.0};   // piecewise: segment edges on [0,1]
  std::vector<double> values{1.0};        // piecewise: one value per segment
  std::function<double(double)> fn;       // smooth profiles
  int panels = 64;                        // smooth profiles: panels per period

  static Profile1D constant(double c);
  static Profile1D laminate(double a1, double a2, double fraction = 0.5);
  static Profile1D smooth(std::function<double(double)> f, int panels = 64);
  static Profile1D from_spec(const CoefficientSpec& spec);
  double operator()(double x) const;
};

// Piecewise polynomial on [0,1] stored by values at 16 Gauss-Legendre nodes per panel.
class PanelFunction {
 public:
  static constexpr int kNodes = 16;
  PanelFunction() = default;
  explicit PanelFunction(std::vector<double> edges);
  static PanelFunction sample(std::vector<double> edges, const std::function<double(double)>& f);

  const std::vector<double>& edges() const { return edges_; }
  std::vector<double>& values() { return vals_; }
  const std::vector<double>& values() const { return vals_; }
  std::vector<double> nodes() const;

  double mean() const;
  // Antiderivative vanishing at 0 (continuous across panels).
  PanelFunction antiderivative() const;
  double operator()(double x) const;
  double at_end() const;  // limit at x = 1 of a continuous function

  PanelFunction& operator+=(const PanelFunction& o);
  PanelFunction& operator-=(const PanelFunction& o);
  PanelFunction& operator*=(double s);
  PanelFunction operator*(const PanelFunction& o) const;
  PanelFunction& add_constant(double c);
  PanelFunction map(const std::function<double(double, double)>& f) const;  // f(x, value)

 private:
  std::vector<double> edges_;
  std::vector<double> vals_;
};

struct Oracle1D {
  Profile1D profile;
  int order = 0;
  std::vector<PanelFunction> phi, dphi;  // 0..order
  std::vector<PanelFunction> chi, dchi;  // 0..order
  std::vector<double> lambda;            // 0..order-1
  double flux_identity_residual = 0;     // max |a(phi_j' + phi_{j-1}) - lambda_{j-1} + chi_{j-1}'|
};

double harmonic_mean(const Profile1D& p);
Oracle1D correctors_1d(const Profile1D& p, int order);
// lambda_2 as mean(a ((phi_2 - phi_1^2/2)')^2) from oracle fields.
double lambda2_square(const Oracle1D& o);
// Oracle field sampled at the nodes of a 1D grid.
Field sample_on(const PanelFunction& f, const TorusGrid& g);
// Oracle phi_j, chi_j sampled on `cell` in the tensorized layout (1D, direction +1).
TensorizedCorrectors oracle_tensors(const Oracle1D& o, const TorusGrid& cell);

struct OracleComparison {
  std::vector<double> phi_gap;     // RMS gap per level j = 0..order
  std::vector<double> chi_gap;
  std::vector<double> lambda_gap;  // absolute
  std::vector<double> lambda_oracle, lambda_spectral;
};
OracleComparison compare_with_spectral(const Oracle1D& o, const CorrectorHierarchy& h);
std::string oracle_lambda_csv(const Oracle1D& o);

}  // namespace tbhom
