// SPDX-License-Identifier: MIT
// Extended corrector hierarchy per direction, tensorization over directions,
// and reconstruction of the homogenized tensors.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tbhom/dispersion_model.hpp"
#include "tbhom/div_a_grad.hpp"

namespace tbhom {

struct CorrectorHierarchy {
  Vec e{1, 0};
  int order = 1;
  std::vector<Field> phi;      // 0..order, phi[0] = 1
  std::vector<Field> sigma;    // 0..order, skew components, sigma[0] = 0
  std::vector<Field> chi;      // 0..order, chi[0] = chi[1] = 0
  std::vector<Field> q;        // 0..order, q[0] unused (zero)
  std::vector<double> lambda;  // 0..order-1
  std::vector<Vec> atilde;     // 0..order-1, the vectors atilde_j e
  std::vector<SolveInfo> solves;

  const TorusGrid& grid() const { return phi.at(0).grid(); }
  int dim() const { return grid().dim; }
};

struct HierarchyOptions {
  SolverOptions solver{1e-13, 10000};
};

CorrectorHierarchy build_hierarchy(const CoefficientField& a, const Vec& e, int order,
                                   const HierarchyOptions& opt = {});

// sigma e for a skew field stored by independent components.
Field skew_times(const Field& sigma, const Vec& e);
// Row divergence (div sigma)_m = sum_n d_n sigma_mn.
Field skew_divergence(const Field& sigma);
// Full matrix entry (m, n) of a skew field.
Field skew_entry(const Field& sigma, int m, int n);

struct IdentityCheck {
  std::string name;
  double lhs = 0, rhs = 0;
  double abs_residual = 0, rel_residual = 0;
};

struct LambdaIdentityReport {
  std::vector<std::pair<int, double>> odd_lambdas;  // (j, |lambda_j|)
  double lambda0 = 0;
  bool has_lambda2 = false;
  double lambda2_def = 0, lambda2_square = 0, lambda2_rel_gap = 0;
  bool has_lambda4 = false;
  double lambda4_def = 0, lambda4_formula = 0, lambda4_rel_gap = 0;
  std::vector<IdentityCheck> pair_identities;    // (j, l) pairs, 1 <= j < l <= order
  std::vector<IdentityCheck> adjacent_identities;  // j = 1..order-1
};

LambdaIdentityReport verify_lambda_identities(const CorrectorHierarchy& h, const CoefficientField& a);

struct StructureReport {
  double max_skew_violation = 0;     // |sigma_mn + sigma_nm| (structural zero with packed storage)
  double max_flux_mismatch = 0;      // ||div sigma_j - q_j|| / max(||q_j||, 1e-3 lambda_0 |cell|^{1/2})
  double max_divergence = 0;         // ||div q_j|| / ||grad q_j||, same floor times 2 pi / period
  double max_q_mean = 0;
  double max_field_mean = 0;         // phi_j, sigma_j, chi_j for j >= 1
};
StructureReport check_structure(const CorrectorHierarchy& h);

// Symmetric-tensor correctors in the monomial basis of directions:
// phi_j^e = sum_m phi[j][m] e1^(j-m) e2^m (1D: phi[j][0] = phi_j^{+1}).
struct TensorizedCorrectors {
  int dim = 1;
  int order = 0;
  std::vector<std::vector<Field>> phi;    // degree j
  std::vector<std::vector<Field>> sigma;  // degree j (skew component fields)
  std::vector<std::vector<Field>> chi;    // degree j+1
  std::vector<double> residual;           // max relative fit residual per level
  std::vector<Vec> directions;

  const TorusGrid& grid() const { return phi.at(0).at(0).grid(); }
  Field phi_along(int j, const Vec& e) const;
  Field sigma_along(int j, const Vec& e) const;
  Field chi_along(int j, const Vec& e) const;
  // phi_j . grad^j v, spectral derivatives of v on its own grid; corrector
  // coefficients are provided already on v's grid (see periodize).
  static Field contract(const std::vector<Field>& coeffs, int degree, const Field& v);
};

// Builds per-direction hierarchies (sampled by `dirs`, default 2l+4 half-circle
// angles in 2D) and the fitted models. The hierarchies are returned if requested.
struct CorrectorSet {
  std::vector<CorrectorHierarchy> hierarchies;
  TensorizedCorrectors tensors;
  DispersionModel model;
};

std::vector<Vec> default_directions(int dim, int order);

CorrectorSet build_corrector_set(const CoefficientField& a, int order, std::vector<Vec> dirs = {},
                                 const HierarchyOptions& opt = {}, int workers = 1);

DispersionModel reconstruct_dispersion(const CoefficientField& a, int order, std::vector<Vec> dirs = {},
                                       const HierarchyOptions& opt = {}, int workers = 1);
TensorizedCorrectors tensorize_correctors(const CoefficientField& a, int order, std::vector<Vec> dirs = {},
                                          const HierarchyOptions& opt = {}, int workers = 1);
// Fitting stages, usable on hierarchies built elsewhere.
DispersionModel fit_dispersion(const std::vector<CorrectorHierarchy>& hs, double kmax_cap = 1.0);
TensorizedCorrectors fit_tensors(const std::vector<CorrectorHierarchy>& hs);

// Relative L2 gap between the tensor evaluated at e and a direct hierarchy build at e.
std::vector<double> holdout_errors(const CoefficientField& a, const TensorizedCorrectors& t, const Vec& e,
                                   const HierarchyOptions& opt = {});

// Cell fields sampled at x/eps on a box grid with cell_n * n_periods points:
// direct tiling when the grid sizes agree, otherwise spectral resampling first.
Field periodize(const Field& cell, const TorusGrid& box);

nlohmann::json hierarchy_to_json(const CorrectorHierarchy& h);
CorrectorHierarchy hierarchy_from_json(const nlohmann::json& j);
void save_hierarchy(const CorrectorHierarchy& h, const std::string& path);
CorrectorHierarchy load_hierarchy(const std::string& path);
std::string lambda_table_csv(const std::vector<CorrectorHierarchy>& hs);
std::string dispersion_table_csv(const DispersionModel& m);

}  // namespace tbhom
