// SPDX-License-Identifier: MIT
// Variable-coefficient elliptic operator -div(a grad .) on the torus.
#pragma once

#include "tbhom/spectral.hpp"

namespace tbhom {

struct SolverOptions {
  double rel_tol = 1e-10;
  int max_iter = 10000;
};

struct SolveInfo {
  int iterations = 0;
  double residual = 0;  // relative, recomputed from the returned solution
};

// -P div P(a grad u): symmetric, positive on projected zero-mean fields.
Field apply_div_a_grad(const CoefficientField& a, const Field& u);

// Solves -div(a grad phi) = div(flux) with zero cell mean.
Field solve_div_a_grad(const CoefficientField& a, const Field& flux, const SolverOptions& opt = {},
                       SolveInfo* info = nullptr);

// Solves -div(a grad u) = rhs for a zero-mean scalar rhs.
Field solve_elliptic(const CoefficientField& a, const Field& rhs, const SolverOptions& opt = {},
                     SolveInfo* info = nullptr);

}  // namespace tbhom
