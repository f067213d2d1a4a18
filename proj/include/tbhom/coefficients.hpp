// SPDX-License-Identifier: MIT
// Built-in coefficient catalog and JSON loader.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tbhom/torus.hpp"

namespace tbhom {

// Description of a periodic coefficient field on the unit cell.
//   {"type": "constant", "value": 2.0 | [[a11, a12], [a12, a22]]}
//   {"type": "diagonal", "values": [2, 3]}
//   {"type": "laminate", "values": [1, 4], "fraction": 0.5, "axis": 0}
//   {"type": "checkerboard", "mean": 2, "amplitude": 1}
//   {"type": "grid", "dim": 1, "n": 64, "values": [...]}   (packed, component-major)
//   {"type": "grid", "dim": 1, "n": 64, "path": "a.txt"}
struct CoefficientSpec {
  std::string type = "constant";
  std::vector<double> values{1.0};  // constant: packed entries; diagonal/laminate: phase values
  double fraction = 0.5;
  int axis = 0;
  double mean = 2.0;
  double amplitude = 1.0;
  int grid_dim = 1;
  int grid_n = 0;
  std::optional<double> Lambda;

  static CoefficientSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  bool is_analytic() const { return type != "grid"; }
  // Packed entries at cell point y (analytic types only).
  std::array<double, 3> eval(int dim, const Vec& y) const;
  // Samples at the nodes of `g` (cell period 1). Raw grids must match g.n exactly.
  CoefficientField sample(const TorusGrid& g) const;
};

CoefficientField make_coefficient(const nlohmann::json& j, const TorusGrid& g);
CoefficientField constant_coefficient(const TorusGrid& g, double value);
CoefficientField laminate_coefficient(const TorusGrid& g, double a_first, double a_second, double fraction = 0.5);
CoefficientField checkerboard_coefficient(const TorusGrid& g, double mean = 2.0, double amplitude = 1.0);

}  // namespace tbhom
