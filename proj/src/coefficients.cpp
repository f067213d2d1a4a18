// SPDX-License-Identifier: MIT
#include "tbhom/coefficients.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace tbhom {

using nlohmann::json;

CoefficientSpec CoefficientSpec::from_json(const json& j) {
  CoefficientSpec s;
  if (!j.is_object() || !j.contains("type")) throw ConfigurationError("coefficient spec needs a \"type\"");
  s.type = j.at("type").get<std::string>();
  if (j.contains("Lambda")) s.Lambda = j.at("Lambda").get<double>();
  if (s.type == "constant") {
    const auto& v = j.at("value");
    if (v.is_number()) {
      s.values = {v.get<double>()};
    } else {
      auto m = v.get<std::vector<std::vector<double>>>();
      if (m.size() == 1) s.values = {m[0].at(0)};
      else if (m.size() == 2) s.values = {m[0].at(0), m[0].at(1), m[1].at(1)};
      else throw ConfigurationError("constant coefficient matrix must be 1x1 or 2x2");
      if (m.size() == 2 && m[0][1] != m[1][0]) throw ConfigurationError("constant coefficient matrix must be symmetric");
    }
  } else if (s.type == "diagonal") {
    s.values = j.at("values").get<std::vector<double>>();
  } else if (s.type == "laminate") {
    s.values = j.at("values").get<std::vector<double>>();
    if (s.values.size() != 2) throw ConfigurationError("laminate needs two phase values");
    s.fraction = j.value("fraction", 0.5);
    s.axis = j.value("axis", 0);
    if (!(s.fraction > 0 && s.fraction < 1)) throw ConfigurationError("laminate fraction must lie in (0,1)");
  } else if (s.type == "checkerboard") {
    s.mean = j.value("mean", 2.0);
    s.amplitude = j.value("amplitude", 1.0);
  } else if (s.type == "grid") {
    s.grid_dim = j.at("dim").get<int>();
    s.grid_n = j.at("n").get<int>();
    if (j.contains("values")) {
      s.values = j.at("values").get<std::vector<double>>();
    } else {
      std::ifstream in(j.at("path").get<std::string>());
      if (!in) throw ConfigurationError("cannot open coefficient grid file");
      s.values.clear();
      double x;
      while (in >> x) s.values.push_back(x);
    }
  } else {
    throw ConfigurationError("unknown coefficient type \"" + s.type + "\"");
  }
  return s;
}

json CoefficientSpec::to_json() const {
  json j;
  j["type"] = type;
  if (type == "constant") {
    if (values.size() == 1) j["value"] = values[0];
    else j["value"] = {{values[0], values[1]}, {values[1], values[2]}};
  } else if (type == "diagonal") {
    j["values"] = values;
  } else if (type == "laminate") {
    j["values"] = values;
    j["fraction"] = fraction;
    j["axis"] = axis;
  } else if (type == "checkerboard") {
    j["mean"] = mean;
    j["amplitude"] = amplitude;
  } else {
    j["dim"] = grid_dim;
    j["n"] = grid_n;
    j["values"] = values;
  }
  if (Lambda) j["Lambda"] = *Lambda;
  return j;
}

std::array<double, 3> CoefficientSpec::eval(int dim, const Vec& y) const {
  auto scalar = [&](double s) -> std::array<double, 3> {
    return dim == 1 ? std::array<double, 3>{s, 0, 0} : std::array<double, 3>{s, 0, s};
  };
  const double tau = 2 * std::numbers::pi;
  if (type == "constant") {
    if (values.size() == 1) return scalar(values[0]);
    if (dim == 1) throw ConfigurationError("2x2 constant coefficient on a 1D grid");
    return {values[0], values[1], values[2]};
  }
  if (type == "diagonal") {
    if (int(values.size()) != dim) throw ConfigurationError("diagonal coefficient needs one value per axis");
    return dim == 1 ? std::array<double, 3>{values[0], 0, 0} : std::array<double, 3>{values[0], 0, values[1]};
  }
  if (type == "laminate") {
    if (axis >= dim) throw ConfigurationError("laminate axis exceeds grid dimension");
    double t = y[axis] - std::floor(y[axis]);
    return scalar(t < fraction ? values[0] : values[1]);
  }
  if (type == "checkerboard") {
    if (dim == 1) return scalar(mean + amplitude * std::sin(tau * y[0]));
    return scalar(mean + amplitude * std::sin(tau * y[0]) * std::sin(tau * y[1]));
  }
  throw ConfigurationError("raw grid coefficients have no analytic evaluator");
}

CoefficientField CoefficientSpec::sample(const TorusGrid& g) const {
  if (g.period != 1.0) throw ConfigurationError("coefficients are sampled on the unit cell");
  const int nc = g.dim * (g.dim + 1) / 2;
  Field packed(g, Rank::symmetric);
  if (type == "grid") {
    if (grid_dim != g.dim || grid_n != g.n)
      throw ConfigurationError("raw coefficient grid does not match the requested grid");
    if (values.size() != std::size_t(nc) * g.nodes())
      throw ConfigurationError("raw coefficient grid has the wrong number of entries");
    packed.data() = values;
  } else {
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      auto v = eval(g.dim, g.coord(i));
      for (int c = 0; c < nc; ++c) packed(i, c) = v[c];
    }
  }
  return CoefficientField(std::move(packed), Lambda.value_or(0.0));
}

CoefficientField make_coefficient(const json& j, const TorusGrid& g) { return CoefficientSpec::from_json(j).sample(g); }

CoefficientField constant_coefficient(const TorusGrid& g, double value) {
  CoefficientSpec s;
  s.values = {value};
  return s.sample(g);
}

CoefficientField laminate_coefficient(const TorusGrid& g, double a1, double a2, double fraction) {
  CoefficientSpec s;
  s.type = "laminate";
  s.values = {a1, a2};
  s.fraction = fraction;
  return s.sample(g);
}

CoefficientField checkerboard_coefficient(const TorusGrid& g, double mean, double amplitude) {
  CoefficientSpec s;
  s.type = "checkerboard";
  s.mean = mean;
  s.amplitude = amplitude;
  return s.sample(g);
}

}  // namespace tbhom
