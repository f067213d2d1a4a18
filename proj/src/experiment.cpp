// SPDX-License-Identifier: MIT
#include "tbhom/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace tbhom {

using nlohmann::json;

namespace {

const std::set<std::string> kKinds{"correctors", "dispersion", "wave-compare", "elliptic-rate", "transport",
                                   "source-term"};

const std::map<std::string, std::map<std::string, double>> kThresholds{
    {"correctors",
     {{"odd_lambda", 1e-8}, {"lambda2_gap", 1e-8}, {"lambda4_gap", 1e-7}, {"flux_mismatch", 1e-8},
      {"divergence", 1e-8}, {"q_mean", 1e-10}}},
    {"dispersion", {{"eigendefect", 1e-8}, {"boussinesq_identity", 1e-10}, {"psd", -1e-12}}},
    {"wave-compare", {{"min_order", 0.9}, {"energy_drift", 1e-6}}},
    {"elliptic-rate", {{"min_order", 1.8}}},
    {"transport", {{"min_ratio_fraction", 0.8}}},
    {"source-term", {{"budget_factor", 3.0}, {"min_order", 0.9}}},
};

template <class T>
void take(const json& j, const char* key, T& out, std::set<std::string>& used) {
  if (!j.contains(key)) return;
  used.insert(key);
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text, RunResult& r) {
  std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
  if (!f) throw ConfigurationError("cannot write " + name + " in " + dir);
  f << text;
  r.files.push_back(name);
}

std::string header(const ExperimentConfig& c) { return "config_hash=" + c.hash() + " kind=" + c.kind; }

Check check_le(const std::string& name, double value, double threshold, std::string detail = {}) {
  return {name, value <= threshold, value, threshold, std::move(detail)};
}
Check check_ge(const std::string& name, double value, double threshold, std::string detail = {}) {
  return {name, value >= threshold, value, threshold, std::move(detail)};
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

CoefficientField box_coefficient_for(const ExperimentConfig& c, const BoxGrid& box) {
  return box_coefficient(c.coefficient.sample(TorusGrid(c.dim, box.points_per_period())), box);
}

// Rescaled Gaussian bump data for the wave comparisons.
Field wave_data(const ExperimentConfig& c, const BoxGrid& box) { return gaussian_bump(box, c.data_width); }

Field source_profile(const ExperimentConfig& c, const BoxGrid& box) {
  const double k = 2 * std::numbers::pi * c.source_mode / box.L;
  return Field::from_function(box.torus(), [&](const Vec& x) { return std::sin(k * x[0]); });
}

double rhs_function(const Vec& x, int dim, double L) {
  const double t = 2 * std::numbers::pi / L;
  double s = std::sin(t * x[0]) + 0.5 * std::cos(2 * t * x[0]);
  if (dim == 2) s *= std::cos(t * x[1]) + 0.3;
  return s;
}

// Band-limited random test field from the seed: a few low modes with normal amplitudes.
Field random_field(const TorusGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const double t = 2 * std::numbers::pi / g.period;
  struct Term {
    int k1, k2;
    double c, s;
  };
  std::vector<Term> terms;
  for (int k1 = 0; k1 <= 2; ++k1)
    for (int k2 = (g.dim == 2 ? -2 : 0); k2 <= (g.dim == 2 ? 2 : 0); ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      terms.push_back({k1, k2, nd(rng), nd(rng)});
    }
  return Field::from_function(g, [&](const Vec& x) {
    double v = 0;
    for (const auto& tm : terms) {
      const double ph = t * (tm.k1 * x[0] + tm.k2 * (g.dim == 2 ? x[1] : 0.0));
      v += tm.c * std::cos(ph) + tm.s * std::sin(ph);
    }
    return v;
  });
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigurationError("override '" + assignment + "' is not KEY=VALUE");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigurationError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigurationError("config must be a JSON object");
  ExperimentConfig c;
  std::set<std::string> used;
  take(j, "kind", c.kind, used);
  if (!kKinds.count(c.kind)) throw ConfigurationError("unknown or missing experiment kind '" + c.kind + "'");
  if (j.contains("coefficient")) {
    used.insert("coefficient");
    c.coefficient = CoefficientSpec::from_json(j.at("coefficient"));
  }
  take(j, "dim", c.dim, used);
  take(j, "cell_n", c.cell_n, used);
  take(j, "order", c.order, used);
  take(j, "eps", c.eps, used);
  take(j, "T", c.T, used);
  take(j, "time_scaling", c.time_scaling, used);
  take(j, "tau", c.tau, used);
  take(j, "directions", c.directions, used);
  take(j, "solver_tol", c.solver_tol, used);
  take(j, "max_iter", c.max_iter, used);
  take(j, "L", c.L, used);
  take(j, "points_per_period", c.points_per_period, used);
  take(j, "scheme", c.scheme, used);
  take(j, "snapshot_interval", c.snapshot_interval, used);
  take(j, "data_width", c.data_width, used);
  take(j, "kmax_cap", c.kmax_cap, used);
  take(j, "approximation", c.approximation, used);
  take(j, "energy", c.energy, used);
  take(j, "reg_gamma", c.reg_gamma, used);
  take(j, "prepared", c.prepared, used);
  take(j, "boussinesq", c.boussinesq, used);
  take(j, "transport_gamma", c.transport_gamma, used);
  take(j, "source_mode", c.source_mode, used);
  take(j, "alpha1", c.alpha1, used);
  take(j, "alpha2", c.alpha2, used);
  take(j, "prefactor", c.prefactor, used);
  take(j, "kappa", c.kappa, used);
  take(j, "seed", c.seed, used);
  c.thresholds = kThresholds.at(c.kind);
  if (j.contains("thresholds")) {
    used.insert("thresholds");
    for (const auto& [k, v] : j.at("thresholds").items()) {
      if (!c.thresholds.count(k)) throw ConfigurationError("unknown threshold '" + k + "' for kind " + c.kind);
      if (!v.is_number()) throw ConfigurationError("threshold '" + k + "' must be a number");
      c.thresholds[k] = v.get<double>();
    }
  }
  for (const auto& [k, v] : j.items())
    if (!used.count(k)) throw ConfigurationError("unknown config key '" + k + "'");
  if (c.coefficient.type == "grid") c.dim = c.coefficient.grid_dim;
  // Sweeps compare against a fine solver resolving one period with points_per_period
  // nodes; correctors on the same grid share its discrete cell problem.
  if (!j.contains("cell_n") && c.kind != "correctors" && c.kind != "dispersion") c.cell_n = c.points_per_period;
  c.raw = j;
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ConfigurationError("cannot open config " + path);
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigurationError("config " + path + ": " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(j, o);
  return from_json(j);
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(raw.dump())); }

double ExperimentConfig::threshold(const std::string& key) const {
  auto it = thresholds.find(key);
  if (it == thresholds.end()) throw ConfigurationError("no threshold '" + key + "' for kind " + kind);
  return it->second;
}

FineScheme ExperimentConfig::fine_scheme() const {
  if (scheme.empty()) return kind == "source-term" ? FineScheme::spectral : FineScheme::finite_difference;
  return fine_scheme_from_string(scheme);
}

std::vector<Vec> ExperimentConfig::direction_set() const {
  if (dim == 2 && directions > 0) return half_circle_directions(directions);
  return {};
}

double ExperimentConfig::box_side() const {
  if (L > 0) return L;
  if (kind == "elliptic-rate") return 1.0;
  return 0.0;  // transport: chosen from the guard
}

double ExperimentConfig::final_time(double e) const { return time_scaling == "inverse_eps" ? tau / e : T; }

Diagnostics validate(const ExperimentConfig& c) {
  Diagnostics d;
  auto err = [&](std::string s) { d.errors.push_back(std::move(s)); };
  auto warn = [&](std::string s) { d.warnings.push_back(std::move(s)); };
  if (c.dim != 1 && c.dim != 2) err("dim must be 1 or 2");
  if (!is_power_of_two(c.cell_n) || c.cell_n < 8) err("cell_n must be a power of two >= 8");
  if (!is_power_of_two(c.points_per_period) || c.points_per_period < 16)
    err("points_per_period must be a power of two >= 16");
  if (c.order < 1) err("order must be >= 1");
  if (!(c.kmax_cap > 0)) err("kmax_cap must be positive");
  else if (c.kmax_cap > std::numbers::pi) warn("kmax_cap exceeds pi, beyond the first Brillouin zone");
  if (c.solver_tol <= 0 || c.max_iter <= 0) err("solver_tol and max_iter must be positive");
  if (c.time_scaling != "fixed" && c.time_scaling != "inverse_eps") err("time_scaling must be fixed or inverse_eps");
  if (!c.scheme.empty() && c.scheme != "fd" && c.scheme != "spectral" && c.scheme != "finite_difference")
    err("scheme must be fd or spectral");
  static const std::set<std::string> approx{"homogenized", "taylor-bloch", "regularized", "boussinesq"};
  if (!approx.count(c.approximation)) err("unknown approximation '" + c.approximation + "'");
  if (c.kind == "wave-compare" && c.energy && c.approximation != "homogenized" && c.approximation != "taylor-bloch")
    warn("energy norm comparison uses the displayed approximation's velocity");
  const bool dressed = c.kind == "source-term" || (c.kind == "wave-compare" && c.approximation == "taylor-bloch");
  if (dressed && c.cell_n != c.points_per_period)
    warn("cell_n differs from points_per_period: dressed gradients then see a different discrete corrector "
         "than the fine solver, an eps-independent mismatch for rough coefficients");
  const bool sweep = c.kind != "correctors" && c.kind != "dispersion";
  if (sweep) {
    if (c.eps.empty()) err("eps list is required for kind " + c.kind);
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
      if (!(c.eps[i] > 0)) err("eps values must be positive");
      if (i > 0 && !(c.eps[i] < c.eps[i - 1])) err("eps list must be strictly decreasing");
    }
  }
  if ((c.kind == "wave-compare" || c.kind == "source-term") && !(c.L > 0)) err("L is required for kind " + c.kind);
  if (!d.ok()) return d;

  if (sweep) {
    const double L = c.box_side();
    for (double e : c.eps) {
      if (L > 0) {
        const double r = L / e;
        if (std::abs(r - std::round(r)) > 1e-9 * r) err("eps = " + fmt(e) + " does not divide L = " + fmt(L));
        else if (!is_power_of_two(int(std::lround(r)) * c.points_per_period))
          err("grid for eps = " + fmt(e) + " is not a power of two");
      }
      if (c.kind == "wave-compare" || c.kind == "source-term") {
        const double T = c.final_time(e);
        const double n = T / c.snapshot_interval;
        if (!(c.snapshot_interval > 0) || std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
          err("T = " + fmt(T) + " is not a multiple of snapshot_interval");
      }
    }
    if (c.kind == "transport" && c.order < 2) err("transport needs order >= 2");
  }
  if (!d.ok()) return d;

  // Coefficient sanity and the guard/CFL checks need the sampled field and the model.
  CoefficientField a_cell;
  try {
    a_cell = c.coefficient.sample(TorusGrid(c.dim, c.cell_n));
  } catch (const Error& e) {
    err(std::string("coefficient: ") + e.what());
    return d;
  }
  if (c.fine_scheme() == FineScheme::finite_difference && sweep && c.kind != "elliptic-rate" &&
      !a_cell.is_diagonal(1e-14))
    err("finite-difference scheme needs a diagonal coefficient; use scheme=spectral");
  if (c.kind == "wave-compare" || c.kind == "source-term") {
    DispersionModel D;
    try {
      D = reconstruct_dispersion(a_cell, c.order, c.direction_set(), {SolverOptions{c.solver_tol, c.max_iter}});
    } catch (const Error& e) {
      err(std::string("dispersion model: ") + e.what());
      return d;
    }
    for (double e : c.eps) {
      const BoxGrid box = BoxGrid::resolved(c.dim, c.L, e, c.points_per_period);
      const double T = c.final_time(e);
      const WrapGuard g = wrap_guard(wave_data(c, box), box, T, D.Gamma_bar);
      if (!g.ok)
        warn("wrap guard fails at eps = " + fmt(e) + ": r0 + T sqrt(Gamma_bar) = " + fmt(g.r0 + T * g.speed) +
             " >= L/2; max admissible T = " + fmt(g.max_T));
    }
  }
  return d;
}

bool RunResult::passed() const {
  for (const auto& ch : checks)
    if (!ch.passed) return false;
  return true;
}

void parallel_for(int n, int workers, const std::function<void(int)>& f) {
  workers = std::max(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(std::size_t(std::max(n, 0)));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[std::size_t(i)] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

CorrectorSet build_cell_set(const ExperimentConfig& c, int workers) {
  const CoefficientField a = c.coefficient.sample(TorusGrid(c.dim, c.cell_n));
  HierarchyOptions ho{SolverOptions{c.solver_tol, c.max_iter}};
  CorrectorSet s = build_corrector_set(a, c.order, c.direction_set(), ho, workers);
  if (c.kmax_cap != 1.0) s.model = fit_dispersion(s.hierarchies, c.kmax_cap);
  return s;
}

std::vector<WaveCompareRow> wave_compare_sweep(const ExperimentConfig& c, const CorrectorSet& set, int workers) {
  const DispersionModel& D = set.model;
  const CutoffSpec spec = CutoffSpec::from(D);
  ErrorBudget budget{c.order, c.alpha1, c.alpha2, c.prefactor};
  double gamma = c.reg_gamma;
  if (c.approximation == "regularized" && gamma < 0) gamma = choose_gamma(D);
  BoussinesqTensors bt;
  if (c.approximation == "boussinesq") bt = boussinesq_decomposition(D);

  std::vector<WaveCompareRow> rows(c.eps.size());
  parallel_for(int(c.eps.size()), workers, [&](int i) {
    const double eps = c.eps[std::size_t(i)];
    const BoxGrid box = BoxGrid::resolved(c.dim, c.L, eps, c.points_per_period);
    const TorusGrid g = box.torus();
    const CoefficientField a = box_coefficient_for(c, box);
    const Field u0 = wave_data(c, box);
    const double T = c.final_time(eps);

    ModePropagator prop = c.approximation == "regularized"  ? regularized_propagator(D, gamma, eps, g)
                          : c.approximation == "boussinesq" ? boussinesq_propagator(D.P.at(0), bt, eps, g)
                                                            : homogenized_propagator(D, spec, eps, g);
    const bool dressed = c.approximation == "taylor-bloch";
    ApproxFn approx = [&](double t) {
      ApproxState s{prop.displacement(u0, t), {}};
      if (c.energy) s.v = prop.velocity(u0, t);
      if (dressed) {
        s.u = dress(set.tensors, s.u, eps, c.order);
        if (c.energy) s.v = dress(set.tensors, s.v, eps, c.order);
      }
      return s;
    };
    ErrorTracker tracker(approx, budget, eps, T, c.energy);
    FineWaveOptions fo;
    fo.scheme = c.fine_scheme();
    fo.snapshot_interval = c.snapshot_interval;
    fo.store_snapshots = false;
    const WaveTrajectory traj = solve_fine_wave(a, box, u0, Field(g), nullptr, T, fo, std::ref(tracker));
    WaveCompareRow& row = rows[std::size_t(i)];
    row.eps = eps;
    row.T = T;
    row.report = tracker.report();
    row.energy_drift = traj.energy_drift;
    row.guard_ok = wrap_guard(u0, box, T, D.Gamma_bar).ok;
    row.budget_at_T = budget.curve(eps, T);
  });
  return rows;
}

std::vector<SourceTermRow> source_term_sweep(const ExperimentConfig& c, const CorrectorSet& set, int workers) {
  const DispersionModel& D = set.model;
  const CutoffSpec spec = CutoffSpec::from(D);
  ErrorBudget budget{c.order, c.alpha1, c.alpha2, c.prefactor};
  std::vector<SourceTermRow> rows(c.eps.size());
  parallel_for(int(c.eps.size()), workers, [&](int i) {
    const double eps = c.eps[std::size_t(i)];
    const BoxGrid box = BoxGrid::resolved(c.dim, c.L, eps, c.points_per_period);
    const TorusGrid g = box.torus();
    const CoefficientField a = box_coefficient_for(c, box);
    const SourceTerm f = SourceTerm::pulse(source_profile(c, box), 1.0);
    const double T = c.final_time(eps);
    ErrorTracker dressed(
        [&](double t) {
          SourceFields s = source_term_fields(D, &set.tensors, spec, f, eps, c.order, t, true);
          return ApproxState{std::move(s.u), std::move(s.v)};
        },
        budget, eps, T, true);
    ErrorTracker simplified(
        [&](double t) {
          SourceFields s = source_term_fields(D, nullptr, spec, f, eps, c.order, t, false);
          return ApproxState{std::move(s.u), {}};
        },
        budget, eps, T, false);
    FineWaveOptions fo;
    fo.scheme = c.fine_scheme();
    fo.snapshot_interval = c.snapshot_interval;
    fo.store_snapshots = false;
    solve_fine_wave(a, box, Field(g), Field(g), &f, T, fo, [&](const Snapshot& s) {
      dressed(s);
      simplified(s);
    });
    SourceTermRow& row = rows[std::size_t(i)];
    row.eps = eps;
    row.dressed = dressed.report();
    row.simplified = simplified.report();
    row.budget = budget.source_curve(eps, T);
  });
  return rows;
}

EllipticRateReport elliptic_rate_sweep(const ExperimentConfig& c, const CorrectorSet& set) {
  const CoefficientField a_box_cell = c.coefficient.sample(TorusGrid(c.dim, c.points_per_period));
  double gamma = c.reg_gamma;
  if (gamma < 0) gamma = choose_gamma(truncate_model(set.model, c.order));
  EllipticRateOptions opt;
  opt.prepared = c.prepared;
  opt.boussinesq = c.boussinesq;
  opt.L = c.box_side();
  opt.points_per_period = c.points_per_period;
  opt.solver = SolverOptions{std::max(c.solver_tol, 1e-13), c.max_iter};
  const int dim = c.dim;
  const double L = opt.L;
  return elliptic_rate_error(set.tensors, set.model, a_box_cell,
                        [dim, L](const Vec& x) { return rhs_function(x, dim, L); }, c.eps, c.order, gamma, opt);
}

BallisticReport transport_sweep(const ExperimentConfig& c, const CorrectorSet& set) {
  BallisticOptions opt;
  opt.L = c.box_side();
  opt.points_per_period = c.points_per_period;
  opt.scheme = c.fine_scheme();
  opt.budget = ErrorBudget{c.order, c.alpha1, c.alpha2, c.prefactor};
  return ballistic_experiment(c.coefficient.sample(TorusGrid(c.dim, c.points_per_period)), set.model, c.eps,
                              c.transport_gamma, c.T, c.order, opt);
}

namespace {

void run_correctors(const ExperimentConfig& c, const CorrectorSet& set, const std::string& dir, RunResult& r) {
  const CoefficientField a = c.coefficient.sample(TorusGrid(c.dim, c.cell_n));
  write_file(dir, "lambda_table.csv", "# " + header(c) + "\n" + lambda_table_csv(set.hierarchies), r);
  write_file(dir, "dispersion_table.csv", "# " + header(c) + "\n" + dispersion_table_csv(set.model), r);
  save_hierarchy(set.hierarchies.at(0), (std::filesystem::path(dir) / "hierarchy_0.json").string());
  r.files.push_back("hierarchy_0.json");

  double odd = 0, l2gap = 0, l4gap = 0, l2min = 1e300, flux = 0, div = 0, qmean = 0;
  bool has2 = false, has4 = false;
  for (const auto& h : set.hierarchies) {
    const LambdaIdentityReport p = verify_lambda_identities(h, a);
    for (const auto& [j, v] : p.odd_lambdas) odd = std::max(odd, v / p.lambda0);
    if (p.has_lambda2) {
      has2 = true;
      l2gap = std::max(l2gap, p.lambda2_rel_gap);
      l2min = std::min(l2min, p.lambda2_def);
    }
    if (p.has_lambda4) {
      has4 = true;
      l4gap = std::max(l4gap, p.lambda4_rel_gap);
    }
    const StructureReport s = check_structure(h);
    flux = std::max(flux, s.max_flux_mismatch);
    div = std::max(div, s.max_divergence);
    qmean = std::max(qmean, s.max_q_mean);
  }
  r.checks.push_back(check_le("odd_lambdas_relative", odd, c.threshold("odd_lambda")));
  if (has2) {
    r.checks.push_back(check_le("lambda2_definition_vs_quadratic_form", l2gap, c.threshold("lambda2_gap")));
    r.checks.push_back(check_ge("lambda2_nonnegative", l2min, -1e-10));
  }
  if (has4) r.checks.push_back(check_le("lambda4_formula", l4gap, c.threshold("lambda4_gap")));
  r.checks.push_back(check_le("div_sigma_equals_q", flux, c.threshold("flux_mismatch")));
  r.checks.push_back(check_le("div_q_zero", div, c.threshold("divergence")));
  r.checks.push_back(check_le("q_mean_zero", qmean, c.threshold("q_mean")));

  // Residuum identities on a random band-limited field (reported; jump coefficients ring when refined).
  std::ostringstream os;
  os.precision(12);
  os << "# " << header(c) << " seed=" << c.seed << "\n";
  os << "order,refine,low_order,chi_form,first_form,chi_rewrite\n";
  const TorusGrid box(c.dim, c.cell_n, 1.0);
  const Field v = random_field(box, c.seed);
  for (int l = 1; l <= c.order; ++l)
    for (int refine : {1, 2}) {
      const ResiduumReport rr = residuum_identity_check(set.tensors, set.model, a, v, 1.0, l, refine);
      os << l << "," << refine << "," << (rr.has_low_order ? fmt(rr.low_order) : "") << "," << rr.chi_form << ","
         << rr.first_form << "," << rr.chi_rewrite << "\n";
    }
  write_file(dir, "residuum.csv", os.str(), r);
}

void run_dispersion(const ExperimentConfig& c, const CorrectorSet& set, const std::string& dir, RunResult& r) {
  const CoefficientField a = c.coefficient.sample(TorusGrid(c.dim, c.cell_n));
  const DispersionModel& D = set.model;
  write_file(dir, "dispersion_curve.csv", "# " + header(c) + " kmax=" + fmt(D.kmax) + "\n" + dispersion_curve_csv(D),
             r);
  std::ostringstream os;
  os.precision(12);
  os << "# " << header(c) << "\n";
  os << "direction,e1,e2,kappa,order,relative_residual\n";
  double worst = 0;
  for (std::size_t i = 0; i < set.hierarchies.size(); ++i) {
    const auto& h = set.hierarchies[i];
    for (double kappa : c.kappa) {
      const EigendefectResidual er = eigendefect_residual(h, a, kappa, c.order);
      worst = std::max(worst, er.relative);
      os << i << "," << h.e[0] << "," << h.e[1] << "," << kappa << "," << c.order << "," << er.relative << "\n";
    }
  }
  write_file(dir, "eigendefect.csv", os.str(), r);
  r.checks.push_back(check_le("eigendefect_residual", worst, c.threshold("eigendefect")));
  if (c.order >= 3) {
    const BoussinesqTensors bt = boussinesq_decomposition(D);
    std::ostringstream bs;
    bs.precision(12);
    bs << "# " << header(c) << "\n";
    bs << "beta,identity_residual,min_b,min_c\n" << bt.beta << "," << bt.identity_residual << "," << bt.min_b << ","
       << bt.min_c << "\n";
    write_file(dir, "boussinesq.csv", bs.str(), r);
    r.checks.push_back(check_le("boussinesq_identity", bt.identity_residual, c.threshold("boussinesq_identity")));
    r.checks.push_back(check_ge("boussinesq_b_psd", bt.min_b, c.threshold("psd")));
    r.checks.push_back(check_ge("boussinesq_c_psd", bt.min_c, c.threshold("psd")));
  }
}

void run_wave_compare(const ExperimentConfig& c, const CorrectorSet& set, const std::string& dir, int workers,
                      RunResult& r) {
  const auto rows = wave_compare_sweep(c, set, workers);
  std::ostringstream os;
  os.precision(12);
  os << "# " << header(c) << " approximation=" << c.approximation << "\n";
  os << "eps,T,sup_l2,sup_ref_l2,sup_energy,sup_ref_energy,budget_at_T,energy_drift,guard_ok\n";
  std::vector<double> es, errs;
  double drift = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& w = rows[i];
    os << w.eps << "," << w.T << "," << w.report.sup_l2 << "," << w.report.sup_ref_l2 << "," << w.report.sup_energy
       << "," << w.report.sup_ref_energy << "," << w.budget_at_T << "," << w.energy_drift << "," << int(w.guard_ok)
       << "\n";
    write_file(dir, "errors_eps" + std::to_string(i) + ".csv",
               error_report_csv(w.report, header(c) + " eps=" + fmt(w.eps)), r);
    es.push_back(w.eps);
    errs.push_back(w.report.sup_l2);
    drift = std::max(drift, w.energy_drift);
    if (!w.guard_ok) r.warnings.push_back("wrap guard exceeded at eps = " + fmt(w.eps));
  }
  write_file(dir, "wave_compare.csv", os.str(), r);
  if (es.size() >= 2) r.checks.push_back(check_ge("l2_error_order", fitted_order(es, errs), c.threshold("min_order")));
  r.checks.push_back(check_le("energy_drift", drift, c.threshold("energy_drift")));
}

void run_source_term(const ExperimentConfig& c, const CorrectorSet& set, const std::string& dir, int workers,
                     RunResult& r) {
  const auto rows = source_term_sweep(c, set, workers);
  std::ostringstream os;
  os.precision(12);
  os << "# " << header(c) << "\n";
  os << "eps,T,dressed_energy_err,ref_energy,relative_energy_err,budget,simplified_l2_err,ref_l2\n";
  std::vector<double> es, errs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i];
    const double rel = s.dressed.sup_energy / s.dressed.sup_ref_energy;
    write_file(dir, "dressed_errors_eps" + std::to_string(i) + ".csv",
               error_report_csv(s.dressed, header(c) + " eps=" + fmt(s.eps)), r);
    os << s.eps << "," << c.final_time(s.eps) << "," << s.dressed.sup_energy << "," << s.dressed.sup_ref_energy << ","
       << rel << "," << s.budget << "," << s.simplified.sup_l2 << "," << s.simplified.sup_ref_l2 << "\n";
    r.checks.push_back(check_le("dressed_energy_eps" + std::to_string(i), rel, c.threshold("budget_factor") * s.budget,
                                "relative energy error against budget_factor * source budget"));
    es.push_back(s.eps);
    errs.push_back(s.simplified.sup_l2);
  }
  write_file(dir, "source_term.csv", os.str(), r);
  if (es.size() >= 2)
    r.checks.push_back(check_ge("simplified_l2_order", fitted_order(es, errs), c.threshold("min_order")));
}

void run_elliptic(const ExperimentConfig& c, const CorrectorSet& set, const std::string& dir, RunResult& r) {
  const EllipticRateReport rep = elliptic_rate_sweep(c, set);
  write_file(dir, "elliptic_rate.csv", elliptic_rate_csv(rep, header(c)), r);
  if (rep.rows.size() >= 2) r.checks.push_back(check_ge("gradient_error_order", rep.fitted_order, c.threshold("min_order")));
}

void run_transport(const ExperimentConfig& c, const CorrectorSet& set, const std::string& dir, RunResult& r) {
  const BallisticReport rep = transport_sweep(c, set);
  write_file(dir, "transport.csv", ballistic_csv(rep, header(c)), r);
  bool valid = true;
  for (const auto& row : rep.rows) valid = valid && row.valid;
  r.checks.push_back({"wrap_guard", valid, valid ? 1.0 : 0.0, 1.0, "all runs inside the guard"});
  if (rep.rows.size() >= 2) {
    const double frac = rep.rows.back().ratio / rep.rows.front().ratio;
    r.checks.push_back(check_ge("ratio_non_degenerate", frac, c.threshold("min_ratio_fraction")));
  }
  for (const auto& row : rep.rows)
    if (!row.conclusive) r.warnings.push_back("defect bound >= 1 at eps = " + fmt(row.eps) + ": non-conclusive");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c, const std::string& out_dir, int workers) {
  const Diagnostics d = validate(c);
  if (!d.ok()) {
    std::string msg = "validation failed:";
    for (const auto& e : d.errors) msg += "\n  " + e;
    throw ConfigurationError(msg);
  }
  std::filesystem::create_directories(out_dir);
  RunResult r;
  r.warnings = d.warnings;
  json manifest;
  manifest["config"] = c.raw;
  manifest["config_hash"] = c.hash();
  manifest["kind"] = c.kind;
  manifest["thresholds"] = c.thresholds;
  manifest["solver_tol"] = c.solver_tol;
  std::string failure;
  try {
    const CorrectorSet set = build_cell_set(c, workers);
    if (c.kind == "correctors") run_correctors(c, set, out_dir, r);
    else if (c.kind == "dispersion") run_dispersion(c, set, out_dir, r);
    else if (c.kind == "wave-compare") run_wave_compare(c, set, out_dir, workers, r);
    else if (c.kind == "source-term") run_source_term(c, set, out_dir, workers, r);
    else if (c.kind == "elliptic-rate") run_elliptic(c, set, out_dir, r);
    else if (c.kind == "transport") run_transport(c, set, out_dir, r);
  } catch (const ConfigurationError&) {
    throw;
  } catch (const Error& e) {
    failure = e.what();
    r.checks.push_back({"numerical_error", false, 0, 0, failure});
  }
  json checks = json::array();
  for (const auto& ch : r.checks)
    checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"value", ch.value}, {"threshold", ch.threshold},
                      {"detail", ch.detail}});
  manifest["checks"] = checks;
  manifest["warnings"] = r.warnings;
  manifest["passed"] = r.passed();
  manifest["files"] = r.files;
  std::ofstream(std::filesystem::path(out_dir) / "manifest.json") << manifest.dump(2) << "\n";
  return r;
}

}  // namespace tbhom
