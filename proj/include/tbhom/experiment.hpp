// SPDX-License-Identifier: MIT
// Experiment configs, validation and the runners behind the command-line driver.
#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tbhom/coefficients.hpp"
#include "tbhom/elliptic.hpp"
#include "tbhom/transport.hpp"

namespace tbhom {

// Flat JSON configuration; see README for the key list. Unknown keys are rejected.
struct ExperimentConfig {
  std::string kind;  // correctors | dispersion | wave-compare | elliptic-rate | transport | source-term
  CoefficientSpec coefficient;
  int dim = 1;
  int cell_n = 64;              // cell grid for corrector builds
  int order = 2;
  std::vector<double> eps;      // strictly decreasing
  double T = 8;
  std::string time_scaling = "fixed";  // fixed | inverse_eps (T = tau / eps)
  double tau = 2;
  int directions = 0;           // 2D direction samples; 0 = default count
  double solver_tol = 1e-13;
  int max_iter = 10000;
  double L = 0;                 // box side; 0 = kind default
  int points_per_period = 16;
  std::string scheme;           // fd | spectral; empty = kind default
  double snapshot_interval = 0.125;
  double data_width = 1.0;
  double kmax_cap = 1.0;
  std::string approximation = "homogenized";  // homogenized | taylor-bloch | regularized | boussinesq
  bool energy = false;
  double reg_gamma = -1;        // < 0: chosen from the model
  bool prepared = true;
  bool boussinesq = false;
  double transport_gamma = 0;
  int source_mode = 1;
  double alpha1 = 0, alpha2 = 0, prefactor = 1;
  std::vector<double> kappa{0.1, 0.3, 0.5};
  std::uint64_t seed = 0;
  std::map<std::string, double> thresholds;  // kind defaults merged with overrides

  nlohmann::json raw;           // the merged input, hashed for provenance

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides = {});
  std::string hash() const;     // FNV-1a 64 of the canonical JSON, hex
  double threshold(const std::string& key) const;
  FineScheme fine_scheme() const;
  std::vector<Vec> direction_set() const;
  double box_side() const;
  double final_time(double e) const;
};

// KEY=VALUE with dotted keys into nested objects; VALUE parsed as JSON when possible.
void apply_override(nlohmann::json& j, const std::string& assignment);
std::uint64_t fnv1a64(const std::string& bytes);

struct Diagnostics {
  std::vector<std::string> errors, warnings;
  bool ok() const { return errors.empty(); }
};
Diagnostics validate(const ExperimentConfig& c);

struct Check {
  std::string name;
  bool passed = true;
  double value = 0, threshold = 0;
  std::string detail;
};

struct WaveCompareRow {
  double eps = 0, T = 0;
  ErrorReport report;
  double energy_drift = 0;
  bool guard_ok = true;
  double budget_at_T = 0;
};
struct SourceTermRow {
  double eps = 0;
  ErrorReport dressed, simplified;
  double budget = 0;  // source-term budget shape at T
};

struct RunResult {
  std::vector<Check> checks;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  bool passed() const;
};

// Runs one experiment, writing CSVs and manifest.json into out_dir.
RunResult run_experiment(const ExperimentConfig& c, const std::string& out_dir, int workers = 1);

// Building blocks shared with the acceptance suite.
CorrectorSet build_cell_set(const ExperimentConfig& c, int workers = 1);
std::vector<WaveCompareRow> wave_compare_sweep(const ExperimentConfig& c, const CorrectorSet& set, int workers = 1);
std::vector<SourceTermRow> source_term_sweep(const ExperimentConfig& c, const CorrectorSet& set, int workers = 1);
EllipticRateReport elliptic_rate_sweep(const ExperimentConfig& c, const CorrectorSet& set);
BallisticReport transport_sweep(const ExperimentConfig& c, const CorrectorSet& set);

// Runs f(i) for i in [0, n) on up to `workers` threads; exceptions are rethrown in index order.
void parallel_for(int n, int workers, const std::function<void(int)>& f);

}  // namespace tbhom
