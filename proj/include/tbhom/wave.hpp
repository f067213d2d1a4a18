// SPDX-License-Identifier: MIT
// Heterogeneous wave solver on a periodic box and the homogenized propagators
// it is compared against.
#pragma once
#include <functional>
#include <string>
#include <vector>

#include "tbhom/dispersion.hpp"

namespace tbhom {

// Periodic box [0, L)^d resolved with n points per axis; a(x/eps) fits exactly.
struct BoxGrid {
  int dim = 1;
  double L = 1.0;
  int n = 16;
  double eps = 1.0;

  BoxGrid() = default;
  BoxGrid(int dim, double L, int n, double eps);
  // n = points_per_period * L / eps.
  static BoxGrid resolved(int dim, double L, double eps, int points_per_period = 16);

  TorusGrid torus() const { return TorusGrid(dim, n, L); }
  int periods() const;
  int points_per_period() const { return n / periods(); }
  double h() const { return L / n; }
  Vec center() const { return {L / 2, dim == 2 ? L / 2 : 0.0}; }
};

// Cell field (unit period) evaluated at x/eps on the box.
Field box_field(const Field& cell, const BoxGrid& box);
// Same for any torus grid whose period is a multiple of eps.
Field cell_at_scale(const Field& cell, double eps, const TorusGrid& box);
// The oscillating coefficient a(x/eps) on the box.
CoefficientField box_coefficient(const CoefficientField& cell, const BoxGrid& box);
// exp(-|x - c|^2 / (2 w^2)) with minimum-image distance to the box center.
Field gaussian_bump(const BoxGrid& box, double width = 1.0);

// Sum of separable terms envelope_i(t) * profile_i(x), switched off after `support_end`.
struct SourceTerm {
  struct Term {
    std::function<double(double)> envelope;
    Field profile;
  };
  std::vector<Term> terms;
  double support_end = 1.0;

  bool empty() const { return terms.empty(); }
  Field at(double t, const TorusGrid& g) const;
  // sum envelope_i(t) profile_i ignoring the support window.
  Field shape(double t, const TorusGrid& g) const;
  // Indicator of [0, support_end) times a profile.
  static SourceTerm pulse(Field profile, double support_end = 1.0);
};

enum class FineScheme { finite_difference, spectral };
std::string to_string(FineScheme s);
FineScheme fine_scheme_from_string(const std::string& s);

struct FineWaveOptions {
  FineScheme scheme = FineScheme::finite_difference;
  double cfl = 0.9;
  double dt = 0;                  // 0: largest stable step compatible with the snapshot spacing
  double snapshot_interval = 0;   // 0: snapshots at t = 0 and t = T only
  bool store_snapshots = true;
  double energy_tolerance = 1e-6; // drift above this is recorded as a warning
};

struct Snapshot {
  double t = 0;
  long step = 0;
  Field u, v;  // v is the centered difference (u^{n+1} - u^{n-1}) / (2 dt)
};

struct EnergySample {
  double t = 0;
  double energy = 0;
};

struct WaveTrajectory {
  BoxGrid grid;
  FineScheme scheme = FineScheme::finite_difference;
  double dt = 0;
  long steps = 0;
  std::vector<Snapshot> snapshots;
  std::vector<EnergySample> energy;  // discrete energy at the snapshot steps
  double energy_drift = 0;           // max relative drift once the source is off
  double max_l2_ratio = 0;           // max_n ||u^n|| / ||u^0||
  std::vector<std::string> warnings;
};

using SnapshotObserver = std::function<void(const Snapshot&)>;

// Largest nodal spectral norm of a.
double max_nodal_norm(const CoefficientField& a);
double stable_time_step(const CoefficientField& a, FineScheme scheme, double cfl = 0.9);
// The discrete operator A u ~ -div(a grad u) used by the fine solver.
Field fine_operator(const CoefficientField& a, const Field& u, FineScheme scheme);

// Leapfrog for u'' + A u = f with u(0) = u0, u'(0) = v0; `a` lives on the box grid.
WaveTrajectory solve_fine_wave(const CoefficientField& a, const BoxGrid& box, const Field& u0, const Field& v0,
                               const SourceTerm* f, double T, const FineWaveOptions& opt = {},
                               const SnapshotObserver& observer = {});

// Constant-coefficient propagator: each Fourier mode evolves with frequency
// freq(k) and the initial data is weighted by weight(k).
class ModePropagator {
 public:
  ModePropagator(const TorusGrid& g, std::vector<double> freq, std::vector<double> weight);

  const TorusGrid& grid() const { return grid_; }
  const std::vector<double>& frequencies() const { return freq_; }
  const std::vector<double>& weights() const { return weight_; }

  // F^-1[weight cos(freq t) u0^]
  Field displacement(const Field& u0, double t) const;
  // F^-1[-weight freq sin(freq t) u0^]
  Field velocity(const Field& u0, double t) const;
  // Unweighted evolution of the state (u, v) over a signed time step.
  std::pair<Field, Field> evolve(const Field& u, const Field& v, double t) const;

 private:
  TorusGrid grid_;
  std::vector<double> freq_, weight_;
};

// Filtered free propagator of the truncated Bloch dispersion:
// weight = omega(eps|k|), freq = Lambda(eps k) / eps.
ModePropagator homogenized_propagator(const DispersionModel& D, const CutoffSpec& spec, double eps,
                                      const TorusGrid& g);
Field homogenized_wave_field(const DispersionModel& D, const CutoffSpec& spec, const Field& u0, double eps,
                             double t);
// F^-1[omega(eps|k|) u0^]
Field filtered_data(const CutoffSpec& spec, const Field& u0, double eps);

// sum_{j<=order} eps^j phi_j(x/eps) . grad^j v for tensorized cell correctors.
Field dress(const TensorizedCorrectors& tc, const Field& v, double eps, int order);
Field well_prepared_data(const TensorizedCorrectors& tc, const CutoffSpec& spec, const Field& u0, double eps,
                         int order);
// The real Taylor-Bloch superposition: every Fourier mode of the homogenized
// field carries psi_{eps k, l}(x/eps). Since psi is polynomial in k this equals
// dress(homogenized_wave_field).
Field taylor_bloch_ansatz(const TensorizedCorrectors& tc, const DispersionModel& D, const CutoffSpec& spec,
                          const Field& u0, double eps, int order, double t);
Field taylor_bloch_velocity(const TensorizedCorrectors& tc, const DispersionModel& D, const CutoffSpec& spec,
                            const Field& u0, double eps, int order, double t);

// Regularization exponent m = floor((l-1)/2) + 1 of the coercive term.
int regularization_power(int order);
// Symbol of the regularized homogenized operator at wavevector k:
// eps^-2 eigenvalue(eps k) + gamma eps^{2m} |k|^{2m+2}.
double regularized_symbol(const DispersionModel& D, double gamma, double eps, const Vec& k);
double choose_gamma(const DispersionModel& D);
ModePropagator regularized_propagator(const DispersionModel& D, double gamma, double eps, const TorusGrid& g);
std::vector<Field> solve_homogenized_wave_regularized(const DispersionModel& D, double gamma, const Field& u0,
                                                      double eps, const std::vector<double>& times);

struct BoussinesqTensors {
  double beta = 0;        // b = beta Id
  HomogeneousPoly b;      // beta |k|^2
  HomogeneousPoly c;      // b(k) P0(k) - P2(k)
  double identity_residual = 0;
  double min_b = 0, min_c = 0;  // minima over the check directions
};
BoussinesqTensors boussinesq_decomposition(const HomogeneousPoly& P0, const HomogeneousPoly& P2,
                                           std::vector<Vec> directions = {});
BoussinesqTensors boussinesq_decomposition(const DispersionModel& D);
// Omega^2(k) = (P0(k) + eps^2 c(k)) / (1 + eps^2 b(k)).
double boussinesq_frequency_squared(const HomogeneousPoly& P0, const BoussinesqTensors& bt, double eps,
                                    const Vec& k);
// Coefficients of Omega(kappa e)^2 in powers kappa^2, kappa^4, ... (eps = 1).
std::vector<double> boussinesq_taylor(const HomogeneousPoly& P0, const BoussinesqTensors& bt, const Vec& e,
                                      int terms);
ModePropagator boussinesq_propagator(const HomogeneousPoly& P0, const BoussinesqTensors& bt, double eps,
                                     const TorusGrid& g);
std::vector<Field> solve_boussinesq_wave(const HomogeneousPoly& P0, const BoussinesqTensors& bt, const Field& u0,
                                         double eps, const std::vector<double>& times);

struct SourceQuadrature {
  int nodes_per_panel = 16;
  int panels = 0;                   // 0: chosen from the largest retained frequency
  double max_phase_per_panel = 1.0; // freq * panel width bound
};
struct SourceFields {
  Field u, v;  // Duhamel field and its time derivative
};
// Duhamel integral of the filtered source with kernel sin(w (t - s)) / w,
// w = Lambda(eps k) / eps; with `dressed` every mode carries psi_{eps k, l}(x/eps).
SourceFields source_term_fields(const DispersionModel& D, const TensorizedCorrectors* tc, const CutoffSpec& spec,
                                const SourceTerm& f, double eps, int order, double t, bool dressed,
                                const SourceQuadrature& q = {});

// Growth envelope mu(t) = (1+t)^alpha1 log^alpha2(2+t) and the error budget shape.
struct ErrorBudget {
  int order = 2;
  double alpha1 = 0, alpha2 = 0;
  double prefactor = 1;

  double mu(double t) const;
  // prefactor (eps + eps^l t mu(t / eps))
  double curve(double eps, double t) const;
  // prefactor (max(eps, eps^l mu(1/eps)) + eps^l T mu(T / eps)), source-term variant
  double source_curve(double eps, double T) const;
};

struct ApproxState {
  Field u;
  Field v;  // may be empty when no energy norm is requested
};
using ApproxFn = std::function<ApproxState(double t)>;

struct ErrorRow {
  double t = 0;
  double l2_err = 0, energy_err = 0;
  double ref_l2 = 0, ref_energy = 0;
  double budget = 0;
};
struct ErrorReport {
  double eps = 0;
  std::vector<ErrorRow> rows;
  double sup_l2 = 0, sup_energy = 0;
  double sup_ref_l2 = 0, sup_ref_energy = 0;
  bool has_energy = false;
};

// Streaming comparison against snapshots; usable directly as a SnapshotObserver.
class ErrorTracker {
 public:
  // T_norm: the T of the T^-2 ||e||^2 term in the energy norm.
  ErrorTracker(ApproxFn approx, ErrorBudget budget, double eps, double T_norm, bool energy = false);
  void operator()(const Snapshot& s);
  const ErrorReport& report() const { return report_; }

 private:
  ApproxFn approx_;
  ErrorBudget budget_;
  double T_norm_;
  ErrorReport report_;
};

ErrorReport error_report(const WaveTrajectory& ref, const ApproxFn& approx, const ErrorBudget& budget,
                         bool energy = false);
std::string error_report_csv(const ErrorReport& r, const std::string& header_comment = {});

// Wavefront guard r0 + T sqrt(Gamma_bar) < L/2 with r0 the radius outside which
// the data carries at most `mass_tol` of its squared L2 mass.
struct WrapGuard {
  double r0 = 0;
  double speed = 0;
  double max_T = 0;
  bool ok = true;
};
WrapGuard wrap_guard(const Field& u0, const BoxGrid& box, double T, double Gamma_bar, double mass_tol = 1e-8);

// Flat little-endian float64 arrays (u then v per snapshot) plus a JSON sidecar.
void write_snapshots(const WaveTrajectory& traj, const std::string& path_prefix);

}  // namespace tbhom
