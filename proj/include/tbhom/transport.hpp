// SPDX-License-Identifier: MIT
// Weighted second moments of waves started from Gaussian data, and the
// rescaled experiment probing ballistic transport at low energy.
#pragma once
#include <string>
#include <vector>

#include "tbhom/wave.hpp"

namespace tbhom {

// (lambda/pi)^{d/2} exp(-lambda^2 |x - c|^2 / 2) around the box center,
// minimum-image distance. Rejects boxes where the tail at L/2 exceeds 1e-12.
Field gaussian_data(double lambda, const BoxGrid& box);

// (int (1 + lambda |x - c|)^2 u^2 dx)^{1/2}, minimum-image |x - c| on the box.
double moment_M(const Field& u, double lambda, const Vec& center);

// (int_T^{T+width} M(t)^2 dt)^{1/2} by the trapezoid rule on the samples, with
// M^2 interpolated linearly at the window ends. Throws ConfigurationError when
// the samples do not cover the window or are spaced wider than width / 16.
double windowed_moment(const std::vector<double>& times, const std::vector<double>& M, double T, double width);

// Window [T, T + 1/lambda] over the stored snapshots of a trajectory.
double moment_script_M(const WaveTrajectory& traj, double lambda, double T);

struct MomentReport {
  double lambda = 1;
  Vec center{0, 0};
  std::vector<double> times, M;
  WrapGuard guard;
  bool valid() const { return guard.ok; }
  double window(double T) const { return windowed_moment(times, M, T, 1.0 / lambda); }
};

// Observer recording M at every snapshot.
class MomentTracker {
 public:
  MomentTracker(double lambda, Vec center, double t_from = 0) : lambda_(lambda), center_(center), t_from_(t_from) {}
  void operator()(const Snapshot& s);
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return M_; }

 private:
  double lambda_;
  Vec center_;
  double t_from_;
  std::vector<double> times_, M_;
};

struct MomentRunOptions {
  FineScheme scheme = FineScheme::finite_difference;
  double samples_per_window = 32;  // snapshots per time 1/lambda
  double t_from = 0;               // record M only from this time on
};

// Fine wave run from u0 = G_lambda, v0 = 0 on `box` up to t_end; `a` lives on the box grid.
MomentReport moment_run(const CoefficientField& a, const BoxGrid& box, double lambda, double t_end,
                        double Gamma_bar, const MomentRunOptions& opt = {});

struct BallisticOptions {
  double L = 0;                // box side; 0 picks the smallest power of two that passes the guard
  int points_per_period = 16;
  FineScheme scheme = FineScheme::finite_difference;
  ErrorBudget budget{};        // mu and the constant C of the defect bound (prefactor)
  double samples_per_window = 32;
};

struct BallisticRow {
  double eps = 0;
  double t0 = 0;          // eps^{-1-gamma} T
  double L = 0;
  double script_M = 0;    // moment over [t0, t0 + 1] in rescaled variables
  double ratio = 0;       // script_M / t0
  double defect_bound = 0;
  bool valid = true;      // wrap guard
  bool conclusive = true; // defect bound below 1
};
struct BallisticReport {
  double gamma = 0, T = 0;
  int order = 2;
  std::vector<BallisticRow> rows;
};

// C eps^{l-1-gamma} T mu(eps^{-2-gamma} T)
double ballistic_defect_bound(const ErrorBudget& b, double eps, double gamma, double T);

BallisticReport ballistic_experiment(const CoefficientField& a_cell, const DispersionModel& D,
                                     const std::vector<double>& eps_list, double gamma, double T, int order,
                                     const BallisticOptions& opt = {});
std::string ballistic_csv(const BallisticReport& r, const std::string& header_comment = {});

}  // namespace tbhom
