// SPDX-License-Identifier: MIT
#include "tbhom/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tbhom {

namespace {

double min_image(double d, double L) { return d - L * std::round(d / L); }

double distance(const Vec& x, const Vec& c, int dim, double L) {
  double r2 = 0;
  for (int a = 0; a < dim; ++a) {
    const double d = min_image(x[a] - c[a], L);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

}  // namespace

Field gaussian_data(double lambda, const BoxGrid& box) {
  if (!(lambda > 0)) throw ConfigurationError("Gaussian energy lambda must be positive");
  const double half = box.L / 2;
  const double tail = std::exp(-0.5 * lambda * lambda * half * half);
  if (tail > 1e-12) {
    std::ostringstream os;
    os << "Gaussian of width 1/" << lambda << " does not fit the box of side " << box.L << " (tail " << tail << ")";
    throw ConfigurationError(os.str());
  }
  const Vec c = box.center();
  const double amp = std::pow(lambda / std::numbers::pi, 0.5 * box.dim);
  return Field::from_function(box.torus(), [&](const Vec& x) {
    const double r = distance(x, c, box.dim, box.L);
    return amp * std::exp(-0.5 * lambda * lambda * r * r);
  });
}

double moment_M(const Field& u, double lambda, const Vec& center) {
  const TorusGrid& g = u.grid();
  double s = 0;
  for (std::size_t i = 0; i < u.nodes(); ++i) {
    const double w = 1 + lambda * distance(g.coord(i), center, g.dim, g.period);
    s += w * w * u(i) * u(i);
  }
  return std::sqrt(s * g.cell_volume() / double(g.nodes()));
}

double windowed_moment(const std::vector<double>& times, const std::vector<double>& M, double T, double width) {
  if (times.size() != M.size()) throw ConfigurationError("moment samples and times differ in length");
  if (!(width > 0)) throw ConfigurationError("moment window must have positive width");
  const double a = T, b = T + width;
  const double tol = 1e-9 * std::max(1.0, b);
  if (times.size() < 2 || times.front() > a + tol || times.back() < b - tol) {
    std::ostringstream os;
    os << "moment samples do not cover the window [" << a << ", " << b << "]";
    throw ConfigurationError(os.str());
  }
  double integral = 0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double t0 = times[i], t1 = times[i + 1];
    if (t1 <= a + tol || t0 >= b - tol) continue;
    if (t1 - t0 > width / 16 * (1 + 1e-9)) {
      std::ostringstream os;
      os << "moment samples spaced " << t1 - t0 << " apart; the window of width " << width << " needs <= width/16";
      throw ConfigurationError(os.str());
    }
    const double q0 = M[i] * M[i], q1 = M[i + 1] * M[i + 1];
    auto q = [&](double t) { return q0 + (q1 - q0) * (t - t0) / (t1 - t0); };
    const double lo = std::max(t0, a), hi = std::min(t1, b);
    integral += 0.5 * (hi - lo) * (q(lo) + q(hi));
  }
  return std::sqrt(std::max(integral, 0.0));
}

double moment_script_M(const WaveTrajectory& traj, double lambda, double T) {
  std::vector<double> times, M;
  const Vec c = traj.grid.center();
  for (const auto& s : traj.snapshots) {
    times.push_back(s.t);
    M.push_back(moment_M(s.u, lambda, c));
  }
  return windowed_moment(times, M, T, 1.0 / lambda);
}

void MomentTracker::operator()(const Snapshot& s) {
  if (s.t < t_from_ - 1e-12) return;
  times_.push_back(s.t);
  M_.push_back(moment_M(s.u, lambda_, center_));
}

MomentReport moment_run(const CoefficientField& a, const BoxGrid& box, double lambda, double t_end,
                        double Gamma_bar, const MomentRunOptions& opt) {
  if (!(t_end > 0)) throw ConfigurationError("moment run needs a positive final time");
  MomentReport rep;
  rep.lambda = lambda;
  rep.center = box.center();
  const Field u0 = gaussian_data(lambda, box);
  rep.guard = wrap_guard(u0, box, t_end, Gamma_bar);

  // Snapshot spacing dividing t_end, at most 1/(samples_per_window lambda).
  const long n = std::max<long>(1, long(std::ceil(t_end * lambda * opt.samples_per_window - 1e-9)));
  FineWaveOptions fo;
  fo.scheme = opt.scheme;
  fo.snapshot_interval = t_end / double(n);
  fo.store_snapshots = false;
  // Keep the last sample before t_from so the window start can be interpolated.
  MomentTracker tracker(lambda, rep.center, opt.t_from - fo.snapshot_interval);
  solve_fine_wave(a, box, u0, Field(box.torus()), nullptr, t_end, fo, std::ref(tracker));
  rep.times = tracker.times();
  rep.M = tracker.values();
  return rep;
}

double ballistic_defect_bound(const ErrorBudget& b, double eps, double gamma, double T) {
  return b.prefactor * std::pow(eps, b.order - 1 - gamma) * T * b.mu(std::pow(eps, -2 - gamma) * T);
}

BallisticReport ballistic_experiment(const CoefficientField& a_cell, const DispersionModel& D,
                                     const std::vector<double>& eps_list, double gamma, double T, int order,
                                     const BallisticOptions& opt) {
  if (order < 2) throw ConfigurationError("ballistic experiment needs order >= 2");
  if (!(gamma >= 0)) throw ConfigurationError("gamma must be nonnegative");
  if (!(T > 0)) throw ConfigurationError("T must be positive");
  BallisticReport rep;
  rep.gamma = gamma;
  rep.T = T;
  rep.order = order;
  ErrorBudget budget = opt.budget;
  budget.order = order;
  const int dim = a_cell.dim();
  const double speed = std::sqrt(std::max(D.Gamma_bar, 0.0));
  for (double eps : eps_list) {
    BallisticRow row;
    row.eps = eps;
    row.t0 = std::pow(eps, -1 - gamma) * T;
    const double t_end = row.t0 + 1;
    double L = opt.L;
    if (L <= 0) {
      // All but 1e-8 of the squared mass of G_1 lies within r ~ 4.1 (1D) and 4.3 (2D).
      const double need = 2 * (5.0 + t_end * speed);
      L = 16;
      while (L < need) L *= 2;
    }
    row.L = L;
    const BoxGrid box = BoxGrid::resolved(dim, L, eps, opt.points_per_period);
    const CoefficientField a = box_coefficient(a_cell, box);
    MomentRunOptions mo;
    mo.scheme = opt.scheme;
    mo.samples_per_window = opt.samples_per_window;
    mo.t_from = row.t0;
    const MomentReport m = moment_run(a, box, 1.0, t_end, D.Gamma_bar, mo);
    row.script_M = m.window(row.t0);
    row.ratio = row.script_M / row.t0;
    row.defect_bound = ballistic_defect_bound(budget, eps, gamma, T);
    row.valid = m.valid();
    row.conclusive = row.defect_bound < 1;
    rep.rows.push_back(row);
  }
  return rep;
}

std::string ballistic_csv(const BallisticReport& r, const std::string& header_comment) {
  std::ostringstream os;
  os.precision(12);
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "# gamma=" << r.gamma << " order=" << r.order << "\n";
  os << "eps,T,t0,L,script_M,ratio,defect_bound,valid,conclusive\n";
  for (const auto& row : r.rows)
    os << row.eps << "," << r.T << "," << row.t0 << "," << row.L << "," << row.script_M << "," << row.ratio << ","
       << row.defect_bound << "," << (row.valid ? 1 : 0) << "," << (row.conclusive ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace tbhom
