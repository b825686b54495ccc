#pragma once

#include <optional>
#include <vector>

#include "ptlab/contour.hpp"

namespace ptlab {

struct TrajectorySample {
  double t;
  cplx x;
  cplx p;             // momentum, xdot = 2p
  int sheet;          // branch of log(ix) used for (ix)^N at x
  double branch_phase;  // arg p, continued along the path
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double E = 0.0;
  double N = 0.0;
  bool escaped = false;
  double escape_radius = 0.0;
  double max_energy_residual = 0.0;
};

struct ClosureReport {
  bool closed = false;
  std::optional<double> period;
  double closure_distance = 0.0;  // smallest return distance to x0 on the starting sheet
  double turns = 0.0;             // winding about the midpoint of the turning points
};

struct TrajectoryOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-13;
  int branch = +1;  // +1 picks Im(xdot) >= 0 at the start (ties broken by Re(xdot) >= 0), -1 the other root
  std::optional<cplx> p0;  // overrides the branch choice
};

/// Integrates x' = 2p, p' = N i (ix)^(N-1) on the Riemann surface of (ix)^N,
/// which is xdot = 2 sqrt(E + (ix)^N) with the root continued along the path.
/// dt is the initial step; steps adapt to the tolerances and to a pi/4 cap on
/// the change of arg p away from turning points. Stops at |x| > escape radius.
Trajectory integrate_trajectory(cplx x0, double E, double N, double t_max, double dt = 1e-3,
                                const TrajectoryOptions& opt = {});

/// T = 2 E^{(2-N)/(2N)} cos((N-2)pi/(2N)) Gamma(1+1/N) sqrt(pi) / Gamma(1/2+1/N).
double period(double E, double N);

/// First return to x0 on the starting sheet with the starting velocity direction.
ClosureReport detect_closure(const Trajectory& traj, double tol = 1e-6);

/// Orbit from x_- (p = 0) through x_+ and back; stops at closure.
Trajectory turning_point_orbit(double E, double N);

/// Time average of x over the samples (trapezoid rule).
cplx time_average(const Trajectory& traj);

/// Energy residual |p^2 - (ix)^N - E| at one sample.
double energy_residual(const TrajectorySample& s, double E, double N);

}  // namespace ptlab
