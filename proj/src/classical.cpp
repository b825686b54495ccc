#include "ptlab/classical.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "ptlab/errors.hpp"
#include "ptlab/semiclassic.hpp"

namespace ptlab {

namespace {

namespace odeint = boost::numeric::odeint;

constexpr double pi = std::numbers::pi;

using State = std::array<cplx, 2>;  // (x, p)

// Hamilton's equations for H = p^2 - (ix)^N. Stage points are evaluated on the
// sheet reached by the straight segment from the step's base point.
struct Flow {
  double N;
  cplx base;
  int sheet;

  void operator()(const State& s, State& ds, double /*t*/) const {
    const cplx x = s[0];
    const int k = sheet + sheet_crossing(base, x);
    const cplx v = potential_eval(x, k, N);
    const cplx ix{-x.imag(), x.real()};
    ds[0] = 2.0 * s[1];
    ds[1] = (ix == cplx{0.0, 0.0}) ? cplx{0.0, 0.0} : cplx{0.0, N} * v / ix;
  }
};

using Stepper = odeint::runge_kutta_dopri5<State>;

double unwrap(double previous, double angle) {
  return previous + std::remainder(angle - previous, 2.0 * pi);
}

// Advances (x, p) by tau from a sample, with sheet bookkeeping at the end.
TrajectorySample advance(const TrajectorySample& from, double tau, double N) {
  State s{from.x, from.p};
  Flow f{N, from.x, from.sheet};
  if (tau > 0.0) {
    odeint::integrate_adaptive(odeint::make_controlled<Stepper>(1e-13, 1e-13), f, s, 0.0, tau, tau / 8.0);
  }
  TrajectorySample out = from;
  out.t = from.t + tau;
  out.x = s[0];
  out.p = s[1];
  out.sheet = from.sheet + sheet_crossing(from.x, s[0]);
  out.branch_phase = unwrap(from.branch_phase, std::arg(s[1]));
  return out;
}

double closure_gap(const TrajectorySample& s, cplx x0) { return (std::conj(s.x - x0) * s.p).real(); }

// Sheets k and k0 carry the same (ix)^N when N (k - k0) is an integer.
bool same_sheet(int k, int k0, double N) {
  return std::abs(std::remainder(N * static_cast<double>(k - k0), 1.0)) < 1e-12;
}

}  // namespace

double energy_residual(const TrajectorySample& s, double E, double N) {
  return std::abs(s.p * s.p - potential_eval(s.x, s.sheet, N) - E);
}

Trajectory integrate_trajectory(cplx x0, double E, double N, double t_max, double dt,
                                const TrajectoryOptions& opt) {
  if (!(E > 0.0)) throw DomainError("classical energy must be positive");
  if (!(N > 0.0)) throw DomainError("exponent N must be positive");
  if (!(t_max > 0.0) || !(dt > 0.0)) throw DomainError("t_max and dt must be positive");

  cplx p0;
  if (opt.p0) {
    p0 = *opt.p0;
  } else {
    p0 = std::sqrt(cplx{E, 0.0} + potential_eval(x0, 0, N));
    const bool upward = p0.imag() > 0.0 || (p0.imag() == 0.0 && p0.real() >= 0.0);
    if (upward != (opt.branch > 0)) p0 = -p0;
  }

  Trajectory traj;
  traj.E = E;
  traj.N = N;
  traj.escape_radius = 50.0 * std::pow(E, 1.0 / N);
  TrajectorySample cur{0.0, x0, p0, 0, std::arg(p0)};
  traj.samples.push_back(cur);
  traj.max_energy_residual = energy_residual(cur, E, N);

  auto controlled = odeint::make_controlled<Stepper>(opt.abs_tol, opt.rel_tol);
  const double floor = 1e-14 * std::max(1.0, t_max);
  const double quiet = 1e-4 * std::sqrt(E);  // |p| below this: near a turning point
  double h = dt;
  while (cur.t < t_max) {
    h = std::min(h, t_max - cur.t);
    if (h < floor) {
      if (t_max - cur.t < floor) break;
      throw ConvergenceError("step size underflow in classical integration", cur.x);
    }
    State s{cur.x, cur.p};
    double t = cur.t;
    Flow flow{N, cur.x, cur.sheet};
    double trial = h;
    if (controlled.try_step(flow, s, t, trial) == odeint::fail) {
      h = trial;
      continue;
    }
    TrajectorySample next{t, s[0], s[1], cur.sheet + sheet_crossing(cur.x, s[0]), 0.0};
    next.branch_phase = unwrap(cur.branch_phase, std::arg(next.p));
    const bool near_turn = std::min(std::abs(cur.p), std::abs(next.p)) < quiet;
    if (!near_turn && std::abs(next.branch_phase - cur.branch_phase) >= pi / 4.0) {
      h *= 0.5;
      continue;
    }
    h = trial;
    cur = next;
    traj.samples.push_back(cur);
    traj.max_energy_residual = std::max(traj.max_energy_residual, energy_residual(cur, E, N));
    if (std::abs(cur.x) > traj.escape_radius) {
      traj.escaped = true;
      break;
    }
  }
  return traj;
}

double period(double E, double N) {
  if (!(N >= 2.0)) throw DomainError("no closed turning-point orbits for N < 2");
  if (!(E > 0.0)) throw DomainError("classical energy must be positive");
  return 2.0 * std::pow(E, (2.0 - N) / (2.0 * N)) * std::cos((N - 2.0) * pi / (2.0 * N)) *
         std::tgamma(1.0 + 1.0 / N) * std::sqrt(pi) / std::tgamma(0.5 + 1.0 / N);
}

ClosureReport detect_closure(const Trajectory& traj, double tol) {
  ClosureReport rep;
  const auto& s = traj.samples;
  if (s.size() < 3) return rep;
  const cplx x0 = s.front().x;
  const cplx p0 = s.front().p;
  const int sheet0 = s.front().sheet;

  const TurningPoints tp = turning_points(traj.E, traj.N);
  const cplx centre = 0.5 * (tp.x_minus + tp.x_plus);
  double winding = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) winding += std::arg((s[k].x - centre) / (s[k - 1].x - centre));
  rep.turns = std::abs(winding) / (2.0 * pi);

  // Arm only after the path has moved well away from its start.
  double reach = 0.0;
  for (const auto& q : s) reach = std::max(reach, std::abs(q.x - x0));
  const double arm = std::max(10.0 * tol, 1e-3 * reach);
  bool armed = false;
  rep.closure_distance = std::numeric_limits<double>::infinity();

  // From rest at a turning point x - x0 grows like t^2, so the closest
  // approach is ill-conditioned; p returns through zero linearly instead.
  const bool from_rest = std::abs(p0) < 1e-8;
  cplx force0{1.0, 0.0};
  if (from_rest) {
    const cplx ix{-x0.imag(), x0.real()};
    force0 = cplx{0.0, traj.N} * potential_eval(x0, sheet0, traj.N) / ix;
  }
  auto gap = [&](const TrajectorySample& q) {
    return from_rest ? (std::conj(force0) * q.p).real() : closure_gap(q, x0);
  };

  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!armed) {
      armed = std::abs(s[k].x - x0) > arm;
      continue;
    }
    const double g0 = gap(s[k - 1]);
    const double g1 = gap(s[k]);
    if (!(g0 < 0.0 && g1 >= 0.0)) continue;
    if (!same_sheet(s[k - 1].sheet, sheet0, traj.N) && !same_sheet(s[k].sheet, sheet0, traj.N)) continue;

    // Bisection on the time of closest approach inside the step.
    double lo = 0.0;
    double hi = s[k].t - s[k - 1].t;
    TrajectorySample at = s[k];
    for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, s[k].t); ++it) {
      const double mid = 0.5 * (lo + hi);
      at = advance(s[k - 1], mid, traj.N);
      if (gap(at) < 0.0) lo = mid; else hi = mid;
    }
    at = advance(s[k - 1], 0.5 * (lo + hi), traj.N);
    if (!same_sheet(at.sheet, sheet0, traj.N)) continue;
    const double d = std::abs(at.x - x0);
    rep.closure_distance = std::min(rep.closure_distance, d);
    const bool same_direction = from_rest || (std::conj(p0) * at.p).real() > 0.0;
    if (d < tol && same_direction) {
      rep.closed = true;
      rep.period = at.t;
      rep.closure_distance = d;
      return rep;
    }
  }
  if (!std::isfinite(rep.closure_distance)) {
    armed = false;
    for (std::size_t k = 1; k < s.size(); ++k) {
      armed = armed || std::abs(s[k].x - x0) > arm;
      if (armed && same_sheet(s[k].sheet, sheet0, traj.N)) {
        rep.closure_distance = std::min(rep.closure_distance, std::abs(s[k].x - x0));
      }
    }
  }
  return rep;
}

Trajectory turning_point_orbit(double E, double N) {
  const double T = period(E, N);
  const TurningPoints tp = turning_points(E, N);
  TrajectoryOptions opt;
  opt.p0 = cplx{0.0, 0.0};
  Trajectory traj = integrate_trajectory(tp.x_minus, E, N, 3.0 * T, 1e-4 * T, opt);
  const ClosureReport rep = detect_closure(traj, 1e-6 * std::max(1.0, std::abs(tp.x_plus)));
  if (!rep.closed) {
    throw ConvergenceError("turning-point orbit did not return to x_- within 3 periods", traj.samples.back().x);
  }
  // Keep exactly one lap, ending at the closure point.
  const double t_close = *rep.period;
  std::size_t keep = 0;
  while (keep < traj.samples.size() && traj.samples[keep].t < t_close) ++keep;
  const TrajectorySample last = advance(traj.samples[keep - 1], t_close - traj.samples[keep - 1].t, N);
  traj.samples.resize(keep);
  traj.samples.push_back(last);
  return traj;
}

cplx time_average(const Trajectory& traj) {
  const auto& s = traj.samples;
  if (s.size() < 2) return s.empty() ? cplx{} : s.front().x;
  cplx acc{0.0, 0.0};
  for (std::size_t k = 1; k < s.size(); ++k) acc += 0.5 * (s[k].x + s[k - 1].x) * (s[k].t - s[k - 1].t);
  return acc / (s.back().t - s.front().t);
}

}  // namespace ptlab
