#include "ptlab/spectra.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "ptlab/errors.hpp"
#include "ptlab/semiclassic.hpp"

namespace ptlab {

namespace {

constexpr double pi = std::numbers::pi;

struct RayState {
  cplx phi;
  cplx dphi;  // derivative with respect to x
};

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Integrates phi'' = Q phi inward along x = r * dir from r = rho to r = 0,
// stopping at every radius in `radii` (increasing). Starts from the
// subdominant WKB solution at rho.
// The state is kept in range by exact powers of two; the true solution is the
// returned state times 2^exp2.
RayState integrate_ray(const Hamiltonian& h, cplx E, cplx dir, double rho, const std::vector<double>& radii,
                       const ShootConfig& cfg, std::vector<RayState>* samples, long& steps, int& exp2) {
  exp2 = 0;
  std::vector<int> sample_exp;
  if (samples) sample_exp.assign(radii.size(), 0);
  auto rescale = [&](RayState& st) {
    const double size = std::max(std::abs(st.phi), std::abs(st.dphi));
    if (!(size > 0x1p200) || !std::isfinite(size)) return;
    const int e = std::ilogb(size);
    st.phi = std::ldexp(st.phi.real(), -e) + cplx{0.0, std::ldexp(st.phi.imag(), -e)};
    st.dphi = std::ldexp(st.dphi.real(), -e) + cplx{0.0, std::ldexp(st.dphi.imag(), -e)};
    exp2 += e;
  };
  cplx x = rho * dir;
  cplx q = h.coefficient(x, E);
  cplx root = std::sqrt(q);
  if ((root * dir).real() < 0.0) root = -root;
  RayState s{1.0, -root - h.coefficient_dx(x) / (4.0 * q)};

  if (samples) samples->assign(radii.size(), RayState{});
  double r = rho;
  for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(radii.size()); k >= 0; --k) {
    const double target = k > 0 ? radii[k - 1] : 0.0;
    const double span = r - target;
    if (span > 0.0) {
      const cplx q_end = h.coefficient(target * dir, E);
      const double scale = 1.0 + std::sqrt(std::max(std::abs(q), std::abs(q_end)));
      long m = std::max(1L, static_cast<long>(std::ceil(span * scale / cfg.phase_step)));
      m <<= cfg.refine;
      const double dr = -span / static_cast<double>(m);
      cplx q0 = q;
      for (long j = 0; j < m; ++j) {
        const double r0 = r + j * dr;
        const double r1 = (j + 1 == m) ? target : r0 + dr;
        const cplx qh = h.coefficient((r0 + 0.5 * dr) * dir, E);
        const cplx q1 = (j + 1 == m) ? q_end : h.coefficient(r1 * dir, E);
        // dphi/dr = dir * dphi_x, d(dphi_x)/dr = dir * Q * phi
        const cplx k1a = dir * s.dphi, k1b = dir * q0 * s.phi;
        const cplx p2 = s.phi + 0.5 * dr * k1a, d2 = s.dphi + 0.5 * dr * k1b;
        const cplx k2a = dir * d2, k2b = dir * qh * p2;
        const cplx p3 = s.phi + 0.5 * dr * k2a, d3 = s.dphi + 0.5 * dr * k2b;
        const cplx k3a = dir * d3, k3b = dir * qh * p3;
        const cplx p4 = s.phi + dr * k3a, d4 = s.dphi + dr * k3b;
        const cplx k4a = dir * d4, k4b = dir * q1 * p4;
        s.phi += dr / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        s.dphi += dr / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        q0 = q1;
        rescale(s);
      }
      steps += m;
      r = target;
      q = q_end;
      if (!finite(s.phi) || !finite(s.dphi)) throw OverflowError("shooting solution overflowed", r);
    }
    if (k > 0 && samples) {
      (*samples)[k - 1] = s;
      sample_exp[k - 1] = exp2;
    }
  }
  if (samples) {
    // Express every sample in units of the final state; far samples may underflow to zero.
    for (std::size_t k = 0; k < samples->size(); ++k) {
      const int shift = sample_exp[k] - exp2;
      if (shift == 0) continue;
      auto& st = (*samples)[k];
      st.phi = {std::ldexp(st.phi.real(), shift), std::ldexp(st.phi.imag(), shift)};
      st.dphi = {std::ldexp(st.dphi.real(), shift), std::ldexp(st.dphi.imag(), shift)};
    }
  }
  return s;
}

struct Shot {
  MatchResult match;
  RayState left;
  RayState right;
};

Shot shoot_rays(const Hamiltonian& h, cplx E, const Contour& c, const ShootConfig& cfg,
                std::vector<RayState>* left_samples, std::vector<RayState>* right_samples) {
  const auto radii = c.ray_radii();
  const cplx dir_right = std::polar(1.0, c.theta_right);
  const cplx dir_left = std::polar(1.0, c.theta_left);
  Shot shot;
  long steps = 0;
  int exp_right = 0, exp_left = 0;
  shot.right = integrate_ray(h, E, dir_right, c.rho_max, radii, cfg, right_samples, steps, exp_right);
  shot.left = integrate_ray(h, E, dir_left, c.rho_max, radii, cfg, left_samples, steps, exp_left);
  shot.match.mismatch_exp2 = exp_right + exp_left;
  const cplx w = shot.left.phi * shot.right.dphi - shot.left.dphi * shot.right.phi;
  const double scale = std::hypot(std::abs(shot.left.phi), std::abs(shot.left.dphi)) *
                       std::hypot(std::abs(shot.right.phi), std::abs(shot.right.dphi));
  shot.match.E = E;
  shot.match.mismatch = w;
  shot.match.normalized_mismatch = scale > 0.0 ? w / scale : w;
  shot.match.steps = steps;
  return shot;
}

double real_mismatch(const Hamiltonian& h, double E, const Contour& c, const ShootConfig& cfg) {
  return shoot_rays(h, {E, 0.0}, c, cfg, nullptr, nullptr).match.normalized_mismatch.real();
}

// Bracketed secant (Illinois) refinement of a sign change of f on [a, b].
template <class F>
double refine_root(F&& f, double a, double b, double fa, double fb, double tol) {
  int side = 0;
  double c = a;
  for (int it = 0; it < 200; ++it) {
    c = (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if (fa * fc < 0.0) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (std::abs(b - a) < tol) break;
  }
  return (a * fb - b * fa) / (fb - fa);
}

// Golden-section minimum of sign * f on [a, b]; returns the abscissa.
template <class F>
double golden_min(F&& f, double a, double b, double sign, int iterations = 40) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = sign * f(x1);
  double f2 = sign * f(x2);
  for (int it = 0; it < iterations; ++it) {
    if (f1 < 0.0) return x1;
    if (f2 < 0.0) return x2;
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = sign * f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = sign * f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

struct ScanPlan {
  double step;
  double target;  // energy by which `count` levels are expected
  double limit;   // hard stop
  double e_max;   // energy used to size the contour
};

ScanPlan plan_scan(const Hamiltonian& h, int count) {
  if (!h.is_power()) {
    // Shifted oscillator: levels n + 1/2 + eps^2/2, unit spacing.
    const double top = count + 0.5 + 0.5 * h.eps() * h.eps();
    return {0.125, top + 1.0, top + 4.0, top + 4.0};
  }
  const double N = h.N();
  double min_gap = std::numeric_limits<double>::infinity();
  for (int n = 0; n + 1 < std::max(count, 2); ++n) {
    min_gap = std::min(min_gap, wkb_energy_unchecked(n + 1, N) - wkb_energy_unchecked(n, N));
  }
  const double top = wkb_energy_unchecked(count - 1, N);
  const double gap_top = wkb_energy_unchecked(count, N) - top;
  const double target = 1.25 * top + gap_top;
  // Below N = 2 the ground state moves up as N -> 1 and the WKB seed is only a scale.
  const double limit = N >= 2.0 ? 2.0 * target : std::max(3.0 * target, 20.0);
  return {min_gap / 8.0, target, limit, limit};
}

}  // namespace

Hamiltonian Hamiltonian::power(double N) {
  const PotentialSpec checked(N);
  return {Kind::kPower, checked.N, 0.0};
}

Hamiltonian Hamiltonian::shifted_oscillator(double eps) { return {Kind::kShifted, 2.0, eps}; }

cplx Hamiltonian::coefficient(cplx x, cplx E) const {
  if (kind_ == Kind::kPower) return -potential_eval(x, 0, N_) - E;
  return x * x + cplx{0.0, 2.0 * eps_} * x - 2.0 * E;
}

cplx Hamiltonian::coefficient_dx(cplx x) const {
  if (kind_ == Kind::kPower) {
    if (x == cplx{0.0, 0.0}) return {0.0, 0.0};
    // d/dx (ix)^N = N i (ix)^(N-1) = N (ix)^N / x
    return -N_ * potential_eval(x, 0, N_) / x;
  }
  return 2.0 * x + cplx{0.0, 2.0 * eps_};
}

MatchResult shoot(cplx E, const Contour& contour, const ShootConfig& cfg) {
  return shoot(Hamiltonian::power(contour.N), E, contour, cfg);
}

MatchResult shoot(const Hamiltonian& h, cplx E, const Contour& contour, const ShootConfig& cfg) {
  if (!finite(E)) throw DomainError("energy must be finite");
  MatchResult coarse = shoot_rays(h, E, contour, cfg, nullptr, nullptr).match;
  ShootConfig fine = cfg;
  fine.refine += 1;
  const MatchResult refined = shoot_rays(h, E, contour, fine, nullptr, nullptr).match;
  coarse.truncation_error = std::abs(coarse.normalized_mismatch - refined.normalized_mismatch) / 15.0;
  return coarse;
}

SpectrumResult find_real_eigenvalues(double N, int count, const SolverConfig& cfg) {
  return find_real_eigenvalues(Hamiltonian::power(N), count, cfg);
}

SpectrumResult find_real_eigenvalues(const Hamiltonian& h, int count, const SolverConfig& cfg) {
  if (count < 1) throw DomainError("level count must be positive");
  const ScanPlan plan = plan_scan(h, count);
  const double wedge_N = h.wedge_exponent();
  auto contour_for = [&](double e_top) {
    const double e_scale = h.is_power() ? e_top : 2.0 * e_top;
    return build_contour(wedge_N, default_rho_max(wedge_N, e_scale, cfg.rho_exponent, cfg.ray_offset),
                         cfg.points_per_ray, cfg.ray_offset);
  };

  // Below N = 2 the scan range is wide compared with the levels in it, so each
  // energy window gets a contour sized for its own top.
  const bool windowed = h.is_power() && h.N() < 2.0;
  std::vector<double> tops;
  if (windowed) {
    for (double top = std::min(8.0, plan.limit);; top = std::min(2.0 * top, plan.limit)) {
      tops.push_back(top);
      if (top >= plan.limit) break;
    }
  } else {
    tops.push_back(plan.e_max);
  }

  struct Bracket {
    double a, b;
    std::size_t window;
  };
  std::vector<Bracket> brackets;
  std::vector<Contour> contours;
  double e_prev2 = 0.0, f_prev2 = 0.0;
  double e_prev = 0.0;
  double f_prev = 0.0;
  bool have_prev2 = false;
  long k = 1;
  for (std::size_t w = 0; w < tops.size() && static_cast<int>(brackets.size()) < count; ++w) {
    contours.push_back(contour_for(tops[w]));
    const Contour& c = contours.back();
    auto f = [&](double E) { return real_mismatch(h, E, c, cfg.shoot); };
    // Values from the previous window are re-evaluated on this contour.
    f_prev = f(e_prev);
    if (have_prev2) f_prev2 = f(e_prev2);
    for (double E = k * plan.step; E <= tops[w]; E = (++k) * plan.step) {
      const double fe = f(E);
      if (f_prev * fe < 0.0 || fe == 0.0) {
        brackets.push_back({e_prev, E, w});
      } else if (have_prev2 && f_prev2 * f_prev > 0.0 && std::abs(f_prev) < std::abs(f_prev2) &&
                 std::abs(f_prev) < std::abs(fe) && std::abs(f_prev) < 0.2) {
        // |f| dips toward zero without a sign change: look for a close pair of roots.
        const double sign = f_prev > 0.0 ? 1.0 : -1.0;
        const double e_min = golden_min(f, e_prev2, E, sign);
        if (sign * f(e_min) < 0.0) {
          brackets.push_back({e_prev2, e_min, w});
          brackets.push_back({e_min, E, w});
        }
      }
      e_prev2 = e_prev;
      f_prev2 = f_prev;
      have_prev2 = true;
      e_prev = E;
      f_prev = fe;
      if (static_cast<int>(brackets.size()) >= count && k >= 4) break;
    }
  }
  std::sort(brackets.begin(), brackets.end(), [](const Bracket& x, const Bracket& y) { return x.a < y.a; });

  SpectrumResult out;
  for (const auto& br : brackets) {
    if (static_cast<int>(out.pairs.size()) >= count) break;
    const Contour& c = contours[br.window];
    auto f = [&](double E) { return real_mismatch(h, E, c, cfg.shoot); };
    // A sign change smaller than the discretization error is not a level.
    const MatchResult ma = shoot(h, {br.a, 0.0}, c, cfg.shoot);
    const MatchResult mb = shoot(h, {br.b, 0.0}, c, cfg.shoot);
    const double noise = 10.0 * std::max(ma.truncation_error, mb.truncation_error);
    if (std::abs(ma.normalized_mismatch.real()) < noise && std::abs(mb.normalized_mismatch.real()) < noise) continue;
    const double root = refine_root(f, br.a, br.b, ma.normalized_mismatch.real(), mb.normalized_mismatch.real(),
                                    cfg.eigen_tol * 0.01);
    EigenPair p;
    p.n = static_cast<int>(out.pairs.size());
    p.E = {root, 0.0};
    p.residual = std::abs(shoot_rays(h, p.E, c, cfg.shoot, nullptr, nullptr).match.normalized_mismatch);
    out.pairs.push_back(std::move(p));
  }
  out.complete = static_cast<int>(out.pairs.size()) == count;
  // The widest contour scanned serves every level found.
  out.contour = std::move(contours.back());
  return out;
}

EigenPair find_complex_eigenvalue(double N, cplx guess, const SolverConfig& cfg) {
  const Hamiltonian h = Hamiltonian::power(N);
  const Contour c = build_contour(N, default_rho_max(N, 2.0 * std::abs(guess) + 1.0, cfg.rho_exponent, cfg.ray_offset),
                                  cfg.points_per_ray, cfg.ray_offset);
  // W in units of 2^ref, fixed at the first evaluation, so that it stays analytic in E.
  std::optional<int> ref;
  auto w = [&](cplx E) {
    const MatchResult m = shoot_rays(h, E, c, cfg.shoot, nullptr, nullptr).match;
    if (!ref) ref = m.mismatch_exp2;
    const int shift = m.mismatch_exp2 - *ref;
    return cplx{std::ldexp(m.mismatch.real(), shift), std::ldexp(m.mismatch.imag(), shift)};
  };
  cplx E = guess;
  for (int it = 0; it < 60; ++it) {
    const double dh = 1e-5 * std::max(1.0, std::abs(E));
    const cplx wE = w(E);
    const cplx deriv = (w(E + dh) - w(E - dh)) / (2.0 * dh);
    if (deriv == cplx{0.0, 0.0}) break;
    cplx step = wE / deriv;
    const double cap = 0.25 * std::max(1.0, std::abs(E));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    E -= step;
    if (std::abs(step) < cfg.eigen_tol * 1e-2 * std::max(1.0, std::abs(E))) {
      EigenPair p;
      p.E = E;
      p.residual = std::abs(shoot_rays(h, E, c, cfg.shoot, nullptr, nullptr).match.normalized_mismatch);
      return p;
    }
  }
  throw ConvergenceError("Newton iteration on the mismatch did not converge", E);
}

EigenPair eigenfunction(const EigenPair& pair, const Contour& contour, const ShootConfig& cfg) {
  return eigenfunction(Hamiltonian::power(contour.N), pair, contour, cfg);
}

EigenPair eigenfunction(const Hamiltonian& h, const EigenPair& pair, const Contour& c, const ShootConfig& cfg) {
  std::vector<RayState> left;
  std::vector<RayState> right;
  const Shot shot = shoot_rays(h, pair.E, c, cfg, &left, &right);

  // Scale the left solution onto the right one at the junction.
  const cplx num = std::conj(shot.left.phi) * shot.right.phi + std::conj(shot.left.dphi) * shot.right.dphi;
  const double den = std::norm(shot.left.phi) + std::norm(shot.left.dphi);
  const cplx ratio = num / den;

  const std::size_t J = c.junction;
  std::vector<cplx> phi(c.size());
  phi[J] = shot.right.phi;
  for (std::size_t k = 0; k < right.size(); ++k) {
    phi[J + 1 + k] = right[k].phi;
    phi[J - 1 - k] = ratio * left[k].phi;
  }
  cplx junction_d = shot.right.dphi;

  // PT phi = mu phi; rotating by sqrt(mu) makes the state PT-invariant.
  cplx overlap{0.0, 0.0};
  double l2 = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double wi = std::abs(c.weights[i]);
    overlap += wi * std::conj(phi[i]) * std::conj(phi[c.mirror(i)]);
    l2 += wi * std::norm(phi[i]);
  }
  const cplx mu = overlap / l2;
  cplx rot = std::sqrt(mu / std::abs(mu));
  cplx at_junction = rot * phi[J];
  cplx d_junction = rot * junction_d;
  const double size = std::sqrt(l2);
  const bool use_value = std::abs(at_junction) > 1e-6 * std::max(size, std::abs(d_junction));
  if ((use_value && at_junction.real() < 0.0) || (!use_value && d_junction.imag() < 0.0)) rot = -rot;
  for (auto& v : phi) v *= rot;

  cplx pt_norm{0.0, 0.0};
  l2 = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    pt_norm += c.weights[i] * std::conj(phi[c.mirror(i)]) * phi[i];
    l2 += std::abs(c.weights[i]) * std::norm(phi[i]);
  }

  EigenPair out = pair;
  out.pt_norm_magnitude = std::abs(pt_norm) / l2;
  if (out.pt_norm_magnitude < 1e-12) {
    out.broken = true;
    out.pt_norm_sign = 0;
    out.eigenfunction = std::move(phi);
    return out;
  }
  const double scale = 1.0 / std::sqrt(std::abs(pt_norm));
  for (auto& v : phi) v *= scale;
  out.pt_norm_sign = pt_norm.real() > 0.0 ? 1 : -1;
  out.eigenfunction = std::move(phi);
  return out;
}

namespace {

PhaseDiagramRow scan_row(double N, int levels, const SolverConfig& cfg) {
  PhaseDiagramRow row;
  row.N = N;
  const SpectrumResult r = find_real_eigenvalues(N, levels, cfg);
  for (const auto& p : r.pairs) row.energies.push_back(p.E.real());
  row.merged.assign(row.energies.size(), false);
  return row;
}

// A pair merges between rows k and k-1 (lower N) when two adjacent levels of
// row k have no nearby counterpart in row k-1.
void flag_merges(std::vector<PhaseDiagramRow>& rows) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& lower = rows[k - 1].energies;
    auto& upper = rows[k];
    const std::size_t vanished = upper.energies.size() > lower.size() ? upper.energies.size() - lower.size() : 0;
    if (vanished < 2) continue;
    // Track by order: surviving levels keep their index, the top ones vanish.
    // Flag the closest adjacent pair among the vanished levels.
    const std::size_t first = lower.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t at = first;
    for (std::size_t i = first; i + 1 < upper.energies.size(); ++i) {
      const double gap = upper.energies[i + 1] - upper.energies[i];
      if (gap < best) {
        best = gap;
        at = i;
      }
    }
    if (at + 1 < upper.energies.size()) upper.merged[at] = upper.merged[at + 1] = true;
  }
}

std::vector<double> n_grid(double N_min, double N_max, double N_step) {
  if (!(N_min > 1.0 && N_max > N_min && N_step > 0.0)) throw DomainError("scan needs 1 < N_min < N_max and step > 0");
  std::vector<double> grid;
  const long count = static_cast<long>(std::floor((N_max - N_min) / N_step + 1e-9));
  for (long k = 0; k <= count; ++k) grid.push_back(N_min + k * N_step);
  return grid;
}

}  // namespace

std::vector<PhaseDiagramRow> spectrum_scan(double N_min, double N_max, double N_step, int levels,
                                           const SolverConfig& cfg) {
  const auto grid = n_grid(N_min, N_max, N_step);
  std::vector<PhaseDiagramRow> rows(grid.size());
  const long n = static_cast<long>(grid.size());
  // Exceptions cannot leave the parallel region; the lowest failing N is rethrown.
  std::vector<std::exception_ptr> errors(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < n; ++k) {
    try {
      rows[k] = scan_row(grid[k], levels, cfg);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  flag_merges(rows);
  return rows;
}

std::vector<PhaseDiagramRow> spectrum_scan_serial(double N_min, double N_max, double N_step, int levels,
                                                  const SolverConfig& cfg) {
  const auto grid = n_grid(N_min, N_max, N_step);
  std::vector<PhaseDiagramRow> rows;
  rows.reserve(grid.size());
  for (double N : grid) rows.push_back(scan_row(N, levels, cfg));
  flag_merges(rows);
  return rows;
}

}  // namespace ptlab
