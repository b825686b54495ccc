#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "ptlab/contour.hpp"

namespace ptlab {

/// Second-order problem phi'' = Q(x, E) phi posed on a contour.
///
/// Two families are supported: H = p^2 - (ix)^N, where Q = -(ix)^N - E, and the
/// shifted oscillator H = p^2/2 + x^2/2 + i eps x, where Q = x^2 + 2 i eps x - 2E.
/// Both are PT symmetric: Q(-x*, E*) = Q(x, E)*.
class Hamiltonian {
 public:
  static Hamiltonian power(double N);
  static Hamiltonian shifted_oscillator(double eps);

  cplx coefficient(cplx x, cplx E) const;
  cplx coefficient_dx(cplx x) const;
  /// Exponent used for the Stokes wedges of this problem.
  double wedge_exponent() const { return kind_ == Kind::kPower ? N_ : 2.0; }
  bool is_power() const { return kind_ == Kind::kPower; }
  double N() const { return N_; }
  double eps() const { return eps_; }

 private:
  enum class Kind { kPower, kShifted };
  Hamiltonian(Kind k, double N, double eps) : kind_(k), N_(N), eps_(eps) {}
  Kind kind_;
  double N_;
  double eps_;
};

struct ShootConfig {
  double phase_step = 0.02;  // RK4 step in units of the local WKB wavelength scale
  int refine = 0;            // each level halves every step exactly
};

struct MatchResult {
  cplx E;
  cplx mismatch;             // W = phi_L phi_R' - phi_L' phi_R at x = 0, in units of 2^mismatch_exp2
  int mismatch_exp2 = 0;
  cplx normalized_mismatch;  // W / (|(phi_L, phi_L')| |(phi_R, phi_R')|), bounded by 1
  long steps = 0;
  double truncation_error = 0.0;  // |normalized mismatch(h) - normalized mismatch(h/2)| / 15
};

struct EigenPair {
  int n = 0;
  cplx E;
  std::vector<cplx> eigenfunction;  // samples on the contour, empty until eigenfunction() runs
  double residual = 0.0;
  int pt_norm_sign = 0;
  double pt_norm_magnitude = 0.0;   // |(phi, phi)| / sum |w| |phi|^2 before normalization
  bool broken = false;              // PT norm vanished; left unnormalized
};

struct SolverConfig {
  double eigen_tol = 1e-9;
  ShootConfig shoot{};
  int points_per_ray = 400;
  double ray_offset = 0.0;
  double rho_exponent = 35.0;
};

struct SpectrumResult {
  std::vector<EigenPair> pairs;
  bool complete = false;  // false when fewer than the requested real levels exist in the scan range
  Contour contour;
};

struct PhaseDiagramRow {
  double N = 0.0;
  std::vector<double> energies;  // strictly increasing
  std::vector<bool> merged;      // merged[k]: level k and a neighbour leave the real axis at the next lower N
};

/// Integrates both rays from rho_max to the junction and returns the Wronskian.
MatchResult shoot(cplx E, const Contour& contour, const ShootConfig& cfg = {});
MatchResult shoot(const Hamiltonian& h, cplx E, const Contour& contour, const ShootConfig& cfg = {});

/// Real eigenvalues in increasing order; partial result (complete == false) in the broken region.
SpectrumResult find_real_eigenvalues(double N, int count, const SolverConfig& cfg = {});
SpectrumResult find_real_eigenvalues(const Hamiltonian& h, int count, const SolverConfig& cfg = {});

/// Newton iteration on the analytic mismatch. Throws ConvergenceError carrying the last iterate.
EigenPair find_complex_eigenvalue(double N, cplx guess, const SolverConfig& cfg = {});

/// Rescales the shooting solution to PT phi = phi with |(phi, phi)| = 1.
EigenPair eigenfunction(const EigenPair& pair, const Contour& contour, const ShootConfig& cfg = {});
EigenPair eigenfunction(const Hamiltonian& h, const EigenPair& pair, const Contour& contour,
                        const ShootConfig& cfg = {});

/// Real levels over an N grid, rows ordered by increasing N. Parallel over N.
std::vector<PhaseDiagramRow> spectrum_scan(double N_min, double N_max, double N_step, int levels,
                                           const SolverConfig& cfg = {});
/// Single-threaded reference for spectrum_scan.
std::vector<PhaseDiagramRow> spectrum_scan_serial(double N_min, double N_max, double N_step, int levels,
                                                  const SolverConfig& cfg = {});

}  // namespace ptlab
