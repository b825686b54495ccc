#pragma once

#include "ptlab/contour.hpp"

namespace ptlab {

/// Roots of E + (ix)^N = 0 that continue off the real axis from N = 2.
/// x_plus is the PT mirror of x_minus: x_plus = -conj(x_minus).
struct TurningPoints {
  cplx x_minus;
  cplx x_plus;
  double E;
  double N;
};

TurningPoints turning_points(double E, double N);

/// Closed-form complex-WKB level. Throws DomainError for N < 2, where the
/// quantization path cannot join the turning points.
double wkb_energy(int n, double N);

/// The same closed form with no domain check. Used to seed root scans below N = 2.
double wkb_energy_unchecked(double n, double N);

/// Value of the quantization integral along x_- -> -i|x_+| -> x_+.
/// Throws DomainError when the integral is not real to 1e-4 of its modulus.
cplx quantization_integral(double E, double N, int nodes_per_segment = 64);

/// Re(integral) - (n + 1/2) pi.
double quantization_residual(double E, int n, double N);

/// Energy solving quantization_residual(E, n, N) = 0.
double solve_quantization(int n, double N, double tol = 1e-13);

}  // namespace ptlab
