#pragma once

#include <functional>
#include <vector>

#include "ptlab/contour.hpp"
#include "ptlab/spectra.hpp"

namespace ptlab {

using Sampled = std::vector<cplx>;
using TestFunction = std::function<cplx(cplx)>;

struct InnerProductValue {
  cplx value;
  double error;  // |Kronrod - embedded Gauss|
};

/// Dense kernel K(x_i, y_j) on the contour samples, row-major.
struct SampledKernel {
  std::vector<cplx> grid;
  std::vector<cplx> values;
  int levels = 0;

  std::size_t size() const { return grid.size(); }
  cplx operator()(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
};

/// Eigenpairs with PT-normalized eigenfunctions on a shared contour.
struct SpectralBasis {
  Contour contour;
  std::vector<EigenPair> pairs;
};

/// Solver settings that keep K-level bases accurate despite the growth of
/// the spectral projector norms with level.
SolverConfig basis_config(int levels);

/// Uses the real axis as contour whenever it lies inside both Stokes wedges.
SpectralBasis build_basis(double N, int levels, const SolverConfig& cfg = {});
/// on_real_axis overrides cfg.ray_offset; it requires the real axis inside the wedges.
SpectralBasis build_basis(double N, int levels, const SolverConfig& cfg, bool on_real_axis);

/// (f, g) = integral of [f(-x*)]* g(x) dx along the contour.
InnerProductValue pt_inner(const Sampled& f, const Sampled& g, const Contour& c);

/// Plain bilinear integral of f(x) g(x) dx along the contour.
InnerProductValue bilinear(const Sampled& f, const Sampled& g, const Contour& c);

/// C_K(x, y) = sum_{n<K} phi_n(x) phi_n(y). Rows assembled in parallel.
SampledKernel build_c_kernel(const std::vector<EigenPair>& pairs, const Contour& c);
SampledKernel build_c_kernel_serial(const std::vector<EigenPair>& pairs, const Contour& c);

/// (K f)(x_i) = sum_j K(x_i, y_j) w_j f(y_j).
Sampled apply_kernel(const SampledKernel& k, const Sampled& f, const Contour& c);
Sampled apply_kernel_serial(const SampledKernel& k, const Sampled& f, const Contour& c);

/// <psi|chi> = integral of psi^CPT(x) chi(x) dx with psi^CPT = C applied to PT psi.
InnerProductValue cpt_inner(const Sampled& psi, const Sampled& chi, const Contour& c, const SampledKernel& k);

/// sum_n (-1)^n phi_n(x) integral phi_n(y) f(y) dy.
Sampled completeness_action(const std::vector<EigenPair>& pairs, const Sampled& f, const Contour& c);

/// max_x |completeness_action(f) - f|.
double verify_completeness(const std::vector<EigenPair>& pairs, const Contour& c, const TestFunction& f);

struct ParityResult {
  Sampled values;             // P_K f on the contour
  double residual;            // max_x |P_K f(x) - f(-x)|
  double square_residual;     // max_x |P_K (P f)(x) - f(x)|
};

/// P_K(x, y) = sum_n (-1)^n phi_n(x) phi_n(-y) applied to an analytic test function.
ParityResult parity_action(const std::vector<EigenPair>& pairs, const Contour& c, const TestFunction& f);

/// Gram matrix of the PT inner product over the basis, row-major.
std::vector<cplx> pt_gram(const SpectralBasis& basis);

/// Ground-state <x> under the CPT inner product, K levels in the C kernel.
cplx expectation_x_ground(double N, int levels = 12);
cplx expectation_x_ground(double N, int levels, const SolverConfig& cfg);
cplx expectation_x_ground(const SpectralBasis& basis, const SampledKernel& c_kernel);

Sampled sample(const TestFunction& f, const Contour& c);
/// L2 norm along the contour with |dx| weights.
double contour_norm(const Sampled& f, const Contour& c);
double max_abs_diff(const Sampled& a, const Sampled& b);

}  // namespace ptlab
