#include "ptlab/ptnorm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptlab/errors.hpp"

namespace ptlab {

namespace {

void require_same_grid(const Sampled& f, const Contour& c, const char* what) {
  if (f.size() != c.size()) {
    throw std::invalid_argument(std::string(what) + ": sample count " + std::to_string(f.size()) +
                                " does not match contour size " + std::to_string(c.size()));
  }
}

void require_normalized(const std::vector<EigenPair>& pairs, const Contour& c) {
  for (const auto& p : pairs) {
    require_same_grid(p.eigenfunction, c, "eigenfunction");
    if (p.broken || p.pt_norm_sign == 0) {
      throw DomainError("eigenpair " + std::to_string(p.n) + " has no PT normalization");
    }
    // Rounding in (phi, phi) grows with the L2 norm of a PT-normalized state.
    const double l2 = contour_norm(p.eigenfunction, c);
    const cplx norm = pt_inner(p.eigenfunction, p.eigenfunction, c).value;
    if (std::abs(norm - static_cast<double>(p.pt_norm_sign)) > 1e-6 + 1e-13 * l2 * l2) {
      throw DomainError("eigenpair " + std::to_string(p.n) + " is not PT normalized");
    }
  }
}

// Coefficients a_n = sign_n * integral phi_n f dx, so that sum a_n phi_n is the
// truncated completeness expansion of f.
std::vector<cplx> expansion(const std::vector<EigenPair>& pairs, const Sampled& f, const Contour& c) {
  std::vector<cplx> a;
  a.reserve(pairs.size());
  for (const auto& p : pairs) a.push_back(static_cast<double>(p.pt_norm_sign) * bilinear(p.eigenfunction, f, c).value);
  return a;
}

Sampled synthesize(const std::vector<EigenPair>& pairs, const std::vector<cplx>& a, std::size_t size) {
  Sampled out(size, cplx{0.0, 0.0});
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    for (std::size_t i = 0; i < size; ++i) out[i] += a[n] * pairs[n].eigenfunction[i];
  }
  return out;
}

}  // namespace

SolverConfig basis_config(int levels) {
  SolverConfig cfg;
  cfg.eigen_tol = 1e-12;
  // Projector norms grow about fivefold per level at N = 3, so every two
  // extra levels need roughly one more halving of the RK4 step.
  const int halvings = std::clamp((levels - 7) / 2, 0, 6);
  cfg.shoot.phase_step = std::ldexp(0.02, -halvings);
  return cfg;
}

SpectralBasis build_basis(double N, int levels, const SolverConfig& cfg) {
  return build_basis(N, levels, cfg, wedges_contain_real_axis(N));
}

SpectralBasis build_basis(double N, int levels, const SolverConfig& cfg, bool on_real_axis) {
  SolverConfig local = cfg;
  // Off the real axis the higher eigenfunctions swell by exp(2 Im S) before
  // decaying, which costs that many digits in every contour integral.
  if (on_real_axis) local.ray_offset = wedge_angles(N).theta_right;
  SpectrumResult found = find_real_eigenvalues(N, levels, local);
  if (!found.complete) {
    throw DomainError("only " + std::to_string(found.pairs.size()) + " real levels found at N = " + std::to_string(N));
  }
  SpectralBasis basis;
  basis.contour = std::move(found.contour);
  for (const auto& p : found.pairs) {
    EigenPair e = eigenfunction(p, basis.contour, local.shoot);
    if (e.broken) throw DomainError("PT norm vanished for level " + std::to_string(e.n));
    basis.pairs.push_back(std::move(e));
  }
  return basis;
}

InnerProductValue pt_inner(const Sampled& f, const Sampled& g, const Contour& c) {
  require_same_grid(f, c, "pt_inner");
  require_same_grid(g, c, "pt_inner");
  cplx hi{0.0, 0.0};
  cplx lo{0.0, 0.0};
  for (std::size_t i = 0; i < c.size(); ++i) {
    const cplx integrand = std::conj(f[c.mirror(i)]) * g[i];
    hi += c.weights[i] * integrand;
    lo += c.embedded_weights[i] * integrand;
  }
  return {hi, std::abs(hi - lo)};
}

InnerProductValue bilinear(const Sampled& f, const Sampled& g, const Contour& c) {
  require_same_grid(f, c, "bilinear");
  require_same_grid(g, c, "bilinear");
  cplx hi{0.0, 0.0};
  cplx lo{0.0, 0.0};
  for (std::size_t i = 0; i < c.size(); ++i) {
    hi += c.weights[i] * f[i] * g[i];
    lo += c.embedded_weights[i] * f[i] * g[i];
  }
  return {hi, std::abs(hi - lo)};
}

SampledKernel build_c_kernel(const std::vector<EigenPair>& pairs, const Contour& c) {
  require_normalized(pairs, c);
  SampledKernel k;
  k.grid = c.points;
  k.levels = static_cast<int>(pairs.size());
  const std::size_t m = c.size();
  k.values.assign(m * m, cplx{0.0, 0.0});
  const long rows = static_cast<long>(m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) {
    cplx* row = k.values.data() + static_cast<std::size_t>(i) * m;
    for (const auto& p : pairs) {
      const cplx left = p.eigenfunction[i];
      for (std::size_t j = 0; j < m; ++j) row[j] += left * p.eigenfunction[j];
    }
  }
  return k;
}

SampledKernel build_c_kernel_serial(const std::vector<EigenPair>& pairs, const Contour& c) {
  require_normalized(pairs, c);
  SampledKernel k;
  k.grid = c.points;
  k.levels = static_cast<int>(pairs.size());
  const std::size_t m = c.size();
  k.values.assign(m * m, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& p : pairs) {
      for (std::size_t j = 0; j < m; ++j) k.values[i * m + j] += p.eigenfunction[i] * p.eigenfunction[j];
    }
  }
  return k;
}

Sampled apply_kernel(const SampledKernel& k, const Sampled& f, const Contour& c) {
  require_same_grid(f, c, "apply_kernel");
  const std::size_t m = c.size();
  Sampled wf(m);
  for (std::size_t j = 0; j < m; ++j) wf[j] = c.weights[j] * f[j];
  Sampled out(m);
  const long rows = static_cast<long>(m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) {
    const cplx* row = k.values.data() + static_cast<std::size_t>(i) * m;
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < m; ++j) acc += row[j] * wf[j];
    out[i] = acc;
  }
  return out;
}

Sampled apply_kernel_serial(const SampledKernel& k, const Sampled& f, const Contour& c) {
  require_same_grid(f, c, "apply_kernel");
  const std::size_t m = c.size();
  Sampled out(m);
  for (std::size_t i = 0; i < m; ++i) {
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < m; ++j) acc += k(i, j) * (c.weights[j] * f[j]);
    out[i] = acc;
  }
  return out;
}

InnerProductValue cpt_inner(const Sampled& psi, const Sampled& chi, const Contour& c, const SampledKernel& k) {
  require_same_grid(psi, c, "cpt_inner");
  require_same_grid(chi, c, "cpt_inner");
  if (k.size() != c.size()) throw std::invalid_argument("cpt_inner: kernel grid does not match contour");
  Sampled pt(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) pt[i] = std::conj(psi[c.mirror(i)]);
  const Sampled conj_state = apply_kernel(k, pt, c);
  return bilinear(conj_state, chi, c);
}

Sampled completeness_action(const std::vector<EigenPair>& pairs, const Sampled& f, const Contour& c) {
  require_same_grid(f, c, "completeness_action");
  return synthesize(pairs, expansion(pairs, f, c), c.size());
}

double verify_completeness(const std::vector<EigenPair>& pairs, const Contour& c, const TestFunction& f) {
  const Sampled samples = sample(f, c);
  return max_abs_diff(completeness_action(pairs, samples, c), samples);
}

ParityResult parity_action(const std::vector<EigenPair>& pairs, const Contour& c, const TestFunction& f) {
  // integral phi_n(-y) f(y) dy = integral phi_n(y) f(-y) dy after y -> -y and
  // deforming back onto the contour, so P_K f is the expansion of f(-y).
  const TestFunction reflected = [&f](cplx z) { return f(-z); };
  ParityResult r;
  r.values = completeness_action(pairs, sample(reflected, c), c);
  r.residual = max_abs_diff(r.values, sample(reflected, c));
  const Sampled twice = completeness_action(pairs, sample(f, c), c);
  r.square_residual = max_abs_diff(twice, sample(f, c));
  return r;
}

std::vector<cplx> pt_gram(const SpectralBasis& basis) {
  const std::size_t k = basis.pairs.size();
  std::vector<cplx> g(k * k);
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t n = 0; n < k; ++n) {
      g[m * k + n] = pt_inner(basis.pairs[m].eigenfunction, basis.pairs[n].eigenfunction, basis.contour).value;
    }
  }
  return g;
}

cplx expectation_x_ground(const SpectralBasis& basis, const SampledKernel& c_kernel) {
  const Contour& c = basis.contour;
  const Sampled& ground = basis.pairs.at(0).eigenfunction;
  Sampled x_ground(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) x_ground[i] = c.points[i] * ground[i];
  const cplx num = cpt_inner(ground, x_ground, c, c_kernel).value;
  const cplx den = cpt_inner(ground, ground, c, c_kernel).value;
  return num / den;
}

cplx expectation_x_ground(double N, int levels) { return expectation_x_ground(N, levels, basis_config(levels)); }

cplx expectation_x_ground(double N, int levels, const SolverConfig& cfg) {
  const SpectralBasis basis = build_basis(N, levels, cfg);
  return expectation_x_ground(basis, build_c_kernel(basis.pairs, basis.contour));
}

Sampled sample(const TestFunction& f, const Contour& c) {
  Sampled s(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) s[i] = f(c.points[i]);
  return s;
}

double contour_norm(const Sampled& f, const Contour& c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += std::abs(c.weights[i]) * std::norm(f[i]);
  return std::sqrt(acc);
}

double max_abs_diff(const Sampled& a, const Sampled& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace ptlab
