#include <cmath>

#include <gtest/gtest.h>

#include "ptlab/errors.hpp"
#include "ptlab/spectra.hpp"

using namespace ptlab;

TEST(Spectrum, HarmonicLevelsAreOddIntegers) {
  const SpectrumResult r = find_real_eigenvalues(2.0, 6);
  ASSERT_TRUE(r.complete);
  for (int n = 0; n < 6; ++n) {
    EXPECT_NEAR(r.pairs[n].E.real(), 2.0 * n + 1.0, 1e-6);
    EXPECT_EQ(r.pairs[n].E.imag(), 0.0);
    EXPECT_EQ(r.pairs[n].n, n);
  }
}

TEST(Spectrum, ShiftedOscillatorLevels) {
  // p^2/2 + x^2/2 + i eps x = p^2/2 + (x + i eps)^2/2 + eps^2/2.
  const double eps = 0.3;
  const SpectrumResult r = find_real_eigenvalues(Hamiltonian::shifted_oscillator(eps), 5);
  ASSERT_TRUE(r.complete);
  for (int n = 0; n < 5; ++n) EXPECT_NEAR(r.pairs[n].E.real(), n + 0.5 + 0.5 * eps * eps, 1e-6);
}

TEST(Spectrum, LevelsIncreaseWithN) {
  const SpectrumResult a = find_real_eigenvalues(2.5, 3);
  const SpectrumResult b = find_real_eigenvalues(3.5, 3);
  for (int n = 0; n < 3; ++n) EXPECT_LT(a.pairs[n].E.real(), b.pairs[n].E.real());
  for (int n = 1; n < 3; ++n) EXPECT_LT(a.pairs[n - 1].E.real(), a.pairs[n].E.real());
}

TEST(Spectrum, RayRotationLeavesLevelsUnchanged) {
  SolverConfig base;
  base.eigen_tol = 1e-11;
  const SpectrumResult ref = find_real_eigenvalues(3.0, 4, base);
  for (double offset : {0.05, -0.05}) {
    SolverConfig cfg = base;
    cfg.ray_offset = offset;
    const SpectrumResult r = find_real_eigenvalues(3.0, 4, cfg);
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(r.pairs[n].E.real(), ref.pairs[n].E.real(), 1e-7) << offset;
  }
}

TEST(Spectrum, BrokenRegionReportsPartialResult) {
  const SpectrumResult r = find_real_eigenvalues(1.3, 3);
  EXPECT_FALSE(r.complete);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_GT(r.pairs[0].E.real(), 1.0);
}

TEST(Spectrum, RejectsBadInput) {
  EXPECT_THROW(find_real_eigenvalues(2.0, 0), DomainError);
  EXPECT_THROW(find_real_eigenvalues(0.8, 2), DomainError);
}

TEST(Shooting, Rk4ConvergesAtFourthOrder) {
  const Contour c = build_contour(3.0, default_rho_max(3.0, 20.0), 400);
  const cplx E{6.0, 0.0};  // not an eigenvalue
  ShootConfig cfg;
  cfg.phase_step = 0.08;
  std::vector<cplx> w;
  for (int level = 0; level < 3; ++level) {
    cfg.refine = level;
    w.push_back(shoot(E, c, cfg).normalized_mismatch);
  }
  const double ratio = std::abs(w[0] - w[1]) / std::abs(w[1] - w[2]);
  EXPECT_GT(ratio, 13.0);
  EXPECT_LT(ratio, 19.0);
}

TEST(Shooting, MismatchIsRealOnTheRealAxis) {
  // PT symmetry of the contour makes W = 2 Re(conj(phi) phi') at x = 0.
  const Contour c = build_contour(3.0, default_rho_max(3.0, 20.0), 400);
  for (double E : {0.5, 3.0, 9.0}) {
    const MatchResult m = shoot({E, 0.0}, c);
    EXPECT_LT(std::abs(m.normalized_mismatch.imag()), 1e-12) << E;
  }
}

TEST(Shooting, TruncationEstimateBoundsRefinedChange) {
  const Contour c = build_contour(3.0, default_rho_max(3.0, 20.0), 400);
  const MatchResult m = shoot({4.0, 0.0}, c);
  EXPECT_GT(m.truncation_error, 0.0);
  EXPECT_LT(m.truncation_error, 1e-6);
}

TEST(ComplexLevels, BrokenPairIsConjugateSymmetric) {
  const EigenPair up = find_complex_eigenvalue(1.5, {5.0, 2.0});
  const EigenPair down = find_complex_eigenvalue(1.5, {5.0, -2.0});
  EXPECT_NEAR(up.E.real(), 6.6557930636, 1e-6);
  EXPECT_GT(up.E.imag(), 0.5);
  EXPECT_LT(std::abs(up.E - std::conj(down.E)), 1e-8);
  EXPECT_LT(up.residual, 1e-10);
}

TEST(ComplexLevels, NewtonFindsRealLevelsInUnbrokenRegion) {
  const EigenPair p = find_complex_eigenvalue(3.0, {11.0, 0.3});
  EXPECT_NEAR(p.E.real(), 11.3144218, 1e-6);
  EXPECT_LT(std::abs(p.E.imag()), 1e-8);
}

TEST(Eigenfunctions, HarmonicGroundStateIsGaussian) {
  const SpectrumResult r = find_real_eigenvalues(2.0, 1);
  const EigenPair p = eigenfunction(r.pairs[0], r.contour);
  const std::size_t J = r.contour.junction;
  for (std::size_t i = 0; i < r.contour.size(); i += 37) {
    const cplx x = r.contour.points[i];
    if (std::abs(x) > 4.0) continue;
    EXPECT_LT(std::abs(p.eigenfunction[i] / p.eigenfunction[J] - std::exp(-0.5 * x * x)), 1e-6);
  }
}

TEST(Eigenfunctions, PtNormsAlternate) {
  const SpectrumResult r = find_real_eigenvalues(3.0, 5);
  for (const auto& pair : r.pairs) {
    const EigenPair p = eigenfunction(pair, r.contour);
    EXPECT_FALSE(p.broken);
    EXPECT_EQ(p.pt_norm_sign, p.n % 2 == 0 ? 1 : -1);
    // PT phi = phi: phi(-x*)* = phi(x).
    double worst = 0.0;
    for (std::size_t i = 0; i < r.contour.size(); ++i) {
      worst = std::max(worst, std::abs(std::conj(p.eigenfunction[r.contour.mirror(i)]) - p.eigenfunction[i]));
    }
    EXPECT_LT(worst, 1e-9);
  }
}

TEST(Scan, ParallelMatchesSerialExactly) {
  const auto par = spectrum_scan(1.9, 2.2, 0.1, 3);
  const auto ser = spectrum_scan_serial(1.9, 2.2, 0.1, 3);
  ASSERT_EQ(par.size(), ser.size());
  for (std::size_t k = 0; k < par.size(); ++k) {
    EXPECT_EQ(par[k].N, ser[k].N);
    EXPECT_EQ(par[k].energies, ser[k].energies);
    EXPECT_EQ(par[k].merged, ser[k].merged);
  }
}

TEST(Scan, MergingPairIsFlagged) {
  const auto rows = spectrum_scan_serial(1.4, 1.45, 0.05, 3);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].energies.size(), 1u);
  ASSERT_EQ(rows[1].energies.size(), 3u);
  EXPECT_FALSE(rows[1].merged[0]);
  EXPECT_TRUE(rows[1].merged[1]);
  EXPECT_TRUE(rows[1].merged[2]);
}

TEST(Scan, RejectsEmptyGrid) {
  EXPECT_THROW(spectrum_scan(2.0, 1.5, 0.1, 2), DomainError);
  EXPECT_THROW(spectrum_scan(1.0, 1.5, 0.1, 2), DomainError);
}
