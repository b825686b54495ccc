#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ptlab/errors.hpp"
#include "ptlab/matrix2.hpp"

using namespace ptlab;

namespace {

// Plain Taylor series; Q is small enough here that 60 terms are exact to rounding.
Mat2 expm_taylor(const Mat2& q) {
  Mat2 sum = identity2();
  Mat2 term = identity2();
  for (int k = 1; k < 60; ++k) {
    term = term * q;
    for (auto& row : term)
      for (auto& v : row) v /= static_cast<double>(k);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) sum[i][j] += term[i][j];
  }
  return sum;
}

Mat2 scaled(const Mat2& a, c2 s) {
  Mat2 out = a;
  for (auto& row : out)
    for (auto& v : row) v *= s;
  return out;
}

const MatrixModel kModels[] = {{1.0, 2.0, 0.7}, {0.5, 1.0, -1.1}, {3.0, 2.5, 0.4}, {1.0, 1.0, 0.0}};

}  // namespace

TEST(Matrix2, EigenvaluesSolveCharacteristicPolynomial) {
  for (const auto& m : kModels) {
    const Eigensystem2 e = eigensystem(m);
    const Mat2 h = m.hamiltonian();
    const c2 tr = h[0][0] + h[1][1];
    const c2 det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    for (c2 lam : {e.eps_plus, e.eps_minus}) EXPECT_LT(std::abs(lam * lam - tr * lam + det), 1e-12);
    EXPECT_FALSE(e.broken);
    EXPECT_LT(std::abs(e.eps_plus.imag()), 1e-15);
    // r cos(theta) +- s cos(alpha)
    EXPECT_NEAR(e.eps_plus.real(), m.r * std::cos(m.theta) + m.s * std::cos(m.alpha()), 1e-12);
  }
}

TEST(Matrix2, CIsAnInvolutionCommutingWithH) {
  for (const auto& m : kModels) {
    const Mat2 c = c_matrix(m);
    const Mat2 h = m.hamiltonian();
    EXPECT_LT(max_abs_diff(c * c, identity2()), 1e-13);
    EXPECT_LT(max_abs_diff(c * h, h * c), 1e-13);
    const Eigensystem2 e = eigensystem(m);
    const Vec2 cp = c * e.plus, cm = c * e.minus;
    for (int i = 0; i < 2; ++i) {
      EXPECT_LT(std::abs(cp[i] - e.plus[i]), 1e-13);
      EXPECT_LT(std::abs(cm[i] + e.minus[i]), 1e-13);
    }
    EXPECT_NEAR(pt_inner_2(e.plus, e.plus).real(), 1.0, 1e-13);
    EXPECT_NEAR(pt_inner_2(e.minus, e.minus).real(), -1.0, 1e-13);
    EXPECT_LT(std::abs(pt_inner_2(e.plus, e.minus)), 1e-13);
  }
}

TEST(Matrix2, CptNormIsPositiveAndMatchesClosedForm) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> th(-1.5, 1.5);
  for (int k = 0; k < 500; ++k) {
    MatrixModel m{std::abs(u(rng)), 2.5, th(rng)};
    const Vec2 psi{c2{u(rng), u(rng)}, c2{u(rng), u(rng)}};
    const double n = cpt_norm(psi, m);
    EXPECT_GT(n, 0.0);
    EXPECT_NEAR(n, cpt_norm_closed_form(psi, m), 1e-12 * std::max(1.0, n));
  }
}

TEST(Matrix2, CompletenessAndExponentialForm) {
  for (const auto& m : kModels) {
    const Completeness2 c = completeness_2(m);
    EXPECT_LT(c.identity_error, 1e-13);
    EXPECT_LT(c.c_error, 1e-13);
    EXPECT_LT(max_abs_diff(exp_q(m), expm_taylor(q_matrix(m))), 1e-12);
    EXPECT_LT(max_abs_diff(exp_q(m) * parity2(), c_matrix(m)), 1e-13);
    EXPECT_TRUE(is_observable_2(m.hamiltonian(), m));
    EXPECT_TRUE(is_observable_2(c_matrix(m), m));
  }
}

TEST(Matrix2, HermitianLimitGivesParity) {
  const MatrixModel m{1.0, 2.0, 0.0};
  EXPECT_LT(max_abs_diff(c_matrix(m), parity2()), 1e-15);
  EXPECT_LT(max_abs(q_matrix(m)), 1e-15);
}

TEST(Matrix2, NonObservableIsDetected) {
  // At theta = 0, C P = 1, so the condition reduces to A^T = A*.
  const MatrixModel m{1.0, 2.0, 0.0};
  const Mat2 raise{{{0.0, 1.0}, {0.0, 0.0}}};
  EXPECT_FALSE(is_observable_2(raise, m));
  EXPECT_FALSE(is_observable_2(scaled(identity2(), c2{0.0, 1.0}), m));
}

TEST(Matrix2, BrokenAndExceptionalRegionsThrow) {
  const MatrixModel broken{2.0, 1.0, 1.2};
  EXPECT_FALSE(broken.unbroken());
  EXPECT_TRUE(eigensystem(broken).broken);
  EXPECT_NE(eigensystem(broken).eps_plus.imag(), 0.0);
  EXPECT_THROW(c_matrix(broken), DomainError);
  EXPECT_THROW(broken.alpha(), DomainError);

  const MatrixModel ep{2.0, 1.0, std::asin(0.5)};
  EXPECT_TRUE(ep.exceptional());
  EXPECT_THROW(c_matrix(ep), DomainError);
  EXPECT_THROW(q_matrix(ep), DomainError);
}
