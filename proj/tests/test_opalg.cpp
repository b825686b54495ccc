#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ptlab/errors.hpp"
#include "ptlab/opalg.hpp"

using namespace ptlab;

namespace {

GaussRational q(long a, long b = 1) { return GaussRational(mpq_class(a, b)); }

// Normal-orders a word in x and p by repeated use of p x = x p - i.
void normal_order(std::vector<char> word, const GaussRational& c, NormalPoly& out) {
  for (std::size_t k = 0; k + 1 < word.size(); ++k) {
    if (word[k] == 'p' && word[k + 1] == 'x') {
      std::vector<char> swapped = word;
      std::swap(swapped[k], swapped[k + 1]);
      normal_order(swapped, c, out);
      std::vector<char> contracted = word;
      contracted.erase(contracted.begin() + k, contracted.begin() + k + 2);
      normal_order(contracted, c * GaussRational(0, -1), out);
      return;
    }
  }
  int a = 0;
  for (char ch : word) a += ch == 'x';
  out.add(a, static_cast<int>(word.size()) - a, c);
}

// Sum over all distinct orderings of m p's and n x's.
NormalPoly word_sum(int m, int n) {
  std::vector<char> word(m, 'p');
  word.insert(word.end(), n, 'x');
  std::sort(word.begin(), word.end());
  NormalPoly out;
  do {
    normal_order(word, 1, out);
  } while (std::next_permutation(word.begin(), word.end()));
  return out;
}

long binomial(int n, int k) {
  long r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

SymPoly random_poly(std::mt19937& rng) {
  std::uniform_int_distribution<int> deg(0, 3), num(-5, 5), den(1, 4);
  SymPoly a;
  for (int t = 0; t < 3; ++t) a.add(deg(rng), deg(rng), GaussRational(mpq_class(num(rng), den(rng)), mpq_class(num(rng), den(rng))));
  return a;
}

SymPoly real_poly(std::mt19937& rng) {
  std::uniform_int_distribution<int> deg(0, 3), num(-5, 5);
  SymPoly a;
  for (int t = 0; t < 3; ++t) a.add(deg(rng), deg(rng), num(rng));
  return a;
}

}  // namespace

TEST(Symmetrized, MatchesBruteForceWordSums) {
  for (int m = 0; m <= 6; ++m) {
    for (int n = 0; m + n <= 6; ++n) {
      const NormalPoly expect = word_sum(m, n);
      const NormalPoly got = GaussRational(binomial(m + n, m)) * to_normal(SymPoly::monomial(m, n));
      EXPECT_TRUE(got == expect) << m << "," << n;
    }
  }
}

TEST(Symmetrized, CanonicalCommutator) {
  const SymPoly c = commutator(SymPoly::x(), SymPoly::p());
  EXPECT_TRUE(c == SymPoly::constant(GaussRational::i()));
  // x p x = S_{1,2}: the symmetric word of one p and two x's.
  const SymPoly xpx = multiply(multiply(SymPoly::x(), SymPoly::p()), SymPoly::x());
  EXPECT_TRUE(xpx == SymPoly::monomial(1, 2));
}

TEST(Symmetrized, AlgebraAxiomsOnRandomPolynomials) {
  std::mt19937 rng(20240611);
  for (int trial = 0; trial < 25; ++trial) {
    const SymPoly a = random_poly(rng), b = random_poly(rng), c = random_poly(rng);
    EXPECT_TRUE(multiply(multiply(a, b), c) == multiply(a, multiply(b, c)));
    const SymPoly jacobi = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) +
                           commutator(c, commutator(a, b));
    EXPECT_TRUE(jacobi.is_zero());
    EXPECT_TRUE(to_symmetric(to_normal(a)) == a);
    EXPECT_TRUE(parity_conjugate(parity_conjugate(a)) == a);
  }
}

TEST(Symmetrized, CommutatorOfHermitianIsAntiHermitian) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const SymPoly a = real_poly(rng), b = real_poly(rng);
    ASSERT_TRUE(a.is_hermitian());
    EXPECT_TRUE((GaussRational::i() * commutator(a, b)).is_hermitian());
  }
}

TEST(QHierarchy, MatchesKnownCoefficients) {
  const QSeries s = solve_q_hierarchy(5);
  SymPoly q1 = SymPoly::monomial(3, 0, q(-4, 3)) + SymPoly::monomial(1, 2, q(-2));
  SymPoly q3 = SymPoly::monomial(5, 0, q(128, 15)) + SymPoly::monomial(3, 2, q(40, 3)) +
               SymPoly::monomial(1, 4, q(8)) + SymPoly::monomial(1, 0, q(-12));
  SymPoly q5 = SymPoly::monomial(7, 0, q(-320, 3)) + SymPoly::monomial(5, 2, q(-544, 3)) +
               SymPoly::monomial(3, 4, q(-512, 3)) + SymPoly::monomial(1, 6, q(-64)) +
               SymPoly::monomial(3, 0, q(24736, 45)) + SymPoly::monomial(1, 2, q(6368, 15));
  EXPECT_TRUE(s.terms.at(1) == q1) << s.terms.at(1).str();
  EXPECT_TRUE(s.terms.at(3) == q3) << s.terms.at(3).str();
  EXPECT_TRUE(s.terms.at(5) == q5) << s.terms.at(5).str();
  for (const auto& [k, t] : s.terms) EXPECT_TRUE(t.is_hermitian()) << k;
}

TEST(QHierarchy, CommutesWithHamiltonianExactly) {
  for (int order : {1, 3, 5}) EXPECT_EQ(verify_c_commutes(solve_q_hierarchy(order), order), 0) << order;
  // Stopping early leaves an error at the next odd order.
  EXPECT_GT(verify_c_commutes(solve_q_hierarchy(3), 5), 0);
}

TEST(QHierarchy, RejectsUnsupportedOrders) {
  EXPECT_THROW(solve_q_hierarchy(2), DomainError);
  EXPECT_THROW(solve_q_hierarchy(7), DomainError);
  EXPECT_THROW(verify_c_commutes(QSeries{}, 0), DomainError);
}

TEST(ShiftedOscillator, ExactCOperator) {
  const ShiftedOscillatorReport r = shifted_oscillator_check(mpq_class(3, 10));
  EXPECT_EQ(r.residual_symbolic, 0);
  EXPECT_EQ(r.residual_at_eps, 0);
  EXPECT_GT(r.residual_half_units, 0);
  EXPECT_EQ(r.residual_half_units_doubled, 0);
  EXPECT_FALSE(r.c_equals_p);
  ASSERT_EQ(r.predicted.size(), 6u);
  EXPECT_DOUBLE_EQ(r.predicted[0], 0.5 + 0.045);
  EXPECT_TRUE(shifted_oscillator_check(0).c_equals_p);
}
