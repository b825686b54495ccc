#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace ptlab {

/// Exact a + b i with rational a, b.
struct GaussRational {
  mpq_class re{0};
  mpq_class im{0};

  GaussRational() = default;
  GaussRational(mpq_class r, mpq_class i = 0) : re(std::move(r)), im(std::move(i)) {
    re.canonicalize();
    im.canonicalize();
  }
  GaussRational(long r) : re(r), im(0) {}

  static GaussRational i() { return {0, 1}; }

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  bool is_real() const { return sgn(im) == 0; }
  GaussRational conj() const { return {re, -im}; }
  /// max(|re|, |im|); exact, unlike the modulus.
  mpq_class magnitude() const;
  std::string str() const;

  friend GaussRational operator+(const GaussRational& a, const GaussRational& b) { return {a.re + b.re, a.im + b.im}; }
  friend GaussRational operator-(const GaussRational& a, const GaussRational& b) { return {a.re - b.re, a.im - b.im}; }
  friend GaussRational operator-(const GaussRational& a) { return {-a.re, -a.im}; }
  friend GaussRational operator*(const GaussRational& a, const GaussRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussRational operator/(const GaussRational& a, const GaussRational& b);
  friend bool operator==(const GaussRational& a, const GaussRational& b) { return a.re == b.re && a.im == b.im; }
  GaussRational& operator+=(const GaussRational& b) { return *this = *this + b; }
  GaussRational& operator-=(const GaussRational& b) { return *this = *this - b; }
};

/// Key (m, n): m factors of p, n factors of x.
using Degree = std::pair<int, int>;

/// Polynomial in x and p in the totally symmetrized basis S_{m,n}.
/// Canonical: zero coefficients are never stored.
class SymPoly {
 public:
  SymPoly() = default;
  static SymPoly monomial(int m, int n, const GaussRational& c = 1);
  static SymPoly x() { return monomial(0, 1); }
  static SymPoly p() { return monomial(1, 0); }
  static SymPoly constant(const GaussRational& c) { return monomial(0, 0, c); }

  const std::map<Degree, GaussRational>& terms() const { return terms_; }
  GaussRational coefficient(int m, int n) const;
  void add(int m, int n, const GaussRational& c);
  bool is_zero() const { return terms_.empty(); }
  /// Symmetrized monomials are Hermitian, so this is formal Hermiticity.
  bool is_hermitian() const;
  int degree() const;
  std::string str() const;

  friend SymPoly operator+(const SymPoly& a, const SymPoly& b);
  friend SymPoly operator-(const SymPoly& a, const SymPoly& b);
  friend SymPoly operator*(const GaussRational& c, const SymPoly& a);
  friend bool operator==(const SymPoly& a, const SymPoly& b) { return a.terms_ == b.terms_; }

 private:
  std::map<Degree, GaussRational> terms_;
};

/// Same algebra with all x to the left of all p; key (a, b) means x^a p^b.
class NormalPoly {
 public:
  static NormalPoly monomial(int a, int b, const GaussRational& c = 1);
  const std::map<Degree, GaussRational>& terms() const { return terms_; }
  void add(int a, int b, const GaussRational& c);
  bool is_zero() const { return terms_.empty(); }
  mpq_class max_magnitude() const;

  friend NormalPoly operator+(const NormalPoly& a, const NormalPoly& b);
  friend NormalPoly operator-(const NormalPoly& a, const NormalPoly& b);
  friend NormalPoly operator*(const NormalPoly& a, const NormalPoly& b);
  friend NormalPoly operator*(const GaussRational& c, const NormalPoly& a);
  friend bool operator==(const NormalPoly& a, const NormalPoly& b) { return a.terms_ == b.terms_; }

 private:
  std::map<Degree, GaussRational> terms_;
};

NormalPoly to_normal(const SymPoly& a);
SymPoly to_symmetric(const NormalPoly& a);

SymPoly multiply(const SymPoly& a, const SymPoly& b);
SymPoly commutator(const SymPoly& a, const SymPoly& b);
NormalPoly commutator(const NormalPoly& a, const NormalPoly& b);
/// P A P: the (m, n) coefficient picks up (-1)^{m+n}.
SymPoly parity_conjugate(const SymPoly& a);

/// H0 = (p^2 + x^2)/2 and H1 = i x^3 for H = H0 + eps H1.
SymPoly cubic_h0();
SymPoly cubic_h1();

/// Q = eps Q1 + eps^3 Q3 + eps^5 Q5 + ..., keyed by the odd order.
struct QSeries {
  std::map<int, SymPoly> terms;
  int max_order() const { return terms.empty() ? 0 : terms.rbegin()->first; }
};

/// Solves [H0, Q_k] = R_k level by level for k = 1, 3, ..., order (order <= 5).
QSeries solve_q_hierarchy(int order);

/// Largest coefficient magnitude of [e^Q, H] - 2 eps e^Q H1 over the orders
/// eps^0 .. eps^{max_order + 1}, with e^Q expanded as a series in eps.
mpq_class verify_c_commutes(const QSeries& q, int max_order);

struct ShiftedOscillatorReport {
  mpq_class eps;
  /// Max coefficient of [e^{-eps p} P, p^2 + x^2 + i eps x] as a polynomial in eps.
  mpq_class residual_symbolic;
  /// Same with eps fixed to the given value.
  mpq_class residual_at_eps;
  /// [e^{-eps p} P, (p^2 + x^2)/2 + i eps x]: nonzero unless eps = 0.
  mpq_class residual_half_units;
  /// [e^{-2 eps p} P, (p^2 + x^2)/2 + i eps x], symbolic in eps.
  mpq_class residual_half_units_doubled;
  bool c_equals_p = false;  // Q vanishes identically
  std::vector<double> predicted;  // n + 1/2 + eps^2/2, for (p^2 + x^2)/2 + i eps x
};

ShiftedOscillatorReport shifted_oscillator_check(const mpq_class& eps, int levels = 6);

}  // namespace ptlab
