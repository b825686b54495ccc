#pragma once

#include <array>
#include <complex>

namespace ptlab {

using c2 = std::complex<double>;
using Vec2 = std::array<c2, 2>;
using Mat2 = std::array<std::array<c2, 2>, 2>;

/// H = [[r e^{i theta}, s], [s, r e^{-i theta}]], with sin(alpha) = (r/s) sin(theta).
struct MatrixModel {
  double r = 0.0;
  double s = 1.0;
  double theta = 0.0;

  /// s^2 >= r^2 sin^2 theta; includes the exceptional point.
  bool unbroken() const;
  /// s^2 == r^2 sin^2 theta up to rounding: real degenerate eigenvalue, no C.
  bool exceptional() const;
  double sin_alpha() const;
  /// Principal branch in [-pi/2, pi/2]; throws in the broken region.
  double alpha() const;
  Mat2 hamiltonian() const;
};

struct Eigensystem2 {
  c2 eps_plus;
  c2 eps_minus;
  bool broken = false;
  /// PT-normalized states in the unbroken region; plain eigenvectors otherwise.
  Vec2 plus{};
  Vec2 minus{};
};

Eigensystem2 eigensystem(const MatrixModel& m);

Mat2 parity2();
Mat2 identity2();
Mat2 operator*(const Mat2& a, const Mat2& b);
Vec2 operator*(const Mat2& a, const Vec2& v);
Mat2 operator-(const Mat2& a, const Mat2& b);
Mat2 conj(const Mat2& a);
Mat2 transpose(const Mat2& a);
double max_abs(const Mat2& a);
double max_abs_diff(const Mat2& a, const Mat2& b);

/// (u, v) = (P u*) . v, bilinear dot product.
c2 pt_inner_2(const Vec2& u, const Vec2& v);

/// (1/cos a) [[i sin a, 1], [1, -i sin a]]; unbroken, non-exceptional only.
Mat2 c_matrix(const MatrixModel& m);

/// C P psi*: the CPT conjugate of psi.
Vec2 cpt_conjugate(const Vec2& psi, const MatrixModel& m);

/// (CPT psi) . psi.
double cpt_norm(const Vec2& psi, const MatrixModel& m);
/// Closed form (x^2 + v^2 + 2xv sin a + y^2 + u^2 - 2yu sin a) / cos a, psi = (x+iy, u+iv).
double cpt_norm_closed_form(const Vec2& psi, const MatrixModel& m);

/// Q = (1/2) sigma_2 ln((1 - sin a)/(1 + sin a)), so that C = e^Q P.
Mat2 q_matrix(const MatrixModel& m);
/// e^{a sigma_2} = cosh(a) I + sinh(a) sigma_2 for Q = a sigma_2.
Mat2 exp_q(const MatrixModel& m);

struct Completeness2 {
  Mat2 sum;         // |e+><e+| + |e-><e-|
  Mat2 difference;  // |e+><e+| - |e-><e-|
  double identity_error = 0.0;
  double c_error = 0.0;
};

Completeness2 completeness_2(const MatrixModel& m);

/// transpose(A) == (CP) A* (CP)* to tol: A commutes with the antilinear CPT.
bool is_observable_2(const Mat2& a, const MatrixModel& m, double tol = 1e-12);

}  // namespace ptlab
