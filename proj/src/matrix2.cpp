#include "ptlab/matrix2.hpp"

#include <algorithm>
#include <cmath>

#include "ptlab/errors.hpp"

namespace ptlab {

namespace {

constexpr c2 I{0.0, 1.0};

void require_c(const MatrixModel& m) {
  if (!m.unbroken()) throw DomainError("PT symmetry is broken: s^2 < r^2 sin^2 theta");
  if (m.exceptional()) throw DomainError("exceptional point s^2 = r^2 sin^2 theta: C is singular (cos alpha = 0)");
}

Mat2 outer(const Vec2& a, const Vec2& b) { return {{{a[0] * b[0], a[0] * b[1]}, {a[1] * b[0], a[1] * b[1]}}}; }

Mat2 add(const Mat2& a, const Mat2& b) {
  return {{{a[0][0] + b[0][0], a[0][1] + b[0][1]}, {a[1][0] + b[1][0], a[1][1] + b[1][1]}}};
}

}  // namespace

bool MatrixModel::unbroken() const {
  const double gap = s * s - std::pow(r * std::sin(theta), 2);
  return gap >= 0.0 || exceptional();
}

bool MatrixModel::exceptional() const {
  const double a = s * s;
  const double b = std::pow(r * std::sin(theta), 2);
  return std::abs(a - b) <= 1e-14 * std::max({a, b, 1e-300});
}

double MatrixModel::sin_alpha() const {
  if (s == 0.0) throw DomainError("sin(alpha) undefined for s = 0");
  return std::clamp(r * std::sin(theta) / s, -1.0, 1.0);
}

double MatrixModel::alpha() const {
  if (!unbroken()) throw DomainError("alpha is imaginary in the broken region");
  return std::asin(sin_alpha());
}

Mat2 MatrixModel::hamiltonian() const {
  return {{{std::polar(r, theta), c2{s, 0.0}}, {c2{s, 0.0}, std::polar(r, -theta)}}};
}

Eigensystem2 eigensystem(const MatrixModel& m) {
  Eigensystem2 e;
  const double centre = m.r * std::cos(m.theta);
  const double disc = m.s * m.s - std::pow(m.r * std::sin(m.theta), 2);
  const c2 root = std::sqrt(c2{disc, 0.0});
  e.eps_plus = centre + root;
  e.eps_minus = centre - root;
  e.broken = !m.unbroken();
  if (!e.broken && !m.exceptional()) {
    const double a = m.alpha();
    const double norm = 1.0 / std::sqrt(2.0 * std::cos(a));
    e.plus = {norm * std::exp(I * (a / 2)), norm * std::exp(-I * (a / 2))};
    e.minus = {I * norm * std::exp(-I * (a / 2)), -I * norm * std::exp(I * (a / 2))};
  } else {
    // (H - eps) v = 0 with v = (s, eps - r e^{i theta}).
    const c2 h00 = std::polar(m.r, m.theta);
    e.plus = {c2{m.s, 0.0}, e.eps_plus - h00};
    e.minus = {c2{m.s, 0.0}, e.eps_minus - h00};
  }
  return e;
}

Mat2 parity2() { return {{{0.0, 1.0}, {1.0, 0.0}}}; }
Mat2 identity2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

Vec2 operator*(const Mat2& a, const Vec2& v) { return {a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]}; }

Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {{{a[0][0] - b[0][0], a[0][1] - b[0][1]}, {a[1][0] - b[1][0], a[1][1] - b[1][1]}}};
}

Mat2 conj(const Mat2& a) {
  return {{{std::conj(a[0][0]), std::conj(a[0][1])}, {std::conj(a[1][0]), std::conj(a[1][1])}}};
}

Mat2 transpose(const Mat2& a) { return {{{a[0][0], a[1][0]}, {a[0][1], a[1][1]}}}; }

double max_abs(const Mat2& a) {
  return std::max({std::abs(a[0][0]), std::abs(a[0][1]), std::abs(a[1][0]), std::abs(a[1][1])});
}

double max_abs_diff(const Mat2& a, const Mat2& b) { return max_abs(a - b); }

c2 pt_inner_2(const Vec2& u, const Vec2& v) { return std::conj(u[1]) * v[0] + std::conj(u[0]) * v[1]; }

Mat2 c_matrix(const MatrixModel& m) {
  require_c(m);
  const double sa = m.sin_alpha();
  const double ca = std::cos(m.alpha());
  return {{{I * sa / ca, 1.0 / ca}, {1.0 / ca, -I * sa / ca}}};
}

Vec2 cpt_conjugate(const Vec2& psi, const MatrixModel& m) {
  return (c_matrix(m) * parity2()) * Vec2{std::conj(psi[0]), std::conj(psi[1])};
}

double cpt_norm(const Vec2& psi, const MatrixModel& m) {
  const Vec2 c = cpt_conjugate(psi, m);
  return (c[0] * psi[0] + c[1] * psi[1]).real();
}

double cpt_norm_closed_form(const Vec2& psi, const MatrixModel& m) {
  const double sa = m.sin_alpha();
  const double ca = std::cos(m.alpha());
  const double x = psi[0].real(), y = psi[0].imag(), u = psi[1].real(), v = psi[1].imag();
  return (x * x + v * v + 2 * x * v * sa + y * y + u * u - 2 * y * u * sa) / ca;
}

Mat2 q_matrix(const MatrixModel& m) {
  require_c(m);
  const double sa = m.sin_alpha();
  if (std::abs(sa) >= 1.0) throw DomainError("|sin alpha| = 1: exceptional point, Q diverges");
  const double a = 0.5 * std::log((1.0 - sa) / (1.0 + sa));
  // a sigma_2 with sigma_2 = [[0, -i], [i, 0]]
  return {{{0.0, -I * a}, {I * a, 0.0}}};
}

Mat2 exp_q(const MatrixModel& m) {
  const Mat2 q = q_matrix(m);
  const double a = (q[1][0] / I).real();
  const double ch = std::cosh(a), sh = std::sinh(a);
  return {{{ch, -I * sh}, {I * sh, ch}}};
}

Completeness2 completeness_2(const MatrixModel& m) {
  require_c(m);
  const Eigensystem2 e = eigensystem(m);
  const Mat2 p = outer(e.plus, cpt_conjugate(e.plus, m));
  const Mat2 n = outer(e.minus, cpt_conjugate(e.minus, m));
  Completeness2 out;
  out.sum = add(p, n);
  out.difference = p - n;
  out.identity_error = max_abs_diff(out.sum, identity2());
  out.c_error = max_abs_diff(out.difference, c_matrix(m));
  return out;
}

bool is_observable_2(const Mat2& a, const MatrixModel& m, double tol) {
  const Mat2 cp = c_matrix(m) * parity2();
  const Mat2 rhs = cp * conj(a) * conj(cp);
  return max_abs_diff(transpose(a), rhs) <= tol * std::max(1.0, max_abs(a));
}

}  // namespace ptlab
