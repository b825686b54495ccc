#include "ptlab/opalg.hpp"

#include <algorithm>
#include <stdexcept>

#include "ptlab/errors.hpp"

namespace ptlab {

namespace {

mpz_class binomial(unsigned long n, unsigned long k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

mpz_class factorial(unsigned long n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

// (-i)^k
GaussRational minus_i_power(int k) {
  switch (k % 4) {
    case 0: return {1, 0};
    case 1: return {0, -1};
    case 2: return {-1, 0};
    default: return {0, 1};
  }
}

void accumulate(std::map<Degree, GaussRational>& terms, Degree key, const GaussRational& c) {
  if (c.is_zero()) return;
  auto it = terms.find(key);
  if (it == terms.end()) {
    terms.emplace(key, c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) terms.erase(it);
}

const NormalPoly& normal_of_symmetric(int m, int n) {
  // S_{m,n} = 2^{-n} sum_k C(n,k) x^k p^m x^{n-k}.
  thread_local std::map<Degree, NormalPoly> cache;
  auto it = cache.find({m, n});
  if (it != cache.end()) return it->second;
  NormalPoly out;
  const NormalPoly pm = NormalPoly::monomial(0, m);
  const mpq_class scale(mpz_class(1), mpz_class(1) << n);
  for (int k = 0; k <= n; ++k) {
    const NormalPoly piece = NormalPoly::monomial(k, 0) * pm * NormalPoly::monomial(n - k, 0);
    out = out + GaussRational(mpq_class(binomial(n, k)) * scale) * piece;
  }
  return cache.emplace(Degree{m, n}, std::move(out)).first->second;
}

// Truncated power series in eps with operator coefficients.
using Series = std::vector<NormalPoly>;

Series series_mul(const Series& a, const Series& b, std::size_t len) {
  Series out(len);
  for (std::size_t i = 0; i < a.size() && i < len; ++i) {
    if (a[i].is_zero()) continue;
    for (std::size_t j = 0; j < b.size() && i + j < len; ++j) {
      if (b[j].is_zero()) continue;
      out[i + j] = out[i + j] + a[i] * b[j];
    }
  }
  return out;
}

Series series_exp(const Series& q, std::size_t len) {
  Series result(len);
  Series term(len);
  result[0] = term[0] = NormalPoly::monomial(0, 0);
  for (std::size_t j = 1; j < len; ++j) {
    term = series_mul(term, q, len);
    for (auto& t : term) t = GaussRational(mpq_class(1, j)) * t;
    for (std::size_t k = 0; k < len; ++k) result[k] = result[k] + term[k];
  }
  return result;
}

mpq_class series_max(const Series& s) {
  mpq_class m = 0;
  for (const auto& t : s) m = std::max(m, t.max_magnitude());
  return m;
}

// Solves A c = b exactly over the rationals; throws on inconsistency or a kernel.
std::vector<mpq_class> solve_exact(std::vector<std::vector<mpq_class>> a, std::vector<mpq_class> b) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && sgn(a[piv][c]) == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[r]);
    std::swap(b[piv], b[r]);
    const mpq_class inv = 1 / a[r][c];
    for (std::size_t k = c; k < cols; ++k) a[r][k] *= inv;
    b[r] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || sgn(a[i][c]) == 0) continue;
      const mpq_class f = a[i][c];
      for (std::size_t k = c; k < cols; ++k) a[i][k] -= f * a[r][k];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i) {
    if (sgn(b[i]) != 0) throw std::logic_error("Q hierarchy: inconsistent linear system");
  }
  if (pivot_col.size() < cols) {
    std::string free;
    for (std::size_t c = 0, p = 0; c < cols; ++c) {
      if (p < pivot_col.size() && pivot_col[p] == c) {
        ++p;
      } else {
        free += " " + std::to_string(c);
      }
    }
    throw std::logic_error("Q hierarchy: underdetermined system, free unknowns:" + free);
  }
  std::vector<mpq_class> x(cols);
  for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = b[i];
  return x;
}

}  // namespace

mpq_class GaussRational::magnitude() const { return std::max(mpq_class(abs(re)), mpq_class(abs(im))); }

std::string GaussRational::str() const {
  if (sgn(im) == 0) return re.get_str();
  std::string imag;
  if (im == 1) imag = "i";
  else if (im == -1) imag = "-i";
  else if (im.get_den() == 1) imag = im.get_str() + "i";
  else imag = (sgn(im) < 0 ? "-(" : "(") + mpq_class(abs(im)).get_str() + ")i";
  if (sgn(re) == 0) return imag;
  return "(" + re.get_str() + (sgn(im) > 0 ? "+" : "") + imag + ")";
}

GaussRational operator/(const GaussRational& a, const GaussRational& b) {
  const mpq_class n = b.re * b.re + b.im * b.im;
  if (sgn(n) == 0) throw DomainError("division by zero Gaussian rational");
  const GaussRational num = a * b.conj();
  return {num.re / n, num.im / n};
}

SymPoly SymPoly::monomial(int m, int n, const GaussRational& c) {
  if (m < 0 || n < 0) throw DomainError("negative degree");
  SymPoly s;
  s.add(m, n, c);
  return s;
}

GaussRational SymPoly::coefficient(int m, int n) const {
  auto it = terms_.find({m, n});
  return it == terms_.end() ? GaussRational{} : it->second;
}

void SymPoly::add(int m, int n, const GaussRational& c) { accumulate(terms_, {m, n}, c); }

bool SymPoly::is_hermitian() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second.is_real(); });
}

int SymPoly::degree() const {
  int d = -1;
  for (const auto& [k, c] : terms_) d = std::max(d, k.first + k.second);
  return d;
}

std::string SymPoly::str() const {
  if (terms_.empty()) return "0";
  std::vector<std::pair<Degree, GaussRational>> sorted(terms_.begin(), terms_.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    const int da = a.first.first + a.first.second;
    const int db = b.first.first + b.first.second;
    if (da != db) return da > db;
    return a.first.first > b.first.first;
  });
  std::string out;
  for (const auto& [k, c] : sorted) {
    const bool negative = c.is_real() && sgn(c.re) < 0;
    const GaussRational shown = negative ? -c : c;
    if (out.empty()) out = negative ? "-" : "";
    else out += negative ? " - " : " + ";
    out += shown.str() + " S_{" + std::to_string(k.first) + "," + std::to_string(k.second) + "}";
  }
  return out;
}

SymPoly operator+(const SymPoly& a, const SymPoly& b) {
  SymPoly out = a;
  for (const auto& [k, c] : b.terms_) out.add(k.first, k.second, c);
  return out;
}

SymPoly operator-(const SymPoly& a, const SymPoly& b) {
  SymPoly out = a;
  for (const auto& [k, c] : b.terms_) out.add(k.first, k.second, -c);
  return out;
}

SymPoly operator*(const GaussRational& s, const SymPoly& a) {
  SymPoly out;
  if (s.is_zero()) return out;
  for (const auto& [k, c] : a.terms_) out.add(k.first, k.second, s * c);
  return out;
}

NormalPoly NormalPoly::monomial(int a, int b, const GaussRational& c) {
  NormalPoly p;
  p.add(a, b, c);
  return p;
}

void NormalPoly::add(int a, int b, const GaussRational& c) { accumulate(terms_, {a, b}, c); }

mpq_class NormalPoly::max_magnitude() const {
  mpq_class m = 0;
  for (const auto& [k, c] : terms_) m = std::max(m, c.magnitude());
  return m;
}

NormalPoly operator+(const NormalPoly& a, const NormalPoly& b) {
  NormalPoly out = a;
  for (const auto& [k, c] : b.terms_) out.add(k.first, k.second, c);
  return out;
}

NormalPoly operator-(const NormalPoly& a, const NormalPoly& b) {
  NormalPoly out = a;
  for (const auto& [k, c] : b.terms_) out.add(k.first, k.second, -c);
  return out;
}

NormalPoly operator*(const GaussRational& s, const NormalPoly& a) {
  NormalPoly out;
  if (s.is_zero()) return out;
  for (const auto& [k, c] : a.terms_) out.add(k.first, k.second, s * c);
  return out;
}

NormalPoly operator*(const NormalPoly& l, const NormalPoly& r) {
  // (x^a p^b)(x^c p^d) = sum_k k! C(b,k) C(c,k) (-i)^k x^{a+c-k} p^{b+d-k}
  NormalPoly out;
  for (const auto& [kl, cl] : l.terms_) {
    const auto [a, b] = kl;
    for (const auto& [kr, cr] : r.terms_) {
      const auto [c, d] = kr;
      const GaussRational lead = cl * cr;
      for (int k = 0; k <= std::min(b, c); ++k) {
        const mpq_class w(factorial(k) * binomial(b, k) * binomial(c, k));
        out.add(a + c - k, b + d - k, lead * GaussRational(w) * minus_i_power(k));
      }
    }
  }
  return out;
}

NormalPoly to_normal(const SymPoly& s) {
  NormalPoly out;
  for (const auto& [k, c] : s.terms()) out = out + c * normal_of_symmetric(k.first, k.second);
  return out;
}

SymPoly to_symmetric(const NormalPoly& a) {
  // x^a p^b = S_{b,a} + terms of lower total degree, so peel off the top.
  SymPoly out;
  NormalPoly rest = a;
  while (!rest.is_zero()) {
    auto top = rest.terms().begin();
    for (auto it = rest.terms().begin(); it != rest.terms().end(); ++it) {
      if (it->first.first + it->first.second > top->first.first + top->first.second) top = it;
    }
    const auto [xa, pb] = top->first;
    const GaussRational c = top->second;
    out.add(pb, xa, c);
    rest = rest - c * normal_of_symmetric(pb, xa);
  }
  return out;
}

SymPoly multiply(const SymPoly& a, const SymPoly& b) { return to_symmetric(to_normal(a) * to_normal(b)); }

NormalPoly commutator(const NormalPoly& a, const NormalPoly& b) { return a * b - b * a; }

SymPoly commutator(const SymPoly& a, const SymPoly& b) {
  const NormalPoly na = to_normal(a);
  const NormalPoly nb = to_normal(b);
  return to_symmetric(commutator(na, nb));
}

SymPoly parity_conjugate(const SymPoly& a) {
  SymPoly out;
  for (const auto& [k, c] : a.terms()) out.add(k.first, k.second, (k.first + k.second) % 2 ? -c : c);
  return out;
}

SymPoly cubic_h0() {
  return SymPoly::monomial(2, 0, GaussRational(mpq_class(1, 2))) +
         SymPoly::monomial(0, 2, GaussRational(mpq_class(1, 2)));
}

SymPoly cubic_h1() { return SymPoly::monomial(0, 3, GaussRational::i()); }

QSeries solve_q_hierarchy(int order) {
  if (order < 1 || order > 5 || order % 2 == 0) throw DomainError("Q hierarchy order must be 1, 3 or 5");
  const SymPoly h0 = cubic_h0();
  const SymPoly h1 = cubic_h1();
  QSeries q;
  for (int k = 1; k <= order; k += 2) {
    SymPoly rhs;
    if (k == 1) {
      rhs = GaussRational(-2) * h1;
    } else if (k == 3) {
      const SymPoly& q1 = q.terms.at(1);
      rhs = GaussRational(mpq_class(-1, 6)) * commutator(q1, commutator(q1, h1));
    } else {
      const SymPoly& q1 = q.terms.at(1);
      const SymPoly& q3 = q.terms.at(3);
      const SymPoly c1 = commutator(q1, h1);
      rhs = GaussRational(mpq_class(1, 360)) * commutator(q1, commutator(q1, commutator(q1, c1))) -
            GaussRational(mpq_class(1, 6)) * (commutator(q1, commutator(q3, h1)) + commutator(q3, c1));
    }

    // Ansatz: every S_{m,n} with m odd, n even, m + n <= 2k + 1, real coefficient.
    std::vector<Degree> unknowns;
    for (int m = 1; m <= 2 * k + 1; m += 2) {
      for (int n = 0; m + n <= 2 * k + 1; n += 2) unknowns.push_back({m, n});
    }
    std::vector<SymPoly> columns;
    std::map<Degree, int> rows_of;
    for (const auto& [m, n] : unknowns) {
      columns.push_back(commutator(h0, SymPoly::monomial(m, n)));
      for (const auto& [key, c] : columns.back().terms()) rows_of.emplace(key, 0);
    }
    for (const auto& [key, c] : rhs.terms()) rows_of.emplace(key, 0);
    int next = 0;
    for (auto& [key, idx] : rows_of) idx = next++;

    // Real and imaginary parts of each coefficient give one equation each.
    const std::size_t rows = 2 * rows_of.size();
    std::vector<std::vector<mpq_class>> a(rows, std::vector<mpq_class>(unknowns.size(), 0));
    std::vector<mpq_class> b(rows, 0);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      for (const auto& [key, c] : columns[j].terms()) {
        a[2 * rows_of[key]][j] = c.re;
        a[2 * rows_of[key] + 1][j] = c.im;
      }
    }
    for (const auto& [key, c] : rhs.terms()) {
      b[2 * rows_of[key]] = c.re;
      b[2 * rows_of[key] + 1] = c.im;
    }
    const std::vector<mpq_class> coeff = solve_exact(a, b);
    SymPoly qk;
    for (std::size_t j = 0; j < unknowns.size(); ++j) qk.add(unknowns[j].first, unknowns[j].second, coeff[j]);
    q.terms[k] = qk;
  }
  return q;
}

mpq_class verify_c_commutes(const QSeries& q, int max_order) {
  if (max_order < 1) throw DomainError("max_order must be positive");
  const std::size_t len = static_cast<std::size_t>(max_order) + 2;
  Series qs(len);
  for (const auto& [k, term] : q.terms) {
    if (k < static_cast<int>(len)) qs[k] = to_normal(term);
  }
  const Series e = series_exp(qs, len);
  const NormalPoly h0 = to_normal(cubic_h0());
  const NormalPoly h1 = to_normal(cubic_h1());
  Series h(len);
  h[0] = h0;
  if (len > 1) h[1] = h1;
  const Series lhs = series_mul(e, h, len);
  const Series rhs = series_mul(h, e, len);
  Series residual(len);
  for (std::size_t j = 0; j < len; ++j) {
    residual[j] = lhs[j] - rhs[j];
    if (j >= 1) residual[j] = residual[j] - GaussRational(2) * (e[j - 1] * h1);
  }
  return series_max(residual);
}

namespace {

// [e^{-alpha eps p} P, H(eps)] with H(eps) = s (p^2 + x^2) + i eps x, as a
// polynomial in eps. C commutes with H iff e^Q (P H P) e^{-Q} = H, and the
// conjugation series terminates because Q is linear in p.
Series shifted_residual(const mpq_class& s, const mpq_class& alpha) {
  const std::size_t len = 4;
  const NormalPoly x = NormalPoly::monomial(1, 0);
  const NormalPoly quad = GaussRational(s) * (NormalPoly::monomial(0, 2) + NormalPoly::monomial(2, 0));
  Series h(len);
  h[0] = quad;
  h[1] = GaussRational::i() * x;
  Series php(len);
  php[0] = quad;
  php[1] = GaussRational(0, -1) * x;
  const NormalPoly gen = GaussRational(-alpha) * NormalPoly::monomial(0, 1);  // Q = eps * gen
  Series conj = php;
  Series term = php;
  for (std::size_t j = 1; j < len; ++j) {
    Series next(len);
    for (std::size_t k = 0; k + 1 < len; ++k) {
      next[k + 1] = GaussRational(mpq_class(1, j)) * commutator(gen, term[k]);
    }
    term = next;
    for (std::size_t k = 0; k < len; ++k) conj[k] = conj[k] + term[k];
  }
  Series r(len);
  for (std::size_t k = 0; k < len; ++k) r[k] = conj[k] - h[k];
  return r;
}

mpq_class evaluate_max(const Series& s, const mpq_class& eps) {
  NormalPoly total;
  mpq_class power = 1;
  for (const auto& t : s) {
    total = total + GaussRational(power) * t;
    power *= eps;
  }
  return total.max_magnitude();
}

}  // namespace

ShiftedOscillatorReport shifted_oscillator_check(const mpq_class& eps, int levels) {
  ShiftedOscillatorReport rep;
  rep.eps = eps;
  const Series full = shifted_residual(1, 1);
  rep.residual_symbolic = series_max(full);
  rep.residual_at_eps = evaluate_max(full, eps);
  rep.residual_half_units = evaluate_max(shifted_residual(mpq_class(1, 2), 1), eps);
  rep.residual_half_units_doubled = series_max(shifted_residual(mpq_class(1, 2), 2));
  rep.c_equals_p = sgn(eps) == 0;
  const double e = eps.get_d();
  for (int n = 0; n < levels; ++n) rep.predicted.push_back(n + 0.5 + 0.5 * e * e);
  return rep;
}

}  // namespace ptlab
