// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptlab/classical.hpp"
#include "ptlab/cli.hpp"
#include "ptlab/matrix2.hpp"
#include "ptlab/opalg.hpp"
#include "ptlab/ptnorm.hpp"
#include "ptlab/semiclassic.hpp"
#include "ptlab/spectra.hpp"

using namespace ptlab;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs the CLI `spectrum` command and returns the real parts of the levels.
std::vector<double> cli_spectrum(const std::string& N, int levels) {
  std::ostringstream out, err;
  const int code = cli::run({"spectrum", "--N", N, "--levels", std::to_string(levels)}, out, err);
  if (code != 0) throw std::runtime_error("ptlab spectrum exited with " + std::to_string(code) + ": " + err.str());
  const json doc = json::parse(out.str());
  std::vector<double> E;
  for (const auto& row : doc["rows"]) E.push_back(row["E_re"].get<double>());
  return E;
}

Verdict harmonic_anchor() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto E = cli_spectrum("2", 6);
  const double dt = seconds_since(t0);
  double worst = E.size() == 6 ? 0.0 : INFINITY;
  for (std::size_t n = 0; n < E.size(); ++n) worst = std::max(worst, std::abs(E[n] - (2.0 * n + 1.0)));
  return {worst < 1e-6 && dt < 5.0, "max |E_n - (2n+1)| = " + fmt("%.2e", worst) + ", " + fmt("%.2f", dt) + " s"};
}

Verdict fourth_level(const std::string& N, double expect) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto E = cli_spectrum(N, 4);
  const double dt = seconds_since(t0);
  const double e3 = E.size() == 4 ? E[3] : NAN;
  return {std::abs(e3 - expect) < 1e-3 && dt < 30.0, "E_3 = " + fmt("%.6f", e3) + ", " + fmt("%.2f", dt) + " s"};
}

Verdict wkb_closed_form() {
  const double a = wkb_energy(3, 3.0), b = wkb_energy(3, 4.0);
  double worst = 0.0;
  for (int n = 0; n <= 10; ++n) worst = std::max(worst, std::abs(wkb_energy(n, 2.0) - (2.0 * n + 1.0)));
  const bool ok = std::abs(a - 11.3042) < 1e-3 && std::abs(b - 18.4321) < 1e-3 && worst < 1e-12;
  return {ok, "E_3(N=3) = " + fmt("%.4f", a) + ", E_3(N=4) = " + fmt("%.4f", b) + ", harmonic error " + fmt("%.1e", worst)};
}

Verdict phase_boundary() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = spectrum_scan(1.30, 2.0, 0.01, 8);
  const double dt = seconds_since(t0);
  // rows run up in N; walking down in N the count must never grow.
  bool monotone = true;
  for (std::size_t k = 1; k < rows.size(); ++k) monotone = monotone && rows[k - 1].energies.size() <= rows[k].energies.size();
  double boundary = NAN;  // largest N with a single real level
  for (const auto& r : rows) {
    if (r.energies.size() == 1) boundary = r.N;
  }
  const bool ok = monotone && boundary >= 1.40 - 1e-9 && boundary <= 1.45 + 1e-9 && dt < 600.0;
  return {ok, std::string("counts ") + (monotone ? "non-increasing" : "NOT monotone") + ", single level up to N = " +
                  fmt("%.2f", boundary) + ", " + fmt("%.0f", dt) + " s"};
}

Verdict classical_period() {
  double err2 = NAN, err34 = 0.0;
  for (double N : {2.0, 3.0, 4.0}) {
    TrajectoryOptions o;
    o.p0 = cplx{0.0, 0.0};
    const ClosureReport r =
        detect_closure(integrate_trajectory(turning_points(1.0, N).x_minus, 1.0, N, 1.5 * period(1.0, N), 1e-4, o));
    const double T = r.period ? *r.period : NAN;
    if (N == 2.0) {
      err2 = std::abs(T - pi);
    } else {
      err34 = std::max(err34, std::abs(T - period(1.0, N)));
    }
  }
  std::vector<double> turns;
  bool open = true;
  for (double N : {1.8, 1.85, 1.9}) {
    TrajectoryOptions o;
    o.p0 = cplx{0.0, 0.0};
    const ClosureReport r = detect_closure(integrate_trajectory(turning_points(1.0, N).x_minus, 1.0, N, 400.0, 1e-3, o), 1e-6);
    open = open && !r.closed;
    turns.push_back(r.turns);
  }
  const bool increasing = turns[0] < turns[1] && turns[1] < turns[2];
  const bool ok = err2 < 1e-5 && err34 < 1e-4 && open && increasing;
  return {ok, "|T - pi| = " + fmt("%.1e", err2) + ", N=3,4 error " + fmt("%.1e", err34) + ", spiral turns " +
                  fmt("%.2f", turns[0]) + " < " + fmt("%.2f", turns[1]) + " < " + fmt("%.2f", turns[2]) +
                  (open ? ", all open" : ", a spiral closed")};
}

Verdict pt_signature() {
  const SpectralBasis b = build_basis(3.0, 8, basis_config(8));
  const auto g = pt_gram(b);
  const std::size_t K = b.pairs.size();
  double diag = 0.0, off = 0.0;
  for (std::size_t m = 0; m < K; ++m) {
    for (std::size_t n = 0; n < K; ++n) {
      if (m == n) {
        diag = std::max(diag, std::abs(g[m * K + n] - cplx(m % 2 == 0 ? 1.0 : -1.0)));
      } else {
        off = std::max(off, std::abs(g[m * K + n]));
      }
    }
  }
  return {K == 8 && diag < 1e-5 && off < 1e-5,
          "diagonal error " + fmt("%.1e", diag) + ", max off-diagonal " + fmt("%.1e", off)};
}

struct SpectralC {
  double c_phi = 0.0;  // max_n<=6 relative L2 of C phi_n - (-1)^n phi_n
  double c_sq = 0.0;   // relative L2 of C^2 g - g, Gaussian g
};

SpectralC spectral_c(int K) {
  const SpectralBasis b = build_basis(3.0, K, basis_config(K));
  const Contour& c = b.contour;
  const SampledKernel k = build_c_kernel(b.pairs, c);
  SpectralC r;
  for (int n = 0; n <= 6; ++n) {
    const Sampled& phi = b.pairs[n].eigenfunction;
    const Sampled cphi = apply_kernel(k, phi, c);
    Sampled d(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) d[i] = cphi[i] - (n % 2 == 0 ? 1.0 : -1.0) * phi[i];
    r.c_phi = std::max(r.c_phi, contour_norm(d, c) / contour_norm(phi, c));
  }
  const Sampled g = sample([](cplx x) { return std::exp(-x * x); }, c);
  const Sampled ccg = apply_kernel(k, apply_kernel(k, g, c), c);
  Sampled d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d[i] = ccg[i] - g[i];
  r.c_sq = contour_norm(d, c) / contour_norm(g, c);
  return r;
}

Verdict spectral_c_operator() {
  const SpectralC a = spectral_c(12), b = spectral_c(16);
  const bool ok = a.c_phi < 1e-3 && a.c_sq < 1e-3 && b.c_phi < a.c_phi && b.c_sq < a.c_sq;
  return {ok, "K=12: C phi " + fmt("%.1e", a.c_phi) + ", C^2 " + fmt("%.1e", a.c_sq) + "; K=16: C phi " +
                  fmt("%.1e", b.c_phi) + ", C^2 " + fmt("%.1e", b.c_sq)};
}

Verdict ground_position() {
  const cplx x3 = expectation_x_ground(3.0);
  const cplx x2 = expectation_x_ground(2.0);
  const bool ok = std::abs(x3.real()) < 1e-5 && x3.imag() < 0.0 && std::abs(x2) < 1e-8;
  return {ok, "N=3: <x> = " + fmt("%.2e", x3.real()) + fmt(" %+.6f i", x3.imag()) + "; N=2: |<x>| = " +
                  fmt("%.1e", std::abs(x2))};
}

Verdict operator_algebra() {
  const auto t0 = std::chrono::steady_clock::now();
  auto q = [](long a, long b = 1) { return GaussRational(mpq_class(a, b)); };
  const QSeries s = solve_q_hierarchy(5);
  const SymPoly q1 = SymPoly::monomial(3, 0, q(-4, 3)) + SymPoly::monomial(1, 2, q(-2));
  const SymPoly q3 = SymPoly::monomial(5, 0, q(128, 15)) + SymPoly::monomial(3, 2, q(40, 3)) +
                     SymPoly::monomial(1, 4, q(8)) + SymPoly::monomial(1, 0, q(-12));
  const SymPoly q5 = SymPoly::monomial(7, 0, q(-320, 3)) + SymPoly::monomial(5, 2, q(-544, 3)) +
                     SymPoly::monomial(3, 4, q(-512, 3)) + SymPoly::monomial(1, 6, q(-64)) +
                     SymPoly::monomial(3, 0, q(24736, 45)) + SymPoly::monomial(1, 2, q(6368, 15));
  const bool match = s.terms.at(1) == q1 && s.terms.at(3) == q3 && s.terms.at(5) == q5;
  const mpq_class residual = verify_c_commutes(s, 5);
  const double dt = seconds_since(t0);
  return {match && residual == 0 && dt < 5.0, std::string("Q1, Q3, Q5 ") + (match ? "match" : "DIFFER") +
                                                  ", residual through eps^6 = " + residual.get_str() + ", " +
                                                  fmt("%.2f", dt) + " s"};
}

Verdict shifted_oscillator() {
  const ShiftedOscillatorReport r = shifted_oscillator_check(mpq_class(3, 10));
  const double eps = 0.3;
  const SpectrumResult s = find_real_eigenvalues(Hamiltonian::shifted_oscillator(eps), 6);
  double worst = s.complete ? 0.0 : INFINITY;
  for (const auto& p : s.pairs) worst = std::max(worst, std::abs(p.E.real() - (p.n + 0.5 + 0.5 * eps * eps)));
  return {r.residual_symbolic == 0 && worst < 1e-6,
          "symbolic commutator residual " + r.residual_symbolic.get_str() + ", max level error " + fmt("%.1e", worst)};
}

Verdict two_by_two() {
  const double tol = 1e-12;
  double worst = 0.0;
  auto track = [&](double v) { worst = std::max(worst, v); };
  const MatrixModel models[] = {{1.0, 2.0, 0.7}, {0.5, 1.0, -1.1}, {3.0, 2.5, 0.4}};
  for (const auto& m : models) {
    const Eigensystem2 e = eigensystem(m);
    const double ca = std::sqrt(1.0 - m.sin_alpha() * m.sin_alpha());
    track(std::abs(e.eps_plus - (m.r * std::cos(m.theta) + m.s * ca)));
    track(std::abs(e.eps_minus - (m.r * std::cos(m.theta) - m.s * ca)));
    const Mat2 c = c_matrix(m);
    track(max_abs_diff(c * c, identity2()));
    const Vec2 cp = c * e.plus, cm = c * e.minus;
    for (int i = 0; i < 2; ++i) {
      track(std::abs(cp[i] - e.plus[i]));
      track(std::abs(cm[i] + e.minus[i]));
    }
    const Completeness2 comp = completeness_2(m);
    track(comp.identity_error);
    track(comp.c_error);
    track(max_abs_diff(exp_q(m) * parity2(), c));
  }
  track(max_abs_diff(c_matrix({1.0, 2.0, 0.0}), parity2()));

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> u(-2.0, 2.0), th(-1.5, 1.5);
  bool positive = true;
  for (int k = 0; k < 500; ++k) {
    const MatrixModel m{std::abs(u(rng)), 2.5, th(rng)};
    const Vec2 psi{c2{u(rng), u(rng)}, c2{u(rng), u(rng)}};
    const double n = cpt_norm(psi, m);
    positive = positive && n > 0.0;
    track(std::abs(n - cpt_norm_closed_form(psi, m)) / std::max(1.0, n));
  }
  return {positive && worst < tol,
          std::string("500 random CPT norms ") + (positive ? "positive" : "NOT positive") + ", worst identity error " +
              fmt("%.1e", worst)};
}

Verdict path_independence() {
  const int levels = 6;
  const SpectrumResult ref = find_real_eigenvalues(3.0, levels);
  double worst = 0.0;
  for (double offset : {0.05, -0.05}) {
    SolverConfig cfg;
    cfg.ray_offset = offset;
    const SpectrumResult r = find_real_eigenvalues(3.0, levels, cfg);
    if (r.pairs.size() != ref.pairs.size()) return {false, "level count changed under rotation"};
    for (std::size_t n = 0; n < r.pairs.size(); ++n) worst = std::max(worst, std::abs(r.pairs[n].E - ref.pairs[n].E));
  }
  return {worst < 1e-6, "max eigenvalue change over " + std::to_string(levels) + " levels = " + fmt("%.1e", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"harmonic anchor", harmonic_anchor},
      {"cubic spectrum", [] { return fourth_level("3", 11.3143); }},
      {"quartic spectrum", [] { return fourth_level("4", 18.4590); }},
      {"WKB closed form", wkb_closed_form},
      {"phase boundary", phase_boundary},
      {"classical period", classical_period},
      {"PT norm signature", pt_signature},
      {"spectral C", spectral_c_operator},
      {"ground-state <x>", ground_position},
      {"operator algebra", operator_algebra},
      {"shifted oscillator", shifted_oscillator},
      {"2x2 model", two_by_two},
      {"path independence", path_independence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %-20s %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
