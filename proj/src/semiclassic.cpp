#include "ptlab/semiclassic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "ptlab/errors.hpp"

namespace ptlab {

namespace {

constexpr double pi = std::numbers::pi;

// Integral of sqrt(E + (ix)^N) dx from `end` to `mid`, with the square root
// continued from its positive value at `mid`. The substitution
// x = end + (mid - end) s^2 removes the square-root zero at the turning point.
cplx segment_integral(cplx end, cplx mid, double E, double N, int panels) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& a = Rule::abscissa();
  const auto& w = Rule::weights();

  struct Node {
    double s;
    double weight;
  };
  std::vector<Node> nodes;
  for (int p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) / panels;
    const double hi = static_cast<double>(p + 1) / panels;
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < a.size(); ++k) {
      nodes.push_back({c + h * a[k], h * w[k]});
      if (a[k] != 0.0) nodes.push_back({c - h * a[k], h * w[k]});
    }
  }
  // Walk from the midpoint toward the turning point so the branch is continuous.
  std::sort(nodes.begin(), nodes.end(), [](const Node& l, const Node& r) { return l.s > r.s; });

  const cplx span = mid - end;
  cplx prev = std::sqrt(cplx{E, 0.0} + potential_eval(mid, 0, N));
  if (prev.real() < 0.0) prev = -prev;
  cplx sum{0.0, 0.0};
  for (const Node& nd : nodes) {
    const cplx x = end + span * (nd.s * nd.s);
    cplx root = std::sqrt(cplx{E, 0.0} + potential_eval(x, 0, N));
    if (std::abs(root - prev) > std::abs(root + prev)) root = -root;
    prev = root;
    sum += nd.weight * root * (2.0 * nd.s) * span;
  }
  return sum;
}

}  // namespace

TurningPoints turning_points(double E, double N) {
  if (!(E > 0.0)) throw DomainError("turning points need E > 0");
  if (!(N >= 1.0)) throw DomainError("turning points need N >= 1");
  const double r = std::pow(E, 1.0 / N);
  return {std::polar(r, pi * (1.5 - 1.0 / N)), std::polar(r, -pi * (0.5 - 1.0 / N)), E, N};
}

double wkb_energy_unchecked(double n, double N) {
  const double num = std::tgamma(1.5 + 1.0 / N) * std::sqrt(pi) * (n + 0.5);
  const double den = std::sin(pi / N) * std::tgamma(1.0 + 1.0 / N);
  return std::pow(num / den, 2.0 * N / (N + 2.0));
}

double wkb_energy(int n, double N) {
  if (n < 0) throw DomainError("level index must be non-negative");
  if (!(N >= 2.0)) {
    throw DomainError("WKB quantization path crosses the branch cut for N < 2 (N = " + std::to_string(N) + ")");
  }
  return wkb_energy_unchecked(n, N);
}

cplx quantization_integral(double E, double N, int nodes_per_segment) {
  const TurningPoints tp = turning_points(E, N);
  const cplx mid{0.0, -std::abs(tp.x_plus)};
  const int panels = std::max(1, nodes_per_segment / 20);
  const cplx total = segment_integral(tp.x_minus, mid, E, N, panels) - segment_integral(tp.x_plus, mid, E, N, panels);
  if (std::abs(total.imag()) > 1e-4 * std::abs(total)) {
    throw DomainError("quantization integral is not real on the lower-half-plane path (N = " + std::to_string(N) +
                      ")");
  }
  return total;
}

double quantization_residual(double E, int n, double N) {
  if (!(N >= 2.0)) throw DomainError("quantization residual requires N >= 2");
  return quantization_integral(E, N).real() - (n + 0.5) * pi;
}

double solve_quantization(int n, double N, double tol) {
  const double guess = wkb_energy(n, N);
  double a = 0.5 * guess;
  double b = 2.0 * guess;
  double fa = quantization_residual(a, n, N);
  double fb = quantization_residual(b, n, N);
  if (fa * fb > 0.0) throw ConvergenceError("quantization root not bracketed", guess);
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double c = (a * fb - b * fa) / (fb - fa);
    const double fc = quantization_residual(c, n, N);
    if (std::abs(b - a) < tol * std::max(1.0, std::abs(c)) || fc == 0.0) return c;
    if (fa * fc < 0.0) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (std::abs(fc) < 1e-15) return c;
  }
  return 0.5 * (a + b);
}

}  // namespace ptlab
