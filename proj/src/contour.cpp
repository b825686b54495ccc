#include "ptlab/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ptlab/errors.hpp"

namespace ptlab {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int kPanelOrder = 15;

struct PanelRule {
  std::array<double, kPanelOrder> nodes{};     // on [-1, 1], ascending
  std::array<double, kPanelOrder> kronrod{};
  std::array<double, kPanelOrder> gauss{};     // zero where the node is Kronrod-only
};

const PanelRule& panel_rule() {
  static const PanelRule rule = [] {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    const auto& ka = gauss_kronrod<double, kPanelOrder>::abscissa();
    const auto& kw = gauss_kronrod<double, kPanelOrder>::weights();
    const auto& ga = gauss<double, 7>::abscissa();
    const auto& gw = gauss<double, 7>::weights();
    PanelRule r;
    // boost stores the non-negative half, starting at 0.
    const int half = static_cast<int>(ka.size());  // 8
    for (int k = 0; k < half; ++k) {
      double gweight = 0.0;
      for (std::size_t g = 0; g < ga.size(); ++g) {
        if (std::abs(ga[g] - ka[k]) < 1e-14) gweight = gw[g];
      }
      r.nodes[half - 1 + k] = ka[k];
      r.nodes[half - 1 - k] = -ka[k];
      r.kronrod[half - 1 + k] = r.kronrod[half - 1 - k] = kw[k];
      r.gauss[half - 1 + k] = r.gauss[half - 1 - k] = gweight;
    }
    return r;
  }();
  return rule;
}

// Panel boundaries on [0, rho]: halving panels inside the inner radius,
// uniform panels outside.
std::vector<double> panel_edges(double rho, int panels_total) {
  const int geometric = 5;
  const double inner = std::min(1.0, rho / 4.0);
  std::vector<double> edges{0.0};
  for (int k = geometric - 1; k >= 0; --k) edges.push_back(inner / std::ldexp(1.0, k));
  const int outer = std::max(1, panels_total - geometric);
  for (int k = 1; k <= outer; ++k) edges.push_back(inner + (rho - inner) * k / outer);
  return edges;
}

}  // namespace

PotentialSpec::PotentialSpec(double exponent) : N(exponent) {
  if (!(exponent >= 1.0)) throw DomainError("exponent N must satisfy N >= 1, got " + std::to_string(exponent));
}

WedgeGeometry wedge_angles(double N) {
  if (!(N > 1.0)) {
    throw DomainError("wedges are contiguous at N <= 1; no eigenvalue problem (N = " + std::to_string(N) + ")");
  }
  const double tilt = (N - 2.0) * pi / (2.0 * N + 4.0);
  return {-pi + tilt, -tilt, 2.0 * pi / (N + 2.0)};
}

cplx potential_eval(cplx x, int sheet, double N) {
  if (x == cplx{0.0, 0.0}) return {0.0, 0.0};
  const cplx ix{-x.imag(), x.real()};
  const cplx lg = std::log(ix) + cplx{0.0, 2.0 * pi * sheet};
  const cplx v = std::exp(N * lg);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw OverflowError("(ix)^N overflow", std::abs(x));
  }
  return v;
}

int sheet_crossing(cplx from, cplx to) {
  const bool straddles = (from.real() > 0.0 && to.real() <= 0.0) || (from.real() <= 0.0 && to.real() > 0.0);
  if (!straddles) return 0;
  const double t = from.real() / (from.real() - to.real());
  const double im = from.imag() + t * (to.imag() - from.imag());
  if (im <= 0.0) return 0;
  return from.real() > 0.0 ? +1 : -1;
}

std::vector<double> Contour::ray_radii() const {
  std::vector<double> r;
  r.reserve(points.size() - junction - 1);
  for (std::size_t i = junction + 1; i < points.size(); ++i) r.push_back(arc[i]);
  return r;
}

Contour build_contour(double N, double rho_max, int points_per_ray, double ray_offset) {
  const WedgeGeometry w = wedge_angles(N);
  if (!(rho_max > 0.0)) throw DomainError("rho_max must be positive");
  if (points_per_ray < 16) throw DomainError("points_per_ray must be at least 16");
  if (!(std::abs(ray_offset) < 0.5 * w.opening)) throw DomainError("ray offset leaves the Stokes wedge");

  Contour c;
  c.N = N;
  c.rho_max = rho_max;
  c.theta_right = w.theta_right - ray_offset;
  c.theta_left = -pi - c.theta_right;

  const int panels = std::max(6, (points_per_ray + kPanelOrder - 1) / kPanelOrder);
  const auto edges = panel_edges(rho_max, panels);
  const PanelRule& rule = panel_rule();

  std::vector<double> radii;
  std::vector<double> kw;
  std::vector<double> gw;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (int k = 0; k < kPanelOrder; ++k) {
      radii.push_back(mid + half * rule.nodes[k]);
      kw.push_back(half * rule.kronrod[k]);
      gw.push_back(half * rule.gauss[k]);
    }
  }

  const cplx dir_right = std::polar(1.0, c.theta_right);
  const std::size_t m = radii.size();
  c.junction = m;
  c.points.resize(2 * m + 1);
  c.arc.resize(2 * m + 1);
  c.weights.resize(2 * m + 1);
  c.embedded_weights.resize(2 * m + 1);
  c.points[m] = {0.0, 0.0};
  c.arc[m] = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t right = m + 1 + k;
    const std::size_t left = m - 1 - k;
    const cplx x = radii[k] * dir_right;
    c.points[right] = x;
    c.points[left] = -std::conj(x);
    c.arc[right] = radii[k];
    c.arc[left] = -radii[k];
    // Traversal is left to right, so dx on the left ray is conj(dir_right) dr.
    c.weights[right] = kw[k] * dir_right;
    c.weights[left] = kw[k] * std::conj(dir_right);
    c.embedded_weights[right] = gw[k] * dir_right;
    c.embedded_weights[left] = gw[k] * std::conj(dir_right);
  }
  return c;
}

double default_rho_max(double N, double e_max, double exponent, double ray_offset) {
  const WedgeGeometry w = wedge_angles(N);
  const cplx dir = std::polar(1.0, w.theta_right - ray_offset);
  const double h = 1e-3 * std::max(1.0, std::pow(std::abs(e_max), 1.0 / N));
  // WKB log-amplitude along the ray, square root continued from the origin.
  // Inside the turning radius the eigenfunction carries both exponentials, so
  // its peak sits that far above the origin value; the tail must decay past it.
  const double turning = std::pow(std::abs(e_max), 1.0 / N);
  cplx root = std::sqrt(cplx{-std::abs(e_max), 0.0});
  double phase = 0.0;
  double inner = 0.0;
  double r = 0.0;
  for (;;) {
    const cplx x = (r + 0.5 * h) * dir;
    cplx next = std::sqrt(-potential_eval(x, 0, N) - cplx{std::abs(e_max), 0.0});
    if (std::abs(next - root) > std::abs(next + root)) next = -next;
    root = next;
    const double d = (root * dir).real() * h;
    phase += d;
    if (r < turning) inner += std::abs(d);
    r += h;
    if (r > turning && std::abs(phase) - 2.0 * inner >= exponent) return r;
  }
}

std::pair<WedgePair, WedgePair> dyson_vs_pt_wedges() {
  auto mirrored = [](const Wedge& right, const Wedge& left) {
    // x -> -x* sends arg to pi - arg; compare modulo 2 pi.
    const double lo = pi - right.hi;
    const double hi = pi - right.lo;
    auto same = [](double a, double b) {
      const double d = std::remainder(a - b, 2.0 * pi);
      return std::abs(d) < 1e-12;
    };
    return same(lo, left.lo) && same(hi, left.hi);
  };
  WedgePair dyson{{-4.0 * pi / 3.0, -pi}, {-pi / 3.0, 0.0}, false};
  WedgePair pt{{-pi, -2.0 * pi / 3.0}, {-pi / 3.0, 0.0}, false};
  dyson.pt_symmetric = mirrored(dyson.right, dyson.left);
  pt.pt_symmetric = mirrored(pt.right, pt.left);
  return {dyson, pt};
}

bool wedges_contain_real_axis(double N) {
  const WedgeGeometry w = wedge_angles(N);
  return std::abs(w.theta_right) < 0.5 * w.opening && std::abs(w.theta_left + pi) < 0.5 * w.opening;
}

nlohmann::json to_json(const Contour& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) pts.push_back({p.real(), p.imag()});
  return {{"N", c.N}, {"rho_max", c.rho_max}, {"points", pts}, {"junction_index", c.junction}};
}

}  // namespace ptlab
