#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ptlab {

using cplx = std::complex<double>;

/// Exponent of H = p^2 - (ix)^N. log(ix) is the principal branch, so the cut
/// runs up the positive-imaginary x axis; `sheet` selects log(ix) + 2*pi*i*sheet.
struct PotentialSpec {
  double N;

  explicit PotentialSpec(double exponent);
};

/// Stokes wedges of the eigenvalue problem. Angles in radians.
struct WedgeGeometry {
  double theta_left;
  double theta_right;
  double opening;
};

/// Open angular sector lo < arg x < hi.
struct Wedge {
  double lo;
  double hi;

  double center() const { return 0.5 * (lo + hi); }
  double opening() const { return hi - lo; }
};

struct WedgePair {
  Wedge left;
  Wedge right;
  bool pt_symmetric;  // left wedge is the mirror x -> -x* of the right wedge
};

/// Two straight rays joined at the origin, sampled on composite
/// Gauss-Kronrod panels. Points run from the far end of the left ray,
/// through the junction (the origin, weight zero), out along the right ray.
/// The point set is exactly invariant under x -> -x*, and
/// points[mirror(i)] == -conj(points[i]).
struct Contour {
  double N = 2.0;
  double rho_max = 0.0;
  double theta_left = 0.0;
  double theta_right = 0.0;
  std::vector<cplx> points;
  std::vector<double> arc;              // signed arc length: -r on the left ray, +r on the right
  std::vector<cplx> weights;            // Kronrod weights times dx/ds (complex line element)
  std::vector<cplx> embedded_weights;   // embedded Gauss weights times dx/ds, zero at Kronrod-only nodes
  std::size_t junction = 0;

  std::size_t size() const { return points.size(); }
  std::size_t mirror(std::size_t i) const { return 2 * junction - i; }
  /// Radii of the right-ray samples, increasing (origin excluded).
  std::vector<double> ray_radii() const;
};

/// Centers and opening of the left/right wedges. Throws DomainError for N <= 1.
WedgeGeometry wedge_angles(double N);

/// (ix)^N on the given sheet of the Riemann surface. Throws OverflowError on a non-finite result.
cplx potential_eval(cplx x, int sheet, double N);

/// Signed change of sheet index when a path moves from `from` to `to`
/// across the positive-imaginary axis (+1 for moving from Re x > 0 to Re x < 0).
int sheet_crossing(cplx from, cplx to);

/// Contour with rays along the wedge centers, each rotated away from the real
/// axis by `ray_offset` radians (mirror-symmetrically, so PT symmetry holds).
/// points_per_ray is rounded up to a multiple of the 15-point panel size.
Contour build_contour(double N, double rho_max, int points_per_ray, double ray_offset = 0.0);

/// Ray length for which the decay exponent of the subdominant WKB solution at
/// energy |E| <= e_max exceeds `exponent` along the wedge-center ray.
double default_rho_max(double N, double e_max, double exponent = 35.0, double ray_offset = 0.0);

/// Wedge pairs for the wrong-sign quartic: Dyson rotation and the PT limit.
std::pair<WedgePair, WedgePair> dyson_vs_pt_wedges();

/// True when the real axis lies inside both wedges (1 < N < 4).
bool wedges_contain_real_axis(double N);

nlohmann::json to_json(const Contour& c);

}  // namespace ptlab
