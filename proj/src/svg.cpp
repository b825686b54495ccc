#include "ptlab/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "ptlab/errors.hpp"

namespace ptlab {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;  // room for the legend
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span() const { return hi - lo; }
  void pad() {
    if (span() <= 0.0) {
      const double d = std::max(1.0, std::abs(lo)) * 0.5;
      lo -= d;
      hi += d;
    } else {
      const double d = 0.05 * span();
      lo -= d;
      hi += d;
    }
  }
  void widen_to(double s) {
    const double mid = 0.5 * (lo + hi);
    lo = mid - 0.5 * s;
    hi = mid + 0.5 * s;
  }
};

}  // namespace

std::string to_string(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::kSpectrumVsN: return "spectrum-vs-N";
    case ArtifactKind::kTrajectory: return "trajectory";
    case ArtifactKind::kKernelReport: return "kernel-report";
  }
  return "unknown";
}

std::string emit_svg(const FigureArtifact& a) {
  if (a.kind == ArtifactKind::kKernelReport) throw DomainError("kernel reports have no plot form");

  Range xr, yr;
  std::size_t finite = 0;
  for (const auto& s : a.series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xr.add(x);
      yr.add(y);
      ++finite;
    }
  }
  if (finite == 0) throw DomainError("cannot plot an empty dataset");
  xr.pad();
  yr.pad();

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  if (a.kind == ArtifactKind::kTrajectory) {
    // Equal scale on both axes so ellipses and cardioids keep their shape.
    const double scale = std::max(xr.span() / pw, yr.span() / ph);
    xr.widen_to(scale * pw);
    yr.widen_to(scale * ph);
  }
  auto mx = [&](double x) { return kLeft + (x - xr.lo) / xr.span() * pw; };
  auto my = [&](double y) { return kTop + (yr.hi - y) / yr.span() * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\"" << px(kHeight)
    << "\" viewBox=\"0 0 " << px(kWidth) << ' ' << px(kHeight) << "\">\n";
  o << "<metadata>" << xml_escape(a.provenance.dump()) << "</metadata>\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">"
    << xml_escape(a.title) << "</text>\n";

  // Axes box and ticks.
  o << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  o << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
    << "\"/>\n";
  o << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const double xs = nice_step(xr.span(), 6);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    const double X = mx(t);
    o << "<line x1=\"" << px(X) << "\" y1=\"" << px(kTop + ph) << "\" x2=\"" << px(X) << "\" y2=\""
      << px(kTop + ph + 5) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << px(X) << "\" y=\"" << px(kTop + ph + 18) << "\" text-anchor=\"middle\">"
      << tick_label(t) << "</text>\n";
  }
  const double ys = nice_step(yr.span(), 6);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    const double Y = my(t);
    o << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(Y) << "\" x2=\"" << px(kLeft) << "\" y2=\"" << px(Y)
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(Y + 4) << "\" text-anchor=\"end\">" << tick_label(t)
      << "</text>\n";
  }
  o << "</g>\n";
  o << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << px(kHeight - 15)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(a.x_label)
    << "</text>\n";
  o << "<text transform=\"translate(20," << px(kTop + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
    << xml_escape(a.y_label) << "</text>\n";

  o << "<g fill=\"none\" stroke-width=\"1.2\">\n";
  for (std::size_t k = 0; k < a.series.size(); ++k) {
    const auto& s = a.series[k];
    const char* color = kPalette[k % kPalette.size()];
    if (s.markers) {
      o << "<g fill=\"" << color << "\" stroke=\"none\">";
      for (const auto& [x, y] : s.points) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        o << "<circle cx=\"" << px(mx(x)) << "\" cy=\"" << px(my(y)) << "\" r=\"1.8\"/>";
      }
      o << "</g>\n";
      continue;
    }
    // Non-finite points split the line.
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) o << "<polyline stroke=\"" << color << "\" points=\"" << pts << "\"/>\n";
      pts.clear();
    };
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += px(mx(x)) + ',' + px(my(y));
    }
    flush();
  }
  o << "</g>\n";

  o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t k = 0; k < a.series.size(); ++k) {
    if (a.series[k].label.empty()) continue;
    const double y = kTop + 12 + 16.0 * static_cast<double>(k);
    o << "<rect x=\"" << px(kWidth - kRight + 12) << "\" y=\"" << px(y - 8) << "\" width=\"10\" height=\"10\" fill=\""
      << kPalette[k % kPalette.size()] << "\"/>";
    o << "<text x=\"" << px(kWidth - kRight + 28) << "\" y=\"" << px(y + 1) << "\">" << xml_escape(a.series[k].label)
      << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace ptlab
