#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ptlab {

enum class ArtifactKind { kSpectrumVsN, kTrajectory, kKernelReport };

std::string to_string(ArtifactKind k);

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool markers = false;  // scatter instead of a polyline
};

struct FigureArtifact {
  ArtifactKind kind = ArtifactKind::kTrajectory;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  nlohmann::json provenance;
};

/// Self-contained SVG. Output depends only on the artifact, byte for byte.
/// Throws DomainError for kernel reports and for artifacts without finite points.
std::string emit_svg(const FigureArtifact& artifact);

}  // namespace ptlab
