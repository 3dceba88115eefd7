#pragma once

#include <cstdint>
#include <vector>

#include "fatseg/grid.hpp"

namespace fatseg {

/// Closed 8-connected pixel contour, traced clockwise (image y axis points down).
struct Contour {
  std::vector<Point2> points;
};

struct Ray {
  Point2 start;      // on the skin contour
  Point2 direction;  // unit vector toward the center
  double length = 0; // distance from start to the center
};

struct RayFan {
  Point2 center;
  std::vector<Ray> rays;
  double step = 0.5;
};

enum class FusionLabel : std::uint8_t { kInlier = 0, kOutlier = 1 };

/// One SAT-VAT boundary hypothesis found on a ray.
struct Candidate {
  int ray = -1;
  Point2 position;
  Point2 skin;
  double distance = 0.0;  // |position - skin|, pixels
  double angle = 0.0;     // direction of the skin point seen from the center, radians
  double phi = 0.0;       // geometric MAD score
  double pi = 0.0;        // appearance outlier probability
  FusionLabel label = FusionLabel::kInlier;
};

struct CandidateBoundary {
  std::vector<Candidate> candidates;

  std::size_t size() const { return candidates.size(); }
  bool empty() const { return candidates.empty(); }
  std::vector<double> distances() const;
  std::vector<Point2> positions() const;
};

/// Background pixels not 4-connected to the image border become foreground.
BinarySlice fill_holes(const BinarySlice& mask);

/// Outer contour of every 8-connected component of `mask`, in raster order of
/// each component's first pixel.
std::vector<Contour> trace_outer_contours(const BinarySlice& mask);

/// Largest outer contour of the hole-filled mask. Throws NoSubjectError when the
/// mask has no component with a contour of at least three points.
Contour extract_skin_contour(const BinarySlice& mask);

double polygon_area(const std::vector<Point2>& pts);

/// Rays from `n_rays` arc-uniform contour positions toward the contour-vertex centroid.
RayFan build_ray_fan(const Contour& contour, int n_rays, double step = 0.5);

/// First 1 -> 0 transition along each ray, preceded by at least two fat samples.
/// The candidate is the first non-fat sample.
CandidateBoundary detect_transitions(const RayFan& fan, const BinarySlice& fat_mask);

}  // namespace fatseg
