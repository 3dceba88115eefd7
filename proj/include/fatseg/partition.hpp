#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fatseg/grid.hpp"
#include "fatseg/volume_io.hpp"

namespace fatseg {

/// Counterclockwise convex polygon (in a y-up frame; clockwise on screen).
struct HullPolygon {
  std::vector<Point2> vertices;

  double area() const;
};

inline constexpr double kHullTolerance = 1e-9;

double cross(Point2 o, Point2 a, Point2 b);

/// Monotone-chain hull; collinear points on edges are dropped. Throws
/// DegenerateHullError for fewer than 3 distinct points or an all-collinear set.
HullPolygon convex_hull(std::vector<Point2> points);

/// Inside or on the boundary, within `tol` (scaled by edge length).
bool point_in_hull(const HullPolygon& hull, Point2 p, double tol = kHullTolerance);

/// Fat pixels inside or on the hull become VAT, other fat pixels SAT, the rest
/// background. Without a hull every fat pixel is SAT.
LabelSlice partition_slice(const BinarySlice& fat_mask, const std::optional<HullPolygon>& hull);

struct SliceQuant {
  int z = 0;
  std::size_t sat_pixels = 0;
  std::size_t vat_pixels = 0;
  std::size_t fat_pixels = 0;  // every fat label, including undivided
  double sat_area_mm2 = 0.0;
  double vat_area_mm2 = 0.0;
  bool flagged = false;  // no usable hull; all fat reported as SAT
  std::string note;
  double seconds = 0.0;
};

struct QuantReport {
  double sat_ml = 0.0;
  double vat_ml = 0.0;
  double total_fat_ml = 0.0;
  std::vector<SliceQuant> slices;
  std::string parameters_json = "{}";  // filled by the pipeline
  double total_seconds = 0.0;
};

/// Volumes in ml (count * dx*dy*dz / 1000) and per-slice areas.
QuantReport quantify(const MaskGrid& mask);

/// Timings are optional so that reports of identical runs compare byte-equal.
std::string to_json(const QuantReport& report, bool with_timings = false);

}  // namespace fatseg
