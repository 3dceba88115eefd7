#include "fatseg/partition.hpp"

#include <algorithm>
#include <cmath>
#include "json.hpp"

#include "fatseg/errors.hpp"

namespace fatseg {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

double HullPolygon::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& p = vertices[i];
    const auto& q = vertices[(i + 1) % vertices.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

HullPolygon convex_hull(std::vector<Point2> points) {
  std::sort(points.begin(), points.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) throw DegenerateHullError("convex hull needs at least 3 distinct points");

  std::vector<Point2> h(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0.0) --k;
    h[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], points[i]) <= 0.0) --k;
    h[k++] = points[i];
  }
  h.resize(k - 1);
  if (h.size() < 3) throw DegenerateHullError("all hull points are collinear");
  return HullPolygon{std::move(h)};
}

bool point_in_hull(const HullPolygon& hull, Point2 p, double tol) {
  const auto& v = hull.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i];
    const Point2 b = v[(i + 1) % v.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cross(a, b, p) < -tol * std::max(len, 1.0)) return false;
  }
  return true;
}

LabelSlice partition_slice(const BinarySlice& fat_mask, const std::optional<HullPolygon>& hull) {
  LabelSlice out(fat_mask.nx(), fat_mask.ny(), code(Label::kBackground));
  if (!hull) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (fat_mask.data()[i]) out.data()[i] = code(Label::kSat);
    }
    return out;
  }
  double xmin = hull->vertices[0].x;
  double xmax = xmin;
  double ymin = hull->vertices[0].y;
  double ymax = ymin;
  for (const auto& v : hull->vertices) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  const int nx = fat_mask.nx();
  const int ny = fat_mask.ny();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (!fat_mask(x, y)) continue;
      const bool inside = x >= xmin - 1.0 && x <= xmax + 1.0 && y >= ymin - 1.0 && y <= ymax + 1.0 &&
                          point_in_hull(*hull, {static_cast<double>(x), static_cast<double>(y)});
      out(x, y) = code(inside ? Label::kVat : Label::kSat);
    }
  }
  return out;
}

QuantReport quantify(const MaskGrid& mask) {
  mask.validate();
  QuantReport r;
  const double area = mask.spacing.dx * mask.spacing.dy;
  for (int z = 0; z < mask.dims.nz; ++z) {
    SliceQuant q;
    q.z = z;
    const auto begin = mask.data.begin() + static_cast<std::ptrdiff_t>(mask.offset(0, 0, z));
    const auto end = begin + static_cast<std::ptrdiff_t>(mask.dims.slice_count());
    for (auto it = begin; it != end; ++it) {
      if (*it == code(Label::kSat)) ++q.sat_pixels;
      if (*it == code(Label::kVat)) ++q.vat_pixels;
      if (*it != code(Label::kBackground)) ++q.fat_pixels;
    }
    q.sat_area_mm2 = static_cast<double>(q.sat_pixels) * area;
    q.vat_area_mm2 = static_cast<double>(q.vat_pixels) * area;
    r.slices.push_back(q);
  }
  r.sat_ml = label_volume_ml(mask, Label::kSat);
  r.vat_ml = label_volume_ml(mask, Label::kVat);
  const auto fat = mask.data.size() - mask.count(Label::kBackground);
  r.total_fat_ml = static_cast<double>(fat) * mask.spacing.voxel_ml();
  return r;
}

std::string to_json(const QuantReport& report, bool with_timings) {
  nlohmann::ordered_json j;
  j["sat_ml"] = report.sat_ml;
  j["vat_ml"] = report.vat_ml;
  j["total_fat_ml"] = report.total_fat_ml;
  if (with_timings) j["total_seconds"] = report.total_seconds;
  j["parameters"] = nlohmann::ordered_json::parse(report.parameters_json);
  auto& slices = j["slices"] = nlohmann::ordered_json::array();
  for (const auto& s : report.slices) {
    nlohmann::ordered_json js;
    js["z"] = s.z;
    js["sat_pixels"] = s.sat_pixels;
    js["vat_pixels"] = s.vat_pixels;
    js["fat_pixels"] = s.fat_pixels;
    js["sat_area_mm2"] = s.sat_area_mm2;
    js["vat_area_mm2"] = s.vat_area_mm2;
    js["flagged"] = s.flagged;
    if (!s.note.empty()) js["note"] = s.note;
    if (with_timings) js["seconds"] = s.seconds;
    slices.push_back(std::move(js));
  }
  return j.dump(2);
}

}  // namespace fatseg
