#include "fatseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fatseg/errors.hpp"

namespace fatseg {
namespace {

enum class Tissue : std::uint8_t { kAir, kSatFat, kInclusion, kWall, kGapFat, kVisceralFat, kOrgan, kBlobFat };

bool is_fat(Tissue t) {
  return t == Tissue::kSatFat || t == Tissue::kGapFat || t == Tissue::kVisceralFat || t == Tissue::kBlobFat;
}

struct Ellipse {
  double cx, cy, a, b;
  double level(double x, double y) const {
    const double u = (x - cx) / a;
    const double v = (y - cy) / b;
    return u * u + v * v;
  }
  bool inside(double x, double y) const { return level(x, y) <= 1.0; }
  /// Distance from (px, py) along unit direction (dx, dy) to the boundary, for an interior start.
  double exit_distance(double px, double py, double dx, double dy) const {
    const double ux = (px - cx) / a, uy = (py - cy) / b;
    const double vx = dx / a, vy = dy / b;
    const double qa = vx * vx + vy * vy;
    const double qb = 2.0 * (ux * vx + uy * vy);
    const double qc = ux * ux + uy * uy - 1.0;
    return (-qb + std::sqrt(std::max(qb * qb - 4.0 * qa * qc, 0.0))) / (2.0 * qa);
  }
};

struct Circle {
  double x, y, r;
  bool inside(double px, double py) const { return (px - x) * (px - x) + (py - y) * (py - y) <= r * r; }
};

struct Anatomy {
  Ellipse skin, wall_outer, centerline, wall_inner, organ;
  std::vector<double> gap_centers;  // radians around the wall centre
  double gap_half_width = 0.0;
};

double angle_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

Anatomy build_anatomy(const PhantomParams& p, std::mt19937_64& rng) {
  const double cx = 0.5 * (p.nx - 1);
  const double cy = 0.5 * (p.ny - 1);
  const double t = p.sat_thickness;
  const double shift = p.sat_asymmetry * t;  // wall centre sits posterior (+y)
  Anatomy a;
  a.skin = {cx, cy, p.skin_a, p.skin_b};
  a.wall_outer = {cx, cy + shift, p.skin_a - t, p.skin_b - t};
  a.centerline = {cx, cy + shift, p.skin_a - t - 0.5 * p.wall_thickness, p.skin_b - t - 0.5 * p.wall_thickness};
  a.wall_inner = {cx, cy + shift, p.skin_a - t - p.wall_thickness, p.skin_b - t - p.wall_thickness};
  const double vt = p.wall_thickness + p.visceral_fat_thickness;
  a.organ = {cx, cy + shift, p.skin_a - t - vt, p.skin_b - t - vt};
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int g = 0; g < p.wall_gaps; ++g) a.gap_centers.push_back(angle(rng));
  a.gap_half_width = 0.5 * p.gap_width_deg * std::numbers::pi / 180.0;
  return a;
}

std::vector<Circle> place_inclusions(const PhantomParams& p, const Anatomy& a, std::mt19937_64& rng) {
  std::vector<Circle> out;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> depth(0.2, 0.8);
  for (int k = 0, tries = 0; k < p.sat_inclusions && tries < 200 * (p.sat_inclusions + 1); ++tries) {
    const double th = angle(rng);
    const double dx = std::cos(th);
    const double dy = std::sin(th);
    const double r_skin = a.skin.exit_distance(a.skin.cx, a.skin.cy, dx, dy);
    const double r_wall = a.wall_outer.exit_distance(a.skin.cx, a.skin.cy, dx, dy);
    const double span = r_skin - r_wall;
    if (span < 2.0 * p.inclusion_radius + 3.0) continue;
    const double r = r_wall + p.inclusion_radius + 1.5 + depth(rng) * (span - 2.0 * p.inclusion_radius - 3.0);
    out.push_back({a.skin.cx + r * dx, a.skin.cy + r * dy, p.inclusion_radius});
    ++k;
  }
  return out;
}

std::vector<Circle> place_blobs(const PhantomParams& p, const Anatomy& a, std::mt19937_64& rng) {
  std::vector<Circle> out;
  std::uniform_real_distribution<double> ux(a.organ.cx - a.organ.a, a.organ.cx + a.organ.a);
  std::uniform_real_distribution<double> uy(a.organ.cy - a.organ.b, a.organ.cy + a.organ.b);
  std::uniform_real_distribution<double> scale(0.6, 1.0);
  for (int k = 0, tries = 0; k < p.visceral_blobs && tries < 500 * (p.visceral_blobs + 1); ++tries) {
    const double r = p.blob_radius * scale(rng);
    const Circle c{ux(rng), uy(rng), r};
    // Keep the blob and a one-pixel margin inside the organ region.
    const Ellipse shrunk{a.organ.cx, a.organ.cy, a.organ.a - r - 1.0, a.organ.b - r - 1.0};
    if (shrunk.a <= 0.0 || shrunk.b <= 0.0 || !shrunk.inside(c.x, c.y)) continue;
    out.push_back(c);
    ++k;
  }
  return out;
}

Tissue classify(const Anatomy& a, const std::vector<Circle>& inclusions, const std::vector<Circle>& blobs, double x,
                double y) {
  if (!a.skin.inside(x, y)) return Tissue::kAir;
  if (!a.wall_outer.inside(x, y)) {
    for (const auto& c : inclusions) {
      if (c.inside(x, y)) return Tissue::kInclusion;
    }
    return Tissue::kSatFat;
  }
  if (!a.wall_inner.inside(x, y)) {
    const double th = std::atan2(y - a.wall_outer.cy, x - a.wall_outer.cx);
    for (double g : a.gap_centers) {
      if (angle_diff(th, g) <= a.gap_half_width) return Tissue::kGapFat;
    }
    return Tissue::kWall;
  }
  if (!a.organ.inside(x, y)) return Tissue::kVisceralFat;
  for (const auto& c : blobs) {
    if (c.inside(x, y)) return Tissue::kBlobFat;
  }
  return Tissue::kOrgan;
}

}  // namespace

void PhantomParams::validate() const {
  if (nx < 16 || ny < 16 || nz < 1) throw std::invalid_argument("phantom: grid too small");
  if (!spacing.valid()) throw std::invalid_argument("phantom: invalid spacing");
  if (!(sat_thickness > 0.0) || !(wall_thickness > 0.0) || !(visceral_fat_thickness > 0.0)) {
    throw std::invalid_argument("phantom: thicknesses must be positive");
  }
  if (sat_asymmetry < 0.0 || sat_thickness * (1.0 - sat_asymmetry) < 2.0) {
    throw std::invalid_argument("phantom: SAT ring too thin at its narrowest point");
  }
  if (!(hu_air < hu_fat && hu_fat < -30.0 && -30.0 < hu_muscle)) {
    throw std::invalid_argument("phantom: HU means must satisfy air < fat < -30 < muscle");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("phantom: negative noise");
  if (wall_gaps < 0 || visceral_blobs < 0 || sat_inclusions < 0) throw std::invalid_argument("phantom: negative count");
  const double inner = sat_thickness + wall_thickness + visceral_fat_thickness + sat_asymmetry * sat_thickness;
  if (skin_a - inner < 4.0 || skin_b - inner < 4.0) throw std::invalid_argument("phantom: anatomy does not fit the body");
  const double cx = 0.5 * (nx - 1);
  const double cy = 0.5 * (ny - 1);
  if (skin_a + 2.0 > cx || skin_b + 2.0 > cy) throw std::invalid_argument("phantom: body does not fit the grid");
}

Phantom generate(const PhantomParams& params) {
  params.validate();
  Phantom out;
  out.params = params;
  const Dims dims{params.nx, params.ny, params.nz};
  out.volume = VolumeGrid(dims, params.spacing);
  out.truth = MaskGrid(dims, params.spacing);

  std::mt19937_64 rng(params.seed);
  const Anatomy anatomy = build_anatomy(params, rng);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (int z = 0; z < params.nz; ++z) {
    const auto inclusions = place_inclusions(params, anatomy, rng);
    const auto blobs = place_blobs(params, anatomy, rng);
    for (int y = 0; y < params.ny; ++y) {
      for (int x = 0; x < params.nx; ++x) {
        const Tissue t = classify(anatomy, inclusions, blobs, x, y);
        double hu = params.hu_air;
        switch (t) {
          case Tissue::kAir: hu = params.hu_air; break;
          case Tissue::kInclusion:
          case Tissue::kWall: hu = params.hu_muscle; break;
          case Tissue::kOrgan: hu = params.hu_organ; break;
          default: hu = params.hu_fat; break;
        }
        const double v = std::round(hu + params.noise_sigma * noise(rng));
        out.volume.at(x, y, z) = static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
        Label label = Label::kBackground;
        if (is_fat(t)) label = anatomy.centerline.inside(x, y) ? Label::kVat : Label::kSat;
        out.truth.at(x, y, z) = code(label);
      }
    }
  }
  return out;
}

std::vector<PhantomParams> suite_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PhantomParams> out;
  for (int i = 0; i < kSuiteSize; ++i) {
    PhantomParams p;
    p.nz = 2;
    p.sat_thickness = 5.0 + 35.0 * i / (kSuiteSize - 1);
    const double ecc = 1.0 + 0.6 * static_cast<double>((7 * i) % kSuiteSize) / (kSuiteSize - 1);
    p.skin_a = std::min(150.0, ecc * (70.0 + 0.6 * p.sat_thickness));
    p.skin_b = p.skin_a / ecc;
    p.sat_asymmetry = 0.1 + 0.3 * unit(rng);
    p.wall_thickness = 3.0 + 3.0 * unit(rng);
    p.wall_gaps = i % 7;
    p.gap_width_deg = 5.0 + 7.0 * unit(rng);
    p.visceral_fat_thickness = 3.0 + 0.2 * p.sat_thickness + 3.0 * unit(rng);
    p.visceral_blobs = 2 + i % 5;
    p.blob_radius = 4.0 + 4.0 * unit(rng);
    p.sat_inclusions = static_cast<int>(std::lround(p.sat_thickness / 8.0));
    p.inclusion_radius = std::min(3.0, 0.25 * p.sat_thickness * (1.0 - p.sat_asymmetry));
    p.noise_sigma = 15.0;
    p.seed = rng();
    out.push_back(p);
  }
  return out;
}

std::vector<Phantom> suite(std::uint64_t seed) {
  std::vector<Phantom> out;
  for (const auto& p : suite_params(seed)) out.push_back(generate(p));
  return out;
}

}  // namespace fatseg
