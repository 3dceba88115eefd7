#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "fatseg/boundary.hpp"
#include "fatseg/phantom.hpp"
#include "fatseg/preprocess.hpp"

using namespace fatseg;

namespace {

// Distance to an axis-aligned ellipse, by dense sampling.
double ellipse_distance(Point2 p, double cx, double cy, double a, double b) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 8000; ++i) {
    const double t = 2 * std::numbers::pi * i / 8000.0;
    best = std::min(best, std::hypot(p.x - (cx + a * std::cos(t)), p.y - (cy + b * std::sin(t))));
  }
  return best;
}

}  // namespace

TEST_CASE("same parameters give the same phantom") {
  PhantomParams p;
  p.nz = 2;
  p.sat_inclusions = 3;
  const Phantom a = generate(p);
  const Phantom b = generate(p);
  CHECK(a.volume == b.volume);
  CHECK(a.truth == b.truth);
  p.seed = 2;
  CHECK_FALSE(generate(p).volume == a.volume);
}

TEST_CASE("battery is fixed by its seed") {
  const auto a = suite_params(42);
  const auto b = suite_params(42);
  REQUIRE(a.size() == static_cast<std::size_t>(kSuiteSize));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].sat_thickness == b[i].sat_thickness);
    CHECK_NOTHROW(a[i].validate());
  }
  const Phantom p0 = generate(a[7]);
  CHECK(p0.volume == generate(b[7]).volume);
}

TEST_CASE("battery covers thin to thick SAT, with wall gaps and noise") {
  const auto ps = suite_params(42);
  double lo = 1e9, hi = 0;
  int with_gaps = 0;
  for (const auto& p : ps) {
    lo = std::min(lo, p.sat_thickness);
    hi = std::max(hi, p.sat_thickness);
    with_gaps += p.wall_gaps > 0;
    CHECK(p.noise_sigma == 15.0);
  }
  CHECK(lo == doctest::Approx(5.0));
  CHECK(hi == doctest::Approx(40.0));
  CHECK(with_gaps >= kSuiteSize / 2);
}

TEST_CASE("ground truth labels only fat, split at the wall") {
  PhantomParams p;
  p.noise_sigma = 0;
  const Phantom ph = generate(p);
  std::size_t sat = 0, vat = 0;
  for (std::size_t i = 0; i < ph.truth.data.size(); ++i) {
    const auto t = ph.truth.data[i];
    const bool fat = ph.volume.data[i] == static_cast<std::int16_t>(p.hu_fat);
    CHECK(fat == (t != 0));
    CHECK(t != code(Label::kFatUndivided));
    sat += t == code(Label::kSat);
    vat += t == code(Label::kVat);
  }
  CHECK(sat > 0);
  CHECK(vat > 0);
}

TEST_CASE("without noise the fat threshold reproduces the truth support") {
  PhantomParams p;
  p.noise_sigma = 0;
  p.sat_inclusions = 4;
  const Phantom ph = generate(p);
  const BinarySlice fat = threshold_fat(extract_slice(ph.volume, 0), {});
  const LabelSlice truth = extract_slice(ph.truth, 0);
  for (std::size_t i = 0; i < fat.size(); ++i) CHECK((fat.data()[i] != 0) == (truth.data()[i] != 0));
}

TEST_CASE("without blobs, VAT is the fat ring between wall and organ") {
  PhantomParams p;
  p.noise_sigma = 0;
  p.visceral_blobs = 0;
  p.wall_gaps = 0;
  const Phantom ph = generate(p);
  const double cx = 0.5 * (p.nx - 1), cy = 0.5 * (p.ny - 1) + p.sat_asymmetry * p.sat_thickness;
  const double a_in = p.skin_a - p.sat_thickness - p.wall_thickness;
  const double b_in = p.skin_b - p.sat_thickness - p.wall_thickness;
  for (int y = 0; y < p.ny; ++y)
    for (int x = 0; x < p.nx; ++x) {
      if (ph.truth.at(x, y, 0) != code(Label::kVat)) continue;
      const double lv = (x - cx) * (x - cx) / (a_in * a_in) + (y - cy) * (y - cy) / (b_in * b_in);
      CHECK(lv <= 1.0);
    }
}

TEST_CASE("noise-free, gap-free phantom: candidates sit on the wall") {
  PhantomParams p;
  p.noise_sigma = 0;
  p.wall_gaps = 0;
  const Phantom ph = generate(p);
  const auto pre = preprocess_slice(extract_slice(ph.volume, 0), {});
  const auto cb = detect_transitions(build_ray_fan(extract_skin_contour(pre.denoised), 360), pre.fat);
  CHECK(cb.size() == 360);
  const double cx = 0.5 * (p.nx - 1), cy = 0.5 * (p.ny - 1) + p.sat_asymmetry * p.sat_thickness;
  for (const auto& c : cb.candidates) {
    CHECK(ellipse_distance(c.position, cx, cy, p.skin_a - p.sat_thickness, p.skin_b - p.sat_thickness) <= 1.5);
  }
}

TEST_CASE("invalid parameters are rejected") {
  PhantomParams p;
  p.sat_thickness = 200;
  CHECK_THROWS_AS(generate(p), std::invalid_argument);
  p = {};
  p.skin_a = 400;
  CHECK_THROWS_AS(generate(p), std::invalid_argument);
  p = {};
  p.wall_gaps = -1;
  CHECK_THROWS_AS(generate(p), std::invalid_argument);
}
