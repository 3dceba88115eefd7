#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fatseg/evaluate.hpp"

namespace fatseg {

double Conic::value(Point2 p) const {
  return a * p.x * p.x + b * p.x * p.y + c * p.y * p.y + d * p.x + e * p.y + f;
}

double Conic::sampson_distance(Point2 p) const {
  const double gx = 2.0 * a * p.x + b * p.y + d;
  const double gy = b * p.x + 2.0 * c * p.y + e;
  const double g = std::hypot(gx, gy);
  const double v = std::abs(value(p));
  return g > 0.0 ? v / g : (v == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
}

Conic fit_conic5(const std::vector<Point2>& five) {
  if (five.size() != 5) throw std::invalid_argument("fit_conic5: need exactly 5 points");
  // Centre and scale for conditioning, then map the conic back.
  Point2 m{0.0, 0.0};
  for (const auto& p : five) m = m + p;
  m = 0.2 * m;
  double s = 0.0;
  for (const auto& p : five) s += std::hypot(p.x - m.x, p.y - m.y);
  s = s > 0.0 ? 5.0 / s : 1.0;

  Eigen::Matrix<double, 5, 6> A;
  for (int i = 0; i < 5; ++i) {
    const double x = (five[static_cast<std::size_t>(i)].x - m.x) * s;
    const double y = (five[static_cast<std::size_t>(i)].y - m.y) * s;
    A.row(i) << x * x, x * y, y * y, x, y, 1.0;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 5, 6>> svd(A, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 6, 1> v = svd.matrixV().col(5);

  // Substitute u = s (x - mx), w = s (y - my).
  const double A2 = v(0) * s * s, B2 = v(1) * s * s, C2 = v(2) * s * s, D1 = v(3) * s, E1 = v(4) * s, F0 = v(5);
  Conic k;
  k.a = A2;
  k.b = B2;
  k.c = C2;
  k.d = -2.0 * A2 * m.x - B2 * m.y + D1;
  k.e = -2.0 * C2 * m.y - B2 * m.x + E1;
  k.f = A2 * m.x * m.x + B2 * m.x * m.y + C2 * m.y * m.y - D1 * m.x - E1 * m.y + F0;
  return k;
}

RansacResult ransac_ellipse(const std::vector<Point2>& points, double tolerance, int iterations, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (n < 5) throw std::invalid_argument("ransac_ellipse: need at least 5 points");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  RansacResult best;
  best.inliers.assign(n, false);
  double best_residual = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int it = 0; it < iterations; ++it) {
    // Partial Fisher-Yates draw of 5 distinct indices.
    std::vector<Point2> sample;
    for (std::size_t k = 0; k < 5; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(idx[k], idx[pick(rng)]);
      sample.push_back(points[idx[k]]);
    }
    const Conic model = fit_conic5(sample);
    if (!model.is_ellipse()) continue;
    std::size_t count = 0;
    double residual = 0.0;
    std::vector<bool> in(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = model.sampson_distance(points[i]);
      if (dist <= tolerance) {
        in[i] = true;
        ++count;
        residual += dist;
      }
    }
    if (!found || count > best.inlier_count || (count == best.inlier_count && residual < best_residual)) {
      found = true;
      best.model = model;
      best.inliers = std::move(in);
      best.inlier_count = count;
      best_residual = residual;
    }
  }
  return best;
}

}  // namespace fatseg
