#include "fatseg/boundary.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "fatseg/errors.hpp"

namespace fatseg {
namespace {

// Clockwise 8-neighbourhood starting east, y down.
constexpr std::array<int, 8> kDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  throw std::logic_error("direction_of: not a neighbour offset");
}

bool fg(const BinarySlice& m, int x, int y) { return m.contains(x, y) && m(x, y) != 0; }

// Moore-neighbour tracing with Jacob's stopping rule.
Contour trace_from(const BinarySlice& mask, int sx, int sy) {
  Contour c;
  c.points.push_back({static_cast<double>(sx), static_cast<double>(sy)});
  int px = sx;
  int py = sy;
  int back = 4;  // raster-order start: the west neighbour is background
  bool started = false;
  int first_x = 0;
  int first_y = 0;
  // Each boundary pixel is entered at most 4 times; guard against logic errors.
  const std::size_t limit = 4 * mask.size() + 8;
  for (std::size_t step = 0; step < limit; ++step) {
    int found = -1;
    for (int i = 1; i <= 8; ++i) {
      const int d = (back + i) % 8;
      if (fg(mask, px + kDx[d], py + kDy[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) return c;  // isolated pixel

    const int qx = px + kDx[found];
    const int qy = py + kDy[found];
    if (px == sx && py == sy) {
      if (started && qx == first_x && qy == first_y) break;
      if (!started) {
        started = true;
        first_x = qx;
        first_y = qy;
      }
    }
    const int prev = (found + 7) % 8;
    back = direction_of(px + kDx[prev] - qx, py + kDy[prev] - qy);
    px = qx;
    py = qy;
    c.points.push_back({static_cast<double>(px), static_cast<double>(py)});
  }
  if (c.points.size() > 1 && c.points.back() == c.points.front()) c.points.pop_back();
  return c;
}

}  // namespace

std::vector<double> CandidateBoundary::distances() const {
  std::vector<double> d;
  d.reserve(candidates.size());
  for (const auto& c : candidates) d.push_back(c.distance);
  return d;
}

std::vector<Point2> CandidateBoundary::positions() const {
  std::vector<Point2> p;
  p.reserve(candidates.size());
  for (const auto& c : candidates) p.push_back(c.position);
  return p;
}

BinarySlice fill_holes(const BinarySlice& mask) {
  const int nx = mask.nx();
  const int ny = mask.ny();
  Grid2D<std::uint8_t> outside(nx, ny, 0);
  std::deque<std::pair<int, int>> queue;
  auto seed = [&](int x, int y) {
    if (mask(x, y) == 0 && !outside(x, y)) {
      outside(x, y) = 1;
      queue.emplace_back(x, y);
    }
  };
  for (int x = 0; x < nx; ++x) {
    seed(x, 0);
    seed(x, ny - 1);
  }
  for (int y = 0; y < ny; ++y) {
    seed(0, y);
    seed(nx - 1, y);
  }
  constexpr std::array<int, 4> dx4 = {1, -1, 0, 0};
  constexpr std::array<int, 4> dy4 = {0, 0, 1, -1};
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int xx = x + dx4[k];
      const int yy = y + dy4[k];
      if (mask.contains(xx, yy)) seed(xx, yy);
    }
  }
  BinarySlice out(nx, ny, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = outside.data()[i] ? 0 : 1;
  return out;
}

std::vector<Contour> trace_outer_contours(const BinarySlice& mask) {
  const int nx = mask.nx();
  const int ny = mask.ny();
  Grid2D<int> component(nx, ny, -1);
  std::vector<Contour> contours;
  int next = 0;
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (mask(x, y) == 0 || component(x, y) >= 0) continue;
      // Mark the whole component so later raster hits skip it.
      std::deque<std::pair<int, int>> queue{{x, y}};
      component(x, y) = next;
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        for (int d = 0; d < 8; ++d) {
          const int xx = cx + kDx[d];
          const int yy = cy + kDy[d];
          if (fg(mask, xx, yy) && component(xx, yy) < 0) {
            component(xx, yy) = next;
            queue.emplace_back(xx, yy);
          }
        }
      }
      contours.push_back(trace_from(mask, x, y));
      ++next;
    }
  }
  return contours;
}

Contour extract_skin_contour(const BinarySlice& mask) {
  const auto contours = trace_outer_contours(fill_holes(mask));
  const Contour* best = nullptr;
  for (const auto& c : contours) {
    if (c.points.size() < 3) continue;
    if (best == nullptr || c.points.size() > best->points.size()) best = &c;
  }
  if (best == nullptr) throw NoSubjectError("no body outline found in slice");
  return *best;
}

double polygon_area(const std::vector<Point2>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& q = pts[(i + 1) % pts.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

RayFan build_ray_fan(const Contour& contour, int n_rays, double step) {
  if (n_rays < 8) throw std::invalid_argument("build_ray_fan: need at least 8 rays");
  if (!(step > 0.0)) throw std::invalid_argument("build_ray_fan: step must be positive");
  const auto& pts = contour.points;
  if (pts.size() < 3 || std::abs(polygon_area(pts)) == 0.0) {
    throw std::invalid_argument("build_ray_fan: degenerate contour");
  }

  RayFan fan;
  fan.step = step;
  for (const auto& p : pts) {
    fan.center.x += p.x;
    fan.center.y += p.y;
  }
  fan.center.x /= static_cast<double>(pts.size());
  fan.center.y /= static_cast<double>(pts.size());

  const std::size_t m = pts.size();
  std::vector<double> cumulative(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Point2 d = pts[(i + 1) % m] - pts[i];
    cumulative[i + 1] = cumulative[i] + std::hypot(d.x, d.y);
  }
  const double total = cumulative[m];

  std::size_t seg = 0;
  for (int k = 0; k < n_rays; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n_rays);
    while (seg + 1 < m && cumulative[seg + 1] <= s) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double f = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
    const Point2 a = pts[seg];
    const Point2 b = pts[(seg + 1) % m];
    Ray ray;
    ray.start = a + f * (b - a);
    const Point2 to_center = fan.center - ray.start;
    ray.length = std::hypot(to_center.x, to_center.y);
    ray.direction = ray.length > 0.0 ? (1.0 / ray.length) * to_center : Point2{0.0, 0.0};
    fan.rays.push_back(ray);
  }
  return fan;
}

CandidateBoundary detect_transitions(const RayFan& fan, const BinarySlice& fat_mask) {
  CandidateBoundary out;
  for (std::size_t r = 0; r < fan.rays.size(); ++r) {
    const Ray& ray = fan.rays[r];
    int fat_run = 0;
    for (long k = 0;; ++k) {
      const double t = static_cast<double>(k) * fan.step;
      if (t >= ray.length) break;
      const Point2 q = ray.start + t * ray.direction;
      const int px = static_cast<int>(std::floor(q.x + 0.5));
      const int py = static_cast<int>(std::floor(q.y + 0.5));
      const bool fat = fat_mask.contains(px, py) && fat_mask(px, py) != 0;
      if (fat) {
        ++fat_run;
        continue;
      }
      if (fat_run >= 2) {
        // First non-fat sample: the candidate sits on the inner side of the
        // fat edge, so a hull through the candidates keeps SAT pixels out.
        Candidate c;
        c.ray = static_cast<int>(r);
        c.position = q;
        c.skin = ray.start;
        c.distance = t;
        c.angle = std::atan2(ray.start.y - fan.center.y, ray.start.x - fan.center.x);
        out.candidates.push_back(c);
        break;
      }
      fat_run = 0;
    }
  }
  return out;
}

}  // namespace fatseg
