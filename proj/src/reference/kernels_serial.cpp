// Single-threaded reference versions of the kernels in src/kernels.cpp.
// Written for obviousness, not speed.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fatseg/kernels.hpp"

namespace fatseg::reference {
namespace {

bool fg(const BinarySlice& m, int x, int y) { return m.contains(x, y) && m(x, y) != 0; }

}  // namespace

BinarySlice dilate_disk(const BinarySlice& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("dilate_disk: radius must be >= 0");
  const int r2 = radius * radius;
  BinarySlice out(mask.nx(), mask.ny(), 0);
  for (int y = 0; y < mask.ny(); ++y) {
    for (int x = 0; x < mask.nx(); ++x) {
      for (int v = -radius; v <= radius; ++v) {
        for (int u = -radius; u <= radius; ++u) {
          if (u * u + v * v <= r2 && fg(mask, x + u, y + v)) out(x, y) = 1;
        }
      }
    }
  }
  return out;
}

BinarySlice erode_disk(const BinarySlice& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("erode_disk: radius must be >= 0");
  const int r2 = radius * radius;
  BinarySlice out(mask.nx(), mask.ny(), 0);
  for (int y = 0; y < mask.ny(); ++y) {
    for (int x = 0; x < mask.nx(); ++x) {
      bool all = true;
      for (int v = -radius; v <= radius; ++v) {
        for (int u = -radius; u <= radius; ++u) {
          if (u * u + v * v <= r2 && !fg(mask, x + u, y + v)) all = false;
        }
      }
      out(x, y) = all ? 1 : 0;
    }
  }
  return out;
}

BinarySlice close_disk(const BinarySlice& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("close_disk: radius must be >= 0");
  BinarySlice padded(mask.nx() + 2 * radius, mask.ny() + 2 * radius, 0);
  for (int y = 0; y < mask.ny(); ++y) {
    for (int x = 0; x < mask.nx(); ++x) padded(x + radius, y + radius) = mask(x, y) != 0 ? 1 : 0;
  }
  const BinarySlice closed = erode_disk(dilate_disk(padded, radius), radius);
  BinarySlice out(mask.nx(), mask.ny(), 0);
  for (int y = 0; y < mask.ny(); ++y) {
    for (int x = 0; x < mask.nx(); ++x) out(x, y) = closed(x + radius, y + radius);
  }
  return out;
}

BinarySlice median_binary(const BinarySlice& mask, int window) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("median window must be odd and >= 1");
  const int h = window / 2;
  BinarySlice out(mask.nx(), mask.ny(), 0);
  std::vector<int> buf;
  for (int y = 0; y < mask.ny(); ++y) {
    for (int x = 0; x < mask.nx(); ++x) {
      buf.clear();
      for (int dy = -h; dy <= h; ++dy) {
        for (int dx = -h; dx <= h; ++dx) buf.push_back(mask.clamped(x + dx, y + dy) != 0 ? 1 : 0);
      }
      std::sort(buf.begin(), buf.end());
      out(x, y) = static_cast<std::uint8_t>(buf[buf.size() / 2]);
    }
  }
  return out;
}

IntensitySlice median_intensity(const IntensitySlice& grid, int window) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("median window must be odd and >= 1");
  const int h = window / 2;
  IntensitySlice out(grid.nx(), grid.ny(), 0);
  std::vector<std::int16_t> buf;
  for (int y = 0; y < grid.ny(); ++y) {
    for (int x = 0; x < grid.nx(); ++x) {
      buf.clear();
      for (int dy = -h; dy <= h; ++dy) {
        for (int dx = -h; dx <= h; ++dx) buf.push_back(grid.clamped(x + dx, y + dy));
      }
      std::sort(buf.begin(), buf.end());
      out(x, y) = buf[buf.size() / 2];
    }
  }
  return out;
}

Matrix correlation_distance(const Matrix& features) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  Matrix dist(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* a = features.row(i);
      const double* b = features.row(j);
      double ma = 0.0;
      double mb = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        ma += a[k];
        mb += b[k];
      }
      ma /= static_cast<double>(d);
      mb /= static_cast<double>(d);
      double sab = 0.0;
      double saa = 0.0;
      double sbb = 0.0;
      bool a_const = true;
      bool b_const = true;
      for (std::size_t k = 0; k < d; ++k) {
        if (a[k] != a[0]) a_const = false;
        if (b[k] != b[0]) b_const = false;
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
      }
      double v = 1.0;
      if (!a_const && !b_const) v = std::clamp(1.0 - sab / std::sqrt(saa * sbb), 0.0, 2.0);
      dist(i, j) = v;
      dist(j, i) = v;
    }
  }
  return dist;
}

double tsne_gradient(const Matrix& p, const Matrix& y, double exaggeration, Matrix& grad) {
  const std::size_t n = y.rows();
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d0 = y(i, 0) - y(j, 0);
      const double d1 = y(i, 1) - y(j, 1);
      z += 2.0 / (1.0 + d0 * d0 + d1 * d1);
    }
  }
  grad = Matrix(n, 2, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d0 = y(i, 0) - y(j, 0);
      const double d1 = y(i, 1) - y(j, 1);
      const double q = 1.0 / (1.0 + d0 * d0 + d1 * d1);
      const double mult = 4.0 * (exaggeration * p(i, j) - q / z) * q;
      grad(i, 0) += mult * d0;
      grad(i, 1) += mult * d1;
      grad(j, 0) -= mult * d0;
      grad(j, 1) -= mult * d1;
    }
  }
  return z;
}

double tsne_kl(const Matrix& p, const Matrix& y) {
  const std::size_t n = y.rows();
  Matrix q(n, n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d0 = y(i, 0) - y(j, 0);
      const double d1 = y(i, 1) - y(j, 1);
      q(i, j) = 1.0 / (1.0 + d0 * d0 + d1 * d1);
      z += q(i, j);
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      kl += p(i, j) * std::log(p(i, j) / (q(i, j) / z));
    }
  }
  return kl;
}

Matrix squared_distances(const Matrix& points) {
  const std::size_t n = points.rows();
  Matrix out(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < points.cols(); ++k) {
        s += (points(i, k) - points(j, k)) * (points(i, k) - points(j, k));
      }
      out(i, j) = s;
    }
  }
  return out;
}

}  // namespace fatseg::reference
