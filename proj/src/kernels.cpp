#include "fatseg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fatseg {

std::vector<int> disk_half_widths(int radius) {
  if (radius < 0) throw std::invalid_argument("disk radius must be >= 0");
  std::vector<int> widths(static_cast<std::size_t>(2 * radius + 1));
  const long r2 = static_cast<long>(radius) * radius;
  for (int v = -radius; v <= radius; ++v) {
    const long rest = r2 - static_cast<long>(v) * v;
    int w = static_cast<int>(std::sqrt(static_cast<double>(rest)));
    while (static_cast<long>(w + 1) * (w + 1) <= rest) ++w;
    while (static_cast<long>(w) * w > rest) --w;
    widths[static_cast<std::size_t>(v + radius)] = w;
  }
  return widths;
}

namespace kernels {
namespace {

// Per-row inclusive prefix counts, padded with a leading zero: row y occupies
// [y*(nx+1), (y+1)*(nx+1)).
std::vector<int> row_prefix_counts(const BinarySlice& mask) {
  const int nx = mask.nx();
  const int ny = mask.ny();
  std::vector<int> prefix(static_cast<std::size_t>(ny) * (nx + 1), 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ny; ++y) {
    int* row = prefix.data() + static_cast<std::size_t>(y) * (nx + 1);
    for (int x = 0; x < nx; ++x) row[x + 1] = row[x] + (mask(x, y) != 0 ? 1 : 0);
  }
  return prefix;
}

BinarySlice pad(const BinarySlice& mask, int r) {
  BinarySlice out(mask.nx() + 2 * r, mask.ny() + 2 * r, 0);
  for (int y = 0; y < mask.ny(); ++y) {
    for (int x = 0; x < mask.nx(); ++x) out(x + r, y + r) = mask(x, y) != 0 ? 1 : 0;
  }
  return out;
}

BinarySlice crop(const BinarySlice& padded, int r, int nx, int ny) {
  BinarySlice out(nx, ny, 0);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) out(x, y) = padded(x + r, y + r);
  }
  return out;
}

}  // namespace

BinarySlice dilate_disk(const BinarySlice& mask, int radius) {
  const auto widths = disk_half_widths(radius);
  const int nx = mask.nx();
  const int ny = mask.ny();
  const auto prefix = row_prefix_counts(mask);
  BinarySlice out(nx, ny, 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      std::uint8_t hit = 0;
      for (int v = -radius; v <= radius && !hit; ++v) {
        const int yy = y + v;
        if (yy < 0 || yy >= ny) continue;
        const int w = widths[static_cast<std::size_t>(v + radius)];
        const int lo = std::max(0, x - w);
        const int hi = std::min(nx - 1, x + w);
        if (lo > hi) continue;
        const int* row = prefix.data() + static_cast<std::size_t>(yy) * (nx + 1);
        if (row[hi + 1] - row[lo] > 0) hit = 1;
      }
      out(x, y) = hit;
    }
  }
  return out;
}

BinarySlice erode_disk(const BinarySlice& mask, int radius) {
  const auto widths = disk_half_widths(radius);
  const int nx = mask.nx();
  const int ny = mask.ny();
  const auto prefix = row_prefix_counts(mask);
  BinarySlice out(nx, ny, 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      std::uint8_t keep = 1;
      for (int v = -radius; v <= radius && keep; ++v) {
        const int yy = y + v;
        const int w = widths[static_cast<std::size_t>(v + radius)];
        if (yy < 0 || yy >= ny || x - w < 0 || x + w >= nx) {
          keep = 0;
          break;
        }
        const int* row = prefix.data() + static_cast<std::size_t>(yy) * (nx + 1);
        if (row[x + w + 1] - row[x - w] != 2 * w + 1) keep = 0;
      }
      out(x, y) = keep;
    }
  }
  return out;
}

BinarySlice close_disk(const BinarySlice& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("close_disk: radius must be >= 0");
  const BinarySlice padded = pad(mask, radius);
  return crop(erode_disk(dilate_disk(padded, radius), radius), radius, mask.nx(), mask.ny());
}

BinarySlice median_binary(const BinarySlice& mask, int window) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("median window must be odd and >= 1");
  const int h = window / 2;
  const int nx = mask.nx();
  const int ny = mask.ny();
  // Clamping is separable, so the window count is a column pass then a row pass.
  std::vector<int> cols(mask.size(), 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      int c = 0;
      for (int d = -h; d <= h; ++d) c += mask.clamped(x, y + d) != 0 ? 1 : 0;
      cols[static_cast<std::size_t>(y) * nx + x] = c;
    }
  }
  const int majority = window * window / 2;
  BinarySlice out(nx, ny, 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ny; ++y) {
    const int* row = cols.data() + static_cast<std::size_t>(y) * nx;
    for (int x = 0; x < nx; ++x) {
      int c = 0;
      for (int d = -h; d <= h; ++d) c += row[std::clamp(x + d, 0, nx - 1)];
      out(x, y) = c > majority ? 1 : 0;
    }
  }
  return out;
}

IntensitySlice median_intensity(const IntensitySlice& grid, int window) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("median window must be odd and >= 1");
  const int h = window / 2;
  const int nx = grid.nx();
  const int ny = grid.ny();
  IntensitySlice out(nx, ny, 0);
#pragma omp parallel
  {
    std::vector<std::int16_t> buf(static_cast<std::size_t>(window) * window);
#pragma omp for schedule(static)
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        std::size_t k = 0;
        for (int dy = -h; dy <= h; ++dy) {
          for (int dx = -h; dx <= h; ++dx) buf[k++] = grid.clamped(x + dx, y + dy);
        }
        auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
        std::nth_element(buf.begin(), mid, buf.end());
        out(x, y) = *mid;
      }
    }
  }
  return out;
}

Matrix correlation_distance(const Matrix& features) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  Matrix centered(n, d);
  std::vector<double> norms(n, 0.0);
  std::vector<char> constant(n, 0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double* src = features.row(i);
    double* dst = centered.row(i);
    const auto [mn, mx] = std::minmax_element(src, src + d);
    constant[i] = (d == 0 || *mn == *mx) ? 1 : 0;
    double mean = 0.0;
    for (std::size_t k = 0; k < d; ++k) mean += src[k];
    mean /= static_cast<double>(std::max<std::size_t>(d, 1));
    double ss = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      dst[k] = src[k] - mean;
      ss += dst[k] * dst[k];
    }
    norms[i] = std::sqrt(ss);
  }

  Matrix dist(n, n, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = centered.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (constant[i] || constant[j]) {
        dist(i, j) = 1.0;
        continue;
      }
      const double* b = centered.row(j);
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += a[k] * b[k];
      dist(i, j) = std::clamp(1.0 - dot / (norms[i] * norms[j]), 0.0, 2.0);
    }
  }
  return dist;
}

double tsne_gradient(const Matrix& p, const Matrix& y, double exaggeration, Matrix& grad) {
  const std::size_t n = y.rows();
  Matrix num(n, n, 0.0);
  std::vector<double> row_sums(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double yi0 = y(i, 0);
    const double yi1 = y(i, 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d0 = yi0 - y(j, 0);
      const double d1 = yi1 - y(j, 1);
      const double q = 1.0 / (1.0 + d0 * d0 + d1 * d1);
      num(i, j) = q;
      s += q;
    }
    row_sums[i] = s;
  }
  double z = 0.0;
  for (double s : row_sums) z += s;

  grad = Matrix(n, 2, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    double g0 = 0.0;
    double g1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = num(i, j);
      const double mult = (exaggeration * p(i, j) - q / z) * q;
      g0 += mult * (y(i, 0) - y(j, 0));
      g1 += mult * (y(i, 1) - y(j, 1));
    }
    grad(i, 0) = 4.0 * g0;
    grad(i, 1) = 4.0 * g1;
  }
  return z;
}

double tsne_kl(const Matrix& p, const Matrix& y) {
  const std::size_t n = y.rows();
  std::vector<double> z_rows(n, 0.0);
  std::vector<double> cross_rows(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    double zs = 0.0;
    double cs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d0 = y(i, 0) - y(j, 0);
      const double d1 = y(i, 1) - y(j, 1);
      const double d2 = d0 * d0 + d1 * d1;
      zs += 1.0 / (1.0 + d2);
      const double pij = p(i, j);
      if (pij > 0.0) cs += pij * (std::log(pij) + std::log1p(d2));
    }
    z_rows[i] = zs;
    cross_rows[i] = cs;
  }
  double z = 0.0;
  double cross = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z += z_rows[i];
    cross += cross_rows[i];
  }
  for (double v : p.data()) mass += v;
  // sum p log(p / q) with q = num / Z and log num = -log1p(d2).
  return cross + mass * std::log(z);
}

GradientKl tsne_gradient_kl(const Matrix& p, double p_floor, double p_log_p, const Matrix& y, double exaggeration,
                            Matrix& grad) {
  const std::size_t n = y.rows();
  // Upper triangle only; p and the pair distances are symmetric.
  Matrix num(n, n, 0.0);
  std::vector<double> row_sums(n, 0.0);
  std::vector<double> row_cross(n, 0.0);
  std::vector<double> row_mass(n, 0.0);
#pragma omp parallel for schedule(static, 1)
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    double cross = 0.0;
    double mass = 0.0;
    double floored_log = 0.0;
    double prod = 1.0;
    const double yi0 = y(i, 0);
    const double yi1 = y(i, 1);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d0 = yi0 - y(j, 0);
      const double d1 = yi1 - y(j, 1);
      const double t = 1.0 + d0 * d0 + d1 * d1;
      const double q = 1.0 / t;
      num(i, j) = q;
      num(j, i) = q;  // row j only ever writes columns above j
      s += q;
      const double pij = p(i, j);
      mass += pij;
      if (pij == p_floor) {
        prod *= t;
        if (prod > 1e200) {
          floored_log += std::log(prod);
          prod = 1.0;
        }
      } else if (pij > 0.0) {
        cross += pij * std::log(t);
      }
    }
    row_sums[i] = s;
    row_cross[i] = cross + p_floor * (floored_log + std::log(prod));
    row_mass[i] = mass;
  }
  GradientKl r;
  double cross = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.z += row_sums[i];
    cross += row_cross[i];
    mass += row_mass[i];
  }
  r.z *= 2.0;
  r.kl = p_log_p + 2.0 * cross + 2.0 * mass * std::log(r.z);

  grad = Matrix(n, 2, 0.0);
  const double inv_z = 1.0 / r.z;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    double g0 = 0.0;
    double g1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = num(i, j);
      const double mult = (exaggeration * p(i, j) - q * inv_z) * q;
      g0 += mult * (y(i, 0) - y(j, 0));
      g1 += mult * (y(i, 1) - y(j, 1));
    }
    grad(i, 0) = 4.0 * g0;
    grad(i, 1) = 4.0 * g1;
  }
  return r;
}

Matrix squared_distances(const Matrix& points) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  Matrix out(n, n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = points(i, k) - points(j, k);
        s += diff * diff;
      }
      out(i, j) = s;
    }
  }
  return out;
}

}  // namespace kernels
}  // namespace fatseg
