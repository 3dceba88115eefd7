#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fatseg/appearance.hpp"
#include "fatseg/kernels.hpp"

namespace fatseg {
namespace {

constexpr double kTruncate = 0.2;
constexpr double kNormEps = 1e-8;
// Bounds each cell's 31-vector to unit L2 norm: the three groups are bounded by 1, 1 and 2.
const double kCellScale = 1.0 / std::sqrt(6.0);
const double kEnergyScale = 1.0 / std::sqrt(static_cast<double>(kHogSignedBins));

int patch_origin(double c) { return static_cast<int>(std::floor(c + 0.5)) - kHogPatch / 2; }

}  // namespace

std::vector<double> hog_cell_histograms(const IntensitySlice& slice, Point2 center) {
  if (slice.empty()) throw std::invalid_argument("hog_at: empty slice");
  const int x0 = patch_origin(center.x);
  const int y0 = patch_origin(center.y);

  std::vector<double> hist(static_cast<std::size_t>(kHogCellsPerSide * kHogCellsPerSide * kHogSignedBins), 0.0);
  const double bin_width = 2.0 * std::numbers::pi / kHogSignedBins;

  for (int py = 0; py < kHogPatch; ++py) {
    for (int px = 0; px < kHogPatch; ++px) {
      const int x = x0 + px;
      const int y = y0 + py;
      const double gx = 0.5 * (static_cast<double>(slice.clamped(x + 1, y)) - slice.clamped(x - 1, y));
      const double gy = 0.5 * (static_cast<double>(slice.clamped(x, y + 1)) - slice.clamped(x, y - 1));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      const double f = theta / bin_width;
      const double fl = std::floor(f);
      const double w = f - fl;
      const int b0 = static_cast<int>(fl) % kHogSignedBins;
      const int b1 = (b0 + 1) % kHogSignedBins;

      for (int cy = 0; cy < kHogCellsPerSide; ++cy) {
        const int oy = cy * kHogStride;
        if (py < oy || py >= oy + kHogCell) continue;
        for (int cx = 0; cx < kHogCellsPerSide; ++cx) {
          const int ox = cx * kHogStride;
          if (px < ox || px >= ox + kHogCell) continue;
          double* h = hist.data() + (cy * kHogCellsPerSide + cx) * kHogSignedBins;
          h[b0] += mag * (1.0 - w);
          h[b1] += mag * w;
        }
      }
    }
  }
  return hist;
}

HogDescriptor hog_at(const IntensitySlice& slice, Point2 center) {
  const auto hist = hog_cell_histograms(slice, center);
  constexpr int n = kHogCellsPerSide;

  std::array<double, n * n> energy{};
  std::array<std::array<double, kHogUnsignedBins>, n * n> unsigned_hist{};
  for (int c = 0; c < n * n; ++c) {
    const double* h = hist.data() + c * kHogSignedBins;
    double e = 0.0;
    for (int b = 0; b < kHogUnsignedBins; ++b) {
      const double u = h[b] + h[b + kHogUnsignedBins];
      unsigned_hist[c][b] = u;
      e += u * u;
    }
    energy[c] = e;
  }
  auto cell_energy = [&](int cx, int cy) {
    if (cx < 0 || cy < 0 || cx >= n || cy >= n) return 0.0;
    return energy[cy * n + cx];
  };

  HogDescriptor out{};
  for (int cy = 0; cy < n; ++cy) {
    for (int cx = 0; cx < n; ++cx) {
      const int c = cy * n + cx;
      const double* h = hist.data() + c * kHogSignedBins;
      double* f = out.data() + hog_cell_offset(cx, cy);
      int k = 0;
      for (int dy : {-1, 1}) {
        for (int dx : {-1, 1}) {
          const double norm = std::sqrt(cell_energy(cx, cy) + cell_energy(cx + dx, cy) + cell_energy(cx, cy + dy) +
                                        cell_energy(cx + dx, cy + dy) + kNormEps);
          double texture = 0.0;
          for (int b = 0; b < kHogSignedBins; ++b) {
            const double v = std::min(h[b] / norm, kTruncate);
            f[b] += 0.25 * v;
            texture += v;
          }
          for (int b = 0; b < kHogUnsignedBins; ++b) {
            f[kHogSignedBins + b] += 0.25 * std::min(unsigned_hist[c][b] / norm, kTruncate);
          }
          f[kHogSignedBins + kHogUnsignedBins + k] = kEnergyScale * texture;
          ++k;
        }
      }
      for (int i = 0; i < kHogPerCell; ++i) f[i] *= kCellScale;
    }
  }
  return out;
}

Matrix to_matrix(const std::vector<HogDescriptor>& features) {
  Matrix m(features.size(), kHogSize);
  for (std::size_t i = 0; i < features.size(); ++i) std::copy(features[i].begin(), features[i].end(), m.row(i));
  return m;
}

Matrix pairwise_ncd(const Matrix& features) {
  if (features.rows() < 2) throw std::invalid_argument("pairwise_ncd: need at least 2 vectors");
  return kernels::correlation_distance(features);
}

Matrix pairwise_ncd(const std::vector<HogDescriptor>& features) { return pairwise_ncd(to_matrix(features)); }

}  // namespace fatseg
