#include "fatseg/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "fatseg/errors.hpp"
#include "fatseg/volume_io.hpp"

namespace fatseg {

std::vector<unsigned char> render_overlay(const IntensitySlice& slice, const LabelSlice& labels,
                                          const std::vector<Point2>& points, OverlayWindow window) {
  if (slice.nx() != labels.nx() || slice.ny() != labels.ny()) throw std::invalid_argument("overlay: size mismatch");
  const int nx = slice.nx();
  const int ny = slice.ny();
  const std::string header = "P6\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  const std::size_t base = out.size();
  out.resize(base + 3 * static_cast<std::size_t>(nx) * ny);

  const double lo = window.level - 0.5 * window.width;
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const double g = std::clamp((slice(x, y) - lo) / window.width, 0.0, 1.0);
      auto grey = static_cast<unsigned char>(std::lround(255.0 * g));
      unsigned char rgb[3] = {grey, grey, grey};
      const std::uint8_t l = labels(x, y);
      if (l == code(Label::kSat)) {
        rgb[0] = rgb[2] = 0;
        rgb[1] = 200;
      } else if (l == code(Label::kVat)) {
        rgb[0] = 220;
        rgb[1] = rgb[2] = 0;
      } else if (l == code(Label::kFatUndivided)) {
        rgb[0] = rgb[1] = 0;
        rgb[2] = 220;
      }
      std::copy(rgb, rgb + 3, out.begin() + static_cast<std::ptrdiff_t>(base + 3 * (static_cast<std::size_t>(y) * nx + x)));
    }
  }
  for (const auto& p : points) {
    const int x = static_cast<int>(std::floor(p.x + 0.5));
    const int y = static_cast<int>(std::floor(p.y + 0.5));
    if (!slice.contains(x, y)) continue;
    const std::size_t o = base + 3 * (static_cast<std::size_t>(y) * nx + x);
    out[o] = 255;
    out[o + 1] = 255;
    out[o + 2] = 0;
  }
  return out;
}

void emit_overlay(const IntensitySlice& slice, const LabelSlice& labels, const std::vector<Point2>& points,
                  const std::filesystem::path& path, OverlayWindow window) {
  const auto bytes = render_overlay(slice, labels, points, window);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace fatseg
