#include "fatseg/preprocess.hpp"

#include <stdexcept>

#include "fatseg/errors.hpp"
#include "fatseg/kernels.hpp"

namespace fatseg {

void PreprocessParams::validate() const {
  if (hu_low >= hu_high) throw ConfigError("hu-low must be below hu-high");
  if (disk_radius < 0) throw ConfigError("disk-radius must be >= 0");
  if (median_window < 1 || median_window % 2 == 0) throw ConfigError("median-window must be odd and >= 1");
}

BinarySlice threshold_fat(const IntensitySlice& slice, const PreprocessParams& p) {
  if (slice.empty()) throw std::invalid_argument("threshold_fat: empty slice");
  BinarySlice out(slice.nx(), slice.ny(), 0);
  const auto& in = slice.data();
  auto& dst = out.data();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    dst[static_cast<std::size_t>(i)] = (in[static_cast<std::size_t>(i)] >= p.hu_low && in[static_cast<std::size_t>(i)] <= p.hu_high) ? 1 : 0;
  }
  return out;
}

BinarySlice morph_close_disk(const BinarySlice& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("morph_close_disk: radius must be >= 0");
  return kernels::close_disk(mask, radius);
}

BinarySlice median_filter(const BinarySlice& mask, int window) { return kernels::median_binary(mask, window); }

IntensitySlice median_filter(const IntensitySlice& grid, int window) {
  return kernels::median_intensity(grid, window);
}

PreprocessedSlice preprocess_slice(const IntensitySlice& slice, const PreprocessParams& p) {
  PreprocessedSlice out;
  out.fat = threshold_fat(slice, p);
  out.denoised = median_filter(morph_close_disk(out.fat, p.disk_radius), p.median_window);
  return out;
}

}  // namespace fatseg
