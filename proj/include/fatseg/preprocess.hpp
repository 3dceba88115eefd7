#pragma once

#include "fatseg/grid.hpp"

namespace fatseg {

struct PreprocessParams {
  int hu_low = -190;
  int hu_high = -30;
  int disk_radius = 10;
  int median_window = 3;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Pixel is fat iff hu_low <= HU <= hu_high.
BinarySlice threshold_fat(const IntensitySlice& slice, const PreprocessParams& p);

/// Dilation then erosion by the disk {u^2 + v^2 <= r^2}; background outside the image.
BinarySlice morph_close_disk(const BinarySlice& mask, int radius);

/// Windowed median, edge replication at the borders. Binary median is a majority vote.
BinarySlice median_filter(const BinarySlice& mask, int window);
IntensitySlice median_filter(const IntensitySlice& grid, int window);

/// Output of the preprocessing stage for one slice.
struct PreprocessedSlice {
  BinarySlice fat;       // thresholded mask
  BinarySlice denoised;  // median(closing(fat))
};

PreprocessedSlice preprocess_slice(const IntensitySlice& slice, const PreprocessParams& p);

}  // namespace fatseg
