#pragma once

#include <filesystem>
#include <vector>

#include "fatseg/grid.hpp"

namespace fatseg {

struct OverlayWindow {
  int level = 40;
  int width = 400;
};

/// Binary PPM (P6): greyscale CT under a label tint, SAT green and VAT red,
/// with boundary points drawn as yellow pixels. Throws IoError on write failure.
void emit_overlay(const IntensitySlice& slice, const LabelSlice& labels, const std::vector<Point2>& points,
                  const std::filesystem::path& path, OverlayWindow window = {});

/// Same image as a byte buffer (header included).
std::vector<unsigned char> render_overlay(const IntensitySlice& slice, const LabelSlice& labels,
                                          const std::vector<Point2>& points, OverlayWindow window = {});

}  // namespace fatseg
