#pragma once

// Data-parallel inner loops of the pipeline. Every kernel in `kernels` has a
// straightforward single-threaded twin in `reference`; tests check that the
// two agree and bench/bench_kernels.cpp compares their speed.
//
// The parallel kernels assign each output element (pixel, matrix row) to
// exactly one thread and never reduce floating point values across threads,
// so results do not depend on the thread count.

#include <cstdint>
#include <vector>

#include "fatseg/grid.hpp"
#include "fatseg/matrix.hpp"

namespace fatseg {

/// Half-width of the discrete disk {(u,v): u^2 + v^2 <= r^2} on each row v in [-r, r].
std::vector<int> disk_half_widths(int radius);

namespace kernels {

/// Binary dilation by a disk; pixels outside the image are background.
BinarySlice dilate_disk(const BinarySlice& mask, int radius);
/// Binary erosion by a disk; pixels outside the image are background.
BinarySlice erode_disk(const BinarySlice& mask, int radius);
/// Closing of the mask as a subset of the plane (background outside the image),
/// cropped back to the image frame.
BinarySlice close_disk(const BinarySlice& mask, int radius);

/// Windowed median with edge replication. Binary input is treated as 0/1.
BinarySlice median_binary(const BinarySlice& mask, int window);
IntensitySlice median_intensity(const IntensitySlice& grid, int window);

/// 1 - Pearson correlation between rows of `features` (n x d).
Matrix correlation_distance(const Matrix& features);

/// Student-t affinities and KL gradient for exact t-SNE. Fills `grad` (n x 2)
/// and returns the normalizer Z = sum_{i != j} 1 / (1 + |y_i - y_j|^2).
double tsne_gradient(const Matrix& p, const Matrix& y, double exaggeration, Matrix& grad);

/// KL(P || Q) for the embedding `y`, Q the Student-t affinities.
double tsne_kl(const Matrix& p, const Matrix& y);

struct GradientKl {
  double z = 0.0;
  double kl = 0.0;  // KL at `y`, before the step the gradient is used for
};

/// tsne_gradient and tsne_kl in one pass over the pairs. `p_log_p` is
/// sum p log p; entries equal to `p_floor` share one weight, so their log
/// terms are summed through running products instead of one log per pair.
GradientKl tsne_gradient_kl(const Matrix& p, double p_floor, double p_log_p, const Matrix& y, double exaggeration,
                            Matrix& grad);

/// Squared Euclidean distances between rows.
Matrix squared_distances(const Matrix& points);

}  // namespace kernels

namespace reference {

BinarySlice dilate_disk(const BinarySlice& mask, int radius);
BinarySlice erode_disk(const BinarySlice& mask, int radius);
BinarySlice close_disk(const BinarySlice& mask, int radius);
BinarySlice median_binary(const BinarySlice& mask, int window);
IntensitySlice median_intensity(const IntensitySlice& grid, int window);
Matrix correlation_distance(const Matrix& features);
double tsne_gradient(const Matrix& p, const Matrix& y, double exaggeration, Matrix& grad);
double tsne_kl(const Matrix& p, const Matrix& y);
Matrix squared_distances(const Matrix& points);

}  // namespace reference
}  // namespace fatseg
