#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fatseg/boundary.hpp"
#include "fatseg/grid.hpp"
#include "fatseg/matrix.hpp"

namespace fatseg {

// ---------------------------------------------------------------------------
// HOG
//
// A 32x32 patch holds a 3x3 grid of 14x14 cells placed every 9 pixels, so
// neighbouring cells overlap by 5 pixels. Each cell contributes 31 values in
// the reduced-HOG layout: 18 contrast-sensitive orientation bins, 9
// contrast-insensitive bins and 4 gradient-energy terms, each averaged over
// the four 2x2 block normalisations that contain the cell (truncated at 0.2).

inline constexpr int kHogPatch = 32;
inline constexpr int kHogCell = 14;
inline constexpr int kHogStride = 9;
inline constexpr int kHogCellsPerSide = 3;
inline constexpr int kHogSignedBins = 18;
inline constexpr int kHogUnsignedBins = 9;
inline constexpr int kHogPerCell = kHogSignedBins + kHogUnsignedBins + 4;
inline constexpr int kHogSize = kHogCellsPerSide * kHogCellsPerSide * kHogPerCell;
static_assert(kHogSize == 279);
static_assert(2 * kHogStride + kHogCell == kHogPatch);

using HogDescriptor = std::array<double, kHogSize>;

/// Offset of cell (cx, cy) inside a descriptor; cx, cy in [0, 3).
inline constexpr int hog_cell_offset(int cx, int cy) { return (cy * kHogCellsPerSide + cx) * kHogPerCell; }

/// Descriptor of the 32x32 patch whose top-left corner is round(center) - 16.
/// Gradients are central differences on the intensity slice with edge replication.
HogDescriptor hog_at(const IntensitySlice& slice, Point2 center);

/// Raw magnitude-weighted signed orientation histogram of each cell (3x3x18),
/// before normalisation. Exposed for tests.
std::vector<double> hog_cell_histograms(const IntensitySlice& slice, Point2 center);

Matrix to_matrix(const std::vector<HogDescriptor>& features);

/// d(x, y) = 1 - corr(x, y), in [0, 2]. A constant vector is at distance 1
/// from every other vector. Throws for fewer than 2 rows.
Matrix pairwise_ncd(const std::vector<HogDescriptor>& features);
Matrix pairwise_ncd(const Matrix& features);

// ---------------------------------------------------------------------------
// Exact t-SNE

struct TsneParams {
  double perplexity = 0.0;  // <= 0 selects min(30, floor((n - 1) / 3))
  int iters = 1000;
  int exaggeration_iters = 100;
  double exaggeration = 4.0;
  double learning_rate = 100.0;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int momentum_switch = 250;
  double init_sigma = 1e-4;
  std::uint64_t seed = 42;
};

double auto_perplexity(std::size_t n);

struct Embedding2D {
  Matrix points;                 // n x 2
  std::vector<double> kl_trace;  // kl_trace[0] at initialisation, then one per sweep
  double perplexity = 0.0;

  double kl_initial() const { return kl_trace.front(); }
  double kl_final() const { return kl_trace.back(); }
};

/// Symmetrised input affinities P from a distance matrix. The Gaussian kernel
/// uses squared distances; each row's bandwidth is found by bisection so that
/// its entropy matches log(perplexity).
Matrix tsne_affinities(const Matrix& distances, double perplexity);

Embedding2D tsne_embed(const Matrix& distances, const TsneParams& params);

// ---------------------------------------------------------------------------
// Local outlier probabilities

struct LoopResult {
  std::vector<double> pi;
  std::vector<double> plof;
  double nplof = 0.0;
};

/// LoOP over points (rows) with Euclidean distances.
LoopResult loop_scores(const Matrix& points, int k, double lambda);
/// LoOP over a precomputed symmetric distance matrix.
LoopResult loop_scores_from_distances(const Matrix& distances, int k, double lambda);

// ---------------------------------------------------------------------------

enum class LoopSpace { kEmbedding, kFeatures };

struct AppearanceParams {
  TsneParams tsne;
  int loop_k = 20;
  double lambda = 3.0;
  LoopSpace space = LoopSpace::kEmbedding;

  void validate() const;
};

struct AppearanceResult {
  CandidateBoundary scored;  // input candidates with pi filled in
  std::vector<HogDescriptor> hogs;
  Matrix distances;  // pairwise NCD
  Embedding2D embedding;
  LoopResult loop;
  bool insufficient = false;  // fewer than k + 1 candidates: pi = 0 for all
};

/// HOG at every candidate, correlation distances, t-SNE, LoOP. No candidate is removed.
AppearanceResult score_candidates(const CandidateBoundary& candidates, const IntensitySlice& slice,
                                  const AppearanceParams& params);

}  // namespace fatseg
