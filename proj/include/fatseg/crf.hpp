#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fatseg/appearance.hpp"
#include "fatseg/boundary.hpp"
#include "fatseg/matrix.hpp"

namespace fatseg {

inline constexpr double kProbabilityFloor = 1e-6;

/// Per-node cost of each label, indexed by FusionLabel.
using Unary = std::array<double, 2>;

struct FusionEdge {
  int i = 0;
  int j = 0;
  double scale = 1.0;  // 1 / (1 + |phi_i - phi_j|_1)
};

/// Binary CRF over boundary hypotheses.
struct FusionGraph {
  std::vector<Unary> unary;
  std::vector<FusionEdge> edges;
  double w = 1.0;

  std::size_t size() const { return unary.size(); }
  void validate() const;
};

struct Labeling {
  std::vector<FusionLabel> labels;
  double energy = 0.0;
};

/// sum_i unary_i(k_i) + w * sum_(i,j) scale_ij [k_i != k_j]
double energy(const FusionGraph& g, const std::vector<FusionLabel>& labels);

struct KMeansResult {
  std::array<Point2, 2> centroids;
  std::vector<int> assignment;
  double inertia = 0.0;
};

/// Two-cluster Lloyd k-means with seeded random restarts; lowest inertia wins.
KMeansResult kmeans2(const std::vector<Point2>& points, int restarts, std::uint64_t seed);

struct UnaryParams {
  int restarts = 10;
  std::uint64_t seed = 42;
  double temperature = 0.5;  // softmax scale on centroid distances
  // k-means always returns two clusters. When the members of the "outlier"
  // cluster pass both single-cue cuts on average (mean phi <= phi_cut and
  // mean pi <= pi_cut) the split is spurious, and each node's unary comes
  // from its own scores against those cuts instead.
  double phi_cut = 2.5;
  double pi_cut = 0.5;
};

struct UnaryResult {
  std::vector<Unary> theta;
  bool spurious_split = false;
  std::vector<double> p_inlier;
  std::vector<Point2> scores;  // min-max normalised (phi, pi)
};

/// Unaries from k-means on the normalised (phi, pi) scores of every candidate.
UnaryResult unary_potentials(const CandidateBoundary& candidates, const UnaryParams& params = {});

/// Softmax membership of the inlier cluster given distances to both centroids.
double inlier_probability(double d_inlier, double d_outlier, double temperature);

/// -log(max(p, floor)).
double neg_log_prob(double p);

/// How the skin distance enters the pairwise feature.
enum class RadialScale {
  kMinMax,  // (d - min) / (max - min)
  kRobust,  // (d - median) / MAD, so one deep outlier does not squash the rest
};

/// Per-candidate feature used by the pairwise term: L1-normalised HOG, the
/// scaled skin distance, and (sin, cos) of the ray angle.
Matrix fusion_features(const CandidateBoundary& candidates, const std::vector<HogDescriptor>& hogs,
                       RadialScale radial = RadialScale::kRobust);

double l1_distance(std::span<const double> a, std::span<const double> b);

/// Symmetrised kNN graph under L1 distance; complete graph when n <= k_nn.
std::vector<FusionEdge> build_edges(const Matrix& features, int k_nn);

/// (1 / (1 + |phi_i - phi_j|_1)) [k_i != k_j]
double pairwise_potential(std::span<const double> phi_i, std::span<const double> phi_j, FusionLabel k_i,
                          FusionLabel k_j);

/// Exact minimiser via one s-t min cut.
Labeling minimize_energy(const FusionGraph& g);

/// Exhaustive search over all 2^n labelings; n <= 20.
Labeling brute_force_minimize(const FusionGraph& g);

struct FusionParams {
  double w = 0.5;
  int knn = 5;
  RadialScale radial = RadialScale::kRobust;
  UnaryParams unary;

  void validate() const;
};

struct FusionResult {
  FusionGraph graph;
  Labeling labeling;
  UnaryResult unaries;
  CandidateBoundary labeled;
};

FusionResult fuse(const CandidateBoundary& scored, const std::vector<HogDescriptor>& hogs, const FusionParams& params);

}  // namespace fatseg
