#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fatseg/appearance.hpp"
#include "fatseg/kernels.hpp"

namespace fatseg {
namespace {

constexpr double kMeanPdistFloor = 1e-12;

// k nearest neighbours of row i (self excluded), ties broken by index.
std::vector<std::size_t> nearest(const Matrix& dist, std::size_t i, int k) {
  std::vector<std::size_t> idx;
  idx.reserve(dist.rows() - 1);
  for (std::size_t j = 0; j < dist.rows(); ++j) {
    if (j != i) idx.push_back(j);
  }
  auto closer = [&](std::size_t a, std::size_t b) {
    return dist(i, a) < dist(i, b) || (dist(i, a) == dist(i, b) && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), closer);
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace

LoopResult loop_scores_from_distances(const Matrix& distances, int k, double lambda) {
  const std::size_t n = distances.rows();
  if (distances.cols() != n) throw std::invalid_argument("loop_scores: distance matrix must be square");
  if (k < 2) throw std::invalid_argument("loop_scores: k must be >= 2");
  if (static_cast<std::size_t>(k) >= n) throw std::invalid_argument("loop_scores: k must be < n");
  if (!(lambda > 0.0)) throw std::invalid_argument("loop_scores: lambda must be positive");

  std::vector<std::vector<std::size_t>> context(n);
  std::vector<double> pdist(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    context[i] = nearest(distances, i, k);
    double ss = 0.0;
    for (std::size_t s : context[i]) ss += distances(i, s) * distances(i, s);
    pdist[i] = lambda * std::sqrt(ss / k);
  }

  LoopResult r;
  r.plof.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t s : context[i]) mean += pdist[s];
    mean /= k;
    r.plof[i] = pdist[i] / std::max(mean, kMeanPdistFloor) - 1.0;
  }
  double sq = 0.0;
  for (double v : r.plof) sq += v * v;
  r.nplof = lambda * std::sqrt(sq / static_cast<double>(n));

  r.pi.assign(n, 0.0);
  if (r.nplof > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      r.pi[i] = std::max(0.0, std::erf(r.plof[i] / (std::sqrt(2.0) * r.nplof)));
    }
  }
  return r;
}

LoopResult loop_scores(const Matrix& points, int k, double lambda) {
  Matrix d = kernels::squared_distances(points);
  for (double& v : d.data()) v = std::sqrt(v);
  return loop_scores_from_distances(d, k, lambda);
}

}  // namespace fatseg
