#include "fatseg/geo_outliers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fatseg {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

MadResult mad_scores(const std::vector<double>& distances, double threshold) {
  if (distances.size() < 3) throw std::invalid_argument("mad_scores: need at least 3 candidates");
  MadResult r;
  r.median_distance = median(distances);
  std::vector<double> dev(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) dev[i] = std::abs(distances[i] - r.median_distance);
  r.mad = median(dev);
  r.phi.assign(distances.size(), 0.0);
  if (r.mad > 0.0) {
    for (std::size_t i = 0; i < dev.size(); ++i) r.phi[i] = dev[i] / r.mad;
  }
  r.inlier_flags.resize(distances.size());
  for (std::size_t i = 0; i < r.phi.size(); ++i) r.inlier_flags[i] = r.phi[i] <= threshold;
  return r;
}

MadResult mad_scores(const CandidateBoundary& candidates, double threshold) {
  return mad_scores(candidates.distances(), threshold);
}

MadFilterResult filter_by_mad(const CandidateBoundary& candidates, const MadResult& r, double threshold) {
  if (r.phi.size() != candidates.size()) throw std::invalid_argument("filter_by_mad: scores not aligned");
  MadFilterResult out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    Candidate c = candidates.candidates[i];
    c.phi = r.phi[i];
    (c.phi <= threshold ? out.kept : out.removed).candidates.push_back(c);
  }
  return out;
}

}  // namespace fatseg
