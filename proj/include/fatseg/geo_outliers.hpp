#pragma once

#include <vector>

#include "fatseg/boundary.hpp"

namespace fatseg {

struct MadResult {
  std::vector<double> phi;
  double median_distance = 0.0;
  double mad = 0.0;
  std::vector<bool> inlier_flags;  // phi <= threshold used at scoring time
};

inline constexpr double kDefaultMadThreshold = 2.5;

/// Median; an even count averages the two central values. Throws on empty input.
double median(std::vector<double> values);

/// phi_i = |d_i - med(d)| / med_j |d_j - med(d)|. When the MAD is zero every
/// phi is 0. Throws std::invalid_argument for fewer than 3 distances.
MadResult mad_scores(const std::vector<double>& distances, double threshold = kDefaultMadThreshold);
MadResult mad_scores(const CandidateBoundary& candidates, double threshold = kDefaultMadThreshold);

struct MadFilterResult {
  CandidateBoundary kept;
  CandidateBoundary removed;
};

/// Splits candidates at phi <= threshold. Both halves carry their phi.
MadFilterResult filter_by_mad(const CandidateBoundary& candidates, const MadResult& r, double threshold);

}  // namespace fatseg
