#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fatseg/grid.hpp"
#include "fatseg/partition.hpp"
#include "fatseg/phantom.hpp"
#include "fatseg/pipeline.hpp"
#include "fatseg/volume_io.hpp"

namespace fatseg {

/// 2|A n B| / (|A| + |B|) over voxels carrying `label`; 1.0 when both are empty.
double dice(const MaskGrid& a, const MaskGrid& b, Label label);
double dice(const LabelSlice& a, const LabelSlice& b, Label label);

/// Mean over cases of |pred - truth| in ml. `label` is kSat or kVat.
double mae_ml(const std::vector<QuantReport>& pred, const std::vector<QuantReport>& truth, Label label);

struct EvalRow {
  std::string method;
  double sat_dsc = 0.0;
  double vat_dsc = 0.0;
  double sat_mae = 0.0;
  double vat_mae = 0.0;
};

struct CaseScore {
  int case_index = 0;
  std::string method;
  double sat_dsc = 0.0;
  double vat_dsc = 0.0;
  double sat_ml = 0.0;
  double vat_ml = 0.0;
  double truth_sat_ml = 0.0;
  double truth_vat_ml = 0.0;
};

struct AblationResult {
  std::vector<EvalRow> rows;  // MAD-only, LoOP-only, fusion, RANSAC
  std::vector<CaseScore> cases;
};

/// Each case is analysed once; the four methods label from the same stages.
AblationResult ablation_run(const std::vector<Phantom>& battery, const PipelineConfig& config);

std::string format_table(const std::vector<EvalRow>& rows);
std::string to_json(const AblationResult& result);

// ---------------------------------------------------------------------------
// RANSAC ellipse baseline

/// Conic a x^2 + b xy + c y^2 + d x + e y + f = 0 in the original frame.
struct Conic {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

  double value(Point2 p) const;
  bool is_ellipse() const { return b * b - 4.0 * a * c < 0.0; }
  /// First-order (Sampson) geometric distance.
  double sampson_distance(Point2 p) const;
};

/// Conic through five points (null space of the 5x6 design matrix).
Conic fit_conic5(const std::vector<Point2>& five);

struct RansacResult {
  Conic model;
  std::vector<bool> inliers;
  std::size_t inlier_count = 0;
};

/// Seeded RANSAC over ellipse fits. Throws std::invalid_argument for fewer than 5 points.
RansacResult ransac_ellipse(const std::vector<Point2>& points, double tolerance, int iterations, std::uint64_t seed);

}  // namespace fatseg
