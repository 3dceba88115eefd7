#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fatseg/appearance.hpp"
#include "fatseg/boundary.hpp"
#include "fatseg/crf.hpp"
#include "fatseg/geo_outliers.hpp"
#include "fatseg/partition.hpp"
#include "fatseg/preprocess.hpp"
#include "fatseg/volume_io.hpp"

namespace fatseg {

/// Which boundary points feed the hull.
enum class Method {
  kMadOnly,   // MAD inliers
  kLoopOnly,  // MAD inliers whose outlier probability is below the LoOP cut
  kFusion,    // CRF inliers over all candidates
  kRansac,    // ellipse-RANSAC inliers over all candidates
};

const char* method_name(Method m);
Method parse_method(const std::string& s);

struct PipelineConfig {
  PreprocessParams preprocess;
  int n_rays = 360;
  double ray_step = 0.5;
  double mad_threshold = kDefaultMadThreshold;
  AppearanceParams appearance;
  FusionParams fusion;
  double loop_only_threshold = 0.5;
  double ransac_tolerance = 3.0;
  int ransac_iters = 500;
  std::uint64_t seed = 42;
  int workers = 1;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Flat key/value view, used in reports.
  std::string to_json() const;
};

/// Everything computed for one slice. Method-independent: every labeling is
/// derived from the same stages.
struct SliceStages {
  int z = 0;
  bool no_subject = false;
  std::string note;
  PreprocessedSlice pre;
  Contour skin;
  RayFan fan;
  CandidateBoundary candidates;  // phi, pi and fusion label filled in
  MadResult mad;
  AppearanceResult appearance;
  FusionResult fusion;
  std::vector<bool> ransac_inliers;
  double seconds = 0.0;
};

/// Per-slice seed derived from the run seed and the slice index.
std::uint64_t slice_seed(std::uint64_t seed, int z);

/// Runs preprocess through fusion on one slice. Errors are rethrown as
/// PipelineError carrying z and the stage name.
SliceStages analyze_slice(const IntensitySlice& slice, const PipelineConfig& config, int z);

struct SliceLabeling {
  LabelSlice labels;
  std::vector<Point2> hull_points;
  std::optional<HullPolygon> hull;
  bool flagged = false;
  std::string note;
};

SliceLabeling label_slice(const SliceStages& stages, Method method, const PipelineConfig& config);

/// Slice-parallel analysis with config.workers threads; results ordered by z.
std::vector<SliceStages> analyze_volume(const VolumeGrid& volume, const PipelineConfig& config);

struct SegmentResult {
  MaskGrid mask;
  QuantReport report;
  std::vector<SliceLabeling> labelings;
};

SegmentResult assemble(const VolumeGrid& volume, const std::vector<SliceStages>& stages, Method method,
                       const PipelineConfig& config);

SegmentResult segment_volume(const VolumeGrid& volume, const PipelineConfig& config, Method method = Method::kFusion);

}  // namespace fatseg
