#pragma once

#include <cstdint>
#include <vector>

#include "fatseg/volume_io.hpp"

namespace fatseg {

/// Synthetic abdominal cross-section: an elliptic body whose subcutaneous fat
/// ring is separated from the visceral cavity by a thin muscle wall. The wall
/// can have gaps (fat sectors joining SAT and VAT) and the SAT ring can hold
/// small soft-tissue inclusions that trap ray searches.
struct PhantomParams {
  int nx = 320;
  int ny = 320;
  int nz = 1;
  VoxelSpacing spacing{1.17, 1.17, 5.0};

  double skin_a = 110.0;  // semi-axes of the body outline, px
  double skin_b = 80.0;
  double sat_thickness = 20.0;  // mean SAT thickness, px
  double sat_asymmetry = 0.3;   // SAT is t(1+s) thick anteriorly, t(1-s) posteriorly
  double wall_thickness = 4.0;
  int wall_gaps = 2;
  double gap_width_deg = 8.0;
  double visceral_fat_thickness = 6.0;
  int visceral_blobs = 4;
  double blob_radius = 6.0;
  int sat_inclusions = 0;
  double inclusion_radius = 2.5;

  double hu_air = -1000.0;
  double hu_fat = -100.0;
  double hu_muscle = 40.0;
  double hu_organ = 50.0;
  double noise_sigma = 15.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Phantom {
  PhantomParams params;
  VolumeGrid volume;
  MaskGrid truth;
};

Phantom generate(const PhantomParams& params);

/// Parameters of the fixed 20-case battery.
std::vector<PhantomParams> suite_params(std::uint64_t seed);
std::vector<Phantom> suite(std::uint64_t seed);

inline constexpr int kSuiteSize = 20;

}  // namespace fatseg
