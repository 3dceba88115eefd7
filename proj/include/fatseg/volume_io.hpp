#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fatseg/grid.hpp"

namespace fatseg {

struct VoxelSpacing {
  double dx = 1.0;  // mm
  double dy = 1.0;  // mm
  double dz = 1.0;  // mm, slice thickness

  bool valid() const;
  double voxel_mm3() const { return dx * dy * dz; }
  double voxel_ml() const { return voxel_mm3() / 1000.0; }

  friend bool operator==(const VoxelSpacing&, const VoxelSpacing&) = default;
};

struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  bool valid() const { return nx > 0 && ny > 0 && nz > 0; }
  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  std::size_t slice_count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Mask label codes as stored on disk.
enum class Label : std::uint8_t {
  kBackground = 0,
  kSat = 1,
  kVat = 2,
  kFatUndivided = 3,
};

inline constexpr std::uint8_t code(Label l) { return static_cast<std::uint8_t>(l); }
inline constexpr bool is_label_code(std::uint8_t v) { return v <= code(Label::kFatUndivided); }

/// CT volume in Hounsfield Units, x fastest, then y, then z.
struct VolumeGrid {
  Dims dims;
  VoxelSpacing spacing;
  std::vector<std::int16_t> data;

  VolumeGrid() = default;
  VolumeGrid(Dims d, VoxelSpacing s, std::int16_t fill = 0);

  void validate() const;
  std::int16_t& at(int x, int y, int z) { return data[offset(x, y, z)]; }
  std::int16_t at(int x, int y, int z) const { return data[offset(x, y, z)]; }
  std::size_t offset(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x;
  }

  friend bool operator==(const VolumeGrid&, const VolumeGrid&) = default;
};

struct MaskGrid {
  Dims dims;
  VoxelSpacing spacing;
  std::vector<std::uint8_t> data;

  MaskGrid() = default;
  MaskGrid(Dims d, VoxelSpacing s, Label fill = Label::kBackground);

  void validate() const;
  std::uint8_t& at(int x, int y, int z) { return data[offset(x, y, z)]; }
  std::uint8_t at(int x, int y, int z) const { return data[offset(x, y, z)]; }
  std::size_t offset(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x;
  }
  std::size_t count(Label l) const;

  friend bool operator==(const MaskGrid&, const MaskGrid&) = default;
};

VolumeGrid load_volume(const std::filesystem::path& header);
void save_volume(const VolumeGrid& vol, const std::filesystem::path& header);
MaskGrid load_mask(const std::filesystem::path& header);
void save_mask(const MaskGrid& mask, const std::filesystem::path& header);

IntensitySlice extract_slice(const VolumeGrid& vol, int z);
LabelSlice extract_slice(const MaskGrid& mask, int z);
void insert_slice(MaskGrid& mask, int z, const LabelSlice& slice);
void insert_slice(VolumeGrid& vol, int z, const IntensitySlice& slice);

/// count(label) * dx*dy*dz / 1000.
double label_volume_ml(const MaskGrid& mask, Label l);

}  // namespace fatseg
