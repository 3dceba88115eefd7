#include "fatseg/volume_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fatseg/errors.hpp"

namespace fatseg {
namespace {

namespace fs = std::filesystem;

enum class ElementType { kInt16, kUInt8 };

const char* type_name(ElementType t) { return t == ElementType::kInt16 ? "int16" : "uint8"; }
std::size_t type_size(ElementType t) { return t == ElementType::kInt16 ? 2 : 1; }

struct Header {
  Dims dims;
  VoxelSpacing spacing;
  ElementType type = ElementType::kInt16;
  std::string raw;
};

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string value_for(const std::string& line, const std::string& key, const fs::path& path) {
  const std::string prefix = key + "=";
  if (line.rfind(prefix, 0) != 0) {
    throw IoError(path.string() + ": expected key '" + key + "', got '" + line + "'");
  }
  return line.substr(prefix.size());
}

template <typename T, std::size_t N>
std::array<T, N> parse_numbers(const std::string& text, const fs::path& path, const char* key) {
  std::array<T, N> out{};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (std::size_t i = 0; i < N; ++i) {
    while (p < end && *p == ' ') ++p;
    auto res = std::from_chars(p, end, out[i]);
    if (res.ec != std::errc()) {
      throw IoError(path.string() + ": malformed value for '" + key + "'");
    }
    p = res.ptr;
  }
  while (p < end && *p == ' ') ++p;
  if (p != end) throw IoError(path.string() + ": trailing data after '" + key + "'");
  return out;
}

Header read_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open header " + path.string());

  std::array<std::string, 5> lines;
  for (auto& line : lines) {
    if (!std::getline(in, line)) throw IoError(path.string() + ": truncated header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }

  Header h;
  auto d = parse_numbers<int, 3>(value_for(lines[0], "dims", path), path, "dims");
  h.dims = {d[0], d[1], d[2]};
  auto s = parse_numbers<double, 3>(value_for(lines[1], "spacing", path), path, "spacing");
  h.spacing = {s[0], s[1], s[2]};

  const std::string type = value_for(lines[2], "type", path);
  if (type == "int16") {
    h.type = ElementType::kInt16;
  } else if (type == "uint8") {
    h.type = ElementType::kUInt8;
  } else {
    throw IoError(path.string() + ": unsupported element type '" + type + "'");
  }
  if (value_for(lines[3], "order", path) != "little") {
    throw IoError(path.string() + ": unsupported byte order");
  }
  h.raw = value_for(lines[4], "raw", path);
  if (h.raw.empty()) throw IoError(path.string() + ": empty raw file name");

  if (!h.dims.valid()) throw IoError(path.string() + ": dimensions must be positive");
  if (!h.spacing.valid()) throw IoError(path.string() + ": spacing must be positive and finite");
  return h;
}

void write_header(const fs::path& path, const Header& h) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write header " + path.string());
  out << "dims=" << h.dims.nx << ' ' << h.dims.ny << ' ' << h.dims.nz << '\n'
      << "spacing=" << format_double(h.spacing.dx) << ' ' << format_double(h.spacing.dy) << ' '
      << format_double(h.spacing.dz) << '\n'
      << "type=" << type_name(h.type) << '\n'
      << "order=little\n"
      << "raw=" << h.raw << '\n';
  if (!out) throw IoError("failed writing header " + path.string());
}

fs::path raw_path_for(const fs::path& header, const std::string& raw) {
  return header.parent_path() / raw;
}

std::vector<char> read_payload(const fs::path& header, const Header& h) {
  const fs::path raw = raw_path_for(header, h.raw);
  std::ifstream in(raw, std::ios::binary);
  if (!in) throw IoError("cannot open raw payload " + raw.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t expected = h.dims.count() * type_size(h.type);
  if (bytes.size() != expected) {
    throw IoError(raw.string() + ": payload is " + std::to_string(bytes.size()) + " bytes, header declares " +
                  std::to_string(expected));
  }
  return bytes;
}

void write_payload(const fs::path& path, const char* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write raw payload " + path.string());
  out.write(data, static_cast<std::streamsize>(n));
  if (!out) throw IoError("failed writing raw payload " + path.string());
}

std::string raw_name_for(const fs::path& header) { return header.stem().string() + ".raw"; }

}  // namespace

bool VoxelSpacing::valid() const {
  return std::isfinite(dx) && std::isfinite(dy) && std::isfinite(dz) && dx > 0 && dy > 0 && dz > 0;
}

VolumeGrid::VolumeGrid(Dims d, VoxelSpacing s, std::int16_t fill) : dims(d), spacing(s), data(d.count(), fill) {}

void VolumeGrid::validate() const {
  if (!dims.valid()) throw std::invalid_argument("VolumeGrid: dimensions must be positive");
  if (!spacing.valid()) throw std::invalid_argument("VolumeGrid: spacing must be positive and finite");
  if (data.size() != dims.count()) throw std::invalid_argument("VolumeGrid: data length mismatch");
}

MaskGrid::MaskGrid(Dims d, VoxelSpacing s, Label fill) : dims(d), spacing(s), data(d.count(), code(fill)) {}

void MaskGrid::validate() const {
  if (!dims.valid()) throw std::invalid_argument("MaskGrid: dimensions must be positive");
  if (!spacing.valid()) throw std::invalid_argument("MaskGrid: spacing must be positive and finite");
  if (data.size() != dims.count()) throw std::invalid_argument("MaskGrid: data length mismatch");
  for (auto v : data) {
    if (!is_label_code(v)) throw std::invalid_argument("MaskGrid: label code out of range");
  }
}

std::size_t MaskGrid::count(Label l) const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), code(l)));
}

VolumeGrid load_volume(const fs::path& header) {
  const Header h = read_header(header);
  if (h.type != ElementType::kInt16) throw IoError(header.string() + ": volume must be int16");
  const auto bytes = read_payload(header, h);

  VolumeGrid vol(h.dims, h.spacing);
  for (std::size_t i = 0; i < vol.data.size(); ++i) {
    const auto lo = static_cast<std::uint8_t>(bytes[2 * i]);
    const auto hi = static_cast<std::uint8_t>(bytes[2 * i + 1]);
    vol.data[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  return vol;
}

void save_volume(const VolumeGrid& vol, const fs::path& header) {
  vol.validate();
  Header h{vol.dims, vol.spacing, ElementType::kInt16, raw_name_for(header)};
  std::vector<char> bytes(vol.data.size() * 2);
  for (std::size_t i = 0; i < vol.data.size(); ++i) {
    const auto u = static_cast<std::uint16_t>(vol.data[i]);
    bytes[2 * i] = static_cast<char>(u & 0xFF);
    bytes[2 * i + 1] = static_cast<char>(u >> 8);
  }
  write_header(header, h);
  write_payload(raw_path_for(header, h.raw), bytes.data(), bytes.size());
}

MaskGrid load_mask(const fs::path& header) {
  const Header h = read_header(header);
  if (h.type != ElementType::kUInt8) throw IoError(header.string() + ": mask must be uint8");
  const auto bytes = read_payload(header, h);

  MaskGrid mask(h.dims, h.spacing);
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(bytes[i]);
    if (!is_label_code(v)) throw IoError(header.string() + ": invalid label code " + std::to_string(v));
    mask.data[i] = v;
  }
  return mask;
}

void save_mask(const MaskGrid& mask, const fs::path& header) {
  mask.validate();
  Header h{mask.dims, mask.spacing, ElementType::kUInt8, raw_name_for(header)};
  write_header(header, h);
  write_payload(raw_path_for(header, h.raw), reinterpret_cast<const char*>(mask.data.data()), mask.data.size());
}

IntensitySlice extract_slice(const VolumeGrid& vol, int z) {
  if (z < 0 || z >= vol.dims.nz) throw std::out_of_range("extract_slice: z out of range");
  const auto begin = vol.data.begin() + static_cast<std::ptrdiff_t>(vol.offset(0, 0, z));
  return IntensitySlice(vol.dims.nx, vol.dims.ny,
                        std::vector<std::int16_t>(begin, begin + static_cast<std::ptrdiff_t>(vol.dims.slice_count())));
}

LabelSlice extract_slice(const MaskGrid& mask, int z) {
  if (z < 0 || z >= mask.dims.nz) throw std::out_of_range("extract_slice: z out of range");
  const auto begin = mask.data.begin() + static_cast<std::ptrdiff_t>(mask.offset(0, 0, z));
  return LabelSlice(mask.dims.nx, mask.dims.ny,
                    std::vector<std::uint8_t>(begin, begin + static_cast<std::ptrdiff_t>(mask.dims.slice_count())));
}

void insert_slice(MaskGrid& mask, int z, const LabelSlice& slice) {
  if (z < 0 || z >= mask.dims.nz) throw std::out_of_range("insert_slice: z out of range");
  if (slice.nx() != mask.dims.nx || slice.ny() != mask.dims.ny) {
    throw std::invalid_argument("insert_slice: slice dimensions do not match");
  }
  std::copy(slice.data().begin(), slice.data().end(),
            mask.data.begin() + static_cast<std::ptrdiff_t>(mask.offset(0, 0, z)));
}

void insert_slice(VolumeGrid& vol, int z, const IntensitySlice& slice) {
  if (z < 0 || z >= vol.dims.nz) throw std::out_of_range("insert_slice: z out of range");
  if (slice.nx() != vol.dims.nx || slice.ny() != vol.dims.ny) {
    throw std::invalid_argument("insert_slice: slice dimensions do not match");
  }
  std::copy(slice.data().begin(), slice.data().end(),
            vol.data.begin() + static_cast<std::ptrdiff_t>(vol.offset(0, 0, z)));
}

double label_volume_ml(const MaskGrid& mask, Label l) {
  return static_cast<double>(mask.count(l)) * mask.spacing.voxel_ml();
}

}  // namespace fatseg
