#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fatseg {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

/// Dense row-major 2D grid, x fastest.
template <typename T>
class Grid2D {
 public:
  using value_type = T;

  Grid2D() = default;
  Grid2D(int nx, int ny, T fill = T{}) : nx_(nx), ny_(ny) {
    if (nx < 0 || ny < 0) throw std::invalid_argument("Grid2D: negative dimension");
    data_.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), fill);
  }
  Grid2D(int nx, int ny, std::vector<T> data) : nx_(nx), ny_(ny), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
      throw std::invalid_argument("Grid2D: data length does not match dimensions");
    }
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < nx_ && y < ny_; }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  /// Edge-replicating lookup.
  const T& clamped(int x, int y) const {
    return (*this)(std::clamp(x, 0, nx_ - 1), std::clamp(y, 0, ny_ - 1));
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(x);
  }

  int nx_ = 0;
  int ny_ = 0;
  std::vector<T> data_;
};

using IntensitySlice = Grid2D<std::int16_t>;
/// One byte per pixel, nonzero = foreground.
using BinarySlice = Grid2D<std::uint8_t>;
using LabelSlice = Grid2D<std::uint8_t>;

template <typename T>
std::size_t count_nonzero(const Grid2D<T>& g) {
  return static_cast<std::size_t>(
      std::count_if(g.data().begin(), g.data().end(), [](T v) { return v != T{}; }));
}

}  // namespace fatseg
