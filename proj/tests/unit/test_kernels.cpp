#include <cmath>
#include <random>

#include <omp.h>

#include "doctest.h"
#include "fatseg/kernels.hpp"

using namespace fatseg;

namespace {

BinarySlice random_mask(std::mt19937& rng, int nx, int ny) {
  BinarySlice m(nx, ny, 0);
  const double density = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
  std::bernoulli_distribution b(density);
  for (auto& v : m.data()) v = b(rng);
  return m;
}

Matrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (auto& v : m.data()) v = g(rng);
  return m;
}

// Symmetric, zero-diagonal, sums to 1.
Matrix random_affinities(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix p(n, n, 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      p(i, j) = p(j, i) = u(rng);
      s += 2.0 * p(i, j);
    }
  for (auto& v : p.data()) v /= s;
  return p;
}

}  // namespace

TEST_CASE("disk half widths") {
  CHECK(disk_half_widths(0) == std::vector<int>{0});
  CHECK(disk_half_widths(2) == std::vector<int>{0, 1, 2, 1, 0});
}

TEST_CASE("morphology kernels agree with the serial reference") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int nx = 5 + static_cast<int>(rng() % 40);
    const int ny = 5 + static_cast<int>(rng() % 40);
    const int r = static_cast<int>(rng() % 6);
    const BinarySlice m = random_mask(rng, nx, ny);
    CHECK(kernels::dilate_disk(m, r) == reference::dilate_disk(m, r));
    CHECK(kernels::erode_disk(m, r) == reference::erode_disk(m, r));
    CHECK(kernels::close_disk(m, r) == reference::close_disk(m, r));
  }
}

TEST_CASE("median kernels agree with the serial reference") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = 3 + static_cast<int>(rng() % 30);
    const int ny = 3 + static_cast<int>(rng() % 30);
    const int w = 1 + 2 * static_cast<int>(rng() % 3);
    const BinarySlice m = random_mask(rng, nx, ny);
    CHECK(kernels::median_binary(m, w) == reference::median_binary(m, w));
    IntensitySlice g(nx, ny, 0);
    for (auto& v : g.data()) v = static_cast<std::int16_t>(static_cast<int>(rng() % 600) - 300);
    CHECK(kernels::median_intensity(g, w) == reference::median_intensity(g, w));
  }
}

TEST_CASE("correlation distance and squared distances agree with the reference") {
  std::mt19937 rng(5);
  const Matrix f = random_matrix(rng, 37, 19);
  const Matrix a = kernels::correlation_distance(f);
  const Matrix b = reference::correlation_distance(f);
  REQUIRE(a.data().size() == b.data().size());
  for (std::size_t k = 0; k < a.data().size(); ++k) CHECK(a.data()[k] == doctest::Approx(b.data()[k]).epsilon(1e-12));
  CHECK(kernels::squared_distances(f) == reference::squared_distances(f));
}

TEST_CASE("t-SNE gradient and KL agree with the reference") {
  std::mt19937 rng(6);
  const std::size_t n = 41;
  Matrix p = random_affinities(rng, n);
  // Floor a band of entries the way tsne_affinities does.
  const double floor = 1e-12;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; j += 3) {
      p(i, j) = p(j, i) = floor;
    }
  double plogp = 0.0;
  for (double v : p.data())
    if (v > 0.0) plogp += v * std::log(v);
  const Matrix y = random_matrix(rng, n, 2);

  for (double exag : {1.0, 4.0}) {
    Matrix g_par(n, 2), g_ref(n, 2), g_fused(n, 2);
    const double z_par = kernels::tsne_gradient(p, y, exag, g_par);
    const double z_ref = reference::tsne_gradient(p, y, exag, g_ref);
    const auto fused = kernels::tsne_gradient_kl(p, floor, plogp, y, exag, g_fused);
    CHECK(z_par == doctest::Approx(z_ref).epsilon(1e-12));
    CHECK(fused.z == doctest::Approx(z_ref).epsilon(1e-12));
    for (std::size_t k = 0; k < g_ref.data().size(); ++k) {
      CHECK(g_par.data()[k] == doctest::Approx(g_ref.data()[k]).epsilon(1e-10));
      CHECK(g_fused.data()[k] == doctest::Approx(g_ref.data()[k]).epsilon(1e-10));
    }
    const double kl_ref = reference::tsne_kl(p, y);
    CHECK(kernels::tsne_kl(p, y) == doctest::Approx(kl_ref).epsilon(1e-10));
    CHECK(fused.kl == doctest::Approx(kl_ref).epsilon(1e-9));
  }
}

TEST_CASE("kernel results do not depend on the thread count") {
  std::mt19937 rng(8);
  const BinarySlice m = random_mask(rng, 97, 61);
  const Matrix f = random_matrix(rng, 60, 30);
  const BinarySlice c1 = kernels::close_disk(m, 4);
  const Matrix d1 = kernels::correlation_distance(f);
  for (int t : {1, 3, 8}) {
    omp_set_num_threads(t);
    CHECK(kernels::close_disk(m, 4) == c1);
    CHECK(kernels::correlation_distance(f) == d1);
  }
}
