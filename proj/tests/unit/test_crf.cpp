#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "fatseg/crf.hpp"

using namespace fatseg;

namespace {

FusionGraph random_graph(std::mt19937& rng, int n, double w) {
  std::uniform_real_distribution<double> u(0.0, 14.0);
  std::uniform_real_distribution<double> sc(0.01, 1.0);
  FusionGraph g;
  g.w = w;
  for (int i = 0; i < n; ++i) g.unary.push_back({u(rng), u(rng)});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng() % 3 == 0) g.edges.push_back({i, j, sc(rng)});
  return g;
}

double cut_weight(const FusionGraph& g, const std::vector<FusionLabel>& labels) {
  double s = 0.0;
  for (const auto& e : g.edges)
    if (labels[static_cast<std::size_t>(e.i)] != labels[static_cast<std::size_t>(e.j)]) s += e.scale;
  return s;
}

CandidateBoundary scored(const std::vector<std::pair<double, double>>& phi_pi) {
  CandidateBoundary cb;
  for (const auto& [phi, pi] : phi_pi) {
    Candidate c;
    c.phi = phi;
    c.pi = pi;
    cb.candidates.push_back(c);
  }
  return cb;
}

}  // namespace

TEST_CASE("unaries: two score clusters") {
  std::vector<std::pair<double, double>> s(10, {0.0, 0.0});
  s.push_back({5.0, 1.0});
  s.push_back({5.0, 1.0});
  const UnaryResult r = unary_potentials(scored(s), {});
  // Centroids land on (0,0) and (1,1). A point on the outlier centroid has
  // p_inlier = 1 / (1 + exp(sqrt(2) / T)).
  const double expected = 1.0 / (1.0 + std::exp(std::sqrt(2.0) / 0.5));
  for (int i = 10; i < 12; ++i) {
    CHECK(r.p_inlier[static_cast<std::size_t>(i)] == doctest::Approx(expected));
    CHECK(1.0 - r.p_inlier[static_cast<std::size_t>(i)] > 0.9);
  }
  for (int i = 0; i < 10; ++i) CHECK(r.p_inlier[static_cast<std::size_t>(i)] == doctest::Approx(1.0 - expected));
  CHECK(r.scores[11] == Point2{1.0, 1.0});
}

TEST_CASE("unaries: identical scores are uninformative") {
  const UnaryResult r = unary_potentials(scored(std::vector<std::pair<double, double>>(6, {0.3, 0.3})), {});
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(r.p_inlier[i] == 0.5);
    CHECK(r.theta[i][0] == doctest::Approx(std::log(2.0)));
    CHECK(r.theta[i][1] == doctest::Approx(std::log(2.0)));
  }
}

TEST_CASE("unary floor keeps costs finite") {
  CHECK(neg_log_prob(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(neg_log_prob(0.0) == doctest::Approx(-std::log(1e-6)));
  CHECK(neg_log_prob(0.0) <= 13.8156);
  CHECK(std::isfinite(neg_log_prob(-1.0)));
  CHECK(inlier_probability(0.0, 1000.0, 0.5) == 1.0);
  CHECK(inlier_probability(1000.0, 0.0, 0.5) >= 0.0);
}

TEST_CASE("kmeans2 is seeded and picks the lower-inertia split") {
  std::vector<Point2> pts;
  for (int i = 0; i < 15; ++i) pts.push_back({0.01 * i, 0.0});
  for (int i = 0; i < 5; ++i) pts.push_back({3.0 + 0.01 * i, 3.0});
  const KMeansResult a = kmeans2(pts, 10, 7);
  const KMeansResult b = kmeans2(pts, 10, 7);
  CHECK(a.assignment == b.assignment);
  CHECK(a.inertia == b.inertia);
  for (int i = 1; i < 15; ++i) CHECK(a.assignment[static_cast<std::size_t>(i)] == a.assignment[0]);
  for (int i = 15; i < 20; ++i) CHECK(a.assignment[static_cast<std::size_t>(i)] != a.assignment[0]);
  CHECK_THROWS(kmeans2({{0, 0}}, 1, 1));
}

TEST_CASE("pairwise potential") {
  const std::vector<double> a{0.0, 1.0, 2.0}, b{1.0, 0.0, 3.0};
  CHECK(pairwise_potential(a, b, FusionLabel::kInlier, FusionLabel::kInlier) == 0.0);
  CHECK(pairwise_potential(a, a, FusionLabel::kInlier, FusionLabel::kOutlier) == 1.0);
  CHECK(pairwise_potential(a, b, FusionLabel::kOutlier, FusionLabel::kInlier) == 0.25);
}

TEST_CASE("kNN edges") {
  SUBCASE("three nodes: complete graph") {
    Matrix f(3, 2, 0.0);
    f(1, 0) = 1.0;
    f(2, 1) = 2.0;
    const auto e = build_edges(f, 5);
    REQUIRE(e.size() == 3);
    CHECK(e[0].scale == doctest::Approx(1.0 / 2.0));
    CHECK(e[1].scale == doctest::Approx(1.0 / 3.0));
    CHECK(e[2].scale == doctest::Approx(1.0 / 4.0));
  }
  SUBCASE("two far clusters, k = 1: no cross edges") {
    Matrix f(8, 2, 0.0);
    for (std::size_t i = 0; i < 8; ++i) {
      f(i, 0) = (i < 4 ? 0.0 : 100.0) + 0.1 * static_cast<double>(i);
      f(i, 1) = 0.05 * static_cast<double>(i * i % 5);
    }
    const auto edges = build_edges(f, 1);
    CHECK_FALSE(edges.empty());
    for (const auto& e : edges) {
      CHECK((e.i < 4) == (e.j < 4));
      CHECK(e.i < e.j);
    }
  }
  SUBCASE("symmetrised: every node keeps at least k neighbours") {
    std::mt19937 rng(2);
    std::normal_distribution<double> g;
    Matrix f(40, 5);
    for (auto& v : f.data()) v = g(rng);
    const auto edges = build_edges(f, 5);
    std::vector<int> deg(40, 0);
    for (const auto& e : edges) {
      ++deg[static_cast<std::size_t>(e.i)];
      ++deg[static_cast<std::size_t>(e.j)];
    }
    for (int d : deg) CHECK(d >= 5);
  }
}

TEST_CASE("fusion features") {
  CandidateBoundary cb;
  for (int i = 0; i < 5; ++i) {
    Candidate c;
    c.distance = std::vector<double>{3, 4, 5, 6, 100}[static_cast<std::size_t>(i)];
    c.angle = 0.5 * i;
    cb.candidates.push_back(c);
  }
  std::vector<HogDescriptor> hogs(5);
  hogs[0][0] = 2.0;
  hogs[0][1] = 6.0;
  const Matrix robust = fusion_features(cb, hogs, RadialScale::kRobust);
  const Matrix minmax = fusion_features(cb, hogs, RadialScale::kMinMax);
  REQUIRE(robust.cols() == kHogSize + 3);
  CHECK(robust(0, 0) == 0.25);
  CHECK(robust(0, 1) == 0.75);
  CHECK(robust(1, 0) == 0.0);
  // Median 5, MAD 1.
  CHECK(robust(0, kHogSize) == -2.0);
  CHECK(robust(4, kHogSize) == 95.0);
  CHECK(minmax(0, kHogSize) == 0.0);
  CHECK(minmax(4, kHogSize) == 1.0);
  CHECK(robust(3, kHogSize + 1) == doctest::Approx(std::sin(1.5)));
  CHECK(robust(3, kHogSize + 2) == doctest::Approx(std::cos(1.5)));
}

TEST_CASE("exact minimisation") {
  SUBCASE("single node") {
    FusionGraph g;
    g.unary = {{2.0, 1.0}};
    CHECK(minimize_energy(g).labels == std::vector<FusionLabel>{FusionLabel::kOutlier});
  }
  SUBCASE("w = 0 decouples the nodes") {
    std::mt19937 rng(1);
    FusionGraph g = random_graph(rng, 12, 0.0);
    const Labeling l = minimize_energy(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto want = g.unary[i][1] < g.unary[i][0] ? FusionLabel::kOutlier : FusionLabel::kInlier;
      if (g.unary[i][0] != g.unary[i][1]) CHECK(l.labels[i] == want);
    }
  }
  SUBCASE("strong edge: both nodes follow the stronger unary") {
    FusionGraph g;
    g.unary = {{0.0, 5.0}, {1.0, 0.0}};
    g.edges = {{0, 1, 1.0}};
    g.w = 100.0;
    const Labeling l = minimize_energy(g);
    CHECK(l.labels == std::vector<FusionLabel>{FusionLabel::kInlier, FusionLabel::kInlier});
    CHECK(l.energy == 1.0);
  }
  SUBCASE("equal unaries: a constant labeling is optimal") {
    FusionGraph g;
    g.w = 1.0;
    for (int i = 0; i < 6; ++i) g.unary.push_back({2.0, 2.0});
    for (int i = 0; i + 1 < 6; ++i) g.edges.push_back({i, i + 1, 0.5});
    CHECK(minimize_energy(g).energy == doctest::Approx(12.0));
  }
  SUBCASE("matches exhaustive search on random graphs") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 16);
      const double w = std::vector<double>{0.0, 0.5, 1.0, 5.0}[static_cast<std::size_t>(trial % 4)];
      const FusionGraph g = random_graph(rng, n, w);
      const Labeling a = minimize_energy(g);
      const Labeling b = brute_force_minimize(g);
      CHECK(std::abs(a.energy - b.energy) <= 1e-9);
      CHECK(a.energy == doctest::Approx(energy(g, a.labels)));
    }
  }
  SUBCASE("shifting both unaries of a node leaves the minimiser in place") {
    std::mt19937 rng(5);
    const FusionGraph g = random_graph(rng, 14, 1.0);
    FusionGraph h = g;
    for (auto& u : h.unary) {
      u[0] += 3.0;
      u[1] += 3.0;
    }
    const Labeling a = minimize_energy(g);
    const Labeling b = minimize_energy(h);
    CHECK(b.energy == doctest::Approx(a.energy + 3.0 * 14));
    CHECK(energy(h, a.labels) == doctest::Approx(b.energy));
  }
  SUBCASE("raising w never increases the weighted cut") {
    std::mt19937 rng(6);
    for (int trial = 0; trial < 30; ++trial) {
      FusionGraph g = random_graph(rng, 14, 0.0);
      double prev = std::numeric_limits<double>::infinity();
      for (double w : {0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        g.w = w;
        const double cut = cut_weight(g, minimize_energy(g).labels);
        CHECK(cut <= prev + 1e-9);
        prev = cut;
      }
    }
  }
  SUBCASE("invalid graphs are rejected") {
    FusionGraph g;
    g.unary = {{1.0, 1.0}, {1.0, 1.0}};
    g.edges = {{0, 0, 1.0}};
    CHECK_THROWS(minimize_energy(g));
    g.edges = {{0, 1, 1.0}};
    g.w = -1.0;
    CHECK_THROWS(minimize_energy(g));
    g.w = 1.0;
    g.unary[0][0] = std::nan("");
    CHECK_THROWS(minimize_energy(g));
  }
}
