#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fatseg/appearance.hpp"
#include "fatseg/boundary.hpp"
#include "fatseg/phantom.hpp"
#include "fatseg/preprocess.hpp"
#include "oracles/loop_oracle.hpp"
#include "oracles/ncd_oracle.hpp"

using namespace fatseg;

namespace {

IntensitySlice random_slice(std::mt19937& rng, int n) {
  IntensitySlice s(n, n, 0);
  for (auto& v : s.data()) v = static_cast<std::int16_t>(static_cast<int>(rng() % 400) - 200);
  return s;
}

Matrix euclidean(const Matrix& pts) {
  const std::size_t n = pts.rows();
  Matrix d(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < pts.cols(); ++k) s += (pts(i, k) - pts(j, k)) * (pts(i, k) - pts(j, k));
      d(i, j) = std::sqrt(s);
    }
  return d;
}

// Mean silhouette of a 2-label clustering, Euclidean in the rows of `pts`.
double silhouette(const Matrix& pts, const std::vector<int>& label) {
  const Matrix d = euclidean(pts);
  const std::size_t n = pts.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double same = 0.0, other = 0.0;
    int ns = 0, no = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (label[j] == label[i]) {
        same += d(i, j);
        ++ns;
      } else {
        other += d(i, j);
        ++no;
      }
    }
    const double a = same / ns, b = other / no;
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

Matrix two_clusters(std::mt19937& rng, int per, int dim, double ratio, std::vector<int>& label) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix pts(static_cast<std::size_t>(2 * per), static_cast<std::size_t>(dim));
  label.assign(static_cast<std::size_t>(2 * per), 0);
  // Intra-cluster spread ~ sqrt(2 dim); offset the second cluster by ratio times that.
  const double shift = ratio * std::sqrt(2.0 * dim);
  for (int i = 0; i < 2 * per; ++i) {
    const auto r = static_cast<std::size_t>(i);
    label[r] = i >= per;
    for (int k = 0; k < dim; ++k) pts(r, static_cast<std::size_t>(k)) = g(rng) + (k == 0 && i >= per ? shift : 0.0);
  }
  return pts;
}

}  // namespace

// ---------------------------------------------------------------- HOG

TEST_CASE("HOG of a constant patch is all zeros") {
  const IntensitySlice s(64, 64, -100);
  const HogDescriptor h = hog_at(s, {32, 32});
  CHECK(std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("HOG of a vertical step edge peaks in the horizontal-gradient bin") {
  IntensitySlice s(64, 64, 0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 32; ++x) s(x, y) = -1000;
  const auto hist = hog_cell_histograms(s, {32, 32});
  // Middle column of cells straddles the edge; gradient points to +x, angle 0.
  for (int cy = 0; cy < 3; ++cy) {
    const double* h = hist.data() + (cy * 3 + 1) * kHogSignedBins;
    CHECK(std::max_element(h, h + kHogSignedBins) - h == 0);
    CHECK(h[0] > 0.0);
  }
  const HogDescriptor d = hog_at(s, {32, 32});
  const double* cell = d.data() + hog_cell_offset(1, 1);
  CHECK(std::max_element(cell, cell + kHogSignedBins) - cell == 0);
  CHECK(std::max_element(cell + kHogSignedBins, cell + kHogSignedBins + kHogUnsignedBins) - cell == kHogSignedBins);
}

TEST_CASE("HOG unsigned bins are invariant to a 180-degree rotation") {
  std::mt19937 rng(31);
  const IntensitySlice s = random_slice(rng, 64);
  IntensitySlice r(64, 64, 0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) r(x, y) = s(63 - x, 63 - y);
  const HogDescriptor a = hog_at(s, {32, 32});
  const HogDescriptor b = hog_at(r, {32, 32});
  for (int cy = 0; cy < 3; ++cy)
    for (int cx = 0; cx < 3; ++cx) {
      const double* ua = a.data() + hog_cell_offset(cx, cy) + kHogSignedBins;
      const double* ub = b.data() + hog_cell_offset(2 - cx, 2 - cy) + kHogSignedBins;
      for (int k = 0; k < kHogUnsignedBins; ++k) CHECK(ua[k] == doctest::Approx(ub[k]).epsilon(1e-9));
    }
}

TEST_CASE("HOG is deterministic and bounded") {
  std::mt19937 rng(2);
  const IntensitySlice s = random_slice(rng, 80);
  const HogDescriptor a = hog_at(s, {40.3, 39.8});
  CHECK(a == hog_at(s, {40.3, 39.8}));
  for (int c = 0; c < 9; ++c) {
    double sq = 0.0;
    for (int k = 0; k < kHogPerCell; ++k) sq += a[static_cast<std::size_t>(c * kHogPerCell + k)] * a[static_cast<std::size_t>(c * kHogPerCell + k)];
    CHECK(sq <= 1.0 + 1e-12);
  }
  // Patches partly off the slice use edge replication.
  CHECK_NOTHROW(hog_at(s, {1, 78}));
}

// ---------------------------------------------------------------- NCD

TEST_CASE("correlation distance") {
  std::mt19937 rng(41);
  std::normal_distribution<double> g;
  std::vector<HogDescriptor> f(12);
  for (auto& h : f)
    for (auto& v : h) v = g(rng);
  HogDescriptor neg = f[0];
  for (auto& v : neg) v = -v;
  f.push_back(neg);
  f.push_back(HogDescriptor{});  // constant

  const Matrix d = pairwise_ncd(f);
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(d(i, i) == 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::vector<double> a(f[i].begin(), f[i].end()), b(f[j].begin(), f[j].end());
      CHECK(d(i, j) == doctest::Approx(oracle::ncd(a, b)).epsilon(1e-12));
      CHECK(d(i, j) == d(j, i));
    }
  }
  CHECK(d(0, n - 2) == doctest::Approx(2.0));
  CHECK(d(n - 1, 3) == 1.0);

  SUBCASE("invariant to positive affine maps of each vector") {
    std::vector<HogDescriptor> t = f;
    for (std::size_t i = 0; i < t.size(); ++i)
      for (auto& v : t[i]) v = (1.0 + static_cast<double>(i)) * v + 3.0;
    const Matrix e = pairwise_ncd(t);
    for (std::size_t k = 0; k < e.data().size(); ++k) CHECK(e.data()[k] == doctest::Approx(d.data()[k]).epsilon(1e-9));
  }
  CHECK_THROWS(pairwise_ncd(std::vector<HogDescriptor>(1)));
}

// ---------------------------------------------------------------- t-SNE

TEST_CASE("automatic perplexity") {
  CHECK(auto_perplexity(4) == 1.0);
  CHECK(auto_perplexity(100) == 30.0);
  CHECK(auto_perplexity(61) == 20.0);
  CHECK_THROWS(auto_perplexity(3));
}

TEST_CASE("affinities are symmetric and sum to one") {
  std::mt19937 rng(12);
  std::vector<int> label;
  const Matrix d = euclidean(two_clusters(rng, 20, 5, 3.0, label));
  const Matrix p = tsne_affinities(d, 10.0);
  double s = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    CHECK(p(i, i) == 0.0);
    for (std::size_t j = 0; j < p.cols(); ++j) {
      CHECK(p(i, j) == doctest::Approx(p(j, i)));
      s += p(i, j);
    }
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("four identical points: uniform affinities, small KL") {
  const Matrix d(4, 4, 0.0);
  const Matrix p = tsne_affinities(d, 1.0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) CHECK(p(i, j) == doctest::Approx(1.0 / 12.0));
  const Embedding2D e = tsne_embed(d, {});
  // Four points cannot be equidistant in the plane. A large square is the best
  // layout: q = 1/10 on sides and 1/20 on diagonals, KL = (2/3) ln(5/6) + (1/3) ln(5/3).
  const double square = (2.0 / 3.0) * std::log(5.0 / 6.0) + (1.0 / 3.0) * std::log(5.0 / 3.0);
  CHECK(e.kl_final() < square + 1e-3);
}

TEST_CASE("two separated clusters embed apart, KL drops, runs repeat exactly") {
  std::mt19937 rng(77);
  std::vector<int> label;
  const Matrix d = euclidean(two_clusters(rng, 30, 8, 10.0, label));
  TsneParams params;
  params.seed = 5;
  const Embedding2D e = tsne_embed(d, params);
  CHECK(e.kl_trace.size() == static_cast<std::size_t>(params.iters) + 1);
  CHECK(e.kl_final() < e.kl_initial());
  CHECK(e.perplexity == 19.0);
  CHECK(silhouette(e.points, label) > 0.8);

  const Embedding2D again = tsne_embed(d, params);
  CHECK(again.points == e.points);
  CHECK(again.kl_trace == e.kl_trace);
  params.seed = 6;
  CHECK(tsne_embed(d, params).points != e.points);
}

// ---------------------------------------------------------------- LoOP

TEST_CASE("LoOP matches the naive oracle") {
  std::mt19937 rng(91);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 25 + static_cast<int>(rng() % 120);
    Matrix pts(static_cast<std::size_t>(n), 2);
    std::vector<std::pair<double, double>> pv;
    for (int i = 0; i < n; ++i) {
      const double s = i % 10 == 0 ? 6.0 : 1.0;
      pts(static_cast<std::size_t>(i), 0) = s * g(rng);
      pts(static_cast<std::size_t>(i), 1) = s * g(rng);
      pv.push_back({pts(static_cast<std::size_t>(i), 0), pts(static_cast<std::size_t>(i), 1)});
    }
    const LoopResult r = loop_scores(pts, 20, 3.0);
    const auto o = oracle::loop(pv, 20, 3.0);
    CHECK(r.nplof == doctest::Approx(o.nplof).epsilon(1e-12));
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(r.pi[static_cast<std::size_t>(i)] - o.pi[static_cast<std::size_t>(i)]) <= 1e-9);
      CHECK(std::abs(r.plof[static_cast<std::size_t>(i)] - o.plof[static_cast<std::size_t>(i)]) <= 1e-9);
    }
    const LoopResult rd = loop_scores_from_distances(euclidean(pts), 20, 3.0);
    for (int i = 0; i < n; ++i) CHECK(std::abs(rd.pi[static_cast<std::size_t>(i)] - r.pi[static_cast<std::size_t>(i)]) <= 1e-9);
  }
}

TEST_CASE("LoOP: one far point in a dense cluster") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix pts(61, 2);
  for (std::size_t i = 0; i < 60; ++i) {
    pts(i, 0) = u(rng);
    pts(i, 1) = u(rng);
  }
  pts(60, 0) = 10.0 * std::sqrt(2.0);
  pts(60, 1) = 0.5;
  const LoopResult r = loop_scores(pts, 20, 3.0);
  CHECK(r.pi[60] > 0.95);
  for (std::size_t i = 0; i < 60; ++i) CHECK(r.pi[i] < 0.3);
}

TEST_CASE("LoOP: grid interior is inlying") {
  Matrix pts(400, 2);
  for (std::size_t i = 0; i < 400; ++i) {
    pts(i, 0) = static_cast<double>(i % 20);
    pts(i, 1) = static_cast<double>(i / 20);
  }
  const LoopResult r = loop_scores(pts, 20, 3.0);
  for (std::size_t i = 0; i < 400; ++i) {
    const auto x = i % 20, y = i / 20;
    if (x >= 4 && x < 16 && y >= 4 && y < 16) CHECK(r.pi[i] < 0.05);
  }
}

TEST_CASE("LoOP: permutation equivariance, duplicates, argument checks") {
  std::mt19937 rng(8);
  std::normal_distribution<double> g;
  Matrix pts(50, 2);
  for (auto& v : pts.data()) v = g(rng);
  // A block of exact duplicates: zero pdist, floored mean.
  for (std::size_t i = 40; i < 50; ++i) {
    pts(i, 0) = 0.25;
    pts(i, 1) = -0.5;
  }
  const LoopResult base = loop_scores(pts, 5, 3.0);
  for (double p : base.pi) CHECK(std::isfinite(p));
  for (std::size_t i = 40; i < 50; ++i) CHECK(base.pi[i] == 0.0);

  std::vector<std::size_t> perm(50);
  for (std::size_t i = 0; i < 50; ++i) perm[i] = (i * 7) % 50;
  Matrix q(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    q(i, 0) = pts(perm[i], 0);
    q(i, 1) = pts(perm[i], 1);
  }
  const LoopResult r = loop_scores(q, 5, 3.0);
  for (std::size_t i = 0; i < 50; ++i) CHECK(r.pi[i] == doctest::Approx(base.pi[perm[i]]).epsilon(1e-12));

  CHECK_THROWS(loop_scores(pts, 50, 3.0));
}

// ---------------------------------------------------------------- scoring

namespace {

struct Scene {
  IntensitySlice slice;
  CandidateBoundary candidates;
  Point2 center;
};

Scene phantom_scene(double noise) {
  PhantomParams p;
  p.wall_gaps = 0;
  p.visceral_blobs = 0;
  p.noise_sigma = noise;
  p.seed = 9;
  const Phantom ph = generate(p);
  Scene s;
  s.slice = extract_slice(ph.volume, 0);
  const auto pre = preprocess_slice(s.slice, {});
  const RayFan fan = build_ray_fan(extract_skin_contour(pre.denoised), 360);
  s.candidates = detect_transitions(fan, pre.fat);
  s.center = fan.center;
  return s;
}

}  // namespace

TEST_CASE("too few candidates for LoOP: every probability is 0") {
  const Scene s = phantom_scene(15.0);
  CandidateBoundary few;
  few.candidates.assign(s.candidates.candidates.begin(), s.candidates.candidates.begin() + 20);
  const AppearanceResult r = score_candidates(few, s.slice, {});
  CHECK(r.insufficient);
  for (const auto& c : r.scored.candidates) CHECK(c.pi == 0.0);
  CHECK(r.hogs.size() == 20);
}

TEST_CASE("tight boundary: outlier probabilities stay low") {
  // The HOG descriptors of an intact wall vary smoothly with the angle. The
  // embedding breaks that curve into arcs and a few arc ends score high, so
  // the check is on the bulk rather than the maximum.
  const Scene s = phantom_scene(15.0);
  const AppearanceResult r = score_candidates(s.candidates, s.slice, {});
  CHECK_FALSE(r.insufficient);
  double mean = 0.0;
  std::size_t high = 0;
  for (const auto& c : r.scored.candidates) {
    mean += c.pi;
    high += c.pi > 0.5;
  }
  mean /= static_cast<double>(r.scored.size());
  CHECK(mean < 0.1);
  CHECK(static_cast<double>(high) < 0.05 * static_cast<double>(r.scored.size()));
}

TEST_CASE("candidates drifted into the subcutaneous layer score as outliers") {
  Scene s = phantom_scene(15.0);
  // Push five well-separated candidates halfway back toward the skin.
  const std::vector<std::size_t> drifted{10, 80, 150, 220, 290};
  for (std::size_t i : drifted) {
    auto& c = s.candidates.candidates[i];
    c.position = 0.5 * (c.position + c.skin);
    c.distance *= 0.5;
  }
  auto top5 = [](const AppearanceResult& r) {
    std::vector<std::size_t> order(r.scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return r.scored.candidates[a].pi > r.scored.candidates[b].pi; });
    std::vector<std::size_t> top(order.begin(), order.begin() + 5);
    std::sort(top.begin(), top.end());
    return top;
  };

  SUBCASE("embedding space: every drifted candidate is above 0.5 and in the top decile") {
    const AppearanceResult r = score_candidates(s.candidates, s.slice, {});
    std::vector<double> rest;
    for (std::size_t i = 0; i < r.scored.size(); ++i) {
      if (std::find(drifted.begin(), drifted.end(), i) == drifted.end()) rest.push_back(r.scored.candidates[i].pi);
    }
    std::sort(rest.begin(), rest.end());
    const double p90 = rest[rest.size() * 9 / 10];
    for (std::size_t i : drifted) {
      CHECK(r.scored.candidates[i].pi > 0.5);
      CHECK(r.scored.candidates[i].pi > p90);
    }
  }
  SUBCASE("descriptor space: the drifted candidates are exactly the top five") {
    AppearanceParams p;
    p.space = LoopSpace::kFeatures;
    CHECK(top5(score_candidates(s.candidates, s.slice, p)) == drifted);
  }
}
