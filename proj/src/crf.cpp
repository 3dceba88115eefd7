#include "fatseg/crf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fatseg/errors.hpp"
#include "fatseg/maxflow.hpp"

namespace fatseg {
namespace {

constexpr int kLloydIterations = 100;

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
double dist2(Point2 a, Point2 b) { return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y); }

int label_index(FusionLabel l) { return static_cast<int>(l); }

}  // namespace

void FusionGraph::validate() const {
  if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("FusionGraph: w must be finite and >= 0");
  for (const auto& u : unary) {
    if (!std::isfinite(u[0]) || !std::isfinite(u[1])) throw std::invalid_argument("FusionGraph: non-finite unary");
  }
  const int n = static_cast<int>(unary.size());
  for (const auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n || e.i == e.j) {
      throw std::invalid_argument("FusionGraph: bad edge");
    }
    if (!(e.scale > 0.0 && e.scale <= 1.0)) throw std::invalid_argument("FusionGraph: edge scale outside (0, 1]");
  }
}

double energy(const FusionGraph& g, const std::vector<FusionLabel>& labels) {
  if (labels.size() != g.size()) throw std::invalid_argument("energy: labeling size mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) e += g.unary[i][static_cast<std::size_t>(label_index(labels[i]))];
  double pair = 0.0;
  for (const auto& edge : g.edges) {
    if (labels[static_cast<std::size_t>(edge.i)] != labels[static_cast<std::size_t>(edge.j)]) pair += edge.scale;
  }
  return e + g.w * pair;
}

KMeansResult kmeans2(const std::vector<Point2>& points, int restarts, std::uint64_t seed) {
  if (points.size() < 2) throw std::invalid_argument("kmeans2: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    // Prefer distinct starting positions when the data allow it.
    for (int tries = 0; tries < 32 && points[b] == points[a]; ++tries) b = pick(rng);

    KMeansResult cur;
    cur.centroids = {points[a], points[b]};
    cur.assignment.assign(points.size(), -1);
    for (int it = 0; it < kLloydIterations; ++it) {
      bool changed = false;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const int c = dist2(points[i], cur.centroids[1]) < dist2(points[i], cur.centroids[0]) ? 1 : 0;
        if (c != cur.assignment[i]) {
          cur.assignment[i] = c;
          changed = true;
        }
      }
      std::array<Point2, 2> sum{};
      std::array<int, 2> count{};
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = static_cast<std::size_t>(cur.assignment[i]);
        sum[c] = sum[c] + points[i];
        ++count[c];
      }
      for (std::size_t c = 0; c < 2; ++c) {
        if (count[c] > 0) cur.centroids[c] = (1.0 / count[c]) * sum[c];
      }
      if (!changed) break;
    }
    cur.inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      cur.inertia += dist2(points[i], cur.centroids[static_cast<std::size_t>(cur.assignment[i])]);
    }
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

double inlier_probability(double d_inlier, double d_outlier, double temperature) {
  // exp(-d_in/T) / (exp(-d_in/T) + exp(-d_out/T)), written to avoid overflow.
  return 1.0 / (1.0 + std::exp((d_inlier - d_outlier) / temperature));
}

double neg_log_prob(double p) { return -std::log(std::max(p, kProbabilityFloor)); }

UnaryResult unary_potentials(const CandidateBoundary& candidates, const UnaryParams& params) {
  const std::size_t n = candidates.size();
  if (n == 0) throw std::invalid_argument("unary_potentials: no candidates");
  if (!(params.temperature > 0.0)) throw std::invalid_argument("unary_potentials: temperature must be positive");

  double phi_lo = std::numeric_limits<double>::infinity();
  double phi_hi = -phi_lo;
  double pi_lo = phi_lo;
  double pi_hi = -phi_lo;
  for (const auto& c : candidates.candidates) {
    phi_lo = std::min(phi_lo, c.phi);
    phi_hi = std::max(phi_hi, c.phi);
    pi_lo = std::min(pi_lo, c.pi);
    pi_hi = std::max(pi_hi, c.pi);
  }
  auto normalise = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };

  UnaryResult r;
  r.scores.reserve(n);
  for (const auto& c : candidates.candidates) {
    r.scores.push_back({normalise(c.phi, phi_lo, phi_hi), normalise(c.pi, pi_lo, pi_hi)});
  }

  const bool identical = std::all_of(r.scores.begin(), r.scores.end(), [&](Point2 p) { return p == r.scores[0]; });
  if (identical) {
    r.p_inlier.assign(n, 0.5);
  } else {
    const KMeansResult km = kmeans2(r.scores, params.restarts, params.seed);
    std::array<double, 2> mean_norm{};
    std::array<int, 2> count{};
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(km.assignment[i]);
      mean_norm[c] += std::hypot(r.scores[i].x, r.scores[i].y);
      ++count[c];
    }
    if (count[0] == 0 || count[1] == 0) {
      r.p_inlier.assign(n, 0.5);
    } else {
      mean_norm[0] /= count[0];
      mean_norm[1] /= count[1];
      const std::size_t inlier = mean_norm[1] < mean_norm[0] ? 1 : 0;
      const Point2 c_in = km.centroids[inlier];
      const Point2 c_out = km.centroids[1 - inlier];
      double phi_out = 0.0;
      double pi_out = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(km.assignment[i]) == inlier) continue;
        phi_out += candidates.candidates[i].phi;
        pi_out += candidates.candidates[i].pi;
      }
      const double m = count[1 - inlier];
      r.spurious_split = phi_out / m <= params.phi_cut && pi_out / m <= params.pi_cut;
      r.p_inlier.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Candidate& c = candidates.candidates[i];
        if (r.spurious_split) {
          // No outlier cluster: fall back to the single-cue cuts.
          r.p_inlier.push_back(c.phi <= params.phi_cut && c.pi <= params.pi_cut ? 1.0 : 0.0);
        } else {
          r.p_inlier.push_back(inlier_probability(dist(r.scores[i], c_in), dist(r.scores[i], c_out), params.temperature));
        }
      }
    }
  }
  r.theta.reserve(n);
  for (double p : r.p_inlier) r.theta.push_back({neg_log_prob(p), neg_log_prob(1.0 - p)});
  return r;
}

Matrix fusion_features(const CandidateBoundary& candidates, const std::vector<HogDescriptor>& hogs,
                       RadialScale radial) {
  const std::size_t n = candidates.size();
  if (hogs.size() != n) throw std::invalid_argument("fusion_features: descriptors not aligned with candidates");
  constexpr std::size_t kGeo = 3;
  Matrix phi(n, kHogSize + kGeo, 0.0);

  // Radial feature: (d - offset) / spread.
  double offset = 0.0;
  double spread = 0.0;
  if (n > 0 && radial == RadialScale::kMinMax) {
    double hi = -std::numeric_limits<double>::infinity();
    offset = -hi;
    for (const auto& c : candidates.candidates) {
      offset = std::min(offset, c.distance);
      hi = std::max(hi, c.distance);
    }
    spread = hi - offset;
  } else if (n > 0) {
    std::vector<double> t = candidates.distances();
    const auto mid = t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2);
    std::nth_element(t.begin(), mid, t.end());
    offset = *mid;
    for (auto& v : t) v = std::abs(v - offset);
    std::nth_element(t.begin(), mid, t.end());
    spread = *mid;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double* row = phi.row(i);
    double mass = 0.0;
    for (double v : hogs[i]) mass += v;
    if (mass > 0.0) {
      for (int k = 0; k < kHogSize; ++k) row[k] = hogs[i][static_cast<std::size_t>(k)] / mass;
    }
    const auto& c = candidates.candidates[i];
    row[kHogSize] = spread > 0.0 ? (c.distance - offset) / spread : 0.0;
    row[kHogSize + 1] = std::sin(c.angle);
    row[kHogSize + 2] = std::cos(c.angle);
  }
  return phi;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

std::vector<FusionEdge> build_edges(const Matrix& features, int k_nn) {
  if (k_nn < 1) throw std::invalid_argument("build_edges: k_nn must be >= 1");
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  Matrix dist(n, n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) dist(i, j) = l1_distance({features.row(i), d}, {features.row(j), d});
    }
  }

  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  if (n <= static_cast<std::size_t>(k_nn)) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) adj[i][j] = i != j;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> idx;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) idx.push_back(j);
      }
      std::partial_sort(idx.begin(), idx.begin() + k_nn, idx.end(), [&](std::size_t a, std::size_t b) {
        return dist(i, a) < dist(i, b) || (dist(i, a) == dist(i, b) && a < b);
      });
      for (int k = 0; k < k_nn; ++k) {
        adj[i][idx[static_cast<std::size_t>(k)]] = 1;
        adj[idx[static_cast<std::size_t>(k)]][i] = 1;
      }
    }
  }

  std::vector<FusionEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (adj[i][j]) edges.push_back({static_cast<int>(i), static_cast<int>(j), 1.0 / (1.0 + dist(i, j))});
    }
  }
  return edges;
}

double pairwise_potential(std::span<const double> phi_i, std::span<const double> phi_j, FusionLabel k_i,
                          FusionLabel k_j) {
  const double d = l1_distance(phi_i, phi_j);
  return k_i == k_j ? 0.0 : 1.0 / (1.0 + d);
}

Labeling minimize_energy(const FusionGraph& g) {
  g.validate();
  const int n = static_cast<int>(g.size());
  Labeling out;
  if (n == 0) return out;

  const int s = n;
  const int t = n + 1;
  MaxFlow flow(n + 2);
  // Source side = inlier. Cutting s->i puts i on the sink side (outlier) and
  // costs the outlier unary; cutting i->t costs the inlier unary.
  for (int i = 0; i < n; ++i) {
    const auto& u = g.unary[static_cast<std::size_t>(i)];
    const double m = std::min(u[0], u[1]);
    const double to_source = u[1] - m;
    const double to_sink = u[0] - m;
    if (to_source > 0.0) flow.add_edge(s, i, to_source);
    if (to_sink > 0.0) flow.add_edge(i, t, to_sink);
  }
  for (const auto& e : g.edges) {
    const double c = g.w * e.scale;
    if (c > 0.0) flow.add_edge(e.i, e.j, c, c);
  }
  flow.solve(s, t);

  out.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.labels[static_cast<std::size_t>(i)] = flow.source_side(i) ? FusionLabel::kInlier : FusionLabel::kOutlier;
  }
  out.energy = energy(g, out.labels);
  return out;
}

Labeling brute_force_minimize(const FusionGraph& g) {
  g.validate();
  const std::size_t n = g.size();
  if (n > 20) throw std::invalid_argument("brute_force_minimize: at most 20 nodes");
  Labeling best;
  best.energy = std::numeric_limits<double>::infinity();
  std::vector<FusionLabel> labels(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) labels[i] = (mask >> i) & 1u ? FusionLabel::kOutlier : FusionLabel::kInlier;
    const double e = energy(g, labels);
    if (e < best.energy) {
      best.energy = e;
      best.labels = labels;
    }
  }
  return best;
}

void FusionParams::validate() const {
  if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("crf-w must be finite and >= 0");
  if (knn < 1) throw ConfigError("crf-knn must be >= 1");
  if (unary.restarts < 1) throw ConfigError("k-means restarts must be >= 1");
  if (!(unary.temperature > 0.0)) throw ConfigError("unary temperature must be positive");
}

FusionResult fuse(const CandidateBoundary& scored, const std::vector<HogDescriptor>& hogs, const FusionParams& params) {
  FusionResult r;
  r.unaries = unary_potentials(scored, params.unary);
  r.graph.unary = r.unaries.theta;
  r.graph.w = params.w;
  r.graph.edges = build_edges(fusion_features(scored, hogs, params.radial), params.knn);
  r.labeling = minimize_energy(r.graph);
  r.labeled = scored;
  for (std::size_t i = 0; i < scored.size(); ++i) r.labeled.candidates[i].label = r.labeling.labels[i];
  return r;
}

}  // namespace fatseg
