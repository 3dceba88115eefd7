#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fatseg/appearance.hpp"
#include "fatseg/kernels.hpp"

namespace fatseg {
namespace {

constexpr double kEntropyTol = 1e-10;
constexpr int kBisectionSteps = 200;
constexpr double kMinAffinity = 1e-12;
constexpr double kMinGain = 0.01;

// Conditional distribution p_{j|i} for one row; returns its entropy (nats).
double row_distribution(const double* d2, std::size_t n, std::size_t i, double beta, double* out) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) dmin = std::min(dmin, d2[j]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = (j == i) ? 0.0 : std::exp(-beta * (d2[j] - dmin));
    sum += out[j];
  }
  double h = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] /= sum;
    if (out[j] > 0.0) h -= out[j] * std::log(out[j]);
  }
  return h;
}

}  // namespace

double auto_perplexity(std::size_t n) {
  if (n < 4) throw std::invalid_argument("t-SNE needs at least 4 points");
  return std::min(30.0, std::floor(static_cast<double>(n - 1) / 3.0));
}

Matrix tsne_affinities(const Matrix& distances, double perplexity) {
  const std::size_t n = distances.rows();
  if (distances.cols() != n) throw std::invalid_argument("tsne_affinities: distance matrix must be square");
  const double target = std::log(perplexity);

  Matrix cond(n, n, 0.0);
#pragma omp parallel
  {
    std::vector<double> d2(n);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d2[j] = distances(i, j) * distances(i, j);
      double beta = 1.0;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (int step = 0; step < kBisectionSteps; ++step) {
        const double h = row_distribution(d2.data(), n, i, beta, cond.row(i));
        const double diff = h - target;
        if (std::abs(diff) < kEntropyTol) break;
        if (diff > 0.0) {
          lo = beta;
          beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
        } else {
          hi = beta;
          beta = std::isinf(lo) ? beta / 2.0 : 0.5 * (beta + lo);
        }
      }
      row_distribution(d2.data(), n, i, beta, cond.row(i));
    }
  }

  Matrix p(n, n, 0.0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      p(i, j) = std::max((cond(i, j) + cond(j, i)) * scale, kMinAffinity);
    }
  }
  return p;
}

Embedding2D tsne_embed(const Matrix& distances, const TsneParams& params) {
  const std::size_t n = distances.rows();
  if (n < 4) throw std::invalid_argument("tsne_embed: need at least 4 points");
  if (distances.cols() != n) throw std::invalid_argument("tsne_embed: distance matrix must be square");
  for (double v : distances.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("tsne_embed: non-finite distance");
  }
  const double perplexity = params.perplexity > 0.0 ? params.perplexity : auto_perplexity(n);
  if (perplexity >= static_cast<double>(n)) throw std::invalid_argument("tsne_embed: perplexity must be < n");
  if (params.iters < 0) throw std::invalid_argument("tsne_embed: negative iteration count");

  const Matrix p = tsne_affinities(distances, perplexity);

  Embedding2D emb;
  emb.perplexity = perplexity;
  emb.points = Matrix(n, 2);
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, params.init_sigma);
  for (double& v : emb.points.data()) v = normal(rng);

  Matrix& y = emb.points;
  Matrix update(n, 2, 0.0);
  Matrix gains(n, 2, 1.0);
  Matrix grad;
  emb.kl_trace.reserve(static_cast<std::size_t>(params.iters) + 1);
  double p_log_p = 0.0;
  for (double v : p.data()) {
    if (v > 0.0) p_log_p += v * std::log(v);
  }

  for (int it = 0; it < params.iters; ++it) {
    const double exaggeration = it < params.exaggeration_iters ? params.exaggeration : 1.0;
    const double momentum = it < params.momentum_switch ? params.momentum_initial : params.momentum_final;
    // The pass that produces this sweep's gradient also yields KL at the current layout.
    const auto terms = kernels::tsne_gradient_kl(p, kMinAffinity, p_log_p, y, exaggeration, grad);
    emb.kl_trace.push_back(terms.kl);

    for (std::size_t k = 0; k < y.data().size(); ++k) {
      double& g = gains.data()[k];
      const double gr = grad.data()[k];
      double& up = update.data()[k];
      g = ((gr > 0.0) != (up > 0.0)) ? g + 0.2 : g * 0.8;
      g = std::max(g, kMinGain);
      up = momentum * up - params.learning_rate * g * gr;
      y.data()[k] += up;
    }
    double m0 = 0.0;
    double m1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m0 += y(i, 0);
      m1 += y(i, 1);
    }
    m0 /= static_cast<double>(n);
    m1 /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) -= m0;
      y(i, 1) -= m1;
    }
  }
  emb.kl_trace.push_back(kernels::tsne_kl(p, y));
  return emb;
}

}  // namespace fatseg
