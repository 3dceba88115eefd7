#include <stdexcept>

#include "fatseg/appearance.hpp"
#include "fatseg/errors.hpp"

namespace fatseg {

void AppearanceParams::validate() const {
  if (loop_k < 2) throw ConfigError("loop-k must be >= 2");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (tsne.iters < 1) throw ConfigError("tsne-iters must be >= 1");
  if (tsne.perplexity < 0.0) throw ConfigError("tsne-perplexity must be >= 0 (0 = automatic)");
}

AppearanceResult score_candidates(const CandidateBoundary& candidates, const IntensitySlice& slice,
                                  const AppearanceParams& params) {
  if (candidates.empty()) throw std::invalid_argument("score_candidates: no candidates");
  AppearanceResult r;
  r.scored = candidates;
  const std::size_t n = candidates.size();

  r.hogs.resize(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) r.hogs[i] = hog_at(slice, candidates.candidates[i].position);

  if (n < static_cast<std::size_t>(params.loop_k) + 1 || n < 4) {
    r.insufficient = true;
    for (auto& c : r.scored.candidates) c.pi = 0.0;
    return r;
  }

  r.distances = pairwise_ncd(r.hogs);
  if (params.space == LoopSpace::kEmbedding) {
    r.embedding = tsne_embed(r.distances, params.tsne);
    r.loop = loop_scores(r.embedding.points, params.loop_k, params.lambda);
  } else {
    r.loop = loop_scores_from_distances(r.distances, params.loop_k, params.lambda);
  }
  for (std::size_t i = 0; i < n; ++i) r.scored.candidates[i].pi = r.loop.pi[i];
  return r;
}

}  // namespace fatseg
