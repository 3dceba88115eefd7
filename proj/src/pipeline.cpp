#include "fatseg/pipeline.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "fatseg/errors.hpp"
#include "fatseg/evaluate.hpp"
#include "json.hpp"

namespace fatseg {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Runs one stage, turning any failure into a PipelineError tagged with z and stage.
template <class F>
auto stage(int z, const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const NoSubjectError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(z, name, e.what());
  }
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::kMadOnly: return "mad";
    case Method::kLoopOnly: return "loop";
    case Method::kFusion: return "fusion";
    case Method::kRansac: return "ransac";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::kMadOnly, Method::kLoopOnly, Method::kFusion, Method::kRansac}) {
    if (s == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + s + "' (expected mad, loop, fusion or ransac)");
}

void PipelineConfig::validate() const {
  preprocess.validate();
  if (n_rays < 8) throw ConfigError("n-rays must be >= 8");
  if (!(ray_step > 0.0)) throw ConfigError("ray-step must be positive");
  if (!(mad_threshold > 0.0)) throw ConfigError("mad-threshold must be positive");
  appearance.validate();
  if (!(fusion.w >= 0.0) || !std::isfinite(fusion.w)) throw ConfigError("crf-w must be finite and >= 0");
  if (fusion.knn < 1) throw ConfigError("crf-knn must be >= 1");
  if (!(fusion.unary.temperature > 0.0)) throw ConfigError("crf-temperature must be positive");
  if (fusion.unary.restarts < 1) throw ConfigError("kmeans restarts must be >= 1");
  if (!(loop_only_threshold > 0.0 && loop_only_threshold <= 1.0)) throw ConfigError("loop-only threshold must be in (0, 1]");
  if (!(ransac_tolerance > 0.0)) throw ConfigError("ransac tolerance must be positive");
  if (ransac_iters < 1) throw ConfigError("ransac iterations must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

std::string PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["hu_low"] = preprocess.hu_low;
  j["hu_high"] = preprocess.hu_high;
  j["disk_radius"] = preprocess.disk_radius;
  j["median_window"] = preprocess.median_window;
  j["n_rays"] = n_rays;
  j["ray_step"] = ray_step;
  j["mad_threshold"] = mad_threshold;
  j["tsne_perplexity"] = appearance.tsne.perplexity;
  j["tsne_iters"] = appearance.tsne.iters;
  j["loop_k"] = appearance.loop_k;
  j["lambda"] = appearance.lambda;
  j["loop_space"] = appearance.space == LoopSpace::kEmbedding ? "embedding" : "features";
  j["crf_w"] = fusion.w;
  j["crf_knn"] = fusion.knn;
  j["crf_radial"] = fusion.radial == RadialScale::kRobust ? "robust" : "minmax";
  j["crf_temperature"] = fusion.unary.temperature;
  j["seed"] = seed;
  return j.dump();
}

std::uint64_t slice_seed(std::uint64_t seed, int z) {
  return splitmix(seed ^ splitmix(static_cast<std::uint64_t>(z) + 1));
}

SliceStages analyze_slice(const IntensitySlice& slice, const PipelineConfig& config, int z) {
  const auto t0 = std::chrono::steady_clock::now();
  SliceStages s;
  s.z = z;
  const std::uint64_t seed = slice_seed(config.seed, z);

  s.pre = stage(z, "preprocess", [&] { return preprocess_slice(slice, config.preprocess); });
  try {
    // The closed mask gives a solid body outline; transitions are read on the
    // raw threshold mask, where thin muscle walls survive.
    s.skin = stage(z, "boundary_init", [&] { return extract_skin_contour(s.pre.denoised); });
  } catch (const NoSubjectError& e) {
    s.no_subject = true;
    s.note = "no subject";
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
  }
  if (std::abs(polygon_area(s.skin.points)) < 1.0) {
    s.no_subject = true;
    s.note = "no subject";
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
  }
  s.fan = stage(z, "boundary_init", [&] { return build_ray_fan(s.skin, config.n_rays, config.ray_step); });
  s.candidates = stage(z, "boundary_init", [&] { return detect_transitions(s.fan, s.pre.fat); });

  if (s.candidates.size() < 3) {
    s.note = "fewer than 3 boundary candidates";
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
  }

  s.mad = stage(z, "geo_outliers", [&] { return mad_scores(s.candidates, config.mad_threshold); });
  for (std::size_t i = 0; i < s.candidates.size(); ++i) s.candidates.candidates[i].phi = s.mad.phi[i];

  AppearanceParams ap = config.appearance;
  ap.tsne.seed = seed;
  s.appearance = stage(z, "app_outliers", [&] { return score_candidates(s.candidates, slice, ap); });
  s.candidates = s.appearance.scored;

  FusionParams fp = config.fusion;
  fp.unary.seed = splitmix(seed);
  fp.unary.phi_cut = config.mad_threshold;
  fp.unary.pi_cut = config.loop_only_threshold;
  s.fusion = stage(z, "crf_fusion", [&] { return fuse(s.candidates, s.appearance.hogs, fp); });
  s.candidates = s.fusion.labeled;

  if (s.candidates.size() >= 5) {
    const auto r = stage(z, "ransac", [&] {
      return ransac_ellipse(s.candidates.positions(), config.ransac_tolerance, config.ransac_iters, splitmix(seed + 1));
    });
    s.ransac_inliers = r.inliers;
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

SliceLabeling label_slice(const SliceStages& s, Method method, const PipelineConfig& config) {
  SliceLabeling out;
  const std::size_t n = s.candidates.size();
  if (!s.no_subject && n >= 3) {
    for (std::size_t i = 0; i < n; ++i) {
      const Candidate& c = s.candidates.candidates[i];
      bool keep = false;
      switch (method) {
        case Method::kMadOnly: keep = s.mad.inlier_flags[i]; break;
        case Method::kLoopOnly: keep = s.mad.inlier_flags[i] && c.pi < config.loop_only_threshold; break;
        case Method::kFusion: keep = c.label == FusionLabel::kInlier; break;
        case Method::kRansac: keep = !s.ransac_inliers.empty() && s.ransac_inliers[i]; break;
      }
      if (keep) out.hull_points.push_back(c.position);
    }
    try {
      out.hull = convex_hull(out.hull_points);
    } catch (const DegenerateHullError& e) {
      out.note = e.what();
    }
  } else {
    out.note = s.note;
  }
  out.flagged = !out.hull.has_value();
  if (out.flagged && out.note.empty()) out.note = "degenerate hull";
  out.labels = partition_slice(s.pre.fat, out.hull);
  return out;
}

std::vector<SliceStages> analyze_volume(const VolumeGrid& volume, const PipelineConfig& config) {
  config.validate();
  volume.validate();
  const int nz = volume.dims.nz;
  std::vector<SliceStages> stages(static_cast<std::size_t>(nz));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nz));
#pragma omp parallel for schedule(dynamic, 1) num_threads(config.workers)
  for (int z = 0; z < nz; ++z) {
    try {
      stages[static_cast<std::size_t>(z)] = analyze_slice(extract_slice(volume, z), config, z);
    } catch (...) {
      errors[static_cast<std::size_t>(z)] = std::current_exception();
    }
  }
  // Report the lowest failing slice so the error does not depend on scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return stages;
}

SegmentResult assemble(const VolumeGrid& volume, const std::vector<SliceStages>& stages, Method method,
                       const PipelineConfig& config) {
  SegmentResult r;
  r.mask = MaskGrid(volume.dims, volume.spacing);
  for (const auto& s : stages) {
    r.labelings.push_back(label_slice(s, method, config));
    insert_slice(r.mask, s.z, r.labelings.back().labels);
  }
  r.report = quantify(r.mask);
  r.report.parameters_json = config.to_json();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    auto& q = r.report.slices[i];
    q.flagged = r.labelings[i].flagged;
    q.note = r.labelings[i].note;
    q.seconds = stages[i].seconds;
    r.report.total_seconds += stages[i].seconds;
  }
  return r;
}

SegmentResult segment_volume(const VolumeGrid& volume, const PipelineConfig& config, Method method) {
  return assemble(volume, analyze_volume(volume, config), method, config);
}

}  // namespace fatseg
