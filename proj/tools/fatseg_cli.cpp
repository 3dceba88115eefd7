// fatseg: SAT/VAT separation for abdominal CT volumes.
//
//   fatseg segment --input scan.hdr --output out/ [--truth truth.hdr] [--overlays]
//   fatseg phantom --output phantoms/ [--suite-seed 42] [--case 3]
//   fatseg eval --output eval/ [--suite-seed 42]
//   fatseg dump-stages --input scan.hdr --output stages/ [--slice 0]
//
// Tunables are global options. Each can also come from a FATSEG_* environment
// variable or a key=value file given with --config; the command line wins over
// the environment, which wins over the file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fatseg/errors.hpp"
#include "fatseg/evaluate.hpp"
#include "fatseg/overlay.hpp"
#include "fatseg/phantom.hpp"
#include "fatseg/pipeline.hpp"
#include "fatseg/volume_io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace fatseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::string slice_tag(int z) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "z%03d", z);
  return buf;
}

// String-valued tunables, mapped onto enums once parsing is done.
struct Choices {
  std::string loop_space = "embedding";
  std::string crf_radial = "robust";
};

void register_tunables(CLI::App& app, PipelineConfig& cfg, Choices& choices) {
  auto add = [&](const char* name, auto& field, const char* env, const char* help) {
    app.add_option(name, field, help)->envname(env)->capture_default_str();
  };
  add("--hu-low", cfg.preprocess.hu_low, "FATSEG_HU_LOW", "lower fat HU bound (inclusive)");
  add("--hu-high", cfg.preprocess.hu_high, "FATSEG_HU_HIGH", "upper fat HU bound (inclusive)");
  add("--disk-radius", cfg.preprocess.disk_radius, "FATSEG_DISK_RADIUS", "closing disk radius, px");
  add("--median-window", cfg.preprocess.median_window, "FATSEG_MEDIAN_WINDOW", "median filter window (odd)");
  add("--n-rays", cfg.n_rays, "FATSEG_N_RAYS", "rays cast from the skin contour");
  add("--ray-step", cfg.ray_step, "FATSEG_RAY_STEP", "sampling step along each ray, px");
  add("--mad-threshold", cfg.mad_threshold, "FATSEG_MAD_THRESHOLD", "geometric outlier cut on phi");
  add("--tsne-perplexity", cfg.appearance.tsne.perplexity, "FATSEG_TSNE_PERPLEXITY", "t-SNE perplexity (0 = automatic)");
  add("--tsne-iters", cfg.appearance.tsne.iters, "FATSEG_TSNE_ITERS", "t-SNE gradient sweeps");
  add("--loop-k", cfg.appearance.loop_k, "FATSEG_LOOP_K", "LoOP neighbourhood size");
  add("--lambda", cfg.appearance.lambda, "FATSEG_LAMBDA", "LoOP significance lambda");
  add("--loop-space", choices.loop_space, "FATSEG_LOOP_SPACE", "LoOP input: embedding or features");
  add("--crf-w", cfg.fusion.w, "FATSEG_CRF_W", "pairwise weight");
  add("--crf-knn", cfg.fusion.knn, "FATSEG_CRF_KNN", "neighbours per node in the fusion graph");
  add("--crf-radial", choices.crf_radial, "FATSEG_CRF_RADIAL", "skin-distance scaling in the fusion graph: robust or minmax");
  add("--crf-temperature", cfg.fusion.unary.temperature, "FATSEG_CRF_TEMPERATURE", "softmax temperature of the unaries");
  add("--loop-cut", cfg.loop_only_threshold, "FATSEG_LOOP_CUT", "outlier-probability cut of the LoOP-only ablation");
  add("--seed", cfg.seed, "FATSEG_SEED", "random seed");
  add("--workers", cfg.workers, "FATSEG_WORKERS", "slice worker threads");
}

void finish_config(PipelineConfig& cfg, const Choices& choices) {
  if (choices.crf_radial == "robust") {
    cfg.fusion.radial = RadialScale::kRobust;
  } else if (choices.crf_radial == "minmax") {
    cfg.fusion.radial = RadialScale::kMinMax;
  } else {
    throw ConfigError("crf-radial must be 'robust' or 'minmax'");
  }
  const std::string& loop_space = choices.loop_space;
  if (loop_space == "embedding") {
    cfg.appearance.space = LoopSpace::kEmbedding;
  } else if (loop_space == "features") {
    cfg.appearance.space = LoopSpace::kFeatures;
  } else {
    throw ConfigError("loop-space must be 'embedding' or 'features'");
  }
  cfg.validate();
}

void write_overlays(const VolumeGrid& volume, const SegmentResult& seg, const std::vector<SliceStages>& stages,
                    const fs::path& dir) {
  ensure_dir(dir);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const int z = stages[i].z;
    emit_overlay(extract_slice(volume, z), seg.labelings[i].labels, seg.labelings[i].hull_points,
                 dir / ("overlay_" + slice_tag(z) + ".ppm"));
  }
}

void dump_slice(const SliceStages& s, const SliceLabeling& lab, const fs::path& dir) {
  const std::string tag = slice_tag(s.z);
  std::ostringstream c;
  c << "ray,x,y,distance,angle,phi,pi,mad_inlier,p_inlier,label,on_hull_input\n";
  std::vector<bool> used(s.candidates.size(), false);
  for (std::size_t i = 0; i < s.candidates.size(); ++i) {
    const Candidate& k = s.candidates.candidates[i];
    const bool mad_in = i < s.mad.inlier_flags.size() && s.mad.inlier_flags[i];
    const double p_in = i < s.fusion.unaries.p_inlier.size() ? s.fusion.unaries.p_inlier[i] : 1.0;
    used[i] = k.label == FusionLabel::kInlier;
    c << k.ray << ',' << k.position.x << ',' << k.position.y << ',' << k.distance << ',' << k.angle << ',' << k.phi
      << ',' << k.pi << ',' << mad_in << ',' << p_in << ',' << (k.label == FusionLabel::kInlier ? "inlier" : "outlier")
      << ',' << used[i] << '\n';
  }
  write_text(dir / ("candidates_" + tag + ".csv"), c.str());

  std::ostringstream sk;
  sk << "x,y\n";
  for (const auto& p : s.skin.points) sk << p.x << ',' << p.y << '\n';
  write_text(dir / ("skin_" + tag + ".csv"), sk.str());

  if (s.appearance.embedding.points.rows() > 0) {
    std::ostringstream e;
    e << "ray,u,v,pi\n";
    for (std::size_t i = 0; i < s.candidates.size(); ++i) {
      e << s.candidates.candidates[i].ray << ',' << s.appearance.embedding.points(i, 0) << ','
        << s.appearance.embedding.points(i, 1) << ',' << s.candidates.candidates[i].pi << '\n';
    }
    write_text(dir / ("embedding_" + tag + ".csv"), e.str());
    std::ostringstream kl;
    kl << "sweep,kl\n";
    for (std::size_t i = 0; i < s.appearance.embedding.kl_trace.size(); ++i) {
      kl << i << ',' << s.appearance.embedding.kl_trace[i] << '\n';
    }
    write_text(dir / ("kl_" + tag + ".csv"), kl.str());
  }

  std::ostringstream g;
  g << "i,j,scale\n";
  for (const auto& e : s.fusion.graph.edges) g << e.i << ',' << e.j << ',' << e.scale << '\n';
  write_text(dir / ("graph_" + tag + ".csv"), g.str());

  std::ostringstream h;
  h << "x,y\n";
  if (lab.hull) {
    for (const auto& p : lab.hull->vertices) h << p.x << ',' << p.y << '\n';
  }
  write_text(dir / ("hull_" + tag + ".csv"), h.str());
}

nlohmann::ordered_json evaluation_json(const MaskGrid& pred, const MaskGrid& truth) {
  if (!(pred.dims == truth.dims)) throw ConfigError("truth mask dimensions do not match the input volume");
  nlohmann::ordered_json j;
  j["sat_dsc"] = dice(pred, truth, Label::kSat);
  j["vat_dsc"] = dice(pred, truth, Label::kVat);
  const QuantReport tq = quantify(truth);
  j["truth_sat_ml"] = tq.sat_ml;
  j["truth_vat_ml"] = tq.vat_ml;
  j["slices"] = nlohmann::ordered_json::array();
  for (int z = 0; z < pred.dims.nz; ++z) {
    const auto a = extract_slice(pred, z);
    const auto b = extract_slice(truth, z);
    j["slices"].push_back({{"z", z}, {"sat_dsc", dice(a, b, Label::kSat)}, {"vat_dsc", dice(a, b, Label::kVat)}});
  }
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"Subcutaneous / visceral fat separation for abdominal CT"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with default option values");

  PipelineConfig cfg;
  Choices choices;
  register_tunables(app, cfg, choices);

  // segment
  auto* seg = app.add_subcommand("segment", "segment a volume and report SAT/VAT volumes");
  std::string seg_in, seg_out, seg_truth, seg_method = "fusion";
  bool seg_overlays = false;
  bool seg_dump = false;
  seg->add_option("-i,--input", seg_in, "volume header (.hdr)")->required();
  seg->add_option("-o,--output", seg_out, "output directory")->required();
  seg->add_option("--truth", seg_truth, "ground-truth mask header; adds DSC to the report");
  seg->add_option("--method", seg_method, "mad, loop, fusion or ransac")->capture_default_str();
  seg->add_flag("--overlays", seg_overlays, "write one PPM overlay per slice");
  seg->add_flag("--dump-stages", seg_dump, "write per-slice stage CSVs");

  // phantom
  auto* ph = app.add_subcommand("phantom", "write synthetic phantoms with ground truth");
  std::string ph_out;
  std::uint64_t ph_seed = 42;
  int ph_case = -1;
  ph->add_option("-o,--output", ph_out, "output directory")->required();
  ph->add_option("--suite-seed", ph_seed, "battery seed")->capture_default_str();
  ph->add_option("--case", ph_case, "write only this battery case (0-19)");

  // eval
  auto* ev = app.add_subcommand("eval", "run the four-method comparison on the phantom battery");
  std::string ev_out;
  std::uint64_t ev_seed = 42;
  ev->add_option("-o,--output", ev_out, "output directory")->required();
  ev->add_option("--suite-seed", ev_seed, "battery seed")->capture_default_str();

  // dump-stages
  auto* ds = app.add_subcommand("dump-stages", "write every intermediate stage of selected slices");
  std::string ds_in, ds_out;
  int ds_slice = -1;
  ds->add_option("-i,--input", ds_in, "volume header (.hdr)")->required();
  ds->add_option("-o,--output", ds_out, "output directory")->required();
  ds->add_option("--slice", ds_slice, "slice index (default: all)");

  // Tunables belong to the top-level app but may follow the subcommand name.
  for (auto* sub : {seg, ph, ev, ds}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  finish_config(cfg, choices);

  if (*seg) {
    const Method method = parse_method(seg_method);
    const VolumeGrid volume = load_volume(seg_in);
    std::optional<MaskGrid> truth;
    if (!seg_truth.empty()) truth = load_mask(seg_truth);
    const fs::path out = seg_out;
    ensure_dir(out);

    const auto stages = analyze_volume(volume, cfg);
    const SegmentResult result = assemble(volume, stages, method, cfg);
    save_mask(result.mask, out / "mask.hdr");

    auto report = nlohmann::ordered_json::parse(to_json(result.report));
    report["method"] = method_name(method);
    if (truth) report["evaluation"] = evaluation_json(result.mask, *truth);
    write_text(out / "report.json", report.dump(2) + "\n");

    nlohmann::ordered_json timings;
    timings["total_seconds"] = result.report.total_seconds;
    timings["slices"] = nlohmann::ordered_json::array();
    for (const auto& q : result.report.slices) timings["slices"].push_back({{"z", q.z}, {"seconds", q.seconds}});
    write_text(out / "timings.json", timings.dump(2) + "\n");

    if (seg_overlays) write_overlays(volume, result, stages, out / "overlays");
    if (seg_dump) {
      ensure_dir(out / "stages");
      for (std::size_t i = 0; i < stages.size(); ++i) dump_slice(stages[i], result.labelings[i], out / "stages");
    }
    std::printf("SAT %.3f ml  VAT %.3f ml  total fat %.3f ml  (%zu slices, %.2f s)\n", result.report.sat_ml,
                result.report.vat_ml, result.report.total_fat_ml, result.report.slices.size(),
                result.report.total_seconds);
    return kExitOk;
  }

  if (*ph) {
    const fs::path out = ph_out;
    ensure_dir(out);
    const auto params = suite_params(ph_seed);
    if (ph_case >= static_cast<int>(params.size())) throw ConfigError("--case must be below " + std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (ph_case >= 0 && static_cast<int>(i) != ph_case) continue;
      const Phantom p = generate(params[i]);
      char stem[32];
      std::snprintf(stem, sizeof stem, "case_%02zu", i);
      save_volume(p.volume, out / (std::string(stem) + "_volume.hdr"));
      save_mask(p.truth, out / (std::string(stem) + "_truth.hdr"));
    }
    return kExitOk;
  }

  if (*ev) {
    const fs::path out = ev_out;
    ensure_dir(out);
    const AblationResult r = ablation_run(suite(ev_seed), cfg);
    const std::string table = format_table(r.rows);
    write_text(out / "table.txt", table);
    write_text(out / "table.json", to_json(r) + "\n");
    std::fputs(table.c_str(), stdout);
    return kExitOk;
  }

  if (*ds) {
    const VolumeGrid volume = load_volume(ds_in);
    if (ds_slice >= volume.dims.nz) throw ConfigError("--slice out of range");
    const fs::path out = ds_out;
    ensure_dir(out);
    for (int z = 0; z < volume.dims.nz; ++z) {
      if (ds_slice >= 0 && z != ds_slice) continue;
      const IntensitySlice slice = extract_slice(volume, z);
      const SliceStages s = analyze_slice(slice, cfg, z);
      const SliceLabeling lab = label_slice(s, Method::kFusion, cfg);
      dump_slice(s, lab, out);
      emit_overlay(slice, lab.labels, lab.hull_points, out / ("overlay_" + slice_tag(z) + ".ppm"));
    }
    return kExitOk;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const IoError& e) {
    std::fprintf(stderr, "fatseg: I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "fatseg: configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const PipelineError& e) {
    std::fprintf(stderr, "fatseg: pipeline error: %s\n", e.what());
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatseg: error: %s\n", e.what());
    return kExitPipeline;
  }
}
