// crispedge: command-line front end for label refinement and edge evaluation.
//
// Exit status: 0 success, 1 failure, 2 partial failure (some manifest
// entries failed; see the written summary). Temporary files go under
// $CRISPEDGE_TMPDIR when set.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crispedge/pipeline.hpp"

namespace ce = crispedge;

namespace {

void add_refine_flags(CLI::App* cmd, ce::RunConfig& cfg, long long& timeout_ms) {
  auto& r = cfg.refine;
  cmd->add_option("--eta", r.eta, "Confidence threshold on label values")->capture_default_str();
  cmd->add_option("--patch-size", r.patch_size, "Inpainting patch side")->capture_default_str();
  cmd->add_option("--i-max", r.i_max, "Maximum refinement rounds")->capture_default_str();
  cmd->add_option("--neigh-radius", r.neigh_radius, "Chebyshev radius of the edge-nearby test")->capture_default_str();
  cmd->add_option("--dilate-radius", r.dilate_radius, "Disk radius growing inpainting pixels into the mask")
      ->capture_default_str();
  cmd->add_option("--canny-low", r.canny.low_frac, "Low hysteresis fraction")->capture_default_str();
  cmd->add_option("--canny-high", r.canny.high_frac, "High hysteresis fraction")->capture_default_str();
  cmd->add_option("--canny-sigmas", r.canny.blur_sigmas, "Blur sigmas fused by over-detection")->capture_default_str();
  cmd->add_option("--unconfident-value", r.unconfident_value, "Value of demoted label pixels")->capture_default_str();
  cmd->add_option("--new-edge-value", r.new_edge_value, "Value of refined-edge pixels absent from the label");
  cmd->add_option("--dropout", r.initial_dropout, "Fraction of initial-edge pixels removed before iterating")
      ->capture_default_str();
  cmd->add_option("--dropout-unit", r.dropout_unit, "pixels or segments")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, ce::DropoutUnit>{{"pixels", ce::DropoutUnit::kPixels}, {"segments", ce::DropoutUnit::kSegments}}));
  cmd->add_option("--dropout-seed", r.dropout_seed, "Seed of the dropout draw")->capture_default_str();
  cmd->add_option("--inpaint-cmd", cfg.inpaint_command,
                  "External inpainter; receives edge.pgm gray.pgm mask.pgm out.pgm (default: built-in completer)");
  cmd->add_option("--inpaint-timeout-ms", timeout_ms, "Per-patch timeout of the external inpainter")->capture_default_str();
  cmd->add_flag("--per-annotator", cfg.per_annotator, "Refine each annotator map separately, then average");
}

void add_nms_flags(CLI::App* cmd, ce::NmsParams& p) {
  cmd->add_option("--nms-orient-sigma", p.orient_sigma, "Blur before orientation estimation")->capture_default_str();
  cmd->add_option("--nms-radius", p.suppress_radius, "Suppression distance along the normal")->capture_default_str();
  cmd->add_option("--nms-boost", p.boost, "Center multiplier before comparison")->capture_default_str();
  cmd->add_option("--nms-margin", p.margin, "Border attenuation width")->capture_default_str();
}

void add_parallelism(CLI::App* cmd, ce::RunConfig& cfg) {
  cmd->add_option("-j,--parallelism", cfg.parallelism, "Maximum concurrent entries")->capture_default_str();
}

void print_failures(const std::vector<ce::EntryStatus>& entries) {
  for (const auto& e : entries) {
    if (!e.ok) std::cerr << "error: " << e.id << ": " << e.error << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crisp edge label refinement and evaluation"};
  app.require_subcommand(1);

  ce::RunConfig cfg;
  long long timeout_ms = cfg.inpaint_timeout.count();
  std::string manifest;
  std::string out;
  std::string in;
  int code = 0;

  auto* refine = app.add_subcommand("refine", "Refine the labels of every manifest entry");
  refine->add_option("-m,--manifest", manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  refine->add_option("-o,--out", out, "Output root")->required();
  add_refine_flags(refine, cfg, timeout_ms);
  add_parallelism(refine, cfg);

  bool apply_nms = false;
  double tolerance_px = 0.0;
  auto* eval = app.add_subcommand("eval", "Benchmark manifest predictions (ODS, OIS, AC)");
  eval->add_option("-m,--manifest", manifest, "Dataset manifest with predictions")->required()->check(CLI::ExistingFile);
  eval->add_option("-o,--out", out, "Output directory for report.json and report.csv")->required();
  eval->add_flag("--nms", apply_nms, "Thin predictions before thresholding");
  eval->add_option("--max-dist", cfg.tolerance.max_dist, "Match radius as a fraction of the diagonal")->capture_default_str();
  eval->add_option("--tolerance-px", tolerance_px, "Absolute match radius in pixels (overrides --max-dist)");
  add_nms_flags(eval, cfg.nms);
  add_parallelism(eval, cfg);

  std::string detector;
  double factor = 1.5;
  auto* fuse = app.add_subcommand("upscale-fuse", "Fuse detections at the original and an upscaled resolution");
  fuse->add_option("-i,--image", in, "Input image")->required()->check(CLI::ExistingFile);
  fuse->add_option("-o,--out", out, "Fused edge map")->required();
  fuse->add_option("--detector", detector, "External detector; receives image.png out.pgm (default: built-in soft detector)");
  fuse->add_option("--factor", factor, "Upscaling factor")->capture_default_str();
  fuse->add_option("--timeout-ms", timeout_ms, "Detector timeout")->capture_default_str();

  ce::NoiseStudyOptions study;
  int synthetic_count = 0;
  std::string scaling = "simard";
  bool no_refine = false;
  auto* noise = app.add_subcommand("noise-study", "Crispness of simulated annotator labels versus elastic strength");
  auto* noise_manifest = noise->add_option("-m,--manifest", manifest, "Images to study (labels ignored)")->check(CLI::ExistingFile);
  noise->add_option("--synthetic", synthetic_count, "Study N generated shape images instead of a manifest")
      ->excludes(noise_manifest);
  noise->add_option("-o,--out", out, "Output directory for study.json and study.csv")->required();
  noise->add_option("--alphas", study.alphas, "Elastic strengths")->capture_default_str();
  noise->add_option("-k,--annotators", study.annotators, "Simulated annotators per label")->capture_default_str();
  noise->add_option("--seed", study.seed, "Seed of every random draw")->required();
  noise->add_option("--smooth-sigma", study.smooth_sigma, "Field smoothing")->capture_default_str();
  noise->add_option("--scaling", scaling, "Field scaling: simard or peak")
      ->check(CLI::IsMember({"simard", "peak"}))
      ->capture_default_str();
  noise->add_option("--mix", study.mix_fractions, "Clean-label fractions")->capture_default_str();
  noise->add_flag("--no-refine", no_refine, "Skip refinement of the noisy labels");
  add_refine_flags(noise, cfg, timeout_ms);
  add_nms_flags(noise, cfg.nms);
  add_parallelism(noise, cfg);

  ce::CannyParams canny_params;
  auto* canny = app.add_subcommand("canny", "Over-detected Canny map of an image");
  canny->add_option("-i,--in", in, "Input image")->required()->check(CLI::ExistingFile);
  canny->add_option("-o,--out", out, "Output binary map")->required();
  canny->add_option("--low", canny_params.low_frac, "Low hysteresis fraction")->capture_default_str();
  canny->add_option("--high", canny_params.high_frac, "High hysteresis fraction")->capture_default_str();
  canny->add_option("--sigmas", canny_params.blur_sigmas, "Blur sigmas")->capture_default_str();

  auto* nms = app.add_subcommand("nms", "Thin a soft edge map");
  nms->add_option("-i,--in", in, "Input edge map")->required()->check(CLI::ExistingFile);
  nms->add_option("-o,--out", out, "Output edge map (16-bit)")->required();
  add_nms_flags(nms, cfg.nms);

  auto* crisp = app.add_subcommand("crispness", "Print the crispness of an edge map");
  crisp->add_option("-i,--in", in, "Input edge map")->required()->check(CLI::ExistingFile);
  add_nms_flags(crisp, cfg.nms);

  std::string kind;
  int count = 20;
  std::uint64_t seed = 0;
  auto* synth = app.add_subcommand("synth", "Write a generated corpus and its manifest");
  synth->add_option("kind", kind, "square (warped-square labels) or shapes (labels and predictions)")
      ->required()
      ->check(CLI::IsMember({"square", "shapes"}));
  synth->add_option("-o,--out", out, "Output directory")->required();
  synth->add_option("-n,--count", count, "Number of entries")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "Corpus seed")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.inpaint_timeout = std::chrono::milliseconds(timeout_ms);
    if (*refine) {
      const auto s = ce::cmd_refine(ce::load_manifest(manifest), cfg, out);
      print_failures(s.entries);
      std::cout << s.succeeded << '/' << s.entries.size() << " entries refined\n";
      code = s.exit_code;
    } else if (*eval) {
      if (tolerance_px > 0.0) cfg.tolerance.absolute_px = tolerance_px;
      const auto s = ce::cmd_eval(ce::load_manifest(manifest), cfg, apply_nms, out);
      print_failures(s.entries);
      if (s.exit_code != 1) {
        std::printf("ODS %.4f (t=%.2f)  OIS %.4f", s.report.ods_f, s.report.ods_threshold, s.report.ois_f);
        if (s.report.average_crispness) std::printf("  AC %.4f", *s.report.average_crispness);
        std::printf("\n");
      }
      code = s.exit_code;
    } else if (*fuse) {
      const auto det = detector.empty() ? ce::builtin_detector()
                                        : ce::external_detector(detector, std::chrono::milliseconds(timeout_ms));
      const auto r = ce::upscale_fuse(ce::load_gray(in), det, factor);
      ce::save_image(r.fused, out, ce::BitDepth::k16);
    } else if (*noise) {
      std::vector<std::pair<std::string, ce::GrayImage>> images;
      if (synthetic_count > 0) {
        for (int i = 0; i < synthetic_count; ++i) {
          images.emplace_back("shapes_" + std::to_string(i),
                              ce::synthetic::shapes_scene(96, 96, ce::detail::mix_seed(study.seed, static_cast<std::uint64_t>(i))));
        }
      } else if (!manifest.empty()) {
        for (const auto& e : ce::load_manifest(manifest, false).entries) images.emplace_back(e.id, ce::load_gray(e.image));
      } else {
        throw ce::InvalidArgument("noise-study needs --manifest or --synthetic");
      }
      study.scaling = scaling == "peak" ? ce::FieldScaling::kPeak : ce::FieldScaling::kSimard;
      study.refine_labels = !no_refine;
      const auto rep = ce::noise_study(images, study, cfg);
      ce::write_json(std::filesystem::path(out) / "study.json", ce::to_json(rep, study, cfg));
      ce::write_text(std::filesystem::path(out) / "study.csv", ce::to_csv(rep));
      for (const auto& row : rep.rows) {
        std::printf("alpha %-6g label AC %s\n", row.alpha,
                    row.label_ac ? std::to_string(*row.label_ac).c_str() : "undefined");
      }
    } else if (*canny) {
      ce::cmd_canny(in, out, canny_params);
    } else if (*nms) {
      ce::cmd_nms(in, out, cfg.nms);
    } else if (*crisp) {
      std::printf("%.6f\n", ce::cmd_crispness(in, cfg.nms));
    } else if (*synth) {
      const auto m = kind == "square" ? ce::write_square_corpus(out, count, seed) : ce::write_shapes_corpus(out, count, seed);
      std::cout << "wrote " << m.entries.size() << " entries to " << out << "/manifest.json\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return code;
}
