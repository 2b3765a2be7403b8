#pragma once

// Dataset-level commands: manifest ingestion, batch refinement, benchmark
// evaluation, upscale fusion, the label-noise study, and single-file
// utilities. Entries run concurrently; every output path is entry-owned.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "crispedge/canny.hpp"
#include "crispedge/elastic.hpp"
#include "crispedge/error.hpp"
#include "crispedge/image.hpp"
#include "crispedge/image_io.hpp"
#include "crispedge/inpaint.hpp"
#include "crispedge/metrics.hpp"
#include "crispedge/nms.hpp"
#include "crispedge/parallel.hpp"
#include "crispedge/process.hpp"
#include "crispedge/refine.hpp"
#include "crispedge/serialize.hpp"
#include "crispedge/synthetic.hpp"

namespace crispedge {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::string id;
  fs::path image;
  std::vector<fs::path> labels;
  std::optional<fs::path> prediction;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

/// Parses {"entries": [{"id", "image", "labels": [...], "prediction"?}]}.
/// Relative paths resolve against `base`. Files are not opened here.
[[nodiscard]] inline DatasetManifest parse_manifest(const Json& j, const fs::path& base, bool require_labels = true) {
  DatasetManifest m;
  try {
    std::unordered_set<std::string> ids;
    for (const Json& e : j.at("entries")) {
      ManifestEntry entry;
      entry.id = e.at("id").get<std::string>();
      if (entry.id.empty()) throw InvalidArgument("manifest: empty id");
      if (fs::path(entry.id).is_absolute() || entry.id.find("..") != std::string::npos) {
        throw InvalidArgument("manifest: id '" + entry.id + "' must be a relative name");
      }
      if (!ids.insert(entry.id).second) throw InvalidArgument("manifest: duplicate id '" + entry.id + "'");
      entry.image = base / e.at("image").get<std::string>();
      if (e.contains("labels")) {
        for (const Json& l : e.at("labels")) entry.labels.push_back(base / l.get<std::string>());
      }
      if (require_labels && entry.labels.empty()) throw InvalidArgument("manifest: entry '" + entry.id + "' has no labels");
      if (e.contains("prediction") && !e.at("prediction").is_null()) {
        entry.prediction = base / e.at("prediction").get<std::string>();
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const Json::exception& ex) {
    throw InvalidArgument(std::string("manifest: ") + ex.what());
  }
  return m;
}

[[nodiscard]] inline DatasetManifest load_manifest(const fs::path& path, bool require_labels = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& ex) {
    throw InvalidArgument("manifest " + path.string() + ": " + ex.what());
  }
  return parse_manifest(j, path.parent_path(), require_labels);
}

[[nodiscard]] inline Json to_json(const DatasetManifest& m, const fs::path& base) {
  Json entries = Json::array();
  for (const auto& e : m.entries) {
    Json labels = Json::array();
    for (const auto& l : e.labels) labels.push_back(l.lexically_relative(base).generic_string());
    Json je = {{"id", e.id}, {"image", e.image.lexically_relative(base).generic_string()}, {"labels", labels}};
    if (e.prediction) je["prediction"] = e.prediction->lexically_relative(base).generic_string();
    entries.push_back(je);
  }
  return {{"entries", entries}};
}

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
  RefineConfig refine;
  NmsParams nms;
  MatchTolerance tolerance;
  std::vector<double> thresholds = default_thresholds();
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  /// Refine each annotator map separately and average the results instead
  /// of refining the averaged label.
  bool per_annotator = false;
  /// Empty selects the built-in geodesic completer.
  std::string inpaint_command;
  std::chrono::milliseconds inpaint_timeout{60000};
};

/// Parallelism is omitted so outputs do not depend on it.
[[nodiscard]] inline Json to_json(const RunConfig& c) {
  return {{"refine", to_json(c.refine)},
          {"nms", to_json(c.nms)},
          {"tolerance", to_json(c.tolerance)},
          {"thresholds", c.thresholds},
          {"seed", c.seed},
          {"per_annotator", c.per_annotator},
          {"inpaint_command", c.inpaint_command},
          {"inpaint_timeout_ms", c.inpaint_timeout.count()}};
}

[[nodiscard]] inline InpaintBackend make_backend(const RunConfig& c) {
  if (c.inpaint_command.empty()) return geodesic_backend();
  return external_backend(c.inpaint_command, c.inpaint_timeout);
}

/// 0 when every entry succeeded, 1 when none did, 2 otherwise.
[[nodiscard]] inline int exit_code_for(std::size_t succeeded, std::size_t total) {
  if (succeeded == total) return 0;
  return succeeded == 0 ? 1 : 2;
}

struct EntryStatus {
  std::string id;
  bool ok = false;
  std::string error;
};

namespace detail {

inline fs::path entry_path(const fs::path& root, const std::string& id, const std::string& suffix) {
  return root / fs::path(id + suffix);
}

inline void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

inline void require_shape(const GrayImage& image, const EdgeMap& m, const fs::path& path) {
  if (!m.same_shape(image)) {
    throw ShapeMismatch(path.string() + " is " + std::to_string(m.width()) + "x" + std::to_string(m.height()) +
                        ", image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
}

inline std::vector<EdgeMap> load_labels(const ManifestEntry& e, const GrayImage& image) {
  std::vector<EdgeMap> labels;
  for (const auto& p : e.labels) {
    labels.push_back(load_edge(p));
    require_shape(image, labels.back(), p);
  }
  return labels;
}

inline EdgeMap mean_of(const std::vector<EdgeMap>& maps) {
  EdgeMap out(maps.front().width(), maps.front().height());
  for (const auto& m : maps) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[i];
  }
  for (double& v : out.values()) v /= static_cast<double>(maps.size());
  return out;
}

inline EdgeMap union_edges(const EdgeMap& a, const EdgeMap& b) {
  EdgeMap out(a.width(), a.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

inline Json status_json(const EntryStatus& s) {
  Json j = {{"id", s.id}, {"status", s.ok ? "ok" : "error"}};
  if (!s.ok) j["error"] = s.error;
  return j;
}

/// Per-item seed independent of processing order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// refine

struct RefineSummary {
  std::vector<EntryStatus> entries;
  std::size_t succeeded = 0;
  int exit_code = 0;
};

/// Refines one entry's labels and returns the result without writing files.
[[nodiscard]] inline RefineResult refine_entry(const ManifestEntry& e, const RunConfig& cfg, const InpaintBackend& backend) {
  const GrayImage image = load_gray(e.image);
  const std::vector<EdgeMap> labels = detail::load_labels(e, image);
  if (labels.empty()) throw InvalidArgument("entry '" + e.id + "' has no labels");
  if (!cfg.per_annotator) return refine(image, detail::mean_of(labels), cfg.refine, backend);

  std::vector<EdgeMap> refined;
  RefineResult combined;
  combined.trace.reason = StopReason::kConverged;
  for (const EdgeMap& l : labels) {
    RefineResult r = refine(image, l, cfg.refine, backend);
    refined.push_back(r.label);
    combined.trace.iterations.insert(combined.trace.iterations.end(), r.trace.iterations.begin(), r.trace.iterations.end());
    combined.trace.failures.insert(combined.trace.failures.end(), r.trace.failures.begin(), r.trace.failures.end());
    if (r.trace.reason == StopReason::kIterationLimit) combined.trace.reason = StopReason::kIterationLimit;
    combined.canny = std::move(r.canny);
    combined.edge = combined.edge.size() == 0 ? r.edge : detail::union_edges(combined.edge, r.edge);
  }
  combined.label = detail::mean_of(refined);
  return combined;
}

/// Writes <out>/<id>.png (16-bit refined label), <out>/<id>.trace.json and
/// <out>/summary.json.
[[nodiscard]] inline RefineSummary cmd_refine(const DatasetManifest& m, const RunConfig& cfg, const fs::path& out_root) {
  cfg.refine.validate();
  if (m.entries.empty()) throw InvalidArgument("refine: empty manifest");
  const InpaintBackend backend = make_backend(cfg);
  RefineSummary s;
  s.entries.resize(m.entries.size());
  parallel_for(m.entries.size(), cfg.parallelism, [&](std::size_t i) {
    const ManifestEntry& e = m.entries[i];
    EntryStatus& st = s.entries[i];
    st.id = e.id;
    try {
      const RefineResult r = refine_entry(e, cfg, backend);
      const fs::path png = detail::entry_path(out_root, e.id, ".png");
      detail::ensure_parent(png);
      save_image(r.label, png, BitDepth::k16);
      write_json(detail::entry_path(out_root, e.id, ".trace.json"), to_json(r.trace));
      st.ok = true;
    } catch (const std::exception& ex) {
      st.error = ex.what();
    }
  });
  s.succeeded = static_cast<std::size_t>(std::count_if(s.entries.begin(), s.entries.end(), [](const auto& e) { return e.ok; }));
  s.exit_code = exit_code_for(s.succeeded, s.entries.size());

  Json entries = Json::array();
  for (const auto& e : s.entries) entries.push_back(detail::status_json(e));
  write_json(out_root / "summary.json", {{"config", to_json(cfg)},
                                         {"entries", entries},
                                         {"succeeded", s.succeeded},
                                         {"failed", s.entries.size() - s.succeeded}});
  return s;
}

// ---------------------------------------------------------------------------
// eval

struct EvalSummary {
  BenchmarkReport report;
  std::vector<EntryStatus> entries;
  int exit_code = 0;
};

/// Benchmarks manifest predictions against their labels and writes
/// report.json and report.csv. Entries that fail to load are excluded and
/// listed in the report.
[[nodiscard]] inline EvalSummary cmd_eval(const DatasetManifest& m, const RunConfig& cfg, bool apply_nms,
                                          const fs::path& out_root) {
  if (m.entries.empty()) throw InvalidArgument("eval: empty manifest");
  std::string missing;
  for (const auto& e : m.entries) {
    if (!e.prediction) missing += (missing.empty() ? "" : ", ") + e.id;
  }
  if (!missing.empty()) throw InvalidArgument("eval: entries without a prediction: " + missing);

  EvalSummary s;
  s.entries.resize(m.entries.size());
  std::vector<std::optional<BenchmarkItem>> loaded(m.entries.size());
  parallel_for(m.entries.size(), cfg.parallelism, [&](std::size_t i) {
    const ManifestEntry& e = m.entries[i];
    s.entries[i].id = e.id;
    try {
      const GrayImage image = load_gray(e.image);
      BenchmarkItem item{e.id, load_edge(*e.prediction), detail::load_labels(e, image)};
      detail::require_shape(image, item.prediction, *e.prediction);
      loaded[i] = std::move(item);
      s.entries[i].ok = true;
    } catch (const std::exception& ex) {
      s.entries[i].error = ex.what();
    }
  });
  std::vector<BenchmarkItem> items;
  for (auto& it : loaded) {
    if (it) items.push_back(std::move(*it));
  }
  if (items.empty()) {
    s.exit_code = 1;
  } else {
    BenchmarkOptions opt{cfg.thresholds, cfg.tolerance, apply_nms, cfg.nms, cfg.parallelism};
    s.report = benchmark(items, opt);
    s.exit_code = exit_code_for(items.size(), m.entries.size());
  }

  Json j = items.empty() ? Json::object() : to_json(s.report);
  Json failed = Json::array();
  for (const auto& e : s.entries) {
    if (!e.ok) failed.push_back(detail::status_json(e));
  }
  j["failed"] = failed;
  j["apply_nms"] = apply_nms;
  j["config"] = to_json(cfg);
  write_json(out_root / "report.json", j);
  if (!items.empty()) write_text(out_root / "report.csv", to_csv(s.report));
  return s;
}

// ---------------------------------------------------------------------------
// upscale-fuse

using Detector = std::function<EdgeMap(const GrayImage&)>;

/// Gradient magnitude of the blurred image, scaled so its maximum is 1.
[[nodiscard]] inline EdgeMap soft_edges(const GrayImage& img, double sigma = 1.0) {
  const Field mag = sobel_gradients(gaussian_blur(img, sigma)).magnitude;
  const double peak = *std::max_element(mag.values().begin(), mag.values().end());
  EdgeMap e(img.width(), img.height());
  if (peak > 0.0) {
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = mag[i] / peak;
  }
  return e;
}

[[nodiscard]] inline Detector builtin_detector(double sigma = 1.0) {
  return [sigma](const GrayImage& img) { return soft_edges(img, sigma); };
}

/// argv = [image.png, out.pgm]; the output must match the input size.
[[nodiscard]] inline Detector external_detector(std::string command, std::chrono::milliseconds timeout) {
  return [command = std::move(command), timeout](const GrayImage& img) {
    TempDir dir;
    const fs::path in = dir.path() / "image.png";
    const fs::path out = dir.path() / "out.pgm";
    save_image(img, in);
    const ProcessResult pr = run_process(command, {in.string(), out.string()}, timeout, dir.path() / "log.txt");
    if (pr.timed_out) throw ExternalError(ExternalError::Kind::kTimeout, "detector timed out: " + command);
    if (pr.exit_code != 0) {
      throw ExternalError(ExternalError::Kind::kNonzeroExit,
                          "detector exited with " + std::to_string(pr.exit_code) + ": " + pr.output);
    }
    EdgeMap e;
    try {
      e = load_edge(out);
    } catch (const Error& ex) {
      throw ExternalError(ExternalError::Kind::kMalformedOutput, std::string("detector output unreadable: ") + ex.what());
    }
    if (!e.same_shape(img)) throw ExternalError(ExternalError::Kind::kMalformedOutput, "detector output has the wrong size");
    return e;
  };
}

struct FusionResult {
  EdgeMap original;
  /// Detection on the upscaled image, resized back.
  EdgeMap upscaled;
  EdgeMap fused;
};

[[nodiscard]] inline FusionResult upscale_fuse(const GrayImage& img, const Detector& detect, double factor = 1.5) {
  if (!(factor > 0.0)) throw InvalidArgument("upscale factor must be > 0");
  const int uw = std::max(1, static_cast<int>(std::lround(img.width() * factor)));
  const int uh = std::max(1, static_cast<int>(std::lround(img.height() * factor)));
  FusionResult r;
  r.original = detect(img);
  if (!r.original.same_shape(img)) throw ShapeMismatch("detector changed the image size");
  const EdgeMap up = detect(resize_bilinear(img, uw, uh));
  if (up.width() != uw || up.height() != uh) throw ShapeMismatch("detector changed the upscaled image size");
  r.upscaled = resize_bilinear(up, img.width(), img.height());
  r.fused = hadamard(r.original, r.upscaled);
  return r;
}

// ---------------------------------------------------------------------------
// noise-study

struct NoiseStudyOptions {
  std::vector<double> alphas = {0.0, 10.0, 20.0, 40.0};
  int annotators = 5;
  std::uint64_t seed = 0;
  double smooth_sigma = 8.0;
  FieldScaling scaling = FieldScaling::kSimard;
  std::vector<double> mix_fractions = {0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0};
  bool refine_labels = true;
};

struct MixPoint {
  double fraction = 0.0;
  std::optional<double> average_crispness;
};

struct NoiseRow {
  double alpha = 0.0;
  std::optional<double> label_ac;
  /// AC of the confident part of the refined labels.
  std::optional<double> refined_ac;
  std::size_t skipped_zero_maps = 0;
  std::vector<MixPoint> mix;
};

struct NoiseStudyReport {
  std::vector<std::string> ids;
  std::vector<NoiseRow> rows;
};

inline constexpr const char* kNoiseStudyNote =
    "Label-level study: crispness of simulated annotator labels per elastic strength, of the same labels after "
    "refinement, and of corpora mixing clean and warped labels. Per-mix detector training is not performed.";

namespace detail {

inline std::optional<double> mean_crispness(const std::vector<EdgeMap>& maps, const NmsParams& p, std::size_t* skipped) {
  double total = 0.0;
  std::size_t used = 0;
  for (const auto& m : maps) {
    if (sum(m) > 0.0) {
      total += crispness(m, p);
      ++used;
    } else if (skipped) {
      ++*skipped;
    }
  }
  if (used == 0) return std::nullopt;
  return total / static_cast<double>(used);
}

inline EdgeMap confident_part(const EdgeMap& label, double eta) {
  EdgeMap out(label.width(), label.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = label[i] >= eta ? label[i] : 0.0;
  return out;
}

}  // namespace detail

/// Clean labels are the over-detected Canny maps of the images. Image i
/// uses annotator seeds mix_seed(seed, i) + k for every alpha. In a mix at
/// fraction f, the first round(f * N) images of a seeded permutation keep
/// clean labels.
[[nodiscard]] inline NoiseStudyReport noise_study(const std::vector<std::pair<std::string, GrayImage>>& images,
                                                  const NoiseStudyOptions& opt, const RunConfig& cfg) {
  if (images.empty()) throw InvalidArgument("noise study: no images");
  if (opt.annotators < 1) throw InvalidArgument("noise study: annotator count must be >= 1");
  for (double f : opt.mix_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("noise study: mix fractions must be in [0,1]");
  }
  const std::size_t n = images.size();
  const InpaintBackend backend = make_backend(cfg);

  std::vector<BinaryEdgeMap> clean(n);
  parallel_for(n, cfg.parallelism, [&](std::size_t i) { clean[i] = overdetect(images[i].second, cfg.refine.canny); });
  std::vector<EdgeMap> clean_maps;
  for (const auto& c : clean) clean_maps.push_back(to_edge_map(c));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(opt.seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  NoiseStudyReport rep;
  for (const auto& [id, img] : images) rep.ids.push_back(id);
  for (double alpha : opt.alphas) {
    NoiseRow row;
    row.alpha = alpha;
    std::vector<EdgeMap> noisy(n);
    std::vector<EdgeMap> refined(n);
    parallel_for(n, cfg.parallelism, [&](std::size_t i) {
      noisy[i] = simulate_annotators(clean[i], alpha, opt.annotators, detail::mix_seed(opt.seed, i), opt.smooth_sigma,
                                     opt.scaling);
      if (opt.refine_labels) {
        refined[i] = detail::confident_part(refine(images[i].second, noisy[i], cfg.refine, backend).label, cfg.refine.eta);
      }
    });
    row.label_ac = detail::mean_crispness(noisy, cfg.nms, &row.skipped_zero_maps);
    if (opt.refine_labels) row.refined_ac = detail::mean_crispness(refined, cfg.nms, nullptr);
    for (double f : opt.mix_fractions) {
      const auto keep = static_cast<std::size_t>(std::lround(f * static_cast<double>(n)));
      std::vector<EdgeMap> mixed = noisy;
      for (std::size_t k = 0; k < keep; ++k) mixed[order[k]] = clean_maps[order[k]];
      row.mix.push_back({f, detail::mean_crispness(mixed, cfg.nms, nullptr)});
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

[[nodiscard]] inline Json to_json(const NoiseStudyReport& r, const NoiseStudyOptions& opt, const RunConfig& cfg) {
  Json alphas = Json::array();
  Json label = Json::array();
  Json refined = Json::array();
  Json mix = Json::array();
  for (const auto& row : r.rows) {
    alphas.push_back(row.alpha);
    label.push_back(detail::optional_json(row.label_ac));
    refined.push_back(detail::optional_json(row.refined_ac));
    Json fr = Json::array();
    Json ac = Json::array();
    for (const auto& p : row.mix) {
      fr.push_back(p.fraction);
      ac.push_back(detail::optional_json(p.average_crispness));
    }
    mix.push_back({{"alpha", row.alpha}, {"fraction", fr}, {"average_crispness", ac}});
  }
  return {{"note", kNoiseStudyNote},
          {"ids", r.ids},
          {"alpha", alphas},
          {"label_ac", label},
          {"refined_ac", refined},
          {"mix", mix},
          {"options",
           {{"alphas", opt.alphas},
            {"annotators", opt.annotators},
            {"seed", opt.seed},
            {"smooth_sigma", opt.smooth_sigma},
            {"scaling", opt.scaling == FieldScaling::kPeak ? "peak" : "simard"},
            {"mix_fractions", opt.mix_fractions}}},
          {"config", to_json(cfg)}};
}

/// Long format: series (label, refined, mix), alpha, fraction, average_crispness.
[[nodiscard]] inline std::string to_csv(const NoiseStudyReport& r) {
  using detail::csv_number;
  auto cell = [](const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); };
  std::string out = "# " + std::string(kNoiseStudyNote) + "\nseries,alpha,fraction,average_crispness\n";
  for (const auto& row : r.rows) {
    out += "label," + csv_number(row.alpha) + ",," + cell(row.label_ac) + '\n';
    if (row.refined_ac) out += "refined," + csv_number(row.alpha) + ",," + cell(row.refined_ac) + '\n';
    for (const auto& p : row.mix) out += "mix," + csv_number(row.alpha) + ',' + csv_number(p.fraction) + ',' + cell(p.average_crispness) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-file utilities

inline void cmd_canny(const fs::path& in, const fs::path& out, const CannyParams& p = {}) {
  save_image(overdetect(load_gray(in), p), out);
}

inline void cmd_nms(const fs::path& in, const fs::path& out, const NmsParams& p = {}) {
  save_image(edge_nms(load_edge(in), p), out, BitDepth::k16);
}

[[nodiscard]] inline double cmd_crispness(const fs::path& in, const NmsParams& p = {}) { return crispness(load_edge(in), p); }

// ---------------------------------------------------------------------------
// Synthetic corpora

/// Warped-square entries: image, per-annotator labels, and the clean outline
/// (clean/<id>.png, outside the manifest).
[[nodiscard]] inline DatasetManifest write_square_corpus(const fs::path& dir, int count, std::uint64_t seed,
                                                         const synthetic::WarpedSquareParams& p = {}) {
  DatasetManifest m;
  fs::create_directories(dir / "clean");
  for (int s = 0; s < count; ++s) {
    const auto c = synthetic::warped_square(seed + 10 * static_cast<std::uint64_t>(s), p);
    ManifestEntry e;
    e.id = "square_" + std::to_string(s);
    e.image = dir / (e.id + ".png");
    save_image(c.image, e.image);
    save_image(c.clean, dir / "clean" / (e.id + ".png"));
    for (std::size_t k = 0; k < c.annotators.size(); ++k) {
      e.labels.push_back(dir / (e.id + "_a" + std::to_string(k) + ".png"));
      save_image(c.annotators[k], e.labels.back());
    }
    m.entries.push_back(std::move(e));
  }
  write_json(dir / "manifest.json", to_json(m, dir));
  return m;
}

/// Random-shape entries with a thin outline label and a soft prediction.
[[nodiscard]] inline DatasetManifest write_shapes_corpus(const fs::path& dir, int count, std::uint64_t seed, int size = 96) {
  DatasetManifest m;
  fs::create_directories(dir);
  for (int s = 0; s < count; ++s) {
    const GrayImage img = synthetic::shapes_scene(size, size, detail::mix_seed(seed, static_cast<std::uint64_t>(s)));
    ManifestEntry e;
    e.id = "shapes_" + std::to_string(s);
    e.image = dir / (e.id + ".png");
    e.labels.push_back(dir / (e.id + "_label.png"));
    e.prediction = dir / (e.id + "_pred.png");
    save_image(img, e.image);
    save_image(synthetic::clean_outline(img), e.labels.back());
    save_image(soft_edges(img, 2.0), *e.prediction, BitDepth::k16);
    m.entries.push_back(std::move(e));
  }
  write_json(dir / "manifest.json", to_json(m, dir));
  return m;
}

}  // namespace crispedge
