#pragma once

// JSON and CSV views of reports, traces and configuration.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "crispedge/canny.hpp"
#include "crispedge/error.hpp"
#include "crispedge/metrics.hpp"
#include "crispedge/nms.hpp"
#include "crispedge/refine.hpp"

namespace crispedge {

using Json = nlohmann::json;

namespace detail {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

/// Shortest text that round-trips to the same double.
inline std::string csv_number(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

[[nodiscard]] inline Json to_json(const CannyParams& p) {
  return {{"low_frac", p.low_frac}, {"high_frac", p.high_frac}, {"blur_sigmas", p.blur_sigmas}};
}

[[nodiscard]] inline Json to_json(const NmsParams& p) {
  return {{"orient_sigma", p.orient_sigma}, {"suppress_radius", p.suppress_radius}, {"boost", p.boost}, {"margin", p.margin}};
}

[[nodiscard]] inline Json to_json(const MatchTolerance& t) {
  return {{"max_dist", t.max_dist}, {"absolute_px", detail::optional_json(t.absolute_px)}};
}

[[nodiscard]] inline Json to_json(const RefineConfig& c) {
  return {{"eta", c.eta},
          {"patch_size", c.patch_size},
          {"i_max", c.i_max},
          {"neigh_radius", c.neigh_radius},
          {"dilate_radius", c.dilate_radius},
          {"canny", to_json(c.canny)},
          {"unconfident_value", c.unconfident_value},
          {"new_edge_value", detail::optional_json(c.new_edge_value)},
          {"initial_dropout", c.initial_dropout},
          {"dropout_unit", c.dropout_unit == DropoutUnit::kPixels ? "pixels" : "segments"},
          {"dropout_seed", c.dropout_seed}};
}

[[nodiscard]] inline Json to_json(const IterationRecord& r) {
  return {{"inpaint_pixels", r.inpaint_pixels}, {"mask_pixels", r.mask_pixels},   {"n_connect", r.n_connect},
          {"patches", r.patches},               {"pixels_added", r.pixels_added}, {"endpoints", r.endpoints},
          {"unreachable_endpoints", r.unreachable_endpoints}, {"failed_patches", r.failed_patches}};
}

[[nodiscard]] inline Json to_json(const RefineTrace& t) {
  Json it = Json::array();
  for (const auto& r : t.iterations) it.push_back(to_json(r));
  return {{"iterations", it}, {"stop_reason", to_string(t.reason)}, {"failures", t.failures}};
}

[[nodiscard]] inline Json to_json(const PRPoint& p) {
  return {{"threshold", p.threshold}, {"precision", p.precision()}, {"recall", p.recall()}, {"f", p.f()},
          {"tp_pred", p.tp_pred},     {"n_pred", p.n_pred},         {"tp_gt", p.tp_gt},   {"n_gt", p.n_gt}};
}

[[nodiscard]] inline Json to_json(const BenchmarkReport& r) {
  Json pooled = Json::array();
  for (const auto& p : r.pooled) pooled.push_back(to_json(p));
  Json images = Json::array();
  for (const auto& img : r.images) {
    images.push_back({{"id", img.id},
                      {"best_f", img.best_f},
                      {"best_threshold", img.best_threshold},
                      {"crispness", detail::optional_json(img.crispness)}});
  }
  return {{"ods_f", r.ods_f},
          {"ods_threshold", r.ods_threshold},
          {"ois_f", r.ois_f},
          {"average_crispness", detail::optional_json(r.average_crispness)},
          {"skipped_zero_maps", r.skipped_zero_maps},
          {"curve", pooled},
          {"images", images}};
}

/// Pooled curve, one row per threshold; summary values repeat on every row.
[[nodiscard]] inline std::string to_csv(const BenchmarkReport& r) {
  using detail::csv_number;
  std::string out = "threshold,precision,recall,f,ods_f,ods_threshold,ois_f,average_crispness,skipped_zero_maps\n";
  const std::string ac = r.average_crispness ? csv_number(*r.average_crispness) : "";
  for (const auto& p : r.pooled) {
    out += csv_number(p.threshold) + ',' + csv_number(p.precision()) + ',' + csv_number(p.recall()) + ',' +
           csv_number(p.f()) + ',' + csv_number(r.ods_f) + ',' + csv_number(r.ods_threshold) + ',' +
           csv_number(r.ois_f) + ',' + ac + ',' + std::to_string(r.skipped_zero_maps) + '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace crispedge
