#include "terrafollow/config.hpp"

#include <sstream>
#include <stdexcept>

#include "terrafollow/io_util.hpp"
#include "terrafollow/kv.hpp"

namespace terrafollow {

std::string serialize_config(const PipelineConfig& c) {
  KvWriter w;
  w.comment("terrafollow pipeline configuration");
  w.comment("preprocessing");
  w.put("fov_phi_deg", rad2deg(c.fov_phi));
  w.put("accumulation_frames", c.accumulation_frames);
  w.put("grid_resolution", c.grid_resolution);
  w.put("frame_fail_fraction", c.frame_fail_fraction);
  w.blank();
  w.comment("ground segmentation");
  w.put("min_cell_points", c.seg.min_cell_points);
  w.put("prior_window_below", c.seg.prior_window_below);
  w.put("prior_window_above", c.seg.prior_window_above);
  w.put("seed_count", c.seg.seed_count);
  w.put("seed_margin", c.seg.seed_margin);
  w.put("plane_distance", c.seg.plane_distance);
  w.put("refine_iterations", c.seg.refine_iterations);
  w.put("uprightness_max_deg", rad2deg(c.seg.max_tilt));
  w.put("prior_height_tol", c.seg.prior_height_tol);
  w.put("height_std_max", c.seg.height_std_max);
  w.put("reseg_height_gap", c.seg.reseg_height_gap);
  w.put("reseg_min_points", c.seg.reseg_min_points);
  w.put("recall_margin", c.seg.recall_margin);
  w.put("use_prior", c.seg.use_prior);
  w.put("use_refinement", c.seg.use_refinement);
  w.blank();
  w.comment("terrain surface");
  w.put("quantile_fraction", c.quantile_fraction);
  w.put("update_tolerance", c.update_tolerance);
  w.put("degree_x", static_cast<long>(c.degree_x));
  w.put("degree_y", static_cast<long>(c.degree_y));
  w.put("h_ref", c.h_ref);
  w.blank();
  w.comment("benchmark");
  w.put("ransac_iterations", c.ransac_iterations);
  w.put("knn_k", c.knn_k);
  w.put("warmup_frames", c.warmup_frames);
  w.put("latency_queries", c.latency_queries);
  w.put("seed", c.seed);
  return w.text;
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
  KvMap kv = KvMap::parse(text, origin);
  PipelineConfig c;
  c.fov_phi = deg2rad(kv.get_double("fov_phi_deg", rad2deg(c.fov_phi)));
  c.accumulation_frames = kv.get_long("accumulation_frames", c.accumulation_frames);
  c.grid_resolution = kv.get_double("grid_resolution", c.grid_resolution);
  c.frame_fail_fraction = kv.get_double("frame_fail_fraction", c.frame_fail_fraction);

  c.seg.min_cell_points = kv.get_long("min_cell_points", c.seg.min_cell_points);
  c.seg.prior_window_below = kv.get_double("prior_window_below", c.seg.prior_window_below);
  c.seg.prior_window_above = kv.get_double("prior_window_above", c.seg.prior_window_above);
  c.seg.seed_count = kv.get_long("seed_count", c.seg.seed_count);
  c.seg.seed_margin = kv.get_double("seed_margin", c.seg.seed_margin);
  c.seg.plane_distance = kv.get_double("plane_distance", c.seg.plane_distance);
  c.seg.refine_iterations = kv.get_long("refine_iterations", c.seg.refine_iterations);
  c.seg.max_tilt = deg2rad(kv.get_double("uprightness_max_deg", rad2deg(c.seg.max_tilt)));
  c.seg.prior_height_tol = kv.get_double("prior_height_tol", c.seg.prior_height_tol);
  c.seg.height_std_max = kv.get_double("height_std_max", c.seg.height_std_max);
  c.seg.reseg_height_gap = kv.get_double("reseg_height_gap", c.seg.reseg_height_gap);
  c.seg.reseg_min_points = kv.get_long("reseg_min_points", c.seg.reseg_min_points);
  c.seg.recall_margin = kv.get_double("recall_margin", c.seg.recall_margin);
  c.seg.use_prior = kv.get_bool("use_prior", c.seg.use_prior);
  c.seg.use_refinement = kv.get_bool("use_refinement", c.seg.use_refinement);

  c.quantile_fraction = kv.get_double("quantile_fraction", c.quantile_fraction);
  c.update_tolerance = kv.get_double("update_tolerance", c.update_tolerance);
  c.degree_x = static_cast<int>(kv.get_long("degree_x", c.degree_x));
  c.degree_y = static_cast<int>(kv.get_long("degree_y", c.degree_y));
  c.h_ref = kv.get_double("h_ref", c.h_ref);

  c.ransac_iterations = kv.get_long("ransac_iterations", c.ransac_iterations);
  c.knn_k = kv.get_long("knn_k", c.knn_k);
  c.warmup_frames = kv.get_long("warmup_frames", c.warmup_frames);
  c.latency_queries = kv.get_long("latency_queries", c.latency_queries);
  c.seed = kv.get_u64("seed", c.seed);

  kv.reject_unknown();
  validate_config(c);
  return c;
}

PipelineConfig read_config_file(const std::string& path) {
  return parse_config(read_text(path), path);
}

void apply_override(PipelineConfig& cfg, const std::string& key_value) {
  PipelineConfig base = cfg;
  // Reuse the parser on a one-line document; keep everything else from base.
  size_t eq = key_value.find('=');
  if (eq == std::string::npos) {
    throw std::runtime_error("override must be key=value: " + key_value);
  }
  std::string merged = serialize_config(base);
  // Drop the existing line for this key to avoid a duplicate.
  std::string key = key_value.substr(0, eq);
  while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
  std::string out;
  std::istringstream in(merged);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " =", 0) == 0 || line.rfind(key + "=", 0) == 0) continue;
    out += line + "\n";
  }
  out += key_value + "\n";
  cfg = parse_config(out, "<override " + key + ">");
}

void validate_config(const PipelineConfig& c) {
  auto fail = [](const std::string& m) { throw std::runtime_error("config: " + m); };
  if (!(c.fov_phi > 0.0 && c.fov_phi <= kPi / 2.0)) fail("fov_phi_deg must be in (0, 90]");
  if (c.accumulation_frames < 1) fail("accumulation_frames must be >= 1");
  if (c.grid_resolution <= 0.0) fail("grid_resolution must be > 0");
  if (c.frame_fail_fraction < 0.0 || c.frame_fail_fraction > 1.0) {
    fail("frame_fail_fraction must be in [0, 1]");
  }
  if (c.seg.min_cell_points < 1) fail("min_cell_points must be >= 1");
  if (c.seg.prior_window_below <= 0 || c.seg.prior_window_above <= 0) {
    fail("prior window bounds must be > 0");
  }
  if (c.seg.seed_count < 1) fail("seed_count must be >= 1");
  if (c.seg.seed_margin <= 0) fail("seed_margin must be > 0");
  if (c.seg.plane_distance <= 0) fail("plane_distance must be > 0");
  if (c.seg.refine_iterations < 1) fail("refine_iterations must be >= 1");
  if (!(c.seg.max_tilt > 0 && c.seg.max_tilt < kPi / 2.0)) {
    fail("uprightness_max_deg must be in (0, 90)");
  }
  if (c.seg.prior_height_tol <= 0) fail("prior_height_tol must be > 0");
  if (c.seg.height_std_max <= 0) fail("height_std_max must be > 0");
  if (c.seg.reseg_height_gap <= 0) fail("reseg_height_gap must be > 0");
  if (c.seg.reseg_min_points < 1) fail("reseg_min_points must be >= 1");
  if (c.seg.recall_margin <= 0) fail("recall_margin must be > 0");
  if (!(c.quantile_fraction > 0.0 && c.quantile_fraction < 1.0)) {
    fail("quantile_fraction must be in (0, 1)");
  }
  if (c.update_tolerance <= 0) fail("update_tolerance must be > 0");
  if (c.degree_x < 0 || c.degree_y < 0 || c.degree_x > 7 || c.degree_y > 7) {
    fail("spline degrees must be in [0, 7]");
  }
  if (c.h_ref <= 0) fail("h_ref must be > 0");
  if (c.ransac_iterations < 1) fail("ransac_iterations must be >= 1");
  if (c.knn_k < 1) fail("knn_k must be >= 1");
  if (c.warmup_frames < 0) fail("warmup_frames must be >= 0");
  if (c.latency_queries < 1) fail("latency_queries must be >= 1");
}

}  // namespace terrafollow
