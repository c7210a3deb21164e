#pragma once

#include <cstdint>
#include <string>

#include "terrafollow/segmentation.hpp"

namespace terrafollow {

/// Every tunable of the perception pipeline and benchmark harness, with the
/// defaults used throughout. Serialized as `key = value` lines; parsing
/// rejects unknown keys and a parse -> emit -> parse round trip is identity.
struct PipelineConfig {
  // preprocessing
  double fov_phi = deg2rad(60.0);     // downward cone half-angle
  long accumulation_frames = 5;       // temporal window K
  double grid_resolution = 1.0;       // cell size s, m
  double frame_fail_fraction = 0.1;   // registration failure tolerance

  SegParams seg;

  // terrain model
  double quantile_fraction = 0.2;  // control-height lower quantile
  double update_tolerance = 0.1;   // conservative update threshold, m
  int degree_x = 3;
  int degree_y = 3;
  double h_ref = 3.0;  // desired above-ground height, m

  // benchmark harness
  long ransac_iterations = 50;
  long knn_k = 4;
  long warmup_frames = 10;       // frames excluded from metrics and latency
  long latency_queries = 100000; // per terrain model
  std::uint64_t seed = 42;

  bool operator==(const PipelineConfig&) const = default;
};

std::string serialize_config(const PipelineConfig& cfg);
PipelineConfig parse_config(const std::string& text, const std::string& origin = "<string>");
PipelineConfig read_config_file(const std::string& path);

/// Applies one `key=value` override on top of an existing config (CLI
/// flags take precedence over the file).
void apply_override(PipelineConfig& cfg, const std::string& key_value);

void validate_config(const PipelineConfig& cfg);

}  // namespace terrafollow
