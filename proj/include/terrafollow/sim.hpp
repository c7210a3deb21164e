#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terrafollow/geometry.hpp"

namespace terrafollow {

/// Parametric analytic terrain. `height(x, y)` is total and continuous:
///   flat      c
///   slope     c + a*x + b*y
///   hill      c + amplitude * sin(2*pi*x/wavelength) * sin(2*pi*y/wavelength)
///   shore     c + a * max(0, shore_x - x)   (bank west of shore_x, level water east)
///   composite c + a*x + b*y + amplitude * sin(..x..) * sin(..y..)
struct TerrainField {
  enum class Kind { Flat, Slope, Hill, Shore, Composite };
  Kind kind = Kind::Flat;
  double a = 0.0;           // slope along x (dimensionless)
  double b = 0.0;           // slope along y
  double c = 0.0;           // base height, m
  double amplitude = 0.0;   // hill amplitude, m
  double wavelength = 1.0;  // hill wavelength, m
  double shore_x = 0.0;     // waterline x for Kind::Shore, m

  static TerrainField flat(double c) { return {Kind::Flat, 0, 0, c, 0, 1, 0}; }
  static TerrainField slope(double a, double b, double c) {
    return {Kind::Slope, a, b, c, 0, 1, 0};
  }
  static TerrainField hill(double amplitude, double wavelength, double c) {
    return {Kind::Hill, 0, 0, c, amplitude, wavelength, 0};
  }
  static TerrainField shore(double bank_slope, double shore_x, double c) {
    return {Kind::Shore, bank_slope, 0, c, 0, 1, shore_x};
  }
  static TerrainField composite(double a, double b, double c, double amplitude,
                                double wavelength) {
    return {Kind::Composite, a, b, c, amplitude, wavelength, 0};
  }
};

double terrain_height(const TerrainField& field, double x, double y);

/// Non-ground interference added per frame. Vegetation returns sit above the
/// local surface, multipath returns strictly below it (water-style ghosts).
/// Multipath applies only where x >= multipath_min_x, so a shoreline scenario
/// can restrict ghosts to the water side. Ghosts come in two populations:
/// a diffuse one spread over the footprint and specular clusters, dense
/// coherent patches at a common depth the way strong reflectors echo.
struct ClutterModel {
  double vegetation_rate = 0.0;  // expected points per frame
  double vegetation_height_min = 0.2;
  double vegetation_height_max = 1.0;
  double multipath_rate = 0.0;  // expected diffuse points per frame
  double multipath_depth_min = 0.3;
  double multipath_depth_max = 1.5;
  double multipath_min_x = -1e12;
  // Persistent specular patches: fixed discs on the surface where every
  // beam hit also rings below the surface at the patch's depth. Ghost
  // density therefore follows beam density.
  double multipath_spot_density = 0.0;  // spots per m^2 of surface
  double multipath_spot_radius = 0.8;   // m
  long multipath_ghosts_per_hit = 3;    // ghosts per beam inside a spot
  // Specular echoes need near-normal incidence: diffuse ghost anchors use
  // only beams within this angle of the radar nadir.
  double multipath_max_tilt = deg2rad(90.0);
  // Calm water forward-scatters oblique beams away from the radar: a beam
  // hitting the water side survives with probability exp(-(tilt/sigma)^2).
  // Zero disables suppression.
  double water_suppression_tilt = 0.0;
  double range_noise_sigma = 0.0;  // m, along-beam Gaussian
};

struct RadarReturn {
  double timestamp = 0.0;
  EncoderAngle theta;
  Vec3 point_radar = Vec3::Zero();
  bool is_ground = false;
};

struct RadarScanFrame {
  long frame_index = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<RadarReturn> returns;
};

struct RadarModel {
  double angular_step = deg2rad(5.0);
  long beams_per_step = 8;
  double beam_cone_half_angle = deg2rad(15.0);
  double boresight_tilt = deg2rad(25.0);  // fan tilt off the radar -z axis
  double max_range = 40.0;
};

struct TrajectorySpec {
  enum class AltitudeMode { ConstantZ, ConstantAgl };
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  double speed = 2.0;  // m/s
  AltitudeMode altitude_mode = AltitudeMode::ConstantZ;
  double agl = 5.0;  // m, used by ConstantAgl
};

struct ScenarioSpec {
  TerrainField terrain;
  ClutterModel clutter;
  TrajectorySpec trajectory;
  RadarModel radar;
  RigidTransform mount;  // motor frame in the body frame
  double frame_rate = 10.0;
  double pose_rate = 400.0;
  std::uint64_t seed = 0;
};

struct Dataset {
  PoseTrack track;
  std::vector<RadarScanFrame> frames;
  ScenarioSpec spec;
};

/// Deterministic synthetic scan generation: pose track at pose_rate, frames
/// at frame_rate. Ground returns are exact ray/terrain intersections with
/// along-beam range noise; clutter is appended per ClutterModel with Poisson
/// counts. Beams that miss terrain within max_range are omitted.
Dataset generate_scenario(const ScenarioSpec& spec);

/// Dataset directory layout: poses.txt, frames/frame_%06d.txt, scenario.cfg.
void write_dataset(const std::string& dir, const Dataset& dataset);
Dataset read_dataset(const std::string& dir);

std::string serialize_scenario(const ScenarioSpec& spec);
ScenarioSpec parse_scenario(const std::string& text, const std::string& origin = "<string>");
ScenarioSpec read_scenario_file(const std::string& path);

}  // namespace terrafollow
