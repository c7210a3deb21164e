#include "terrafollow/sim.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "terrafollow/io_util.hpp"
#include "terrafollow/kv.hpp"
#include "terrafollow/rng.hpp"

namespace terrafollow {

double terrain_height(const TerrainField& f, double x, double y) {
  switch (f.kind) {
    case TerrainField::Kind::Flat:
      return f.c;
    case TerrainField::Kind::Slope:
      return f.c + f.a * x + f.b * y;
    case TerrainField::Kind::Hill:
      return f.c + f.amplitude * std::sin(2.0 * kPi * x / f.wavelength) *
                       std::sin(2.0 * kPi * y / f.wavelength);
    case TerrainField::Kind::Shore:
      return f.c + f.a * std::max(0.0, f.shore_x - x);
    case TerrainField::Kind::Composite:
      return f.c + f.a * x + f.b * y +
             f.amplitude * std::sin(2.0 * kPi * x / f.wavelength) *
                 std::sin(2.0 * kPi * y / f.wavelength);
  }
  return f.c;
}

namespace {

bool terrain_is_affine(const TerrainField& f) {
  return f.kind == TerrainField::Kind::Flat || f.kind == TerrainField::Kind::Slope ||
         (f.kind == TerrainField::Kind::Composite && f.amplitude == 0.0);
}

/// Range along the ray to the terrain surface, or a negative value when the
/// beam misses within max_range. Affine fields are solved in closed form;
/// everything else is marched and refined by bisection.
double intersect_terrain(const TerrainField& f, const Vec3& origin, const Vec3& dir,
                         double max_range) {
  auto above = [&](double r) {
    Vec3 p = origin + r * dir;
    return p.z() - terrain_height(f, p.x(), p.y());
  };
  if (above(0.0) <= 0.0) return -1.0;  // sensor at or below the surface

  if (terrain_is_affine(f)) {
    // o_z + r d_z = a (o_x + r d_x) + b (o_y + r d_y) + c
    double a = f.a, b = f.b;
    if (f.kind == TerrainField::Kind::Flat) a = b = 0.0;
    double denom = dir.z() - a * dir.x() - b * dir.y();
    if (denom >= 0.0) return -1.0;  // pointing away from the surface
    double r = (a * origin.x() + b * origin.y() + f.c - origin.z()) / denom;
    return (r > 0.0 && r <= max_range) ? r : -1.0;
  }

  // Sphere-trace: the clearance changes by at most (1 + grad_bound) per
  // meter of ray, so stepping clearance/(1 + grad_bound) never skips the
  // surface. A bracketing bisection then pins the hit.
  double grad_bound = std::abs(f.a) + std::abs(f.b);
  if (f.kind == TerrainField::Kind::Hill || f.kind == TerrainField::Kind::Composite) {
    grad_bound += 2.0 * kPi * std::abs(f.amplitude) / f.wavelength;
  }
  double rate = 1.0 + grad_bound;

  double r = 0.0;
  double clearance = above(0.0);
  while (r < max_range) {
    double step = std::max(0.02, 0.9 * clearance / rate);
    double next = std::min(r + step, max_range);
    double val = above(next);
    if (val <= 0.0) {
      double lo = r, hi = next;
      for (int i = 0; i < 64 && hi - lo > 1e-13; ++i) {
        double mid = 0.5 * (lo + hi);
        if (above(mid) <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    r = next;
    clearance = val;
  }
  return -1.0;
}

Vec3 beam_direction(const RadarModel& radar, Rng& jitter) {
  // Boresight tilted off the radar -z axis in the radar x-z plane; beams
  // scatter area-uniformly inside the cone around it.
  double tilt = radar.boresight_tilt;
  Vec3 d0(std::sin(tilt), 0.0, -std::cos(tilt));
  Vec3 e1(std::cos(tilt), 0.0, std::sin(tilt));
  Vec3 e2 = Vec3::UnitY();
  double alpha = radar.beam_cone_half_angle * std::sqrt(jitter.uniform());
  double az = jitter.uniform(0.0, 2.0 * kPi);
  return std::cos(alpha) * d0 +
         std::sin(alpha) * (std::cos(az) * e1 + std::sin(az) * e2);
}

struct TrajectoryEval {
  const ScenarioSpec& spec;
  Vec3 dir_xy;
  double length;
  double heading;

  explicit TrajectoryEval(const ScenarioSpec& s) : spec(s) {
    Vec3 d = s.trajectory.end - s.trajectory.start;
    d.z() = 0.0;
    length = d.norm();
    if (length <= 0.0) throw std::invalid_argument("trajectory start and end coincide");
    dir_xy = d / length;
    heading = std::atan2(dir_xy.y(), dir_xy.x());
  }

  RigidTransform pose_at(double t) const {
    double s = std::min(t * spec.trajectory.speed, length);
    Vec3 p = spec.trajectory.start + s * dir_xy;
    if (spec.trajectory.altitude_mode == TrajectorySpec::AltitudeMode::ConstantAgl) {
      p.z() = terrain_height(spec.terrain, p.x(), p.y()) + spec.trajectory.agl;
    } else {
      p.z() = spec.trajectory.start.z();
    }
    RigidTransform pose = RigidTransform::rotation_z(heading);
    pose.translation = p;
    return pose;
  }
};

void validate_spec(const ScenarioSpec& spec) {
  if (spec.trajectory.speed <= 0.0) throw std::invalid_argument("trajectory speed must be > 0");
  double per_rev = 2.0 * kPi / spec.radar.angular_step;
  if (std::abs(per_rev - std::llround(per_rev)) > 1e-9) {
    throw std::invalid_argument("angular_step must divide 2*pi");
  }
  if (spec.radar.beams_per_step < 1) throw std::invalid_argument("beams_per_step must be >= 1");
  if (spec.clutter.vegetation_rate < 0 || spec.clutter.multipath_rate < 0 ||
      spec.clutter.range_noise_sigma < 0) {
    throw std::invalid_argument("clutter rates and noise sigma must be >= 0");
  }
  if (spec.frame_rate <= 0 || spec.pose_rate <= 0) {
    throw std::invalid_argument("frame_rate and pose_rate must be > 0");
  }
}

enum StreamTag : std::uint64_t {
  kStreamBeam = 1,
  kStreamRange = 2,
  kStreamVegetation = 3,
  kStreamMultipath = 4,
  kStreamSuppression = 5,
};

}  // namespace

Dataset generate_scenario(const ScenarioSpec& spec) {
  validate_spec(spec);
  TrajectoryEval traj(spec);

  double duration = traj.length / spec.trajectory.speed;
  long n_frames = static_cast<long>(std::floor(duration * spec.frame_rate));
  if (n_frames < 1) throw std::invalid_argument("trajectory too short for one frame");

  // Pose track covers every frame with one sample of margin at the end.
  long n_pose = static_cast<long>(std::ceil(duration * spec.pose_rate)) + 1;
  std::vector<PoseSample> poses;
  poses.reserve(n_pose);
  for (long i = 0; i < n_pose; ++i) {
    double t = static_cast<double>(i) / spec.pose_rate;
    poses.push_back({t, traj.pose_at(t)});
  }
  PoseTrack track(std::move(poses));

  Rng root(spec.seed);
  long steps_per_rev = std::llround(2.0 * kPi / spec.radar.angular_step);
  double frame_period = 1.0 / spec.frame_rate;

  // Static specular patches over the multipath-eligible surface.
  struct MirrorSpot {
    double x, y, depth;
  };
  std::vector<MirrorSpot> spots;
  if (spec.clutter.multipath_spot_density > 0.0) {
    double alt = spec.trajectory.altitude_mode == TrajectorySpec::AltitudeMode::ConstantAgl
                     ? spec.trajectory.agl
                     : spec.trajectory.start.z();
    double reach = std::tan(spec.radar.boresight_tilt + spec.radar.beam_cone_half_angle) *
                       std::abs(alt) +
                   spec.clutter.multipath_spot_radius + 2.0;
    double x_lo = std::min(spec.trajectory.start.x(), spec.trajectory.end.x()) - reach;
    double x_hi = std::max(spec.trajectory.start.x(), spec.trajectory.end.x()) + reach;
    double y_lo = std::min(spec.trajectory.start.y(), spec.trajectory.end.y()) - reach;
    double y_hi = std::max(spec.trajectory.start.y(), spec.trajectory.end.y()) + reach;
    x_lo = std::max(x_lo, spec.clutter.multipath_min_x);
    Rng sp = root.fork(kStreamMultipath, 0xA11, 0xA11);
    if (x_hi > x_lo) {
      long n = sp.poisson(spec.clutter.multipath_spot_density * (x_hi - x_lo) * (y_hi - y_lo));
      double span = spec.clutter.multipath_depth_max - spec.clutter.multipath_depth_min;
      for (long i = 0; i < n; ++i) {
        MirrorSpot spot;
        spot.x = sp.uniform(x_lo, x_hi);
        spot.y = sp.uniform(y_lo, y_hi);
        spot.depth = sp.uniform(spec.clutter.multipath_depth_min + 0.15 * span,
                                spec.clutter.multipath_depth_max - 0.15 * span);
        spots.push_back(spot);
      }
    }
  }
  double spot_r2 = spec.clutter.multipath_spot_radius * spec.clutter.multipath_spot_radius;

  std::vector<RadarScanFrame> frames;
  frames.reserve(n_frames);
  for (long fi = 0; fi < n_frames; ++fi) {
    RadarScanFrame frame;
    frame.frame_index = fi;
    frame.t_start = fi * frame_period;
    frame.t_end = (fi + 1) * frame_period;

    auto radar_pose_at = [&](long step, double* t_out, EncoderAngle* theta_out) {
      double t = frame.t_start + (step + 0.5) * frame_period / steps_per_rev;
      EncoderAngle theta = EncoderAngle::from_step_index(step, spec.radar.angular_step);
      RigidTransform world_from_radar =
          compose(track.pose_at(t), compose(spec.mount, encoder_spin(theta)));
      *t_out = t;
      *theta_out = theta;
      return world_from_radar;
    };

    // One full revolution per frame, encoder-triggered steps.
    for (long step = 0; step < steps_per_rev; ++step) {
      double t;
      EncoderAngle theta;
      RigidTransform world_from_radar = radar_pose_at(step, &t, &theta);
      for (long beam = 0; beam < spec.radar.beams_per_step; ++beam) {
        Rng jitter = root.fork(kStreamBeam, fi, step * 1024 + beam);
        Vec3 d_radar = beam_direction(spec.radar, jitter);
        Vec3 d_world = world_from_radar.rotation * d_radar;
        double range = intersect_terrain(spec.terrain, world_from_radar.translation,
                                         d_world, spec.radar.max_range);
        if (range <= 0.0) continue;
        Vec3 hit_xy = world_from_radar.translation + range * d_world;
        if (spec.clutter.water_suppression_tilt > 0.0 &&
            hit_xy.x() >= spec.clutter.multipath_min_x) {
          double tilt = std::acos(std::clamp(-d_radar.z(), -1.0, 1.0));
          double ratio = tilt / spec.clutter.water_suppression_tilt;
          double keep = std::exp(-ratio * ratio);
          Rng sup = root.fork(kStreamSuppression, fi, step * 1024 + beam);
          if (sup.uniform() >= keep) continue;
        }
        Rng noise = root.fork(kStreamRange, fi, step * 1024 + beam);
        double measured = range + noise.gaussian(0.0, spec.clutter.range_noise_sigma);
        RadarReturn ret;
        ret.timestamp = t;
        ret.theta = theta;
        ret.point_radar = measured * d_radar;
        ret.is_ground = true;
        frame.returns.push_back(ret);

        if (!spots.empty()) {
          Vec3 hit = world_from_radar.translation + range * d_world;
          if (hit.x() >= spec.clutter.multipath_min_x) {
            for (const auto& spot : spots) {
              double dx = hit.x() - spot.x, dy = hit.y() - spot.y;
              if (dx * dx + dy * dy > spot_r2) continue;
              Rng ring = root.fork(kStreamMultipath, fi, step * 1024 + beam);
              for (long gi = 0; gi < spec.clutter.multipath_ghosts_per_hit; ++gi) {
                double depth = std::clamp(spot.depth + ring.gaussian(0.0, 0.05),
                                          spec.clutter.multipath_depth_min,
                                          spec.clutter.multipath_depth_max);
                Vec3 gxy = hit + Vec3(ring.gaussian(0.0, 0.1), ring.gaussian(0.0, 0.1), 0.0);
                double surface = terrain_height(spec.terrain, gxy.x(), gxy.y());
                Vec3 gw(gxy.x(), gxy.y(), surface - depth);
                RadarReturn ghost;
                ghost.timestamp = t;
                ghost.theta = theta;
                ghost.point_radar = world_from_radar.rotation.transpose() *
                                    (gw - world_from_radar.translation);
                ghost.is_ground = false;
                frame.returns.push_back(ghost);
              }
              break;
            }
          }
        }
      }
    }

    // Vegetation: anchored on a random beam's footprint, lifted above ground.
    Rng veg = root.fork(kStreamVegetation, fi);
    long n_veg = veg.poisson(spec.clutter.vegetation_rate);
    for (long i = 0; i < n_veg; ++i) {
      long step = static_cast<long>(veg.below(steps_per_rev));
      double t;
      EncoderAngle theta;
      RigidTransform world_from_radar = radar_pose_at(step, &t, &theta);
      Vec3 d_radar = beam_direction(spec.radar, veg);
      Vec3 d_world = world_from_radar.rotation * d_radar;
      double range = intersect_terrain(spec.terrain, world_from_radar.translation, d_world,
                                       spec.radar.max_range);
      double lift = veg.uniform(spec.clutter.vegetation_height_min,
                                spec.clutter.vegetation_height_max);
      if (range <= 0.0) continue;
      Vec3 hit = world_from_radar.translation + range * d_world;
      Vec3 w = hit + Vec3(0, 0, lift);
      RadarReturn ret;
      ret.timestamp = t;
      ret.theta = theta;
      ret.point_radar = world_from_radar.rotation.transpose() * (w - world_from_radar.translation);
      ret.is_ground = false;
      frame.returns.push_back(ret);
    }

    // Multipath ghosts strictly below the surface, water side only. Anchors
    // come from near-nadir beams (specular echoes need near-normal
    // incidence).
    Rng mp = root.fork(kStreamMultipath, fi);
    const double depth_lo = spec.clutter.multipath_depth_min;
    const double depth_hi = spec.clutter.multipath_depth_max;
    double tilt_cos = std::cos(spec.clutter.multipath_max_tilt);

    struct GhostAnchor {
      bool ok = false;
      double t = 0.0;
      EncoderAngle theta;
      RigidTransform world_from_radar;
      Vec3 hit = Vec3::Zero();
      double range = 0.0;
    };
    auto anchor_of = [&](Rng& g) {
      GhostAnchor a;
      long step = static_cast<long>(g.below(steps_per_rev));
      a.world_from_radar = radar_pose_at(step, &a.t, &a.theta);
      Vec3 d_radar = beam_direction(spec.radar, g);
      for (int tries = 0; tries < 20 && -d_radar.z() < tilt_cos; ++tries) {
        d_radar = beam_direction(spec.radar, g);
      }
      if (-d_radar.z() < tilt_cos) return a;
      Vec3 d_world = a.world_from_radar.rotation * d_radar;
      a.range = intersect_terrain(spec.terrain, a.world_from_radar.translation, d_world,
                                  spec.radar.max_range);
      if (a.range <= 0.0) return a;
      a.hit = a.world_from_radar.translation + a.range * d_world;
      a.ok = a.hit.x() >= spec.clutter.multipath_min_x;
      return a;
    };
    auto push_return = [&](const GhostAnchor& a, const Vec3& world_point, bool ground) {
      RadarReturn ret;
      ret.timestamp = a.t;
      ret.theta = a.theta;
      ret.point_radar = a.world_from_radar.rotation.transpose() *
                        (world_point - a.world_from_radar.translation);
      ret.is_ground = ground;
      frame.returns.push_back(ret);
    };

    // Diffuse population: each specular spot reflects both ways, so the
    // ghost below the surface comes with its direct surface return.
    long n_mp = mp.poisson(spec.clutter.multipath_rate);
    for (long i = 0; i < n_mp; ++i) {
      GhostAnchor a = anchor_of(mp);
      double depth = mp.uniform(depth_lo, depth_hi);
      double direct_noise = mp.gaussian(0.0, spec.clutter.range_noise_sigma);
      if (!a.ok) continue;
      double surface = terrain_height(spec.terrain, a.hit.x(), a.hit.y());
      push_return(a, Vec3(a.hit.x(), a.hit.y(), surface - depth), false);
      Vec3 direct = a.world_from_radar.translation +
                    (a.range + direct_noise) * (a.hit - a.world_from_radar.translation) /
                        a.range;
      push_return(a, direct, true);
    }

    frames.push_back(std::move(frame));
  }

  return {std::move(track), std::move(frames), spec};
}

// ---------------------------------------------------------------------------
// Scenario spec serialization

namespace {

std::string kind_name(TerrainField::Kind k) {
  switch (k) {
    case TerrainField::Kind::Flat: return "flat";
    case TerrainField::Kind::Slope: return "slope";
    case TerrainField::Kind::Hill: return "hill";
    case TerrainField::Kind::Shore: return "shore";
    case TerrainField::Kind::Composite: return "composite";
  }
  return "flat";
}

TerrainField::Kind kind_from_name(const std::string& s, const std::string& origin) {
  if (s == "flat") return TerrainField::Kind::Flat;
  if (s == "slope") return TerrainField::Kind::Slope;
  if (s == "hill") return TerrainField::Kind::Hill;
  if (s == "shore") return TerrainField::Kind::Shore;
  if (s == "composite") return TerrainField::Kind::Composite;
  throw std::runtime_error(origin + ": unknown terrain_kind `" + s + "`");
}

}  // namespace

std::string serialize_scenario(const ScenarioSpec& spec) {
  KvWriter w;
  w.comment("synthetic scenario specification");
  w.put("terrain_kind", kind_name(spec.terrain.kind));
  w.put("terrain_a", spec.terrain.a);
  w.put("terrain_b", spec.terrain.b);
  w.put("terrain_c", spec.terrain.c);
  w.put("terrain_amplitude", spec.terrain.amplitude);
  w.put("terrain_wavelength", spec.terrain.wavelength);
  w.put("terrain_shore_x", spec.terrain.shore_x);
  w.blank();
  w.put("veg_rate", spec.clutter.vegetation_rate);
  w.put("veg_height_min", spec.clutter.vegetation_height_min);
  w.put("veg_height_max", spec.clutter.vegetation_height_max);
  w.put("multipath_rate", spec.clutter.multipath_rate);
  w.put("multipath_depth_min", spec.clutter.multipath_depth_min);
  w.put("multipath_depth_max", spec.clutter.multipath_depth_max);
  w.put("multipath_min_x", spec.clutter.multipath_min_x);
  w.put("multipath_spot_density", spec.clutter.multipath_spot_density);
  w.put("multipath_spot_radius", spec.clutter.multipath_spot_radius);
  w.put("multipath_ghosts_per_hit", spec.clutter.multipath_ghosts_per_hit);
  w.put("multipath_max_tilt_deg", rad2deg(spec.clutter.multipath_max_tilt));
  w.put("water_suppression_tilt_deg", rad2deg(spec.clutter.water_suppression_tilt));
  w.put("range_noise_sigma", spec.clutter.range_noise_sigma);
  w.blank();
  w.put("traj_start_x", spec.trajectory.start.x());
  w.put("traj_start_y", spec.trajectory.start.y());
  w.put("traj_start_z", spec.trajectory.start.z());
  w.put("traj_end_x", spec.trajectory.end.x());
  w.put("traj_end_y", spec.trajectory.end.y());
  w.put("traj_end_z", spec.trajectory.end.z());
  w.put("traj_speed", spec.trajectory.speed);
  w.put("altitude_mode",
        spec.trajectory.altitude_mode == TrajectorySpec::AltitudeMode::ConstantAgl
            ? std::string("constant_agl")
            : std::string("constant_z"));
  w.put("traj_agl", spec.trajectory.agl);
  w.blank();
  w.put("radar_angular_step_deg", rad2deg(spec.radar.angular_step));
  w.put("radar_beams_per_step", spec.radar.beams_per_step);
  w.put("radar_cone_half_angle_deg", rad2deg(spec.radar.beam_cone_half_angle));
  w.put("radar_boresight_tilt_deg", rad2deg(spec.radar.boresight_tilt));
  w.put("radar_max_range", spec.radar.max_range);
  w.blank();
  Eigen::Quaterniond mq(spec.mount.rotation);
  if (mq.w() < 0) mq.coeffs() = -mq.coeffs();
  w.put("mount_qx", mq.x());
  w.put("mount_qy", mq.y());
  w.put("mount_qz", mq.z());
  w.put("mount_qw", mq.w());
  w.put("mount_px", spec.mount.translation.x());
  w.put("mount_py", spec.mount.translation.y());
  w.put("mount_pz", spec.mount.translation.z());
  w.blank();
  w.put("frame_rate", spec.frame_rate);
  w.put("pose_rate", spec.pose_rate);
  w.put("seed", spec.seed);
  return w.text;
}

ScenarioSpec parse_scenario(const std::string& text, const std::string& origin) {
  KvMap kv = KvMap::parse(text, origin);
  ScenarioSpec spec;
  spec.terrain.kind = kind_from_name(kv.get_string("terrain_kind", "flat"), origin);
  spec.terrain.a = kv.get_double("terrain_a", 0.0);
  spec.terrain.b = kv.get_double("terrain_b", 0.0);
  spec.terrain.c = kv.get_double("terrain_c", 0.0);
  spec.terrain.amplitude = kv.get_double("terrain_amplitude", 0.0);
  spec.terrain.wavelength = kv.get_double("terrain_wavelength", 1.0);
  spec.terrain.shore_x = kv.get_double("terrain_shore_x", 0.0);

  spec.clutter.vegetation_rate = kv.get_double("veg_rate", 0.0);
  spec.clutter.vegetation_height_min = kv.get_double("veg_height_min", 0.2);
  spec.clutter.vegetation_height_max = kv.get_double("veg_height_max", 1.0);
  spec.clutter.multipath_rate = kv.get_double("multipath_rate", 0.0);
  spec.clutter.multipath_depth_min = kv.get_double("multipath_depth_min", 0.3);
  spec.clutter.multipath_depth_max = kv.get_double("multipath_depth_max", 1.5);
  spec.clutter.multipath_min_x = kv.get_double("multipath_min_x", -1e12);
  spec.clutter.multipath_spot_density = kv.get_double("multipath_spot_density", 0.0);
  spec.clutter.multipath_spot_radius = kv.get_double("multipath_spot_radius", 0.8);
  spec.clutter.multipath_ghosts_per_hit = kv.get_long("multipath_ghosts_per_hit", 3);
  spec.clutter.multipath_max_tilt =
      deg2rad(kv.get_double("multipath_max_tilt_deg", 90.0));
  spec.clutter.water_suppression_tilt =
      deg2rad(kv.get_double("water_suppression_tilt_deg", 0.0));
  spec.clutter.range_noise_sigma = kv.get_double("range_noise_sigma", 0.0);

  spec.trajectory.start.x() = kv.get_double("traj_start_x", 0.0);
  spec.trajectory.start.y() = kv.get_double("traj_start_y", 0.0);
  spec.trajectory.start.z() = kv.get_double("traj_start_z", 10.0);
  spec.trajectory.end.x() = kv.get_double("traj_end_x", 20.0);
  spec.trajectory.end.y() = kv.get_double("traj_end_y", 0.0);
  spec.trajectory.end.z() = kv.get_double("traj_end_z", 10.0);
  spec.trajectory.speed = kv.get_double("traj_speed", 2.0);
  std::string mode = kv.get_string("altitude_mode", "constant_z");
  if (mode == "constant_z") {
    spec.trajectory.altitude_mode = TrajectorySpec::AltitudeMode::ConstantZ;
  } else if (mode == "constant_agl") {
    spec.trajectory.altitude_mode = TrajectorySpec::AltitudeMode::ConstantAgl;
  } else {
    throw std::runtime_error(origin + ": unknown altitude_mode `" + mode + "`");
  }
  spec.trajectory.agl = kv.get_double("traj_agl", 5.0);

  spec.radar.angular_step = deg2rad(kv.get_double("radar_angular_step_deg", 5.0));
  spec.radar.beams_per_step = kv.get_long("radar_beams_per_step", 8);
  spec.radar.beam_cone_half_angle = deg2rad(kv.get_double("radar_cone_half_angle_deg", 15.0));
  spec.radar.boresight_tilt = deg2rad(kv.get_double("radar_boresight_tilt_deg", 25.0));
  spec.radar.max_range = kv.get_double("radar_max_range", 40.0);

  Eigen::Quaterniond mq(kv.get_double("mount_qw", 1.0), kv.get_double("mount_qx", 0.0),
                        kv.get_double("mount_qy", 0.0), kv.get_double("mount_qz", 0.0));
  Vec3 mp(kv.get_double("mount_px", 0.0), kv.get_double("mount_py", 0.0),
          kv.get_double("mount_pz", 0.0));
  spec.mount = RigidTransform::from_quaternion(mq, mp);

  spec.frame_rate = kv.get_double("frame_rate", 10.0);
  spec.pose_rate = kv.get_double("pose_rate", 400.0);
  spec.seed = kv.get_u64("seed", 0);

  kv.reject_unknown();
  validate_spec(spec);
  return spec;
}

ScenarioSpec read_scenario_file(const std::string& path) {
  return parse_scenario(read_text(path), path);
}

// ---------------------------------------------------------------------------
// Dataset files

namespace {

std::string frame_filename(long index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06ld.txt", index);
  return buf;
}

std::string serialize_frame(const RadarScanFrame& f) {
  std::string out = "frame " + std::to_string(f.frame_index) + " " +
                    format_double(f.t_start) + " " + format_double(f.t_end) + "\n";
  for (const auto& r : f.returns) {
    out += format_double(r.timestamp);
    out += ' ';
    out += format_double(r.theta.theta);
    for (double v : {r.point_radar.x(), r.point_radar.y(), r.point_radar.z()}) {
      out += ' ';
      out += format_double(v);
    }
    out += r.is_ground ? " 1\n" : " 0\n";
  }
  return out;
}

RadarScanFrame parse_frame(const std::string& text, const std::string& path) {
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  RadarScanFrame frame;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    if (!have_header) {
      std::string tag;
      if (!(ss >> tag >> frame.frame_index >> frame.t_start >> frame.t_end) ||
          tag != "frame") {
        throw MalformedRecord(path, line_no, "expected `frame <index> <t_start> <t_end>`");
      }
      have_header = true;
      continue;
    }
    RadarReturn r;
    int label;
    if (!(ss >> r.timestamp >> r.theta.theta >> r.point_radar.x() >> r.point_radar.y() >>
          r.point_radar.z() >> label) ||
        (label != 0 && label != 1)) {
      throw MalformedRecord(path, line_no, "expected `t theta x y z label`");
    }
    r.is_ground = label == 1;
    frame.returns.push_back(r);
  }
  if (!have_header) throw MalformedRecord(path, 1, "missing frame header");
  return frame;
}

}  // namespace

void write_dataset(const std::string& dir, const Dataset& dataset) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "frames");
  write_pose_file((fs::path(dir) / "poses.txt").string(), dataset.track);
  write_text_atomic((fs::path(dir) / "scenario.cfg").string(),
                    serialize_scenario(dataset.spec));
  for (const auto& frame : dataset.frames) {
    write_text_atomic((fs::path(dir) / "frames" / frame_filename(frame.frame_index)).string(),
                      serialize_frame(frame));
  }
}

Dataset read_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset ds;
  ds.spec = read_scenario_file((fs::path(dir) / "scenario.cfg").string());
  ds.track = read_pose_file((fs::path(dir) / "poses.txt").string());
  for (long i = 0;; ++i) {
    fs::path p = fs::path(dir) / "frames" / frame_filename(i);
    if (!fs::exists(p)) {
      if (i == 0) throw MissingFile(p.string());
      break;
    }
    ds.frames.push_back(parse_frame(read_text(p.string()), p.string()));
  }
  return ds;
}

}  // namespace terrafollow
