#pragma once

#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

#include "terrafollow/geometry.hpp"
#include "terrafollow/sim.hpp"

namespace terrafollow {

/// World-frame point carried through the pipeline. `label` keeps the
/// simulator ground truth (-1 when unknown); `id` is unique per physical
/// return so accumulated multisets can be deduplicated and scored.
struct WorldPoint {
  Vec3 p = Vec3::Zero();
  std::int8_t label = -1;  // -1 unknown, 0 non-ground, 1 ground
  std::int32_t source_frame = 0;
  std::uint64_t id = 0;
};

struct RegisteredFrame {
  long frame_index = 0;
  std::vector<WorldPoint> points;
  Vec3 uav_position = Vec3::Zero();  // body position at the frame midpoint
};

struct FovParams {
  double phi = deg2rad(60.0);  // cone half-angle around straight down, (0, pi/2]
};

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps every return into the world frame through the radar->motor->body->
/// world chain, using the pose at the return's own timestamp. Throws when
/// more than `max_fail_fraction` of the returns have no usable pose.
RegisteredFrame register_frame(const RadarScanFrame& frame, const PoseTrack& track,
                               const RigidTransform& mount, double max_fail_fraction = 0.1);

/// Keeps points within the downward cone: (-r_z)/|r| >= cos(phi) with
/// r = point - uav_position. Boundary points stay; r = 0 is dropped.
RegisteredFrame fov_filter(const RegisteredFrame& frame, const FovParams& params);

/// Ring of the last K filtered frames; accumulate() returns their union.
class AccumulationWindow {
 public:
  explicit AccumulationWindow(long capacity = 5) : capacity_(capacity < 1 ? 1 : capacity) {}

  long capacity() const { return capacity_; }

  /// Pushes the frame and returns the union of the retained window.
  std::vector<WorldPoint> accumulate(const RegisteredFrame& frame);

 private:
  long capacity_;
  std::deque<RegisteredFrame> window_;
};

struct CellIndex {
  long u = 0;
  long v = 0;
  bool operator==(const CellIndex&) const = default;
};

struct CellIndexHash {
  size_t operator()(const CellIndex& c) const {
    std::uint64_t x = static_cast<std::uint64_t>(c.u);
    std::uint64_t y = static_cast<std::uint64_t>(c.v);
    return static_cast<size_t>(x * 0x9e3779b97f4a7c15ULL ^ (y + 0x7f4a7c15ULL + (x << 17)));
  }
};

struct GridPartition {
  double resolution = 1.0;
  std::unordered_map<CellIndex, std::vector<WorldPoint>, CellIndexHash> cells;

  size_t total_points() const {
    size_t n = 0;
    for (const auto& [idx, pts] : cells) n += pts.size();
    return n;
  }
};

inline long grid_index(double coord, double resolution) {
  return static_cast<long>(std::floor(coord / resolution));
}

inline CellIndex cell_of(const Vec3& p, double resolution) {
  return {grid_index(p.x(), resolution), grid_index(p.y(), resolution)};
}

GridPartition partition(const std::vector<WorldPoint>& points, double resolution);

}  // namespace terrafollow
