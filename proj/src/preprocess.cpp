#include "terrafollow/preprocess.hpp"

#include <cmath>

namespace terrafollow {

RegisteredFrame register_frame(const RadarScanFrame& frame, const PoseTrack& track,
                               const RigidTransform& mount, double max_fail_fraction) {
  RegisteredFrame out;
  out.frame_index = frame.frame_index;
  out.points.reserve(frame.returns.size());

  size_t failed = 0;
  for (size_t i = 0; i < frame.returns.size(); ++i) {
    const RadarReturn& r = frame.returns[i];
    auto pose = track.try_pose_at(r.timestamp);
    if (!pose) {
      ++failed;
      continue;
    }
    WorldPoint wp;
    wp.p = radar_to_world(r.point_radar, r.theta, mount, *pose);
    wp.label = r.is_ground ? 1 : 0;
    wp.source_frame = static_cast<std::int32_t>(frame.frame_index);
    wp.id = (static_cast<std::uint64_t>(frame.frame_index) << 32) | i;
    out.points.push_back(wp);
  }

  if (!frame.returns.empty() &&
      static_cast<double>(failed) > max_fail_fraction * frame.returns.size()) {
    throw RegistrationError("frame " + std::to_string(frame.frame_index) + ": " +
                            std::to_string(failed) + "/" +
                            std::to_string(frame.returns.size()) +
                            " returns without usable pose");
  }

  double t_mid = 0.5 * (frame.t_start + frame.t_end);
  out.uav_position = track.pose_at(t_mid).translation;
  return out;
}

RegisteredFrame fov_filter(const RegisteredFrame& frame, const FovParams& params) {
  RegisteredFrame out;
  out.frame_index = frame.frame_index;
  out.uav_position = frame.uav_position;
  double cos_phi = std::cos(params.phi);
  out.points.reserve(frame.points.size());
  for (const auto& wp : frame.points) {
    Vec3 r = wp.p - frame.uav_position;
    double norm = r.norm();
    if (norm == 0.0) continue;
    if (-r.z() / norm >= cos_phi) out.points.push_back(wp);
  }
  return out;
}

std::vector<WorldPoint> AccumulationWindow::accumulate(const RegisteredFrame& frame) {
  window_.push_back(frame);
  while (static_cast<long>(window_.size()) > capacity_) window_.pop_front();
  std::vector<WorldPoint> out;
  size_t total = 0;
  for (const auto& f : window_) total += f.points.size();
  out.reserve(total);
  for (const auto& f : window_) {
    out.insert(out.end(), f.points.begin(), f.points.end());
  }
  return out;
}

GridPartition partition(const std::vector<WorldPoint>& points, double resolution) {
  if (resolution <= 0.0) throw std::invalid_argument("grid resolution must be > 0");
  GridPartition grid;
  grid.resolution = resolution;
  for (const auto& wp : points) {
    grid.cells[cell_of(wp.p, resolution)].push_back(wp);
  }
  return grid;
}

}  // namespace terrafollow
