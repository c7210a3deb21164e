#pragma once

#include <memory>

#include "terrafollow/config.hpp"
#include "terrafollow/terrain.hpp"

namespace terrafollow {

struct FrameOutput {
  long frame_index = 0;
  std::vector<WorldPoint> accumulated;  // FoV-filtered window union, the segmentation input
  GridPartition grid;
  FrameSegmentation seg;
  std::shared_ptr<const TerrainSurface> surface;  // snapshot after this frame's update
  Vec3 uav_position = Vec3::Zero();
  double seg_seconds = 0.0;  // wall time of the segmentation call alone
};

/// Sequential per-frame composition: registration, FoV filter, temporal
/// accumulation, grid partition, segmentation against the previous frame's
/// surface snapshot, control-point extraction, conservative lattice update,
/// and surface refit. Surfaces are immutable snapshots, so readers of a
/// returned surface never observe later updates.
class PipelineRunner {
 public:
  PipelineRunner(const PipelineConfig& cfg, const RigidTransform& mount);

  FrameOutput process_frame(const RadarScanFrame& frame, const PoseTrack& track);

  std::shared_ptr<const TerrainSurface> surface() const { return surface_; }
  const ControlLattice& lattice() const { return lattice_; }
  const PipelineConfig& config() const { return cfg_; }

 private:
  PipelineConfig cfg_;
  RigidTransform mount_;
  AccumulationWindow window_;
  ControlLattice lattice_;
  std::shared_ptr<const TerrainSurface> surface_;
};

/// Per-cell heights of the final aggregated ground set (accepted, locally
/// re-segmented, and globally recalled subsets).
GroundHeights ground_heights_by_cell(const GridPartition& grid, const FrameSegmentation& seg);

/// Text dump of one frame's per-cell segmentation records:
/// `u v n_x n_y n_z d zbar sigma phi reasons count_ground count_total`.
std::string segmentation_dump(const FrameSegmentation& seg, const GridPartition& grid);

/// Control-point export `u v x y h` sorted by (u, v).
std::string lattice_export(const ControlLattice& lattice);

/// Dense sampled grid `x y z` over the surface domain at the given step.
std::string surface_grid_export(const TerrainSurface& surface, double step);

}  // namespace terrafollow
