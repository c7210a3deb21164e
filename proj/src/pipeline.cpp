#include "terrafollow/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "terrafollow/io_util.hpp"

namespace terrafollow {

PipelineRunner::PipelineRunner(const PipelineConfig& cfg, const RigidTransform& mount)
    : cfg_(cfg), mount_(mount), window_(cfg.accumulation_frames) {
  validate_config(cfg_);
  lattice_.resolution = cfg_.grid_resolution;
}

FrameOutput PipelineRunner::process_frame(const RadarScanFrame& frame,
                                          const PoseTrack& track) {
  FrameOutput out;
  out.frame_index = frame.frame_index;

  RegisteredFrame reg = register_frame(frame, track, mount_, cfg_.frame_fail_fraction);
  out.uav_position = reg.uav_position;
  RegisteredFrame filtered = fov_filter(reg, FovParams{cfg_.fov_phi});
  out.accumulated = window_.accumulate(filtered);
  out.grid = partition(out.accumulated, cfg_.grid_resolution);

  TerrainPrior prior = prior_from_surface(surface_);  // previous frame's snapshot

  auto t0 = std::chrono::steady_clock::now();
  out.seg = segment_frame(out.grid, prior, cfg_.seg);
  auto t1 = std::chrono::steady_clock::now();
  out.seg_seconds = std::chrono::duration<double>(t1 - t0).count();

  GroundHeights heights = ground_heights_by_cell(out.grid, out.seg);
  std::vector<ControlPoint> cps =
      make_control_points(heights, cfg_.grid_resolution, cfg_.quantile_fraction,
                          frame.frame_index);
  std::vector<CellIndex> changed = incremental_update(lattice_, cps, cfg_.update_tolerance);

  if (!lattice_.empty() && (!surface_ || !changed.empty())) {
    surface_ = std::make_shared<const TerrainSurface>(
        TerrainSurface::fit(lattice_, cfg_.degree_x, cfg_.degree_y));
  }
  out.surface = surface_;
  return out;
}

GroundHeights ground_heights_by_cell(const GridPartition& grid, const FrameSegmentation& seg) {
  GroundHeights heights;
  for (const auto& [key, cell] : seg.cells) {
    auto grid_it = grid.cells.find({key.first, key.second});
    if (grid_it == grid.cells.end()) continue;
    const auto& points = grid_it->second;
    std::vector<double>& hs = heights[{key.first, key.second}];
    if (cell.accepted()) {
      for (size_t i : cell.ground) hs.push_back(points[i].p.z());
    }
    for (size_t i : cell.reseg_extra) hs.push_back(points[i].p.z());
    for (size_t i : cell.recall_extra) hs.push_back(points[i].p.z());
    if (hs.empty()) heights.erase({key.first, key.second});
  }
  return heights;
}

namespace {

std::string reasons_token(const CellSegmentation& cell) {
  switch (cell.status) {
    case CellStatus::TooFewPoints:
      return "too_few";
    case CellStatus::Degenerate:
      return "degenerate";
    case CellStatus::Accepted:
      return "ok";
    case CellStatus::Rejected: {
      std::string r;
      if (!cell.gates.uprightness) r += "tilt+";
      if (!cell.gates.elevation) r += "elev+";
      if (!cell.gates.stability) r += "disp+";
      if (!r.empty()) r.pop_back();
      return r.empty() ? "rejected" : r;
    }
  }
  return "?";
}

}  // namespace

std::string segmentation_dump(const FrameSegmentation& seg, const GridPartition& grid) {
  std::string out = "# u v n_x n_y n_z d zbar sigma phi reasons count_ground count_total\n";
  for (const auto& [key, cell] : seg.cells) {
    auto grid_it = grid.cells.find({key.first, key.second});
    size_t total = grid_it == grid.cells.end() ? 0 : grid_it->second.size();
    size_t ground =
        (cell.accepted() ? cell.ground.size() : 0) + cell.reseg_extra.size() +
        cell.recall_extra.size();
    const PlaneEstimate plane = cell.plane.value_or(PlaneEstimate{});
    out += std::to_string(key.first) + " " + std::to_string(key.second);
    for (double v : {plane.normal.x(), plane.normal.y(), plane.normal.z(), plane.offset,
                     cell.mean_height, cell.height_std}) {
      out += " " + format_double(v);
    }
    out += cell.accepted() ? " 1 " : " 0 ";
    out += reasons_token(cell);
    out += " " + std::to_string(ground) + " " + std::to_string(total) + "\n";
  }
  return out;
}

std::string lattice_export(const ControlLattice& lattice) {
  std::vector<const ControlPoint*> sorted;
  sorted.reserve(lattice.points.size());
  for (const auto& [idx, cp] : lattice.points) sorted.push_back(&cp);
  std::sort(sorted.begin(), sorted.end(), [](const ControlPoint* a, const ControlPoint* b) {
    return a->u != b->u ? a->u < b->u : a->v < b->v;
  });
  std::string out = "# u v x y h\n";
  for (const ControlPoint* cp : sorted) {
    out += std::to_string(cp->u) + " " + std::to_string(cp->v) + " " + format_double(cp->x) +
           " " + format_double(cp->y) + " " + format_double(cp->h) + "\n";
  }
  return out;
}

std::string surface_grid_export(const TerrainSurface& surface, double step) {
  if (step <= 0.0) throw std::invalid_argument("sampling step must be > 0");
  std::string out = "# x y z\n";
  const SplineAxis& ax = surface.axis_x();
  const SplineAxis& ay = surface.axis_y();
  for (double x = ax.lo(); x <= ax.hi() + 1e-12; x += step) {
    for (double y = ay.lo(); y <= ay.hi() + 1e-12; y += step) {
      out += format_double(x) + " " + format_double(y) + " " +
             format_double(surface.query(x, y).z) + "\n";
    }
  }
  return out;
}

}  // namespace terrafollow
