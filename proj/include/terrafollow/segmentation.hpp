#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "terrafollow/preprocess.hpp"

namespace terrafollow {

/// Plane n.p + d = 0 with unit normal, sign fixed to n_z >= 0
/// (ties broken toward +x, then +y).
struct PlaneEstimate {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;  // d = -n . centroid
  Vec3 centroid = Vec3::Zero();

  double distance(const Vec3& p) const { return std::abs(normal.dot(p) + offset); }
};

/// Height prior queried from the historical terrain model. Absent at cold
/// start; queried at the cell center.
struct TerrainPrior {
  std::function<std::optional<double>(double x, double y)> height_query;

  bool available() const { return static_cast<bool>(height_query); }
  std::optional<double> at(double x, double y) const {
    return available() ? height_query(x, y) : std::nullopt;
  }
};

struct SegParams {
  long min_cell_points = 5;        // cell validity threshold
  double prior_window_below = 0.5; // candidate window below the prior, m
  double prior_window_above = 0.5; // candidate window above the prior, m
  long seed_count = 5;             // lowest candidates used as seeds
  double seed_margin = 0.2;        // initial ground band above the seed mean, m
  double plane_distance = 0.15;    // point-to-plane reselection threshold, m
  long refine_iterations = 3;      // max PCA/reselect rounds
  double max_tilt = deg2rad(30.0); // uprightness limit on the normal, rad
  double prior_height_tol = 0.5;   // |mean height - prior| gate, m
  double height_std_max = 0.15;    // height dispersion gate, m
  double reseg_height_gap = 0.3;   // residual-vs-ground mean gap trigger, m
  long reseg_min_points = 5;       // residual size trigger (strict >)
  double recall_margin = 0.2;      // global recall band above the prior, m
  bool use_prior = true;           // prior-guided seeds and elevation gate
  bool use_refinement = true;      // re-segmentation and global recall pass

  bool operator==(const SegParams&) const = default;
};

enum class CellStatus {
  Accepted,
  Rejected,
  TooFewPoints,
  Degenerate,  // no seed candidates or unfittable point sets
};

struct GateFlags {
  bool uprightness = false;
  bool elevation = false;
  bool stability = false;
};

struct CellSegmentation {
  CellIndex cell;
  std::vector<size_t> ground;  // indices into the cell's point vector
  std::optional<PlaneEstimate> plane;
  double mean_height = 0.0;
  double height_std = 0.0;
  CellStatus status = CellStatus::Rejected;
  GateFlags gates;
  std::vector<size_t> reseg_extra;   // extra ground from local re-segmentation
  std::vector<size_t> recall_extra;  // extra ground from global recall

  bool accepted() const { return status == CellStatus::Accepted; }
};

class DegenerateCell : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NoCandidates : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Candidate window around the prior, k lowest seeds, threshold on the seed
/// mean. Returns indices into `points`. Without a usable prior every point
/// is a candidate (cold-start rule).
std::vector<size_t> seed_init(const std::vector<WorldPoint>& points,
                              std::optional<double> prior_height, const SegParams& params);

PlaneEstimate pca_plane(const std::vector<WorldPoint>& points,
                        const std::vector<size_t>& subset);

struct RefineResult {
  std::vector<size_t> ground;
  PlaneEstimate plane;
  int iterations = 0;
};

/// Alternates PCA fitting with point-to-plane reselection from the full
/// cell set, at most `refine_iterations` rounds, early exit on a fixed
/// point. The returned plane is fitted to the returned set.
RefineResult refine_plane(const std::vector<WorldPoint>& points,
                          const std::vector<size_t>& initial_ground, const SegParams& params);

/// Uprightness, prior-elevation, and dispersion gates on a refined cell.
/// The elevation gate passes vacuously without a prior.
CellSegmentation gate_cell(const CellIndex& cell, const std::vector<WorldPoint>& points,
                           const std::vector<size_t>& ground, const PlaneEstimate& plane,
                           std::optional<double> prior_height, const SegParams& params);

/// Second segmentation pass over the residual of an accepted cell; returns
/// the residual's ground subset when its own gate accepts, else empty.
std::vector<size_t> local_resegment(const std::vector<WorldPoint>& points,
                                    const CellSegmentation& accepted,
                                    std::optional<double> prior_height,
                                    const SegParams& params);

/// Points of a rejected cell at or below prior + recall_margin.
std::vector<size_t> global_recall_cell(const std::vector<WorldPoint>& points,
                                       double prior_height, const SegParams& params);

struct FrameSegmentation {
  std::map<std::pair<long, long>, CellSegmentation> cells;
  std::set<std::uint64_t> ground_ids;  // final aggregated ground set
  size_t total_points = 0;
};

/// Full per-frame segmentation: validity check, seed/PCA/refine, the
/// three-criterion gate, then (when enabled) local re-segmentation of
/// accepted cells and global recall over rejected ones.
FrameSegmentation segment_frame(const GridPartition& grid, const TerrainPrior& prior,
                                const SegParams& params);

}  // namespace terrafollow
