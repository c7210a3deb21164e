#include "terrafollow/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace terrafollow {

namespace {

double mean_z(const std::vector<WorldPoint>& points, const std::vector<size_t>& subset) {
  double sum = 0.0;
  for (size_t i : subset) sum += points[i].p.z();
  return sum / static_cast<double>(subset.size());
}

/// Population standard deviation of z over the subset (divisor |G|).
double std_z(const std::vector<WorldPoint>& points, const std::vector<size_t>& subset,
             double mean) {
  double sum = 0.0;
  for (size_t i : subset) {
    double d = points[i].p.z() - mean;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(subset.size()));
}

}  // namespace

std::vector<size_t> seed_init(const std::vector<WorldPoint>& points,
                              std::optional<double> prior_height, const SegParams& params) {
  std::vector<size_t> candidates;
  candidates.reserve(points.size());
  if (prior_height) {
    double lo = *prior_height - params.prior_window_below;
    double hi = *prior_height + params.prior_window_above;
    for (size_t i = 0; i < points.size(); ++i) {
      double z = points[i].p.z();
      if (z >= lo && z <= hi) candidates.push_back(i);
    }
  } else {
    for (size_t i = 0; i < points.size(); ++i) candidates.push_back(i);
  }
  if (candidates.empty()) throw NoCandidates("no points inside the prior window");

  // k lowest candidates (all of them when fewer), stable on ties.
  std::vector<size_t> seeds = candidates;
  std::stable_sort(seeds.begin(), seeds.end(), [&](size_t a, size_t b) {
    return points[a].p.z() < points[b].p.z();
  });
  if (static_cast<long>(seeds.size()) > params.seed_count) {
    seeds.resize(static_cast<size_t>(params.seed_count));
  }

  double z_init = mean_z(points, seeds);
  std::vector<size_t> ground;
  for (size_t i : candidates) {
    if (points[i].p.z() <= z_init + params.seed_margin) ground.push_back(i);
  }
  return ground;
}

PlaneEstimate pca_plane(const std::vector<WorldPoint>& points,
                        const std::vector<size_t>& subset) {
  if (subset.size() < 3) throw DegenerateCell("plane fit needs at least 3 points");

  Vec3 centroid = Vec3::Zero();
  for (size_t i : subset) centroid += points[i].p;
  centroid /= static_cast<double>(subset.size());

  Mat3 cov = Mat3::Zero();
  for (size_t i : subset) {
    Vec3 d = points[i].p - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(subset.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const auto& vals = eig.eigenvalues();  // ascending
  if (vals[1] <= 1e-9 * std::max(vals[2], 1e-12)) {
    throw DegenerateCell("covariance rank < 2 (collinear or coincident points)");
  }

  Vec3 n = eig.eigenvectors().col(0);
  if (n.z() < 0.0 || (n.z() == 0.0 && (n.x() < 0.0 || (n.x() == 0.0 && n.y() < 0.0)))) {
    n = -n;
  }

  PlaneEstimate plane;
  plane.normal = n;
  plane.centroid = centroid;
  plane.offset = -n.dot(centroid);
  return plane;
}

RefineResult refine_plane(const std::vector<WorldPoint>& points,
                          const std::vector<size_t>& initial_ground, const SegParams& params) {
  RefineResult res;
  std::vector<size_t> current = initial_ground;

  for (long t = 0; t < params.refine_iterations; ++t) {
    PlaneEstimate plane = pca_plane(points, current);
    std::vector<size_t> next;
    next.reserve(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
      if (plane.distance(points[i].p) < params.plane_distance) next.push_back(i);
    }
    ++res.iterations;
    if (next == current) {
      res.ground = std::move(current);
      res.plane = plane;
      return res;
    }
    current = std::move(next);
  }

  res.plane = pca_plane(points, current);  // keep set and plane consistent
  res.ground = std::move(current);
  return res;
}

CellSegmentation gate_cell(const CellIndex& cell, const std::vector<WorldPoint>& points,
                           const std::vector<size_t>& ground, const PlaneEstimate& plane,
                           std::optional<double> prior_height, const SegParams& params) {
  CellSegmentation seg;
  seg.cell = cell;
  seg.ground = ground;
  seg.plane = plane;
  seg.mean_height = mean_z(points, ground);
  seg.height_std = std_z(points, ground, seg.mean_height);

  seg.gates.uprightness = std::abs(plane.normal.z()) >= std::cos(params.max_tilt);
  seg.gates.elevation =
      !prior_height || std::abs(seg.mean_height - *prior_height) < params.prior_height_tol;
  seg.gates.stability = seg.height_std < params.height_std_max;

  seg.status = (seg.gates.uprightness && seg.gates.elevation && seg.gates.stability)
                   ? CellStatus::Accepted
                   : CellStatus::Rejected;
  return seg;
}

std::vector<size_t> local_resegment(const std::vector<WorldPoint>& points,
                                    const CellSegmentation& accepted,
                                    std::optional<double> prior_height,
                                    const SegParams& params) {
  if (!accepted.accepted()) return {};

  std::vector<char> in_ground(points.size(), 0);
  for (size_t i : accepted.ground) in_ground[i] = 1;
  std::vector<size_t> residual;
  for (size_t i = 0; i < points.size(); ++i) {
    if (!in_ground[i]) residual.push_back(i);
  }
  if (static_cast<long>(residual.size()) <= params.reseg_min_points) return {};

  double residual_mean = mean_z(points, residual);
  if (std::abs(residual_mean - accepted.mean_height) >= params.reseg_height_gap) return {};

  // Second pass restricted to the residual: same seed/refine/gate chain on a
  // residual-local view, then indices mapped back.
  std::vector<WorldPoint> sub;
  sub.reserve(residual.size());
  for (size_t i : residual) sub.push_back(points[i]);
  if (static_cast<long>(sub.size()) < params.min_cell_points) return {};

  try {
    std::vector<size_t> init = seed_init(sub, prior_height, params);
    RefineResult refined = refine_plane(sub, init, params);
    CellSegmentation verdict =
        gate_cell(accepted.cell, sub, refined.ground, refined.plane, prior_height, params);
    if (!verdict.accepted()) return {};
    std::vector<size_t> out;
    out.reserve(verdict.ground.size());
    for (size_t local : verdict.ground) out.push_back(residual[local]);
    return out;
  } catch (const NoCandidates&) {
    return {};
  } catch (const DegenerateCell&) {
    return {};
  }
}

std::vector<size_t> global_recall_cell(const std::vector<WorldPoint>& points,
                                       double prior_height, const SegParams& params) {
  std::vector<size_t> recalled;
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].p.z() <= prior_height + params.recall_margin) recalled.push_back(i);
  }
  return recalled;
}

FrameSegmentation segment_frame(const GridPartition& grid, const TerrainPrior& prior,
                                const SegParams& params) {
  FrameSegmentation out;
  out.total_points = grid.total_points();

  for (const auto& [idx, points] : grid.cells) {
    double cx = (idx.u + 0.5) * grid.resolution;
    double cy = (idx.v + 0.5) * grid.resolution;
    std::optional<double> prior_height =
        params.use_prior ? prior.at(cx, cy) : std::nullopt;

    CellSegmentation seg;
    seg.cell = idx;

    if (static_cast<long>(points.size()) < params.min_cell_points) {
      seg.status = CellStatus::TooFewPoints;
    } else {
      try {
        std::vector<size_t> init = seed_init(points, prior_height, params);
        RefineResult refined = refine_plane(points, init, params);
        seg = gate_cell(idx, points, refined.ground, refined.plane, prior_height, params);
      } catch (const NoCandidates&) {
        seg.status = CellStatus::Degenerate;
      } catch (const DegenerateCell&) {
        seg.status = CellStatus::Degenerate;
      }
    }

    if (params.use_refinement) {
      if (seg.accepted()) {
        seg.reseg_extra = local_resegment(points, seg, prior_height, params);
      } else if (prior_height) {
        seg.recall_extra = global_recall_cell(points, *prior_height, params);
      }
    }

    if (seg.accepted()) {
      for (size_t i : seg.ground) out.ground_ids.insert(points[i].id);
    }
    for (size_t i : seg.reseg_extra) out.ground_ids.insert(points[i].id);
    for (size_t i : seg.recall_extra) out.ground_ids.insert(points[i].id);

    out.cells.emplace(std::make_pair(idx.u, idx.v), std::move(seg));
  }
  return out;
}

}  // namespace terrafollow
