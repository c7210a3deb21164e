#include "terrafollow/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "terrafollow/rng.hpp"

namespace terrafollow {

namespace {

struct ConsensusPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  long inliers = -1;
};

/// Best-consensus plane over random minimal triples. Returns inliers < 0
/// when every sampled triple was degenerate.
ConsensusPlane ransac_plane(const std::vector<WorldPoint>& points, long iterations,
                            double threshold, Rng rng) {
  ConsensusPlane best;
  size_t n = points.size();
  for (long it = 0; it < iterations; ++it) {
    size_t a = rng.below(n), b = rng.below(n), c = rng.below(n);
    if (a == b || b == c || a == c) continue;
    Vec3 e1 = points[b].p - points[a].p;
    Vec3 e2 = points[c].p - points[a].p;
    Vec3 normal = e1.cross(e2);
    double len = normal.norm();
    if (len < 1e-12) continue;  // collinear triple
    normal /= len;
    double offset = -normal.dot(points[a].p);
    long inliers = 0;
    for (const auto& wp : points) {
      if (std::abs(normal.dot(wp.p) + offset) < threshold) ++inliers;
    }
    if (inliers > best.inliers) {
      best = {normal, offset, inliers};
    }
  }
  return best;
}

}  // namespace

std::set<std::uint64_t> ransac_single(const std::vector<WorldPoint>& points,
                                      const RansacParams& params) {
  if (points.size() < 3) throw RansacDegenerate("single-plane RANSAC needs >= 3 points");
  ConsensusPlane best =
      ransac_plane(points, params.iterations, params.distance_threshold, Rng(params.seed));
  if (best.inliers < 0) throw RansacDegenerate("all sampled triples were degenerate");

  std::set<std::uint64_t> ground;
  for (const auto& wp : points) {
    if (std::abs(best.normal.dot(wp.p) + best.offset) < params.distance_threshold) {
      ground.insert(wp.id);
    }
  }
  return ground;
}

std::set<std::uint64_t> ransac_patch(const GridPartition& grid, const RansacParams& params) {
  std::set<std::uint64_t> ground;
  Rng root(params.seed);
  for (const auto& [idx, points] : grid.cells) {
    if (points.size() < 3) continue;
    Rng cell_rng = root.fork(static_cast<std::uint64_t>(idx.u) * 0x1f123bb5ULL,
                             static_cast<std::uint64_t>(idx.v));
    ConsensusPlane best =
        ransac_plane(points, params.iterations, params.distance_threshold, cell_rng);
    if (best.inliers < 0) continue;
    for (const auto& wp : points) {
      if (std::abs(best.normal.dot(wp.p) + best.offset) < params.distance_threshold) {
        ground.insert(wp.id);
      }
    }
  }
  return ground;
}

// ---------------------------------------------------------------------------

KnnTerrain::KnnTerrain(const std::vector<ControlPoint>& controls, long k)
    : controls_(controls), k_(k) {
  if (static_cast<long>(controls_.size()) < k_ || k_ < 1) {
    throw TooFewPoints("KNN needs at least k control points");
  }
}

double KnnTerrain::query(double x, double y) const {
  // Repeated neighbourhood search per query: scan all controls, keep the
  // k nearest by squared distance.
  std::vector<std::pair<double, double>> nearest;  // (d2, h)
  nearest.reserve(controls_.size());
  for (const auto& cp : controls_) {
    double dx = cp.x - x, dy = cp.y - y;
    nearest.push_back({dx * dx + dy * dy, cp.h});
  }
  std::partial_sort(nearest.begin(), nearest.begin() + k_, nearest.end());

  if (nearest.front().first == 0.0) return nearest.front().second;  // exact hit
  double wsum = 0.0, hsum = 0.0;
  for (long i = 0; i < k_; ++i) {
    double w = 1.0 / nearest[static_cast<size_t>(i)].first;  // inverse distance^2
    wsum += w;
    hsum += w * nearest[static_cast<size_t>(i)].second;
  }
  return hsum / wsum;
}

PolyTerrain::PolyTerrain(const std::vector<ControlPoint>& controls)
    : px_{0, 1, 0, 2, 1, 0}, py_{0, 0, 1, 0, 1, 2} {
  const long terms = 6;
  if (static_cast<long>(controls.size()) < terms) {
    throw TooFewPoints("second-order surface needs >= 6 control points");
  }
  Eigen::MatrixXd design(controls.size(), terms);
  Eigen::VectorXd rhs(controls.size());
  for (size_t i = 0; i < controls.size(); ++i) {
    for (long t = 0; t < terms; ++t) {
      design(static_cast<long>(i), t) = std::pow(controls[i].x, px_[static_cast<size_t>(t)]) *
                                        std::pow(controls[i].y, py_[static_cast<size_t>(t)]);
    }
    rhs(static_cast<long>(i)) = controls[i].h;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.rank() < terms) {
    throw RankDeficient("control points are degenerate in x, y for a quadratic fit");
  }
  Eigen::VectorXd sol = svd.solve(rhs);
  coeffs_.assign(sol.data(), sol.data() + terms);
}

double PolyTerrain::query(double x, double y) const {
  double z = 0.0;
  for (size_t t = 0; t < coeffs_.size(); ++t) {
    z += coeffs_[t] * std::pow(x, static_cast<double>(px_[t])) *
         std::pow(y, static_cast<double>(py_[t]));
  }
  return z;
}

// ---------------------------------------------------------------------------

namespace {

void finish_metrics(SegMetrics& m) {
  m.precision_undefined = (m.tp + m.fp) == 0;
  m.recall_undefined = (m.tp + m.fn) == 0;
  m.precision = m.precision_undefined ? 0.0
                                      : static_cast<double>(m.tp) /
                                            static_cast<double>(m.tp + m.fp);
  m.recall = m.recall_undefined ? 0.0
                                : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  long denom_iou = m.tp + m.fp + m.fn;
  m.iou = denom_iou == 0 ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(denom_iou);
  double pr = m.precision + m.recall;
  m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
}

}  // namespace

SegMetrics compute_metrics(const std::set<std::uint64_t>& predicted_ground,
                           const std::vector<WorldPoint>& labeled_points) {
  SegMetrics m;
  for (const auto& wp : labeled_points) {
    bool predicted = predicted_ground.count(wp.id) > 0;
    bool actual = wp.label == 1;
    if (predicted && actual) ++m.tp;
    else if (predicted && !actual) ++m.fp;
    else if (!predicted && actual) ++m.fn;
    else ++m.tn;
  }
  finish_metrics(m);
  return m;
}

void merge_metrics(SegMetrics& into, const SegMetrics& other) {
  into.tp += other.tp;
  into.fp += other.fp;
  into.fn += other.fn;
  into.tn += other.tn;
  finish_metrics(into);
}

double rmse_terrain(const std::function<double(double, double)>& query,
                    const std::vector<TruthSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("rmse needs at least one sample");
  double sum = 0.0;
  for (const auto& s : samples) {
    double e = query(s.x, s.y) - s.z;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

}  // namespace terrafollow
