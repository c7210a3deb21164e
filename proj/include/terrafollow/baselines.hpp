#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "terrafollow/preprocess.hpp"
#include "terrafollow/terrain.hpp"

namespace terrafollow {

struct RansacParams {
  long iterations = 50;
  double distance_threshold = 0.15;  // shared with the plane reselection threshold
  std::uint64_t seed = 0;
};

class RansacDegenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single consensus plane over the whole point set; ground = inliers of the
/// best of `iterations` random minimal triples. Deterministic given the seed.
std::set<std::uint64_t> ransac_single(const std::vector<WorldPoint>& points,
                                      const RansacParams& params);

/// Patch-wise variant over the shared grid; cells below 3 points contribute
/// nothing. Each cell draws from a stream keyed on its index, so results do
/// not depend on iteration order.
std::set<std::uint64_t> ransac_patch(const GridPartition& grid, const RansacParams& params);

class TooFewPoints : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse-distance-weighted mean of the k nearest control heights
/// (exponent 2); a query exactly on a control point returns its height.
class KnnTerrain {
 public:
  KnnTerrain(const std::vector<ControlPoint>& controls, long k);
  double query(double x, double y) const;

 private:
  std::vector<ControlPoint> controls_;
  long k_;
};

/// Least-squares second-order surface z = c0 + c1 x + c2 y + c3 x^2 +
/// c4 xy + c5 y^2 over the control points; queries evaluate the monomial
/// expansion term by term.
class PolyTerrain {
 public:
  explicit PolyTerrain(const std::vector<ControlPoint>& controls);
  double query(double x, double y) const;
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;  // aligned with exponent tables below
  std::vector<int> px_, py_;
};

struct SegMetrics {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, iou = 0.0, f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

SegMetrics compute_metrics(const std::set<std::uint64_t>& predicted_ground,
                           const std::vector<WorldPoint>& labeled_points);

/// Accumulate additional confusion counts and refresh the derived ratios.
void merge_metrics(SegMetrics& into, const SegMetrics& other);

struct TruthSample {
  double x = 0.0, y = 0.0, z = 0.0;
};

double rmse_terrain(const std::function<double(double, double)>& query,
                    const std::vector<TruthSample>& samples);

}  // namespace terrafollow
