#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "terrafollow/preprocess.hpp"
#include "terrafollow/segmentation.hpp"

namespace terrafollow {

/// Per-cell representative terrain height at the cell center.
struct ControlPoint {
  long u = 0;
  long v = 0;
  double x = 0.0;  // (u + 1/2) * resolution
  double y = 0.0;  // (v + 1/2) * resolution
  double h = 0.0;
  long last_update_frame = -1;
};

struct ControlLattice {
  double resolution = 1.0;
  std::unordered_map<CellIndex, ControlPoint, CellIndexHash> points;

  bool empty() const { return points.empty(); }

  struct Rect {
    long u_min = 0, u_max = -1, v_min = 0, v_max = -1;
    long width() const { return u_max - u_min + 1; }
    long height() const { return v_max - v_min + 1; }
    bool operator==(const Rect&) const = default;
  };
  Rect bounding_rect() const;
};

using GroundHeights = std::unordered_map<CellIndex, std::vector<double>, CellIndexHash>;

/// Control heights from per-cell ground sets: heights sorted ascending, the
/// entry at floor(quantile * n) (0-based, clamped) is taken. Empty sets are
/// skipped.
std::vector<ControlPoint> make_control_points(const GroundHeights& ground_cells,
                                              double resolution, double quantile_fraction,
                                              long frame_index = -1);

struct UpdateParams {
  double quantile_fraction = 0.2;  // lower-quantile index fraction
  double update_tolerance = 0.1;   // keep history unless it moves more than this, m
};

/// Conservative lattice update: a cell with no history adopts the new
/// height; an existing cell changes only when the new height differs by
/// more than `tolerance`. Returns the changed cell indices.
std::vector<CellIndex> incremental_update(ControlLattice& lattice,
                                          const std::vector<ControlPoint>& new_points,
                                          double tolerance);

class EmptyLattice : public std::runtime_error {
 public:
  EmptyLattice() : std::runtime_error("terrain lattice has no control points") {}
};

struct HeightQuery {
  double z = 0.0;
  bool extrapolated = false;  // query was clamped to the domain boundary
};

/// One parametric axis of the tensor-product surface: clamped knot vector
/// over the control centers with uniform interior knots at the control
/// spacing, so affine lattices are reproduced exactly away from the
/// boundary spans.
struct SplineAxis {
  int degree = 3;
  long first_cell = 0;
  long count = 0;
  double resolution = 1.0;
  std::vector<double> knots;

  double lo() const { return (first_cell + 0.5) * resolution; }
  double hi() const { return (first_cell + count - 1 + 0.5) * resolution; }

  /// Knot span containing x (x already inside [lo, hi]).
  long find_span(double x) const;

  /// Nonzero basis values at x: weights[0..degree] belong to control
  /// indices span-degree .. span. Returns the span.
  long basis(double x, double* weights) const;
};

/// Immutable tensor-product B-spline heightfield over a filled control
/// lattice. Out-of-domain queries clamp to the nearest domain point and
/// report it. Thread-safe for concurrent reads.
class TerrainSurface {
 public:
  static TerrainSurface fit(const ControlLattice& lattice, int degree_x, int degree_y);

  HeightQuery query(double x, double y) const;

  const SplineAxis& axis_x() const { return ax_; }
  const SplineAxis& axis_y() const { return ay_; }
  const Eigen::MatrixXd& heights() const { return heights_; }
  double resolution() const { return resolution_; }

 private:
  SplineAxis ax_, ay_;
  Eigen::MatrixXd heights_;  // (count_x, count_y), holes filled
  double resolution_ = 1.0;
};

struct AltitudeCommand {
  double z_terr = 0.0;
  double z_cmd = 0.0;
  bool extrapolated = false;
};

/// Terrain-referenced altitude: z_cmd = z_terr + h_ref.
AltitudeCommand altitude_command(const TerrainSurface& surface, double x, double y,
                                 double h_ref);

/// Prior adapter for segmentation backed by a surface snapshot (empty
/// prior when no surface exists yet).
TerrainPrior prior_from_surface(std::shared_ptr<const TerrainSurface> surface);

}  // namespace terrafollow
