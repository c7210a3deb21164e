#include "terrafollow/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace terrafollow {

ControlLattice::Rect ControlLattice::bounding_rect() const {
  Rect r;
  bool first = true;
  for (const auto& [idx, cp] : points) {
    if (first) {
      r = {idx.u, idx.u, idx.v, idx.v};
      first = false;
    } else {
      r.u_min = std::min(r.u_min, idx.u);
      r.u_max = std::max(r.u_max, idx.u);
      r.v_min = std::min(r.v_min, idx.v);
      r.v_max = std::max(r.v_max, idx.v);
    }
  }
  return r;
}

std::vector<ControlPoint> make_control_points(const GroundHeights& ground_cells,
                                              double resolution, double quantile_fraction,
                                              long frame_index) {
  std::vector<ControlPoint> out;
  out.reserve(ground_cells.size());
  for (const auto& [idx, heights] : ground_cells) {
    if (heights.empty()) continue;
    std::vector<double> sorted = heights;
    std::sort(sorted.begin(), sorted.end());
    long n = static_cast<long>(sorted.size());
    long q = static_cast<long>(std::floor(quantile_fraction * static_cast<double>(n)));
    q = std::clamp(q, 0L, n - 1);
    ControlPoint cp;
    cp.u = idx.u;
    cp.v = idx.v;
    cp.x = (idx.u + 0.5) * resolution;
    cp.y = (idx.v + 0.5) * resolution;
    cp.h = sorted[static_cast<size_t>(q)];
    cp.last_update_frame = frame_index;
    out.push_back(cp);
  }
  return out;
}

std::vector<CellIndex> incremental_update(ControlLattice& lattice,
                                          const std::vector<ControlPoint>& new_points,
                                          double tolerance) {
  std::vector<CellIndex> changed;
  for (const ControlPoint& cp : new_points) {
    CellIndex idx{cp.u, cp.v};
    auto it = lattice.points.find(idx);
    if (it == lattice.points.end()) {
      lattice.points.emplace(idx, cp);
      changed.push_back(idx);
    } else if (std::abs(cp.h - it->second.h) > tolerance) {
      it->second.h = cp.h;
      it->second.last_update_frame = cp.last_update_frame;
      changed.push_back(idx);
    }
  }
  return changed;
}

// ---------------------------------------------------------------------------
// B-spline machinery

namespace {

SplineAxis make_axis(long first_cell, long count, double resolution, int degree) {
  SplineAxis ax;
  ax.first_cell = first_cell;
  ax.count = count;
  ax.resolution = resolution;
  ax.degree = static_cast<int>(std::min<long>(degree, count - 1));
  if (ax.degree < 0) ax.degree = 0;

  int k = ax.degree;
  double lo = ax.lo();
  double hi = ax.hi();
  if (k == 0) {
    // Degree-0: piecewise-constant partition of [lo, hi] into `count` spans.
    ax.knots.resize(static_cast<size_t>(count) + 1);
    for (long i = 0; i <= count; ++i) {
      ax.knots[static_cast<size_t>(i)] =
          count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count);
    }
    return ax;
  }

  long m = count - k - 1;  // interior knot count
  ax.knots.reserve(static_cast<size_t>(count + k + 1));
  for (int i = 0; i <= k; ++i) ax.knots.push_back(lo);
  for (long j = 0; j < m; ++j) {
    ax.knots.push_back(lo + (0.5 * (k + 1) + static_cast<double>(j)) * resolution);
  }
  for (int i = 0; i <= k; ++i) ax.knots.push_back(hi);
  return ax;
}

}  // namespace

long SplineAxis::find_span(double x) const {
  int k = degree;
  long n = count;  // control count
  if (n == 1) return k;
  if (x >= knots[static_cast<size_t>(n)]) return n - 1;
  if (x <= knots[static_cast<size_t>(k)]) return k;
  // Interior knots are uniform, so the span index is direct arithmetic.
  double first_interior = knots[static_cast<size_t>(k + 1)];
  long off = static_cast<long>(std::floor((x - first_interior) / resolution)) + 1;
  long span = std::clamp(k + off, static_cast<long>(k), n - 1);
  // Guard the floor against boundary rounding.
  while (span > k && x < knots[static_cast<size_t>(span)]) --span;
  while (span < n - 1 && x >= knots[static_cast<size_t>(span + 1)]) ++span;
  return span;
}

long SplineAxis::basis(double x, double* weights) const {
  int k = degree;
  long span = find_span(x);
  if (k == 0) {
    weights[0] = 1.0;
    return span;
  }
  // Cox-de Boor triangular scheme (single span, nonzero entries only).
  double left[8], right[8];
  weights[0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    left[j] = x - knots[static_cast<size_t>(span + 1 - j)];
    right[j] = knots[static_cast<size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double denom = right[r + 1] + left[j - r];
      double temp = denom == 0.0 ? 0.0 : weights[r] / denom;
      weights[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    weights[j] = saved;
  }
  return span;
}

TerrainSurface TerrainSurface::fit(const ControlLattice& lattice, int degree_x, int degree_y) {
  if (lattice.empty()) throw EmptyLattice();
  if (degree_x < 0 || degree_y < 0 || degree_x > 7 || degree_y > 7) {
    throw std::invalid_argument("spline degree must be in [0, 7]");
  }
  auto rect = lattice.bounding_rect();

  TerrainSurface surf;
  surf.resolution_ = lattice.resolution;
  surf.ax_ = make_axis(rect.u_min, rect.width(), lattice.resolution, degree_x);
  surf.ay_ = make_axis(rect.v_min, rect.height(), lattice.resolution, degree_y);

  const double hole = std::numeric_limits<double>::quiet_NaN();
  surf.heights_ = Eigen::MatrixXd::Constant(rect.width(), rect.height(), hole);
  for (const auto& [idx, cp] : lattice.points) {
    surf.heights_(idx.u - rect.u_min, idx.v - rect.v_min) = cp.h;
  }

  // Fill holes from the nearest observed control; ties pick the lowest
  // height (conservative for clearance).
  std::vector<std::pair<CellIndex, double>> valid;
  valid.reserve(lattice.points.size());
  for (const auto& [idx, cp] : lattice.points) {
    valid.push_back({{idx.u - rect.u_min, idx.v - rect.v_min}, cp.h});
  }
  for (long i = 0; i < surf.heights_.rows(); ++i) {
    for (long j = 0; j < surf.heights_.cols(); ++j) {
      if (!std::isnan(surf.heights_(i, j))) continue;
      long best_d2 = std::numeric_limits<long>::max();
      double best_h = 0.0;
      for (const auto& [vidx, vh] : valid) {
        long du = vidx.u - i, dv = vidx.v - j;
        long d2 = du * du + dv * dv;
        if (d2 < best_d2 || (d2 == best_d2 && vh < best_h)) {
          best_d2 = d2;
          best_h = vh;
        }
      }
      surf.heights_(i, j) = best_h;
    }
  }
  return surf;
}

HeightQuery TerrainSurface::query(double x, double y) const {
  HeightQuery out;
  double cx = std::clamp(x, ax_.lo(), ax_.hi());
  double cy = std::clamp(y, ay_.lo(), ay_.hi());
  out.extrapolated = (cx != x) || (cy != y);

  double wx[8], wy[8];
  long span_x = ax_.basis(cx, wx);
  long span_y = ay_.basis(cy, wy);
  int kx = ax_.degree, ky = ay_.degree;

  double z = 0.0;
  for (int i = 0; i <= kx; ++i) {
    long row = span_x - kx + i;
    double acc = 0.0;
    for (int j = 0; j <= ky; ++j) {
      acc += wy[j] * heights_(row, span_y - ky + j);
    }
    z += wx[i] * acc;
  }
  out.z = z;
  return out;
}

AltitudeCommand altitude_command(const TerrainSurface& surface, double x, double y,
                                 double h_ref) {
  if (h_ref <= 0.0) throw std::invalid_argument("h_ref must be > 0");
  HeightQuery q = surface.query(x, y);
  return {q.z, q.z + h_ref, q.extrapolated};
}

TerrainPrior prior_from_surface(std::shared_ptr<const TerrainSurface> surface) {
  TerrainPrior prior;
  if (surface) {
    prior.height_query = [surface](double x, double y) -> std::optional<double> {
      return surface->query(x, y).z;
    };
  }
  return prior;
}

}  // namespace terrafollow
