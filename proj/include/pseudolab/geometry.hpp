#pragma once

/// @file geometry.hpp
/// @brief Planar convex hulls over complex sample points.

#include <span>
#include <vector>

#include "pseudolab/types.hpp"

namespace pseudolab {

double segment_distance(Complex p, Complex a, Complex b);

/// Distance from p to the rightward ray {origin + t : t >= 0}.
double ray_distance(Complex p, Complex origin);

/// Convex hull, vertices counter-clockwise, no three collinear. May be
/// degenerate (a single point or a segment).
class ConvexPolygon {
public:
  ConvexPolygon() = default;
  /// Monotone chain; points closer than dedup_tol are merged first.
  static ConvexPolygon hull_of(std::span<const Complex> points, double dedup_tol = 1e-12);

  const std::vector<Complex>& vertices() const { return vertices_; }
  bool empty() const { return vertices_.empty(); }

  bool contains(Complex p, double tol = 0.0) const;
  /// Zero inside, Euclidean distance to the boundary outside.
  double distance(Complex p) const;
  /// Smallest real part over the horizontal slice Im = y, if the slice meets the hull.
  bool leftmost_at(double y, double& x_left) const;

private:
  std::vector<Complex> vertices_;
};

}  // namespace pseudolab
