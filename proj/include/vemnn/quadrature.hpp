#pragma once

#include "vemnn/mesh.hpp"

#include <span>
#include <vector>

namespace vemnn {

struct QuadratureRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
};

/// Gauss-Legendre nodes/weights on [0, 1].
struct GaussRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0,1]; exact for degree 2n-1.
const GaussRule1D& gauss_legendre(int n);

/// Collapsed-coordinate rule on triangle (a, b, c), exact up to `degree`. The
/// collapsed vertex is `a`. With `graded_levels` > 0 the radial direction is
/// split geometrically towards `a` (for integrands singular at `a`).
QuadratureRule triangle_rule(const Point& a, const Point& b, const Point& c, int degree, int graded_levels = 0);

/// Centroid-fan triangulation composed with a triangle rule. Requires the cell
/// to be star-shaped with respect to its centroid; throws ElementError otherwise.
QuadratureRule polygon_rule(std::span<const Point> loop, const ElementGeometry& geometry, int degree);
QuadratureRule polygon_rule(const PolygonalMesh& mesh, int cell, int degree);

/// Like polygon_rule, but when `singular_point` lies in the closed cell the fan is
/// rooted there and each sub-triangle is graded towards it.
QuadratureRule singular_polygon_rule(std::span<const Point> loop, const ElementGeometry& geometry, int degree,
                                     const Point& singular_point, int graded_levels = 40);

/// Gauss-Legendre on segment [a, b] with ceil((degree+1)/2) points.
QuadratureRule edge_rule(const Point& a, const Point& b, int degree);

} // namespace vemnn
