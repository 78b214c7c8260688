#pragma once

#include "vemnn/error.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vemnn {

using Point = Eigen::Vector2d;

enum class BoundaryTag { dirichlet, neumann };

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& name);

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Box {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

/// A mesh edge. Vertex indices are stored with v[0] < v[1], which also fixes the
/// global edge direction (tangent points from v[0] to v[1]).
struct Edge {
  std::array<int, 2> v{};
  std::array<int, 2> cells{-1, -1};  // cells[1] == -1 on the boundary
  std::optional<BoundaryTag> tag;    // set iff the edge is on the boundary

  bool on_boundary() const { return cells[1] < 0; }
};

struct ElementGeometry {
  double diameter = 0.0;
  double area = 0.0;
  Point centroid = Point::Zero();
};

struct MeshQuality {
  double rho_star = 0.0;  // min over cells of inradius-about-centroid / h_E
  double rho_edge = 0.0;  // min over cells of shortest edge / h_E
  bool all_convex = true;
  std::vector<int> nonconvex_cells;
};

struct BoundaryEdgeTag {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::dirichlet;
};

/// Polygonal decomposition of a planar domain. Immutable after construction; the
/// constructor checks orientation, simplicity, edge consistency and boundary tags
/// and throws MeshError naming the offending cell or edge.
class PolygonalMesh {
public:
  PolygonalMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
                const std::vector<BoundaryEdgeTag>& boundary);

  /// Same as the main constructor with every boundary edge given `tag`.
  static PolygonalMesh with_uniform_boundary(std::vector<Point> vertices,
                                             std::vector<std::vector<int>> cells,
                                             BoundaryTag tag = BoundaryTag::dirichlet);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  std::span<const int> cell(int c) const { return cells_[static_cast<std::size_t>(c)]; }
  const std::vector<std::vector<int>>& cells() const { return cells_; }

  /// Global edge index of local edge j (from local vertex j to j+1) of cell c.
  std::span<const int> cell_edges(int c) const { return cell_edges_[static_cast<std::size_t>(c)]; }

  const ElementGeometry& geometry(int c) const { return geometry_[static_cast<std::size_t>(c)]; }

  /// max_E h_E
  double mesh_size() const { return mesh_size_; }
  double total_area() const;
  Box bounding_box() const;

  std::vector<BoundaryEdgeTag> boundary_tags() const;

  bool operator==(const PolygonalMesh& other) const;

private:
  void build_edges(const std::vector<BoundaryEdgeTag>& boundary);
  void compute_geometry();

  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> cell_edges_;
  std::vector<ElementGeometry> geometry_;
  double mesh_size_ = 0.0;
};

/// Signed shoelace area of a closed vertex loop.
double signed_area(std::span<const Point> loop);

ElementGeometry compute_element_geometry(std::span<const Point> loop);

// Generators of the test mesh families. All tag every boundary edge dirichlet.

PolygonalMesh generate_cartesian(int n, const Box& box);

/// Cartesian vertices moved by a smooth sine displacement of amplitude
/// `amplitude` times the cell side; boundary vertices stay fixed.
PolygonalMesh generate_distorted_quad(int n, const Box& box, double amplitude = 0.1);

/// Clipped Voronoi diagram of n_cells random generators after `lloyd_iters`
/// centroidal relaxation steps. Deterministic for a fixed seed.
PolygonalMesh generate_voronoi_lloyd(int n_cells, const Box& box, std::uint64_t seed,
                                     int lloyd_iters = 100);

enum class MeshFamily { cartesian, quad, voronoi };

MeshFamily mesh_family_from_string(const std::string& name);
std::string to_string(MeshFamily family);

/// Cells per side at a "1/h" level: level cells per unit length, so the
/// square (-1,1)^2 at level 4 has 8 x 8 cells.
int family_cells_per_side(int level, const Box& box);

/// Mesh of a family at a "1/h" level: n x n cells for the tensor families and
/// n^2 cells for Voronoi, n = family_cells_per_side(level, box).
PolygonalMesh generate_family(MeshFamily family, int level, const Box& box, std::uint64_t seed = 1);

MeshQuality validate(const PolygonalMesh& mesh);

std::string mesh_to_json(const PolygonalMesh& mesh);
PolygonalMesh mesh_from_json(const std::string& text);

void write_mesh(const PolygonalMesh& mesh, const std::filesystem::path& path);
PolygonalMesh read_mesh(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of the canonical JSON serialization.
std::uint64_t mesh_checksum(const PolygonalMesh& mesh);

} // namespace vemnn
