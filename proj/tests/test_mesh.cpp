#include "vemnn/mesh.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace vemnn;

namespace {

const Box unit{0.0, 1.0, 0.0, 1.0};
const Box square{-1.0, 1.0, -1.0, 1.0};

std::vector<PolygonalMesh> all_families(const Box& box, int level) {
  std::vector<PolygonalMesh> out;
  for (MeshFamily f : {MeshFamily::cartesian, MeshFamily::quad, MeshFamily::voronoi})
    out.push_back(generate_family(f, level, box, 3));
  return out;
}

} // namespace

TEST(Mesh, CartesianCounts) {
  const PolygonalMesh m = generate_family(MeshFamily::cartesian, 4, unit);
  EXPECT_EQ(m.num_cells(), 16);
  EXPECT_EQ(m.num_vertices(), 25);
  EXPECT_EQ(m.num_edges(), 40);
  int boundary = 0;
  for (const Edge& e : m.edges()) boundary += e.on_boundary();
  EXPECT_EQ(boundary, 16);
}

TEST(Mesh, LevelCountsCellsPerUnitLength) {
  EXPECT_EQ(family_cells_per_side(4, unit), 4);
  EXPECT_EQ(family_cells_per_side(4, square), 8);
  EXPECT_EQ(generate_family(MeshFamily::cartesian, 32, square).num_cells(), 4096);
  EXPECT_EQ(generate_family(MeshFamily::voronoi, 4, square, 1).num_cells(), 64);
}

TEST(Mesh, EulerFormulaAndAreaForAllFamilies) {
  for (const auto& m : all_families(square, 4)) {
    EXPECT_EQ(m.num_vertices() - m.num_edges() + m.num_cells(), 1);
    EXPECT_NEAR(m.total_area(), square.area(), 1e-12);
    double sum = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) {
      const auto& g = m.geometry(c);
      EXPECT_GT(g.area, 0.0);
      sum += g.area;
    }
    EXPECT_NEAR(sum, 4.0, 1e-12);
  }
}

TEST(Mesh, EdgesAreConsistentlyOriented) {
  for (const auto& m : all_families(unit, 3)) {
    for (const Edge& e : m.edges()) {
      EXPECT_LT(e.v[0], e.v[1]);
      EXPECT_EQ(e.on_boundary(), e.tag.has_value());
    }
    // Every interior edge is shared by exactly two cells that traverse it in
    // opposite directions.
    for (int c = 0; c < m.num_cells(); ++c) {
      const auto loop = m.cell(c);
      const auto edges = m.cell_edges(c);
      for (std::size_t j = 0; j < loop.size(); ++j) {
        const Edge& e = m.edge(edges[j]);
        const int a = loop[j], b = loop[(j + 1) % loop.size()];
        EXPECT_TRUE((e.v[0] == a && e.v[1] == b) || (e.v[0] == b && e.v[1] == a));
        EXPECT_TRUE(e.cells[0] == c || e.cells[1] == c);
      }
    }
  }
}

TEST(Mesh, VoronoiIsDeterministicPerSeed) {
  const PolygonalMesh a = generate_family(MeshFamily::voronoi, 8, unit, 7);
  const PolygonalMesh b = generate_family(MeshFamily::voronoi, 8, unit, 7);
  const PolygonalMesh c = generate_family(MeshFamily::voronoi, 8, unit, 8);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(mesh_checksum(a), mesh_checksum(b));
  EXPECT_NE(mesh_checksum(a), mesh_checksum(c));
}

TEST(Mesh, VoronoiCellsAreConvexAndShapeRegular) {
  const MeshQuality q = validate(generate_family(MeshFamily::voronoi, 8, unit, 2));
  EXPECT_TRUE(q.all_convex);
  EXPECT_GT(q.rho_star, 0.1);
  EXPECT_GT(q.rho_edge, 0.0);
}

TEST(Mesh, JsonRoundTripIsExact) {
  for (const auto& m : all_families(square, 2)) {
    const PolygonalMesh back = mesh_from_json(mesh_to_json(m));
    EXPECT_TRUE(back == m);
    EXPECT_EQ(mesh_checksum(back), mesh_checksum(m));
  }
  const auto path = std::filesystem::temp_directory_path() / "vemnn_test_mesh.json";
  const PolygonalMesh m = generate_family(MeshFamily::quad, 3, unit);
  write_mesh(m, path);
  EXPECT_TRUE(read_mesh(path) == m);
  std::filesystem::remove(path);
}

TEST(Mesh, RejectsBadInput) {
  EXPECT_THROW(read_mesh("/nonexistent/vemnn/mesh.json"), Error);
  EXPECT_THROW(mesh_family_from_string("hexagonal"), Error);
  // Clockwise cell.
  EXPECT_THROW(PolygonalMesh::with_uniform_boundary({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 3, 2, 1}}), MeshError);
  // Repeated vertex in a cell.
  EXPECT_THROW(PolygonalMesh::with_uniform_boundary({{0, 0}, {1, 0}, {1, 1}}, {{0, 1, 1, 2}}), MeshError);
  EXPECT_THROW(mesh_from_json("{\"vertices\": [[0, 0]]}"), Error);
}
