#include "vemnn/mesh.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

namespace vemnn {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

std::vector<Point> loop_points(const std::vector<Point>& vertices, std::span<const int> cell) {
  std::vector<Point> pts;
  pts.reserve(cell.size());
  for (int v : cell) pts.push_back(vertices[static_cast<std::size_t>(v)]);
  return pts;
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32U) | hi;
}

} // namespace

std::string to_string(BoundaryTag tag) { return tag == BoundaryTag::dirichlet ? "dirichlet" : "neumann"; }

BoundaryTag boundary_tag_from_string(const std::string& name) {
  if (name == "dirichlet") return BoundaryTag::dirichlet;
  if (name == "neumann") return BoundaryTag::neumann;
  throw MeshError("unknown boundary tag '" + name + "'");
}

double signed_area(std::span<const Point> loop) {
  double a = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(loop[i], loop[(i + 1) % n]);
  return 0.5 * a;
}

ElementGeometry compute_element_geometry(std::span<const Point> loop) {
  ElementGeometry g;
  const std::size_t n = loop.size();
  // Centroid relative to the first vertex to limit cancellation.
  const Point o = loop[0];
  double a2 = 0.0;
  Point c = Point::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = loop[i] - o;
    const Point q = loop[(i + 1) % n] - o;
    const double w = cross(p, q);
    a2 += w;
    c += w * (p + q);
  }
  g.area = 0.5 * a2;
  g.centroid = o + c / (3.0 * a2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.diameter = std::max(g.diameter, (loop[i] - loop[j]).norm());
  return g;
}

PolygonalMesh::PolygonalMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
                             const std::vector<BoundaryEdgeTag>& boundary)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const int nv = num_vertices();
  for (int c = 0; c < num_cells(); ++c) {
    const auto& loop = cells_[static_cast<std::size_t>(c)];
    if (loop.size() < 3) throw MeshError("cell " + std::to_string(c) + " has fewer than 3 vertices");
    for (int v : loop)
      if (v < 0 || v >= nv)
        throw MeshError("cell " + std::to_string(c) + " references vertex " + std::to_string(v) +
                        " out of range");
    auto sorted = loop;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw MeshError("cell " + std::to_string(c) + " repeats a vertex");
    const auto pts = loop_points(vertices_, loop);
    const double area = signed_area(pts);
    if (!(area > 0.0)) {
      std::ostringstream msg;
      msg << "cell " << c << (area < 0.0 ? " is not counterclockwise" : " has zero area")
          << " (signed area " << area << ")";
      throw MeshError(msg.str());
    }
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
          throw MeshError("cell " + std::to_string(c) + " is not a simple polygon");
      }
  }
  build_edges(boundary);
  compute_geometry();
}

PolygonalMesh PolygonalMesh::with_uniform_boundary(std::vector<Point> vertices,
                                                   std::vector<std::vector<int>> cells, BoundaryTag tag) {
  // Boundary edges are those referenced by a single cell.
  std::unordered_map<std::uint64_t, int> count;
  for (const auto& loop : cells)
    for (std::size_t i = 0; i < loop.size(); ++i) ++count[edge_key(loop[i], loop[(i + 1) % loop.size()])];
  std::vector<BoundaryEdgeTag> tags;
  for (const auto& loop : cells)
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i];
      const int b = loop[(i + 1) % loop.size()];
      if (count[edge_key(a, b)] == 1) tags.push_back({a, b, tag});
    }
  return PolygonalMesh(std::move(vertices), std::move(cells), tags);
}

void PolygonalMesh::build_edges(const std::vector<BoundaryEdgeTag>& boundary) {
  std::unordered_map<std::uint64_t, int> index;
  cell_edges_.resize(cells_.size());
  for (int c = 0; c < num_cells(); ++c) {
    const auto& loop = cells_[static_cast<std::size_t>(c)];
    auto& ce = cell_edges_[static_cast<std::size_t>(c)];
    ce.resize(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i];
      const int b = loop[(i + 1) % loop.size()];
      const auto key = edge_key(a, b);
      auto it = index.find(key);
      if (it == index.end()) {
        Edge e;
        e.v = {std::min(a, b), std::max(a, b)};
        e.cells = {c, -1};
        index.emplace(key, num_edges());
        ce[i] = num_edges();
        edges_.push_back(e);
      } else {
        Edge& e = edges_[static_cast<std::size_t>(it->second)];
        if (e.cells[1] >= 0 || e.cells[0] == c)
          throw MeshError("edge (" + std::to_string(e.v[0]) + "," + std::to_string(e.v[1]) +
                          ") is referenced by more than two cells (cell " + std::to_string(c) + ")");
        e.cells[1] = c;
        ce[i] = it->second;
      }
    }
  }
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    const auto& t = boundary[k];
    auto it = index.find(edge_key(t.a, t.b));
    if (it == index.end())
      throw MeshError("boundary[" + std::to_string(k) + "]: (" + std::to_string(t.a) + "," +
                      std::to_string(t.b) + ") is not an edge of the mesh");
    Edge& e = edges_[static_cast<std::size_t>(it->second)];
    if (!e.on_boundary())
      throw MeshError("boundary[" + std::to_string(k) + "]: edge (" + std::to_string(t.a) + "," +
                      std::to_string(t.b) + ") is interior");
    if (e.tag)
      throw MeshError("boundary[" + std::to_string(k) + "]: edge (" + std::to_string(t.a) + "," +
                      std::to_string(t.b) + ") tagged twice");
    e.tag = t.tag;
  }
  for (const auto& e : edges_)
    if (e.on_boundary() && !e.tag)
      throw MeshError("boundary edge (" + std::to_string(e.v[0]) + "," + std::to_string(e.v[1]) +
                      ") has no boundary tag");
}

void PolygonalMesh::compute_geometry() {
  geometry_.resize(cells_.size());
  mesh_size_ = 0.0;
  for (int c = 0; c < num_cells(); ++c) {
    const auto pts = loop_points(vertices_, cell(c));
    geometry_[static_cast<std::size_t>(c)] = compute_element_geometry(pts);
    mesh_size_ = std::max(mesh_size_, geometry_[static_cast<std::size_t>(c)].diameter);
  }
}

double PolygonalMesh::total_area() const {
  double a = 0.0;
  for (const auto& g : geometry_) a += g.area;
  return a;
}

Box PolygonalMesh::bounding_box() const {
  Box b{vertices_[0].x(), vertices_[0].x(), vertices_[0].y(), vertices_[0].y()};
  for (const auto& p : vertices_) {
    b.x0 = std::min(b.x0, p.x());
    b.x1 = std::max(b.x1, p.x());
    b.y0 = std::min(b.y0, p.y());
    b.y1 = std::max(b.y1, p.y());
  }
  return b;
}

std::vector<BoundaryEdgeTag> PolygonalMesh::boundary_tags() const {
  std::vector<BoundaryEdgeTag> out;
  for (const auto& e : edges_)
    if (e.on_boundary()) out.push_back({e.v[0], e.v[1], *e.tag});
  return out;
}

bool PolygonalMesh::operator==(const PolygonalMesh& other) const {
  if (vertices_.size() != other.vertices_.size() || cells_ != other.cells_) return false;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i] != other.vertices_[i]) return false;
  if (edges_.size() != other.edges_.size()) return false;
  for (std::size_t i = 0; i < edges_.size(); ++i)
    if (edges_[i].v != other.edges_[i].v || edges_[i].cells != other.edges_[i].cells ||
        edges_[i].tag != other.edges_[i].tag)
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Generators

PolygonalMesh generate_cartesian(int n, const Box& box) {
  if (n < 1) throw MeshError("cartesian mesh needs n >= 1");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.emplace_back(box.x0 + box.width() * i / n, box.y0 + box.height() * j / n);
  // Pin the far boundary exactly.
  for (int j = 0; j <= n; ++j) vertices[static_cast<std::size_t>(j * (n + 1) + n)].x() = box.x1;
  for (int i = 0; i <= n; ++i) vertices[static_cast<std::size_t>(n * (n + 1) + i)].y() = box.y1;
  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v0 = j * (n + 1) + i;
      cells.push_back({v0, v0 + 1, v0 + n + 2, v0 + n + 1});
    }
  return PolygonalMesh::with_uniform_boundary(std::move(vertices), std::move(cells));
}

PolygonalMesh generate_distorted_quad(int n, const Box& box, double amplitude) {
  if (n < 1) throw MeshError("quadrilateral mesh needs n >= 1");
  const PolygonalMesh base = generate_cartesian(n, box);
  if (amplitude == 0.0) return base;
  std::vector<Point> vertices = base.vertices();
  const double sx = box.width() / n;
  const double sy = box.height() / n;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) {
      auto& p = vertices[static_cast<std::size_t>(j * (n + 1) + i)];
      const double xh = static_cast<double>(i) / n;
      const double yh = static_cast<double>(j) / n;
      const double s = std::sin(two_pi * xh) * std::sin(two_pi * yh);
      p.x() += amplitude * sx * s;
      p.y() += amplitude * sy * s;
    }
  PolygonalMesh mesh = PolygonalMesh::with_uniform_boundary(std::move(vertices), base.cells());
  const auto q = validate(mesh);
  if (!q.all_convex)
    throw MeshError("distortion amplitude " + std::to_string(amplitude) + " produced non-convex cell " +
                    std::to_string(q.nonconvex_cells.front()));
  return mesh;
}

namespace {

using Polygon = std::vector<Point>;

Polygon box_polygon(const Box& b) { return {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}; }

// Keeps the part of `poly` with (x - m).d <= 0.
Polygon clip_halfplane(const Polygon& poly, const Point& m, const Point& d) {
  Polygon out;
  out.reserve(poly.size() + 1);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    const double fp = (p - m).dot(d);
    const double fq = (q - m).dot(d);
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

struct SeedGrid {
  SeedGrid(const std::vector<Point>& seeds, const Box& box) : seeds(seeds), box(box) {
    nb = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(seeds.size())))));
    bw = box.width() / nb;
    bh = box.height() / nb;
    buckets.assign(static_cast<std::size_t>(nb * nb), {});
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      auto [bx, by] = bucket_of(seeds[i]);
      buckets[static_cast<std::size_t>(by * nb + bx)].push_back(static_cast<int>(i));
    }
  }
  std::pair<int, int> bucket_of(const Point& p) const {
    int bx = static_cast<int>((p.x() - box.x0) / bw);
    int by = static_cast<int>((p.y() - box.y0) / bh);
    return {std::clamp(bx, 0, nb - 1), std::clamp(by, 0, nb - 1)};
  }
  const std::vector<Point>& seeds;
  Box box;
  int nb = 1;
  double bw = 1.0, bh = 1.0;
  std::vector<std::vector<int>> buckets;
};

Polygon voronoi_cell(int i, const SeedGrid& grid) {
  const Point& s = grid.seeds[static_cast<std::size_t>(i)];
  Polygon poly = box_polygon(grid.box);
  auto [bx, by] = grid.bucket_of(s);
  const double ring_width = std::min(grid.bw, grid.bh);
  for (int k = 0; k <= grid.nb; ++k) {
    for (int jy = by - k; jy <= by + k; ++jy)
      for (int jx = bx - k; jx <= bx + k; ++jx) {
        if (std::max(std::abs(jx - bx), std::abs(jy - by)) != k) continue;
        if (jx < 0 || jy < 0 || jx >= grid.nb || jy >= grid.nb) continue;
        for (int j : grid.buckets[static_cast<std::size_t>(jy * grid.nb + jx)]) {
          if (j == i) continue;
          const Point& t = grid.seeds[static_cast<std::size_t>(j)];
          poly = clip_halfplane(poly, 0.5 * (s + t), t - s);
        }
      }
    double radius = 0.0;
    for (const auto& p : poly) radius = std::max(radius, (p - s).norm());
    // Unvisited generators lie at distance >= k * ring_width; they cut the cell
    // only if closer than twice its radius.
    if (k * ring_width >= 2.0 * radius) break;
  }
  return poly;
}

std::vector<Polygon> voronoi_cells(const std::vector<Point>& seeds, const Box& box) {
  const SeedGrid grid(seeds, box);
  std::vector<Polygon> cells(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) cells[i] = voronoi_cell(static_cast<int>(i), grid);
  return cells;
}

bool has_duplicate_seeds(const std::vector<Point>& seeds, double tol) {
  std::vector<Point> s = seeds;
  std::sort(s.begin(), s.end(), [](const Point& a, const Point& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size() && s[j].x() - s[i].x() <= tol; ++j)
      if ((s[j] - s[i]).norm() <= tol) return true;
  return false;
}

// Builds a conforming mesh from independently clipped cells by merging
// coincident vertices.
PolygonalMesh assemble_voronoi_mesh(const std::vector<Polygon>& polys, const Box& box) {
  const double scale = std::max(box.width(), box.height());
  const double tol = 1e-9 * scale;
  std::vector<Point> vertices;
  std::unordered_map<std::uint64_t, std::vector<int>> hash;
  auto key = [&](long long ix, long long iy) {
    return (static_cast<std::uint64_t>(ix) << 32U) ^ static_cast<std::uint64_t>(iy & 0xffffffffLL);
  };
  auto find_or_add = [&](Point p) {
    if (std::abs(p.x() - box.x0) <= tol) p.x() = box.x0;
    if (std::abs(p.x() - box.x1) <= tol) p.x() = box.x1;
    if (std::abs(p.y() - box.y0) <= tol) p.y() = box.y0;
    if (std::abs(p.y() - box.y1) <= tol) p.y() = box.y1;
    const auto ix = static_cast<long long>(std::floor((p.x() - box.x0) / (4.0 * tol)));
    const auto iy = static_cast<long long>(std::floor((p.y() - box.y0) / (4.0 * tol)));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = hash.find(key(ix + dx, iy + dy));
        if (it == hash.end()) continue;
        for (int v : it->second)
          if ((vertices[static_cast<std::size_t>(v)] - p).norm() <= tol) return v;
      }
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(p);
    hash[key(ix, iy)].push_back(id);
    return id;
  };
  std::vector<std::vector<int>> cells;
  cells.reserve(polys.size());
  for (const auto& poly : polys) {
    std::vector<int> loop;
    for (const auto& p : poly) {
      const int v = find_or_add(p);
      if (loop.empty() || loop.back() != v) loop.push_back(v);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() < 3) throw MeshError("degenerate Voronoi cell after vertex merging");
    cells.push_back(std::move(loop));
  }
  PolygonalMesh mesh = PolygonalMesh::with_uniform_boundary(std::move(vertices), std::move(cells));
  for (const auto& e : mesh.edges()) {
    if (!e.on_boundary()) continue;
    const Point& a = mesh.vertex(e.v[0]);
    const Point& b = mesh.vertex(e.v[1]);
    const bool on_box = (a.x() == box.x0 && b.x() == box.x0) || (a.x() == box.x1 && b.x() == box.x1) ||
                        (a.y() == box.y0 && b.y() == box.y0) || (a.y() == box.y1 && b.y() == box.y1);
    if (!on_box) throw MeshError("non-conforming Voronoi diagram (interior edge left unmatched)");
  }
  return mesh;
}

} // namespace

PolygonalMesh generate_voronoi_lloyd(int n_cells, const Box& box, std::uint64_t seed, int lloyd_iters) {
  if (n_cells < 1) throw MeshError("Voronoi mesh needs n_cells >= 1");
  if (lloyd_iters < 0) throw MeshError("lloyd_iters must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.x0, box.x1);
  std::uniform_real_distribution<double> uy(box.y0, box.y1);
  std::vector<Point> seeds(static_cast<std::size_t>(n_cells));
  for (auto& s : seeds) s = Point(ux(rng), uy(rng));

  const double dup_tol = 1e-10 * std::max(box.width(), box.height());
  constexpr int max_attempts = 10;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (!has_duplicate_seeds(seeds, dup_tol)) break;
    if (attempt + 1 == max_attempts) throw MeshError("Voronoi generators remain duplicated after perturbation");
    std::normal_distribution<double> jitter(0.0, 1e-6 * std::max(box.width(), box.height()));
    for (auto& s : seeds) {
      s += Point(jitter(rng), jitter(rng));
      s.x() = std::clamp(s.x(), box.x0, box.x1);
      s.y() = std::clamp(s.y(), box.y0, box.y1);
    }
  }

  for (int it = 0; it < lloyd_iters; ++it) {
    const auto cells = voronoi_cells(seeds, box);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = compute_element_geometry(cells[i]).centroid;
  }
  return assemble_voronoi_mesh(voronoi_cells(seeds, box), box);
}

MeshFamily mesh_family_from_string(const std::string& name) {
  if (name == "cartesian") return MeshFamily::cartesian;
  if (name == "quad" || name == "quadrilateral") return MeshFamily::quad;
  if (name == "voronoi" || name == "random") return MeshFamily::voronoi;
  throw UsageError("unknown mesh family '" + name + "' (expected cartesian|quad|voronoi)");
}

std::string to_string(MeshFamily family) {
  switch (family) {
  case MeshFamily::cartesian: return "cartesian";
  case MeshFamily::quad: return "quad";
  case MeshFamily::voronoi: return "voronoi";
  }
  return "unknown";
}

int family_cells_per_side(int level, const Box& box) {
  return std::max(1, static_cast<int>(std::lround(level * box.width())));
}

PolygonalMesh generate_family(MeshFamily family, int level, const Box& box, std::uint64_t seed) {
  if (level < 1) throw UsageError("mesh level must be >= 1");
  const int n = family_cells_per_side(level, box);
  switch (family) {
  case MeshFamily::cartesian: return generate_cartesian(n, box);
  case MeshFamily::quad: return generate_distorted_quad(n, box, 0.1);
  case MeshFamily::voronoi: return generate_voronoi_lloyd(n * n, box, seed, 100);
  }
  throw UsageError("unknown mesh family");
}

MeshQuality validate(const PolygonalMesh& mesh) {
  MeshQuality q;
  q.rho_star = std::numeric_limits<double>::infinity();
  q.rho_edge = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto loop = mesh.cell(c);
    const auto& g = mesh.geometry(c);
    if (!(g.area > 0.0)) throw MeshError("cell " + std::to_string(c) + " has non-positive area");
    const std::size_t n = loop.size();
    double min_edge = std::numeric_limits<double>::infinity();
    double inradius = std::numeric_limits<double>::infinity();
    bool convex = true;
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = mesh.vertex(loop[i]);
      const Point& b = mesh.vertex(loop[(i + 1) % n]);
      const Point& d = mesh.vertex(loop[(i + 2) % n]);
      const double len = (b - a).norm();
      min_edge = std::min(min_edge, len);
      // Signed distance of the centroid to the edge line (positive inside).
      inradius = std::min(inradius, cross(b - a, g.centroid - a) / len);
      if (cross(b - a, d - b) < -1e-12 * g.diameter * g.diameter) convex = false;
    }
    if (!convex || inradius <= 0.0) {
      q.all_convex = false;
      q.nonconvex_cells.push_back(c);
    }
    q.rho_edge = std::min(q.rho_edge, min_edge / g.diameter);
    q.rho_star = std::min(q.rho_star, std::max(inradius, 0.0) / g.diameter);
  }
  // Edge consistency: every interior edge has two distinct cells.
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edge(e);
    if (ed.cells[0] < 0 || ed.cells[0] == ed.cells[1])
      throw MeshError("edge " + std::to_string(e) + " has inconsistent cell references");
    if (ed.on_boundary() != ed.tag.has_value())
      throw MeshError("edge " + std::to_string(e) + " has inconsistent boundary tag");
  }
  return q;
}

// ---------------------------------------------------------------------------
// Serialization

std::string mesh_to_json(const PolygonalMesh& mesh) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& p : mesh.vertices()) j["vertices"].push_back({p.x(), p.y()});
  j["cells"] = mesh.cells();
  j["boundary"] = nlohmann::json::array();
  for (const auto& t : mesh.boundary_tags()) j["boundary"].push_back({t.a, t.b, to_string(t.tag)});
  return j.dump();
}

PolygonalMesh mesh_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min(static_cast<std::size_t>(e.byte), text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw MeshError("mesh file line " + std::to_string(line) + ": " + e.what());
  }
  for (const char* key : {"vertices", "cells", "boundary"})
    if (!j.contains(key) || !j[key].is_array()) throw MeshError(std::string("mesh file: missing array '") + key + "'");

  std::vector<Point> vertices;
  for (std::size_t i = 0; i < j["vertices"].size(); ++i) {
    const auto& v = j["vertices"][i];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw MeshError("vertices[" + std::to_string(i) + "]: expected [x, y]");
    vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  std::vector<std::vector<int>> cells;
  for (std::size_t i = 0; i < j["cells"].size(); ++i) {
    const auto& c = j["cells"][i];
    if (!c.is_array()) throw MeshError("cells[" + std::to_string(i) + "]: expected index list");
    std::vector<int> loop;
    for (const auto& v : c) {
      if (!v.is_number_integer()) throw MeshError("cells[" + std::to_string(i) + "]: non-integer vertex index");
      loop.push_back(v.get<int>());
    }
    cells.push_back(std::move(loop));
  }
  std::vector<BoundaryEdgeTag> tags;
  for (std::size_t i = 0; i < j["boundary"].size(); ++i) {
    const auto& b = j["boundary"][i];
    if (!b.is_array() || b.size() != 3 || !b[0].is_number_integer() || !b[1].is_number_integer() ||
        !b[2].is_string())
      throw MeshError("boundary[" + std::to_string(i) + "]: expected [ia, ib, \"dirichlet\"|\"neumann\"]");
    try {
      tags.push_back({b[0].get<int>(), b[1].get<int>(), boundary_tag_from_string(b[2].get<std::string>())});
    } catch (const MeshError& e) {
      throw MeshError("boundary[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return PolygonalMesh(std::move(vertices), std::move(cells), tags);
}

void write_mesh(const PolygonalMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path.string() + "' for writing");
  out << mesh_to_json(mesh) << '\n';
}

PolygonalMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return mesh_from_json(buf.str());
}

std::uint64_t mesh_checksum(const PolygonalMesh& mesh) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : mesh_to_json(mesh)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace vemnn
