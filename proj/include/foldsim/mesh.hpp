#pragma once

#include "foldsim/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace foldsim {

enum class EdgeTag : std::uint8_t {
  Interior,
  Boundary,   // outer boundary without displacement data
  Dirichlet,  // gamma_D, compressive boundary data
  Symmetry,   // gamma_sym, mirror line y = 0
  Crease,
};

std::string to_string(EdgeTag tag);
EdgeTag edge_tag_from_string(const std::string& s);

struct Circle {
  Point2 center{0.0, 0.0};
  double radius = 1.0;

  /// Radial projection onto the circle.
  Point2 project(const Point2& p) const;
};

enum class CreaseSetting {
  S1,  // curved crease, continuity along the whole crease
  S2,  // polygonal crease, continuity along the whole crease
  S3,  // polygonal crease, continuity only at the crease vertices
};

std::string to_string(CreaseSetting s);
CreaseSetting crease_setting_from_string(const std::string& s);

/// Crease line of the half-domain scenario.
///
/// The exact curve is the circular arc b(s) = center + r (cos phi, sin phi),
/// phi = angle_begin + sign * s / r, parametrized by arclength s in
/// [0, length()]. `path` is the discrete crease path from its end on the
/// symmetry line to its end on the lower boundary; `path_is_vertex[i]` marks
/// the crease vertices c_i (the points where S3 keeps continuity).
struct CreaseSpec {
  Circle circle;
  double angle_begin = 0.0;
  double angle_end = -kPi / 6.0;
  std::vector<Point2> path;
  std::vector<bool> path_is_vertex;
  CreaseSetting setting = CreaseSetting::S1;

  double length() const;
  Point2 point(double s) const;
  Vec2 derivative(double s) const;
  /// Crease vertices c_0, ..., c_m (path points flagged as vertices).
  std::vector<Point2> vertices() const;
};

/// Crease of the reference experiment: the arc of the unit circle between
/// (1, 0) and (sqrt(3)/2, -1/2). The polygonal approximation is the lower half
/// of the full-domain polyline with `full_vertex_count` vertices (endpoints
/// included) placed at equal arclength on the full arc; where the full
/// polyline crosses the symmetry line through a segment, that crossing point
/// becomes the path start but is not a crease vertex.
CreaseSpec reference_crease(CreaseSetting setting, int full_vertex_count = 4);

/// Endpoints of the exact curve plus n interior vertices at equal arclength.
std::vector<Point2> crease_polyline(const CreaseSpec& crease, int n_interior_vertices);

struct EdgeInfo {
  EdgeTag tag = EdgeTag::Interior;
  int curve = -1;  // index into the mesh curve list, -1 for straight
};

using EdgeKey = std::pair<int, int>;  // (min vertex, max vertex)

inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// Plain description of a mesh; input to Mesh and output of Mesh::data().
struct MeshData {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<int> subdomains;                // 1 or 2 per triangle; empty means all 1
  std::map<EdgeKey, EdgeInfo> edge_info;      // edges without entry: Interior/Boundary
  std::vector<Circle> curves;
  int geometry_order = 1;            // order of the isoparametric map of curved triangles
  std::vector<int> crease_vertices;  // vertex ids of crease vertices c_i
};

struct Edge {
  std::array<int, 2> v{-1, -1};     // v[0] < v[1]; global orientation v[0] -> v[1]
  std::array<int, 2> tri{-1, -1};   // tri[0] < tri[1]; tri[1] = -1 on the boundary
  std::array<int, 2> local{-1, -1}; // local edge index in tri[0], tri[1]
  EdgeTag tag = EdgeTag::Interior;
  int curve = -1;

  bool on_boundary() const { return tri[1] < 0; }
};

/// Conforming triangulation with optional curved (isoparametric) edges and
/// crease topology. Immutable after construction.
///
/// The unit normal of an edge points out of tri[0] (into tri[1] for interior
/// edges), which fixes the sign of jumps.
class Mesh {
 public:
  Mesh() = default;
  /// Validates conformity, tags and positivity of the mapping Jacobian.
  explicit Mesh(MeshData data);

  const MeshData& data() const { return data_; }
  const std::vector<Point2>& vertices() const { return data_.vertices; }
  const std::vector<std::array<int, 3>>& triangles() const { return data_.triangles; }
  int num_vertices() const { return static_cast<int>(data_.vertices.size()); }
  int num_triangles() const { return static_cast<int>(data_.triangles.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  int subdomain(int t) const { return data_.subdomains[static_cast<std::size_t>(t)]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::array<int, 3>& triangle_edges(int t) const {
    return tri_edges_[static_cast<std::size_t>(t)];
  }
  /// Edge id between two vertices, or -1.
  int find_edge(int a, int b) const;

  const std::vector<Circle>& curves() const { return data_.curves; }
  int geometry_order() const { return data_.geometry_order; }
  /// 1 for straight triangles, geometry_order() for triangles with a curved edge.
  int triangle_geometry_order(int t) const { return tri_order_[static_cast<std::size_t>(t)]; }
  /// Isoparametric nodes of triangle t in the LagrangeBasis node layout.
  const std::vector<Point2>& geometry_nodes(int t) const {
    return geometry_nodes_[static_cast<std::size_t>(t)];
  }

  const std::vector<int>& crease_vertices() const { return data_.crease_vertices; }
  std::vector<int> edges_with_tag(EdgeTag tag) const;
  /// Vertices incident to crease edges.
  std::vector<int> crease_path_vertices() const;

  double area() const;
  double max_diameter() const;

  /// Number of connected components of the dual graph when crease edges are
  /// not crossed.
  int components_without_crease() const;

  /// Edge-node positions of a (possibly curved) edge: point at parameter s in
  /// [0, 1] along the global orientation.
  Point2 edge_point(int e, double s) const;

 private:
  MeshData data_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::map<EdgeKey, int> edge_index_;
  std::vector<int> tri_order_;
  std::vector<std::vector<Point2>> geometry_nodes_;
};

/// Mesh of the half domain (0,2) x (-1/2,0) whose edges contain the crease
/// path (S2/S3) or the curved crease (S1, curved to geometry_order). Edges on
/// [0,0.2] x {-1/2} are tagged Dirichlet, edges on y = 0 Symmetry.
/// Subdomain 1 is the part inside the unit circle.
/// Throws InvalidInput for h <= 0, geometry_order outside [1,3] or crease
/// vertices off the exact curve.
Mesh build_scenario_mesh(double h, const CreaseSpec& crease, int geometry_order);

/// Structured triangulation of a rectangle, no crease, all triangles in
/// subdomain 1, all boundary edges tagged Boundary.
Mesh build_rectangle_mesh(Point2 lower, Point2 upper, int nx, int ny);

/// Regular polygon with `sides` vertices on the unit circle, or (curved =
/// true) the unit disk whose boundary edges are circular arcs of order
/// geometry_order. The boundary polygon has `sides` edges before the
/// `extra_refinements` uniform refinements. Polygon corners are recorded as
/// crease_vertices() of the returned mesh.
Mesh build_polygon_mesh(int sides, int extra_refinements, bool curved = false,
                        int geometry_order = 1);

/// Each triangle split into four; curved midpoints projected onto the curve,
/// tags inherited.
Mesh refine_uniform(const Mesh& mesh);

/// Red refinement of the marked triangles with red-green closure.
Mesh refine_marked(const Mesh& mesh, const std::vector<bool>& marked);

/// Geometric refinement toward points: each round shrinks the diameter of the
/// triangles touching a center by `factor` (rounded to a power of 1/2).
/// Throws InvalidInput unless factor is in (0, 1).
Mesh refine_geometric(const Mesh& mesh, const std::vector<Point2>& centers, double factor,
                      int rounds);

/// Geometric refinement toward all crease edges.
Mesh refine_towards_crease(const Mesh& mesh, double factor, int rounds);

/// Plain-text mesh format (see docs/formats.md).
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace foldsim
