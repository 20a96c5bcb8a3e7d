#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mrof/manifold.hpp"
#include "mrof/types.hpp"

namespace mrof {

enum class GridKind { interval, circle, rect2d };

/// Forward-difference edge between two nodes. `length` is the domain geodesic
/// length (trapezoidal rho average on rect2d).
struct Edge {
  int a;
  int b;
  int axis;  // 0 = x (or the 1-D axis), 1 = y
  double length;
};

/// Discrete domain: interval [0,1], circle of circumference 2*pi, or a
/// rectangle chart [0,1] x [0,(ny-1)*dx] with conformal factor rho
/// (g = rho^2 * delta). Neumann boundaries carry no crossing edges.
class Grid {
 public:
  /// "interval:5", "circle:8", "rect2d:4x4", "rect2d:4x4:rho=sphere_patch"
  static Grid parse(std::string_view spec);
  static Grid interval(int n);
  static Grid circle(int n);
  static Grid rect2d(int nx, int ny, std::string_view rho_preset = "flat");

  GridKind kind() const { return kind_; }
  int num_nodes() const { return static_cast<int>(rho_.size()); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double spacing() const { return dx_; }

  /// Chart coordinates of a node (second component 0 on 1-D grids).
  std::array<double, 2> coords(int node) const;
  double rho(int node) const { return rho_[static_cast<std::size_t>(node)]; }
  bool boundary(int node) const { return boundary_[static_cast<std::size_t>(node)] != 0; }

  const std::vector<Edge>& edges() const { return edges_; }
  /// Trapezoidal quadrature weight of a node: dx (1-D, halved at interval
  /// endpoints) or rho^2 dx^2 (rect2d, halved on edges, quartered at corners).
  const std::vector<double>& area_weights() const { return weights_; }
  double total_area() const { return total_area_; }
  double min_area_weight() const { return min_weight_; }

  /// Edge indices of the forward-difference stencil at a node (the edges whose
  /// tail is the node). Boundary nodes simply have fewer entries.
  const std::vector<int>& stencil(int node) const {
    return stencil_[static_cast<std::size_t>(node)];
  }

  /// Domain distance between nodes in the chart (wraparound on the circle).
  double node_distance(int a, int b) const;

  std::string spec() const { return spec_; }

 private:
  Grid() = default;
  void build();

  GridKind kind_ = GridKind::interval;
  int nx_ = 0;
  int ny_ = 1;
  double dx_ = 0;
  std::string rho_preset_ = "flat";
  std::string spec_;
  std::vector<double> rho_;
  std::vector<char> boundary_;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
  std::vector<std::vector<int>> stencil_;
  double total_area_ = 0;
  double min_weight_ = 0;
};

/// One manifold point per grid node.
struct Field {
  std::vector<Point> values;

  int size() const { return static_cast<int>(values.size()); }
  Point& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
  const Point& operator[](int i) const { return values[static_cast<std::size_t>(i)]; }

  static Field constant(const Grid& grid, const Point& p);
};

/// Largest ratio dist(u_a, u_b) / edge length over all edges (the discrete
/// C^{0,1} seminorm). Zero on constant fields and single-node stencils.
double lipschitz_constant(const Manifold& m, const Grid& grid, const Field& u);

/// Max over nodes of dist(center, u(node)).
double max_dist_from(const Manifold& m, const Point& center, const Field& u);

void require_same_shape(const Manifold& m, const Grid& grid, const Field& u);

/// Field file round-trip: {"manifold": spec, "grid": spec, "values": [[...]]}
/// with row-major node order on rect2d. Numbers are written with 17
/// significant digits.
struct FieldFile {
  Manifold manifold;
  Grid grid;
  Field field;
};
FieldFile read_field(const std::string& path);
FieldFile parse_field_json(const std::string& text);
std::string field_to_json(const Manifold& m, const Grid& grid, const Field& u);
void write_field(const std::string& path, const Manifold& m, const Grid& grid, const Field& u);

/// Per-node diagnostics CSV with header "node,x1,x2,value...".
std::string field_to_csv(const Grid& grid, const Field& u);

}  // namespace mrof
