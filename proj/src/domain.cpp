#include "mrof/domain.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mrof/errors.hpp"

namespace mrof {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

[[noreturn]] void parse_fail(std::string_view spec, const char* why) {
  std::ostringstream os;
  os << "bad grid spec '" << spec << "': " << why;
  throw ParseError(os.str());
}

int parse_int(std::string_view tok, std::string_view spec) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    parse_fail(spec, "expected an integer size");
  return value;
}

double rho_preset_value(const std::string& preset, double x, double y) {
  if (preset == "flat") return 1.0;
  if (preset == "sphere_patch") return 2.0 / (1.0 + x * x + y * y);
  throw ParseError("unknown rho preset '" + preset + "'");
}

void append_g17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

Grid Grid::interval(int n) {
  if (n < 2) throw ParseError("interval grid needs n >= 2");
  Grid g;
  g.kind_ = GridKind::interval;
  g.nx_ = n;
  g.dx_ = 1.0 / (n - 1);
  g.spec_ = "interval:" + std::to_string(n);
  g.build();
  return g;
}

Grid Grid::circle(int n) {
  if (n < 3) throw ParseError("circle grid needs n >= 3");
  Grid g;
  g.kind_ = GridKind::circle;
  g.nx_ = n;
  g.dx_ = kTwoPi / n;
  g.spec_ = "circle:" + std::to_string(n);
  g.build();
  return g;
}

Grid Grid::rect2d(int nx, int ny, std::string_view rho_preset) {
  if (nx < 2 || ny < 2) throw ParseError("rect2d grid needs nx, ny >= 2");
  Grid g;
  g.kind_ = GridKind::rect2d;
  g.nx_ = nx;
  g.ny_ = ny;
  g.dx_ = 1.0 / (nx - 1);
  g.rho_preset_ = std::string(rho_preset);
  g.spec_ = "rect2d:" + std::to_string(nx) + "x" + std::to_string(ny);
  if (g.rho_preset_ != "flat") g.spec_ += ":rho=" + g.rho_preset_;
  g.build();
  return g;
}

Grid Grid::parse(std::string_view spec) {
  std::string s(spec);
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(':', pos);
    if (next == std::string::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  if (parts.size() < 2) parse_fail(spec, "expected kind:size");
  if (parts[0] == "interval") {
    if (parts.size() != 2) parse_fail(spec, "unexpected extra field");
    return interval(parse_int(parts[1], spec));
  }
  if (parts[0] == "circle") {
    if (parts.size() != 2) parse_fail(spec, "unexpected extra field");
    return circle(parse_int(parts[1], spec));
  }
  if (parts[0] == "rect2d") {
    const std::size_t x = parts[1].find('x');
    if (x == std::string::npos) parse_fail(spec, "expected <nx>x<ny>");
    const int nx = parse_int(std::string_view(parts[1]).substr(0, x), spec);
    const int ny = parse_int(std::string_view(parts[1]).substr(x + 1), spec);
    std::string preset = "flat";
    if (parts.size() == 3) {
      if (parts[2].rfind("rho=", 0) != 0) parse_fail(spec, "expected rho=<preset>");
      preset = parts[2].substr(4);
    } else if (parts.size() > 3) {
      parse_fail(spec, "unexpected extra field");
    }
    return rect2d(nx, ny, preset);
  }
  parse_fail(spec, "unknown kind");
}

void Grid::build() {
  const int n = (kind_ == GridKind::rect2d) ? nx_ * ny_ : nx_;
  rho_.assign(static_cast<std::size_t>(n), 1.0);
  boundary_.assign(static_cast<std::size_t>(n), 0);
  weights_.assign(static_cast<std::size_t>(n), 0.0);
  stencil_.assign(static_cast<std::size_t>(n), {});
  edges_.clear();

  switch (kind_) {
    case GridKind::interval: {
      boundary_[0] = boundary_[static_cast<std::size_t>(n - 1)] = 1;
      for (int i = 0; i + 1 < n; ++i) edges_.push_back({i, i + 1, 0, dx_});
      for (int i = 0; i < n; ++i)
        weights_[static_cast<std::size_t>(i)] = boundary(i) ? 0.5 * dx_ : dx_;
      break;
    }
    case GridKind::circle: {
      for (int i = 0; i < n; ++i) edges_.push_back({i, (i + 1) % n, 0, dx_});
      for (int i = 0; i < n; ++i) weights_[static_cast<std::size_t>(i)] = dx_;
      break;
    }
    case GridKind::rect2d: {
      for (int node = 0; node < n; ++node) {
        const auto [x, y] = coords(node);
        rho_[static_cast<std::size_t>(node)] = rho_preset_value(rho_preset_, x, y);
      }
      for (int iy = 0; iy < ny_; ++iy) {
        for (int ix = 0; ix < nx_; ++ix) {
          const int node = iy * nx_ + ix;
          const bool bx = (ix == 0 || ix == nx_ - 1);
          const bool by = (iy == 0 || iy == ny_ - 1);
          boundary_[static_cast<std::size_t>(node)] = (bx || by) ? 1 : 0;
          const double w = rho(node) * rho(node) * dx_ * dx_;
          weights_[static_cast<std::size_t>(node)] = w * (bx ? 0.5 : 1.0) * (by ? 0.5 : 1.0);
          if (ix + 1 < nx_) {
            const int other = node + 1;
            edges_.push_back({node, other, 0, 0.5 * (rho(node) + rho(other)) * dx_});
          }
          if (iy + 1 < ny_) {
            const int other = node + nx_;
            edges_.push_back({node, other, 1, 0.5 * (rho(node) + rho(other)) * dx_});
          }
        }
      }
      break;
    }
  }

  for (int e = 0; e < static_cast<int>(edges_.size()); ++e)
    stencil_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)].a)].push_back(e);

  total_area_ = 0;
  min_weight_ = weights_.empty() ? 0 : weights_[0];
  for (double w : weights_) {
    total_area_ += w;
    min_weight_ = std::min(min_weight_, w);
  }
}

std::array<double, 2> Grid::coords(int node) const {
  if (kind_ == GridKind::rect2d) {
    const int ix = node % nx_;
    const int iy = node / nx_;
    return {ix * dx_, iy * dx_};
  }
  return {node * dx_, 0.0};
}

double Grid::node_distance(int a, int b) const {
  if (kind_ == GridKind::circle) {
    const double d = std::abs(a - b) * dx_;
    return std::min(d, kTwoPi - d);
  }
  const auto ca = coords(a);
  const auto cb = coords(b);
  return std::hypot(ca[0] - cb[0], ca[1] - cb[1]);
}

Field Field::constant(const Grid& grid, const Point& p) {
  Field f;
  f.values.assign(static_cast<std::size_t>(grid.num_nodes()), p);
  return f;
}

void require_same_shape(const Manifold& m, const Grid& grid, const Field& u) {
  if (u.size() != grid.num_nodes())
    throw GridMismatch("field has " + std::to_string(u.size()) + " values for a grid of " +
                       std::to_string(grid.num_nodes()) + " nodes");
  for (const Point& p : u.values)
    if (p.x.size() != m.ambient_dim())
      throw GridMismatch("field value dimension does not match the manifold");
}

double lipschitz_constant(const Manifold& m, const Grid& grid, const Field& u) {
  require_same_shape(m, grid, u);
  double lip = 0;
  for (const Edge& e : grid.edges())
    lip = std::max(lip, m.dist(u[e.a], u[e.b]) / e.length);
  return lip;
}

double max_dist_from(const Manifold& m, const Point& center, const Field& u) {
  double r = 0;
  for (const Point& p : u.values) r = std::max(r, m.dist(center, p));
  return r;
}

std::string field_to_json(const Manifold& m, const Grid& grid, const Field& u) {
  require_same_shape(m, grid, u);
  std::string out = "{\n  \"manifold\": \"" + m.spec() + "\",\n  \"grid\": \"" + grid.spec() +
                    "\",\n  \"values\": [\n";
  for (int i = 0; i < u.size(); ++i) {
    out += "    [";
    for (int j = 0; j < u[i].x.size(); ++j) {
      if (j) out += ", ";
      append_g17(out, u[i].x[j]);
    }
    out += (i + 1 < u.size()) ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

void write_field(const std::string& path, const Manifold& m, const Grid& grid, const Field& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << field_to_json(m, grid, u);
}

FieldFile parse_field_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("field file is not valid JSON: ") + e.what());
  }
  if (!j.contains("manifold") || !j.contains("grid") || !j.contains("values"))
    throw ParseError("field file needs 'manifold', 'grid' and 'values'");
  FieldFile out{Manifold::parse(j["manifold"].get<std::string>()),
                Grid::parse(j["grid"].get<std::string>()),
                {}};
  const auto& values = j["values"];
  if (!values.is_array()) throw ParseError("'values' must be an array of arrays");
  out.field.values.reserve(values.size());
  for (const auto& row : values) {
    if (!row.is_array() || static_cast<int>(row.size()) != out.manifold.ambient_dim())
      throw ParseError("value row has wrong length for the manifold");
    Point p{Vec(out.manifold.ambient_dim())};
    for (int i = 0; i < p.x.size(); ++i) p.x[i] = row[static_cast<std::size_t>(i)].get<double>();
    if (out.manifold.point_residual(p) > 1e-9)
      throw ParseError("value row violates the manifold constraint");
    out.field.values.push_back(p);
  }
  require_same_shape(out.manifold, out.grid, out.field);
  return out;
}

FieldFile read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_field_json(ss.str());
}

std::string field_to_csv(const Grid& grid, const Field& u) {
  std::string out = "node,x1,x2";
  const int ambient = u.size() ? u[0].x.size() : 0;
  for (int j = 0; j < ambient; ++j) out += ",value" + std::to_string(j + 1);
  out += "\n";
  for (int i = 0; i < u.size(); ++i) {
    const auto c = grid.coords(i);
    out += std::to_string(i);
    out += ',';
    append_g17(out, c[0]);
    out += ',';
    append_g17(out, c[1]);
    for (int j = 0; j < u[i].x.size(); ++j) {
      out += ',';
      append_g17(out, u[i].x[j]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace mrof
