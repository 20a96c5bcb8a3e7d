#include "mrof/manifold.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <charconv>
#include <sstream>

namespace mrof {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInf = std::numeric_limits<double>::infinity();

double minkowski(const Vec& a, const Vec& b) {
  double s = -a[0] * b[0];
  for (int i = 1; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

Mat as_matrix(const Vec& v, int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = v[i * n + j];
  return m;
}

Vec as_vec(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  Vec v(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v[i * n + j] = m(i, j);
  return v;
}

/// f applied to the eigenvalues of a symmetric matrix.
template <typename F>
Mat sym_apply(const Mat& m, F f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd l = es.eigenvalues();
  for (int i = 0; i < l.size(); ++i) l[i] = f(l[i]);
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

Mat sym_sqrt(const Mat& m) { return sym_apply(m, [](double x) { return std::sqrt(x); }); }
Mat sym_inv_sqrt(const Mat& m) { return sym_apply(m, [](double x) { return 1.0 / std::sqrt(x); }); }
Mat sym_exp(const Mat& m) { return sym_apply(m, [](double x) { return std::exp(x); }); }
Mat sym_log(const Mat& m) { return sym_apply(m, [](double x) { return std::log(x); }); }

[[noreturn]] void parse_fail(std::string_view spec, const char* why) {
  std::ostringstream os;
  os << "bad manifold spec '" << spec << "': " << why;
  throw ParseError(os.str());
}

int parse_int(std::string_view tok, std::string_view spec) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    parse_fail(spec, "expected an integer dimension");
  return value;
}

}  // namespace

Comparison comparison(double kappa, double t) {
  if (t < 0) throw DomainError("comparison functions require t >= 0");
  Comparison out{};
  if (kappa > 0) {
    const double rk = std::sqrt(kappa);
    if (t >= kPi / rk) throw DomainError("co_k pole: t >= pi/sqrt(kappa)");
    out.s = std::sin(rk * t) / rk;
    out.c = std::cos(rk * t);
  } else if (kappa < 0) {
    const double rk = std::sqrt(-kappa);
    out.s = std::sinh(rk * t) / rk;
    out.c = std::cosh(rk * t);
  } else {
    out.s = t;
    out.c = 1.0;
  }
  out.ta = out.s / out.c;
  out.co = out.c / out.s;  // +inf at t = 0
  return out;
}

Manifold Manifold::euclidean(int n) {
  if (n < 1 || n > kMaxAmbient) throw ParseError("euclidean dimension out of range");
  Manifold m;
  m.kind_ = ManifoldKind::euclidean;
  m.dim_ = n;
  m.ambient_dim_ = n;
  m.kappa_lo_ = m.kappa_hi_ = 0;
  m.inj_ = kInf;
  return m;
}

Manifold Manifold::sphere(int n, double radius) {
  if (n < 1 || n + 1 > kMaxAmbient) throw ParseError("sphere dimension out of range");
  if (!(radius > 0)) throw ParseError("sphere radius must be positive");
  Manifold m;
  m.kind_ = ManifoldKind::sphere;
  m.dim_ = n;
  m.ambient_dim_ = n + 1;
  m.kappa_lo_ = m.kappa_hi_ = 1.0 / (radius * radius);
  m.inj_ = kPi * radius;
  m.radius_ = radius;
  return m;
}

Manifold Manifold::hyperbolic(int n) {
  if (n < 1 || n + 1 > kMaxAmbient) throw ParseError("hyperbolic dimension out of range");
  Manifold m;
  m.kind_ = ManifoldKind::hyperbolic;
  m.dim_ = n;
  m.ambient_dim_ = n + 1;
  m.kappa_lo_ = m.kappa_hi_ = -1.0;
  m.inj_ = kInf;
  return m;
}

Manifold Manifold::spd(int n) {
  if (n < 2 || n > 3) throw ParseError("spd supports n = 2, 3");
  Manifold m;
  m.kind_ = ManifoldKind::spd;
  m.dim_ = n * (n + 1) / 2;
  m.ambient_dim_ = n * n;
  m.kappa_lo_ = -0.5;
  m.kappa_hi_ = 0.0;
  m.inj_ = kInf;
  m.radius_ = n;  // stashes the matrix size
  return m;
}

Manifold Manifold::parse(std::string_view spec) {
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
  if (parts.size() < 2) parse_fail(spec, "expected kind:dim");
  const std::string& kind = parts[0];
  const int n = parse_int(parts[1], spec);
  if (kind == "euclidean") {
    if (parts.size() != 2) parse_fail(spec, "unexpected extra field");
    return euclidean(n);
  }
  if (kind == "sphere") {
    double r = 1.0;
    if (parts.size() == 3) {
      if (parts[2].rfind("r=", 0) != 0) parse_fail(spec, "expected r=<radius>");
      try {
        r = std::stod(parts[2].substr(2));
      } catch (const std::exception&) {
        parse_fail(spec, "bad radius");
      }
    } else if (parts.size() != 2) {
      parse_fail(spec, "unexpected extra field");
    }
    return sphere(n, r);
  }
  if (kind == "hyperbolic") {
    if (parts.size() != 2) parse_fail(spec, "unexpected extra field");
    return hyperbolic(n);
  }
  if (kind == "spd") {
    if (parts.size() != 2) parse_fail(spec, "unexpected extra field");
    return spd(n);
  }
  parse_fail(spec, "unknown kind");
}

std::string Manifold::spec() const {
  std::ostringstream os;
  switch (kind_) {
    case ManifoldKind::euclidean:
      os << "euclidean:" << dim_;
      break;
    case ManifoldKind::sphere:
      os << "sphere:" << dim_;
      if (radius_ != 1.0) os << ":r=" << radius_;
      break;
    case ManifoldKind::hyperbolic:
      os << "hyperbolic:" << dim_;
      break;
    case ManifoldKind::spd:
      os << "spd:" << static_cast<int>(radius_);
      break;
  }
  return os.str();
}

double Manifold::convexity_radius() const {
  if (kappa_hi_ > 0) return 0.5 * std::min(inj_, kPi / std::sqrt(kappa_hi_));
  return 0.5 * inj_;
}

double Manifold::strong_radius() const {
  if (kappa_hi_ > 0) return std::min(0.5 * inj_, 0.25 * kPi / std::sqrt(kappa_hi_));
  return 0.5 * inj_;
}

double Manifold::point_residual(const Point& p) const {
  switch (kind_) {
    case ManifoldKind::euclidean:
      return 0.0;
    case ManifoldKind::sphere:
      return std::abs(p.x.norm() - radius_);
    case ManifoldKind::hyperbolic: {
      if (p.x[0] <= 0) return kInf;
      return std::abs(minkowski(p.x, p.x) + 1.0);
    }
    case ManifoldKind::spd: {
      const int n = static_cast<int>(radius_);
      const Mat m = as_matrix(p.x, n);
      const double asym = (m - m.transpose()).norm();
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
      const double lmin = es.eigenvalues().minCoeff();
      return asym + (lmin > 0 ? 0.0 : 1.0 - lmin);
    }
  }
  return kInf;
}

double Manifold::tangent_residual(const Point& p, const Vec& v) const {
  switch (kind_) {
    case ManifoldKind::euclidean:
      return 0.0;
    case ManifoldKind::sphere:
      return std::abs(dot(p.x, v)) / radius_;
    case ManifoldKind::hyperbolic:
      return std::abs(minkowski(p.x, v));
    case ManifoldKind::spd: {
      const int n = static_cast<int>(radius_);
      const Mat m = as_matrix(v, n);
      return (m - m.transpose()).norm();
    }
  }
  return kInf;
}

void Manifold::require_point(const Point& p) const {
  if (p.x.size() != ambient_dim_) throw DomainError("point has wrong ambient dimension");
}

void Manifold::require_tangent(const Point& p, const Vec& v) const {
  require_point(p);
  if (v.size() != ambient_dim_) throw DomainError("tangent has wrong ambient dimension");
  // Scale-relative tolerance: a tangent of norm s may carry O(s * eps) drift.
  const double scale = std::max(1.0, v.norm());
  if (tangent_residual(p, v) > 1e-10 * scale)
    throw DomainError("vector is not tangent at the given base point");
}

Point Manifold::reference_point() const {
  Point p{Vec::zero(ambient_dim_)};
  switch (kind_) {
    case ManifoldKind::euclidean:
      break;
    case ManifoldKind::sphere:
      p.x[0] = radius_;
      break;
    case ManifoldKind::hyperbolic:
      p.x[0] = 1.0;
      break;
    case ManifoldKind::spd: {
      const int n = static_cast<int>(radius_);
      for (int i = 0; i < n; ++i) p.x[i * n + i] = 1.0;
      break;
    }
  }
  return p;
}

Point Manifold::exp(const Point& p, const Tangent& t) const {
  require_tangent(p, t.v);
  const Vec& v = t.v;
  switch (kind_) {
    case ManifoldKind::euclidean:
      return Point{p.x + v};
    case ManifoldKind::sphere: {
      const double nv = std::sqrt(inner(p, t, t));
      if (nv == 0) return p;
      const double theta = nv / radius_;
      Point out{std::cos(theta) * p.x};
      out.x.axpy(radius_ * std::sin(theta) / nv, v);
      out.x *= radius_ / out.x.norm();  // renormalize onto the sphere
      return out;
    }
    case ManifoldKind::hyperbolic: {
      const double nv2 = minkowski(v, v);
      if (nv2 <= 0) return p;
      const double nv = std::sqrt(nv2);
      Point out{std::cosh(nv) * p.x};
      out.x.axpy(std::sinh(nv) / nv, v);
      out.x *= 1.0 / std::sqrt(-minkowski(out.x, out.x));  // rescale onto the sheet
      if (out.x[0] < 0) out.x *= -1.0;
      return out;
    }
    case ManifoldKind::spd: {
      const int n = static_cast<int>(radius_);
      const Mat P = as_matrix(p.x, n);
      const Mat V = as_matrix(v, n);
      const Mat Ph = sym_sqrt(P);
      const Mat Pih = sym_inv_sqrt(P);
      const Mat E = sym_exp(Pih * V * Pih);
      Mat out = Ph * E * Ph;
      out = 0.5 * (out + out.transpose());  // symmetrize away roundoff
      return Point{as_vec(out)};
    }
  }
  throw DomainError("unreachable");
}

Tangent Manifold::log(const Point& p, const Point& q) const {
  require_point(p);
  require_point(q);
  switch (kind_) {
    case ManifoldKind::euclidean:
      return Tangent{p, q.x - p.x};
    case ManifoldKind::sphere: {
      const double d = dist(p, q);
      if (inj_ - d <= 1e-8 * inj_)
        throw CutLocusReached("log: points are antipodal within tolerance");
      Vec w = q.x;
      w.axpy(-dot(p.x, q.x) / (radius_ * radius_), p.x);
      const double nw = w.norm();
      if (nw == 0 || d == 0) return Tangent{p, Vec::zero(ambient_dim_)};
      return Tangent{p, (d / nw) * w};
    }
    case ManifoldKind::hyperbolic: {
      // u = cosh(d) - 1 from the Minkowski square of the difference (stable
      // at small separations); sinh(d) = sqrt(u (2 + u)).
      const double u = 0.5 * minkowski(q.x - p.x, q.x - p.x);
      if (u <= 0) return Tangent{p, Vec::zero(ambient_dim_)};
      const double d = std::log1p(u + std::sqrt(u * (2.0 + u)));
      Vec w = q.x - p.x;
      w.axpy(-u, p.x);  // q - cosh(d) p
      const double factor = d / std::sqrt(u * (2.0 + u));
      return Tangent{p, factor * w};
    }
    case ManifoldKind::spd: {
      const int n = static_cast<int>(radius_);
      const Mat P = as_matrix(p.x, n);
      const Mat Q = as_matrix(q.x, n);
      const Mat Ph = sym_sqrt(P);
      const Mat Pih = sym_inv_sqrt(P);
      const Mat L = sym_log(Pih * Q * Pih);
      Mat out = Ph * L * Ph;
      out = 0.5 * (out + out.transpose());
      return Tangent{p, as_vec(out)};
    }
  }
  throw DomainError("unreachable");
}

double Manifold::dist(const Point& p, const Point& q) const {
  require_point(p);
  require_point(q);
  switch (kind_) {
    case ManifoldKind::euclidean:
      return (q.x - p.x).norm();
    case ManifoldKind::sphere: {
      // Stable great-circle angle from chord lengths.
      const double chord_m = (p.x - q.x).norm() / (2.0 * radius_);
      const double chord_p = (p.x + q.x).norm() / (2.0 * radius_);
      double theta;
      if (dot(p.x, q.x) >= 0)
        theta = 2.0 * std::asin(std::min(1.0, chord_m));
      else
        theta = kPi - 2.0 * std::asin(std::min(1.0, chord_p));
      return radius_ * theta;
    }
    case ManifoldKind::hyperbolic: {
      const double u = std::max(0.0, 0.5 * minkowski(q.x - p.x, q.x - p.x));
      return std::log1p(u + std::sqrt(u * (2.0 + u)));  // acosh(1 + u)
    }
    case ManifoldKind::spd: {
      const int n = static_cast<int>(radius_);
      const Mat P = as_matrix(p.x, n);
      const Mat Q = as_matrix(q.x, n);
      const Mat Pih = sym_inv_sqrt(P);
      Eigen::SelfAdjointEigenSolver<Mat> es(Pih * Q * Pih);
      double d2 = 0;
      for (int i = 0; i < n; ++i) {
        const double l = std::log(es.eigenvalues()[i]);
        d2 += l * l;
      }
      return std::sqrt(d2);
    }
  }
  throw DomainError("unreachable");
}

double Manifold::inner(const Point& p, const Tangent& v, const Tangent& w) const {
  require_point(p);
  if (!(v.base.x == w.base.x))
    throw DomainError("inner: tangents carry different base points");
  switch (kind_) {
    case ManifoldKind::euclidean:
    case ManifoldKind::sphere:
      return dot(v.v, w.v);
    case ManifoldKind::hyperbolic:
      return minkowski(v.v, w.v);
    case ManifoldKind::spd: {
      const int n = static_cast<int>(radius_);
      const Mat P = as_matrix(p.x, n);
      const Mat Pi = P.inverse();
      const Mat V = as_matrix(v.v, n);
      const Mat W = as_matrix(w.v, n);
      return (Pi * V * Pi * W).trace();
    }
  }
  throw DomainError("unreachable");
}

double Manifold::norm(const Point& p, const Tangent& v) const {
  return std::sqrt(std::max(0.0, inner(p, v, v)));
}

Tangent Manifold::project_tangent(const Point& p, const Vec& ambient) const {
  require_point(p);
  if (ambient.size() != ambient_dim_) throw DomainError("ambient vector has wrong dimension");
  switch (kind_) {
    case ManifoldKind::euclidean:
      return Tangent{p, ambient};
    case ManifoldKind::sphere: {
      Vec v = ambient;
      v.axpy(-dot(ambient, p.x) / (radius_ * radius_), p.x);
      return Tangent{p, v};
    }
    case ManifoldKind::hyperbolic: {
      Vec v = ambient;
      v.axpy(minkowski(ambient, p.x), p.x);
      return Tangent{p, v};
    }
    case ManifoldKind::spd: {
      const int n = static_cast<int>(radius_);
      const Mat m = as_matrix(ambient, n);
      return Tangent{p, as_vec(0.5 * (m + m.transpose()))};
    }
  }
  throw DomainError("unreachable");
}

Tangent Manifold::random_unit_tangent(const Point& p, Rng& rng) const {
  Vec g(ambient_dim_);
  for (int i = 0; i < ambient_dim_; ++i) g[i] = rng.normal();
  Tangent t = project_tangent(p, g);
  double n = norm(p, t);
  while (n < 1e-12) {  // essentially never: resample
    for (int i = 0; i < ambient_dim_; ++i) g[i] = rng.normal();
    t = project_tangent(p, g);
    n = norm(p, t);
  }
  t.v *= 1.0 / n;
  return t;
}

Point Manifold::random_in_ball(const Point& center, double R, Rng& rng) const {
  Tangent dir = random_unit_tangent(center, rng);
  const double r = R * rng.uniform();
  dir.v *= r;
  return exp(center, dir);
}

}  // namespace mrof
