#pragma once

#include <array>
#include <cassert>
#include <cmath>

namespace mrof {

/// Largest ambient dimension of any supported target (spd:3 stores 9 entries).
inline constexpr int kMaxAmbient = 9;

/// Small fixed-capacity coordinate vector. All manifold points and tangent
/// vectors live in an ambient R^N with N <= kMaxAmbient, so inline storage
/// keeps solver inner loops allocation-free.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : n_(n) { assert(n >= 0 && n <= kMaxAmbient); }

  static Vec zero(int n) { return Vec(n); }

  int size() const { return n_; }
  double& operator[](int i) { return a_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return a_[static_cast<std::size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n_; ++i) a_[static_cast<std::size_t>(i)] += o[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n_; ++i) a_[static_cast<std::size_t>(i)] -= o[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n_; ++i) a_[static_cast<std::size_t>(i)] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }

  /// this += s * o
  void axpy(double s, const Vec& o) {
    for (int i = 0; i < n_; ++i) a_[static_cast<std::size_t>(i)] += s * o[i];
  }

  friend double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n_; ++i) s += a[i] * b[i];
    return s;
  }

  double norm2() const { return dot(*this, *this); }
  double norm() const { return std::sqrt(norm2()); }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

 private:
  std::array<double, kMaxAmbient> a_{};
  int n_ = 0;
};

/// A point on a manifold, stored in the fixed embedded representation
/// (unit vector for spheres, hyperboloid sheet for hyperbolic space,
/// flattened matrix entries for spd).
struct Point {
  Vec x;
};

/// A tangent vector together with its base point.
struct Tangent {
  Point base;
  Vec v;
};

}  // namespace mrof
