// Periodic grid and sampled scalar/vector fields.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrelax {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Uniform periodic box [0,L)^3 with n points per axis, x-fastest storage:
// flat index = ix + n*(iy + n*iz).
struct Grid3 {
  int n = 0;
  double L = two_pi;

  Grid3() = default;
  Grid3(int n_, double L_ = two_pi) : n(n_), L(L_) {
    if (n < 16 || n % 2 != 0)
      throw std::invalid_argument("Grid3: n must be even and >= 16, got " + std::to_string(n));
    if (!(L > 0.0)) throw std::invalid_argument("Grid3: L must be positive");
  }

  double h() const { return L / n; }
  std::size_t size() const { return std::size_t(n) * n * n; }
  std::size_t idx(int ix, int iy, int iz) const {
    return std::size_t(ix) + std::size_t(n) * (std::size_t(iy) + std::size_t(n) * iz);
  }
  double x(int i) const { return h() * i; }

  bool operator==(const Grid3& o) const { return n == o.n && L == o.L; }
};

struct ScalarField {
  Grid3 grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const Grid3& g) : grid(g), v(g.size(), 0.0) {}

  double& operator()(int ix, int iy, int iz) { return v[grid.idx(ix, iy, iz)]; }
  double operator()(int ix, int iy, int iz) const { return v[grid.idx(ix, iy, iz)]; }
};

struct VectorField {
  Grid3 grid;
  std::array<std::vector<double>, 3> c;

  VectorField() = default;
  explicit VectorField(const Grid3& g) : grid(g) {
    for (auto& a : c) a.assign(g.size(), 0.0);
  }

  std::vector<double>& operator[](int i) { return c[i]; }
  const std::vector<double>& operator[](int i) const { return c[i]; }

  VectorField& operator+=(const VectorField& o) {
    require_same_grid(o);
    for (int d = 0; d < 3; ++d)
      for (std::size_t i = 0; i < c[d].size(); ++i) c[d][i] += o.c[d][i];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    require_same_grid(o);
    for (int d = 0; d < 3; ++d)
      for (std::size_t i = 0; i < c[d].size(); ++i) c[d][i] -= o.c[d][i];
    return *this;
  }
  VectorField& operator*=(double s) {
    for (int d = 0; d < 3; ++d)
      for (auto& x : c[d]) x *= s;
    return *this;
  }

  void require_same_grid(const VectorField& o) const {
    if (!(grid == o.grid)) throw std::invalid_argument("VectorField: grid mismatch");
  }

  bool finite() const {
    for (int d = 0; d < 3; ++d)
      for (double x : c[d])
        if (!std::isfinite(x)) return false;
    return true;
  }
};

inline VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
inline VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
inline VectorField operator*(double s, VectorField a) { return a *= s; }

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return (1.0 / n) * a;
}

}  // namespace mrelax
