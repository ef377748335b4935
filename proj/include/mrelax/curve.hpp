// Closed polygonal curves: sampling, Gauss linking number, writhe.
//
// Quadrature is midpoint over segment pairs.  Both double sums iterate the
// segments in a geometry-canonical order (start at the lexicographically
// smallest vertex, walk toward its smaller neighbor) with the stored
// orientation carried as a sign, so reversing a curve negates the linking
// number bit for bit.
#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "mrelax/grid.hpp"

namespace mrelax {

struct ClosedCurve {
  std::vector<Vec3> points;  // arc-ordered, implicitly closed

  ClosedCurve() = default;
  explicit ClosedCurve(std::vector<Vec3> pts) : points(std::move(pts)) { validate(); }

  int m() const { return int(points.size()); }
  const Vec3& p(int i) const { return points[mod(i)]; }
  int mod(int i) const {
    int n = m();
    return ((i % n) + n) % n;
  }
  Vec3 segment(int i) const { return p(i + 1) - p(i); }
  Vec3 midpoint(int i) const { return 0.5 * (p(i) + p(i + 1)); }

  double length() const {
    double s = 0;
    for (int i = 0; i < m(); ++i) s += norm(segment(i));
    return s;
  }

  ClosedCurve reversed() const {
    std::vector<Vec3> r(points.rbegin(), points.rend());
    return ClosedCurve(std::move(r));
  }

  // Reflection through the plane {x : (x - p0).n = 0}.
  ClosedCurve reflected(const Vec3& p0, const Vec3& nrm) const {
    Vec3 n = normalized(nrm);
    std::vector<Vec3> r = points;
    for (Vec3& q : r) q = q - (2.0 * dot(q - p0, n)) * n;
    return ClosedCurve(std::move(r));
  }

  ClosedCurve translated(const Vec3& t) const {
    std::vector<Vec3> r = points;
    for (Vec3& q : r) q = q + t;
    return ClosedCurve(std::move(r));
  }

  void validate() const {
    if (m() < 64) throw std::invalid_argument("ClosedCurve: need at least 64 samples");
    double lo = std::numeric_limits<double>::max(), hi = 0;
    for (int i = 0; i < m(); ++i) {
      double d = norm(segment(i));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    if (lo <= 0) throw std::invalid_argument("ClosedCurve: repeated consecutive points");
    if (hi / lo > 4.0) throw std::invalid_argument("ClosedCurve: sample spacing varies by more than 4x");
  }
};

inline ClosedCurve make_circle(const Vec3& center, const Vec3& normal, double radius, int m = 512) {
  if (!(radius > 0)) throw std::invalid_argument("make_circle: radius must be positive");
  if (m < 64) throw std::invalid_argument("make_circle: m must be >= 64");
  if (norm(normal) < 1e-14) throw std::invalid_argument("make_circle: degenerate normal");
  Vec3 n = normalized(normal);
  Vec3 ref = std::abs(n[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 u = normalized(cross(n, ref));
  Vec3 v = cross(n, u);
  std::vector<Vec3> pts(m);
  for (int i = 0; i < m; ++i) {
    double th = two_pi * i / m;
    pts[i] = center + radius * std::cos(th) * u + radius * std::sin(th) * v;
  }
  return ClosedCurve(std::move(pts));
}

// One point per line "x,y,z"; the polygon closes implicitly.
inline ClosedCurve load_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open curve file: " + path);
  std::vector<Vec3> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Vec3 p;
    char comma;
    if (!(ss >> p[0] >> comma >> p[1] >> comma >> p[2]))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed point, expected x,y,z");
    pts.push_back(p);
  }
  return ClosedCurve(std::move(pts));
}

namespace detail {

struct CanonicalSegments {
  std::vector<Vec3> mid, dir;  // canonical traversal order
  double sign;                 // +1 if canonical order matches stored orientation
};

inline CanonicalSegments canonical_segments(const ClosedCurve& c) {
  const int m = c.m();
  int imin = 0;
  for (int i = 1; i < m; ++i)
    if (c.points[i] < c.points[imin]) imin = i;
  const bool forward = c.points[c.mod(imin + 1)] < c.points[c.mod(imin - 1)];
  CanonicalSegments out;
  out.mid.resize(m);
  out.dir.resize(m);
  out.sign = forward ? 1.0 : -1.0;
  for (int s = 0; s < m; ++s) {
    int i = forward ? c.mod(imin + s) : c.mod(imin - s - 1);
    // segment endpoints in canonical order
    const Vec3& a = forward ? c.p(i) : c.p(i + 1);
    const Vec3& b = forward ? c.p(i + 1) : c.p(i);
    out.mid[s] = 0.5 * (c.p(i) + c.p(i + 1));
    out.dir[s] = b - a;
  }
  return out;
}

inline double min_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  // standard segment-segment closest distance
  Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s, t;
  if (a <= 1e-30 && e <= 1e-30) return norm(r);
  if (a <= 1e-30) {
    s = 0;
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    double c = dot(d1, r);
    if (e <= 1e-30) {
      t = 0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      double b = dot(d1, d2), denom = a * e - b * b;
      s = denom > 1e-30 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0) {
        t = 0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1) {
        t = 1;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  Vec3 c1 = p1 + s * d1, c2 = p2 + t * d2;
  return norm(c1 - c2);
}

}  // namespace detail

inline double curve_min_distance(const ClosedCurve& a, const ClosedCurve& b) {
  double dmin = std::numeric_limits<double>::max();
  for (int i = 0; i < a.m(); ++i)
    for (int j = 0; j < b.m(); ++j)
      dmin = std::min(dmin, detail::min_segment_distance(a.p(i), a.p(i + 1), b.p(j), b.p(j + 1)));
  return dmin;
}

// Gauss linking integral, midpoint quadrature over all segment pairs.
inline double gauss_linking(const ClosedCurve& c1, const ClosedCurve& c2) {
  const double diam = std::max(c1.length(), c2.length());
  if (curve_min_distance(c1, c2) < 1e-6 * diam)
    throw std::invalid_argument("gauss_linking: curves touch or nearly touch");
  auto s1 = detail::canonical_segments(c1);
  auto s2 = detail::canonical_segments(c2);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < s1.mid.size(); ++i) {
    long double row = 0.0L;
    for (std::size_t j = 0; j < s2.mid.size(); ++j) {
      Vec3 r = s1.mid[i] - s2.mid[j];
      double r3 = std::pow(dot(r, r), 1.5);
      row += dot(r, cross(s1.dir[i], s2.dir[j])) / r3;
    }
    acc += row;
  }
  return s1.sign * s2.sign * double(acc) / (4.0 * std::numbers::pi);
}

// Gauss self-integral with the diagonal neighborhood excluded (cyclic
// segment-index gap >= 2).
inline double writhe(const ClosedCurve& c) {
  const int m = c.m();
  std::vector<Vec3> mid(m), dir(m);
  for (int i = 0; i < m; ++i) {
    mid[i] = c.midpoint(i);
    dir[i] = c.segment(i);
  }
  long double acc = 0.0L;
  for (int i = 0; i < m; ++i) {
    long double row = 0.0L;
    for (int j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;  // wraparound neighbors
      Vec3 r = mid[i] - mid[j];
      double r3 = std::pow(dot(r, r), 1.5);
      row += dot(r, cross(dir[i], dir[j])) / r3;
    }
    acc += row;
  }
  return double(acc) / (2.0 * std::numbers::pi);
}

// Smallest circumradius over consecutive vertex triples.
inline double min_curvature_radius(const ClosedCurve& c) {
  double rmin = std::numeric_limits<double>::max();
  for (int i = 0; i < c.m(); ++i) {
    Vec3 a = c.p(i - 1), b = c.p(i), d = c.p(i + 1);
    double la = norm(b - d), lb = norm(a - d), lc = norm(a - b);
    double area2 = norm(cross(b - a, d - a));  // 2*area
    if (area2 < 1e-30) continue;               // collinear: infinite radius
    rmin = std::min(rmin, la * lb * lc / (2.0 * area2));
  }
  return rmin;
}

// Minimal distance between distinct strands: vertex pairs whose chord is
// much shorter than their arc separation.  Returns +inf for convex curves
// (a circle has no distinct strands).
inline double min_strand_distance(const ClosedCurve& c) {
  const int m = c.m();
  std::vector<double> arclen(m + 1, 0.0);
  for (int i = 0; i < m; ++i) arclen[i + 1] = arclen[i] + norm(c.segment(i));
  const double total = arclen[m];
  double dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;
      double arc = arclen[j] - arclen[i];
      arc = std::min(arc, total - arc);
      double chord = norm(c.p(i) - c.p(j));
      if (chord < 0.5 * arc) dmin = std::min(dmin, chord);
    }
  return dmin;
}

}  // namespace mrelax
