// Tube configurations around closed curves: validation and the Hopf-pair
// geometry.  The pair geometry is two equal circles in orthogonal planes
// with centers offset by one radius, which links them once; a mirror copy
// carries the opposite linking number.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mrelax/curve.hpp"
#include "mrelax/grid.hpp"

namespace mrelax {

struct TubeSpec {
  ClosedCurve curve;
  double radius = 0.0;            // cross-section radius a
  double flux = 1.0;              // magnetic flux through a meridional disk
  double twist_correction = 0.0;  // framing angle in turns; -writhe nulls orbit self-linking
};

inline TubeSpec make_tube(ClosedCurve curve, double radius, double flux) {
  TubeSpec t;
  t.twist_correction = -writhe(curve);
  t.curve = std::move(curve);
  t.radius = radius;
  t.flux = flux;
  return t;
}

struct LinkConfig {
  std::vector<TubeSpec> tubes;
  std::vector<std::string> labels;
};

struct ValidationReport {
  bool ok = true;
  double min_tube_clearance = std::numeric_limits<double>::infinity();  // surface-to-surface
  double min_box_clearance = std::numeric_limits<double>::infinity();
  double min_curvature_margin = std::numeric_limits<double>::infinity();  // min(R_curv, strand/2) - a
  std::vector<std::string> failures;

  void fail(std::string msg) {
    ok = false;
    failures.push_back(std::move(msg));
  }
  std::string summary() const {
    if (ok) return "ok";
    std::string s;
    for (const auto& f : failures) s += (s.empty() ? "" : "; ") + f;
    return s;
  }
};

inline ValidationReport validate_config(const LinkConfig& cfg, const Grid3& g) {
  ValidationReport rep;
  const double h = g.h();
  for (std::size_t i = 0; i < cfg.tubes.size(); ++i) {
    const TubeSpec& t = cfg.tubes[i];
    const std::string name = i < cfg.labels.size() ? cfg.labels[i] : "tube" + std::to_string(i);
    if (!(t.radius > 2 * h))
      rep.fail(name + ": tube radius " + std::to_string(t.radius) + " not above two grid cells (grid too coarse)");
    const double rcurv = min_curvature_radius(t.curve);
    const double strand = min_strand_distance(t.curve);
    const double margin = std::min(rcurv, 0.5 * strand) - t.radius;
    rep.min_curvature_margin = std::min(rep.min_curvature_margin, margin);
    if (margin <= 0) rep.fail(name + ": tube radius exceeds embedding bound (curvature or self-distance)");
    for (const Vec3& p : t.curve.points) {
      for (int d = 0; d < 3; ++d) {
        double wall = std::min(p[d], g.L - p[d]);
        rep.min_box_clearance = std::min(rep.min_box_clearance, wall - t.radius);
      }
    }
  }
  if (rep.min_box_clearance < 2 * h) rep.fail("box clearance below two grid cells");
  for (std::size_t i = 0; i < cfg.tubes.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.tubes.size(); ++j) {
      double d = curve_min_distance(cfg.tubes[i].curve, cfg.tubes[j].curve);
      double clear = d - cfg.tubes[i].radius - cfg.tubes[j].radius;
      rep.min_tube_clearance = std::min(rep.min_tube_clearance, clear);
      if (clear < 2 * h) {
        const std::string ni = i < cfg.labels.size() ? cfg.labels[i] : std::to_string(i);
        const std::string nj = j < cfg.labels.size() ? cfg.labels[j] : std::to_string(j);
        rep.fail("tubes " + ni + " and " + nj + " overlap or clear less than two grid cells");
      }
    }
  return rep;
}

struct HopfPairOptions {
  double separation = 3.0;   // distance between the two pair centers, along x
  double tube_radius = 0.25;
  double flux = 1.0;
  double circle_radius = 0.9;
  double box_L = two_pi;
  int samples = 512;
};

// Four tubes: a +1-linked Hopf pair and its mirror image with linking -1,
// mirror plane x = L/2.  Throws if the configuration fails validation on
// the given grid.
inline LinkConfig hopf_pair_config(const HopfPairOptions& opt, const Grid3& g) {
  const double L = opt.box_L;
  const double r = opt.circle_radius;
  const Vec3 gc_plus{L / 2 - opt.separation / 2, L / 2, L / 2};
  // circle 1 in the z-normal plane, circle 2 in the x-normal plane; center
  // offset r along y (the planes' intersection line is y-parallel through
  // neither, so circle 2 crosses circle 1's disk exactly once).
  ClosedCurve c1 = make_circle(gc_plus - Vec3{0, r / 2, 0}, {0, 0, 1}, r, opt.samples);
  ClosedCurve c2 = make_circle(gc_plus + Vec3{0, r / 2, 0}, {1, 0, 0}, r, opt.samples);
  if (gauss_linking(c1, c2) < 0) c2 = c2.reversed();  // fix lk(T1+,T2+) = +1
  // reflection about x = L/2 places the mirror pair at L/2 + separation/2
  // and flips the linking sign
  const Vec3 mirror_p0{L / 2, 0, 0}, mirror_n{1, 0, 0};
  ClosedCurve c3 = c1.reflected(mirror_p0, mirror_n);
  ClosedCurve c4 = c2.reflected(mirror_p0, mirror_n);
  LinkConfig cfg;
  cfg.labels = {"T1+", "T2+", "T1-", "T2-"};
  for (ClosedCurve* c : {&c1, &c2, &c3, &c4}) cfg.tubes.push_back(make_tube(*c, opt.tube_radius, opt.flux));
  ValidationReport rep = validate_config(cfg, g);
  if (!rep.ok) throw std::invalid_argument("hopf_pair_config: " + rep.summary());
  return cfg;
}

inline LinkConfig hopf_pair_config(const Grid3& g, double separation = 3.0, double tube_radius = 0.25,
                                   double flux = 1.0) {
  HopfPairOptions opt;
  opt.separation = separation;
  opt.tube_radius = tube_radius;
  opt.flux = flux;
  opt.box_L = g.L;
  return hopf_pair_config(opt, g);
}

}  // namespace mrelax
