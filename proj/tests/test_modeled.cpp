#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "field_helpers.hpp"
#include "mrelax/diagnostics.hpp"

using namespace mrelax;
using namespace mrelax::testing;

namespace {

// independent 1-D oracle: trapezoid quadrature of 2*pi*int phi(r) r dr
double disk_mass(double a, int N = 200000) {
  long double acc = 0.0L;
  const double dr = a / N;
  for (int i = 0; i <= N; ++i) {
    double r = i * dr;
    double w = (i == 0 || i == N) ? 0.5 : 1.0;
    acc += w * bump_profile(r, a) * r;
  }
  return double(acc) * dr * two_pi;
}

const Grid3& grid64() {
  static Grid3 g(64);
  return g;
}

const LinkConfig& hopf_cfg() {
  static LinkConfig cfg = hopf_pair_config(grid64());
  return cfg;
}

const ComponentFields& hopf_fields() {
  static ComponentFields f = build_link_field(hopf_cfg(), grid64());
  return f;
}

ClosedCurve scaled_trefoil(double s, int m = 768) {
  std::vector<Vec3> pts;
  for (int i = 0; i < m; ++i) {
    double t = two_pi * i / m;
    pts.push_back(Vec3{std::numbers::pi + s * (2 + std::cos(3 * t)) * std::cos(2 * t),
                       std::numbers::pi + s * (2 + std::cos(3 * t)) * std::sin(2 * t),
                       std::numbers::pi + s * std::sin(3 * t)});
  }
  return ClosedCurve(pts);
}

}  // namespace

TEST_CASE("bump profile vanishes at and beyond the support boundary") {
  CHECK(bump_profile(0.25, 0.25) == 0.0);
  CHECK(bump_profile(0.3, 0.25) == 0.0);
  CHECK(bump_profile(10.0, 0.25) == 0.0);
  CHECK(bump_profile(0.0, 0.25) > 0.0);
  CHECK_THROWS_AS(bump_profile(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("bump profile has unit disk mass") {
  for (double a : {0.1, 0.25, 0.5}) CHECK(std::abs(disk_mass(a) - 1.0) < 1e-8);
}

TEST_CASE("bump profile peak matches the quadrature normalization") {
  // phi(0) = C*e^{-1} with C = 1/(2*pi*int phi r dr / phi-scale); recover C
  // from the independent quadrature of the unnormalized profile
  const double a = 0.25;
  const int N = 200000;
  long double acc = 0.0L;
  const double dr = a / N;
  for (int i = 0; i <= N; ++i) {
    double r = i * dr, u = r / a;
    double w = (i == 0 || i == N) ? 0.5 : 1.0;
    if (u < 1.0) acc += w * std::exp(-1.0 / (1.0 - u * u)) * r;
  }
  double C = 1.0 / (double(acc) * dr * two_pi);
  CHECK(rel_err(bump_profile(0.0, a), C * std::exp(-1.0)) < 1e-8);
}

TEST_CASE("single tube: unit flux, solenoidal, mean-zero") {
  const TubeSpec& t = hopf_cfg().tubes[0];
  auto r = build_tube_field_detailed(t, grid64());
  CHECK(std::abs(flux_through_disk(r.field, t) - 1.0) < 1e-3);
  CHECK(divergence_residual(r.field) < 1e-10);
  CHECK(mean_mode_magnitude(r.field) < 1e-12 * max_abs(r.field));
  CHECK(r.leakage < 0.10);
  CHECK(r.field.finite());
}

TEST_CASE("single tube: self-helicity vanishes relative to energy") {
  const VectorField& B = hopf_fields().components[0];
  CHECK(std::abs(helicity(B)) < 2e-3 * energy(B));
}

TEST_CASE("twisted curve: writhe compensation nulls self-helicity") {
  ClosedCurve tref = scaled_trefoil(0.55);
  TubeSpec t = make_tube(tref, 0.20, 1.0);
  CHECK(std::abs(t.twist_correction + writhe(tref)) < 1e-12);
  VectorField B = build_tube_field(t, grid64());
  CHECK(std::abs(helicity(B)) < 2e-3 * energy(B));
  CHECK(std::abs(flux_through_disk(B, t) - 1.0) < 1e-3);
}

TEST_CASE("field is linear in the flux") {
  Grid3 g(64);
  TubeSpec t1 = hopf_cfg().tubes[0];
  TubeSpec t2 = t1;
  t2.flux = 2.0;
  VectorField B1 = build_tube_field(t1, g);
  VectorField B2 = build_tube_field(t2, g);
  // doubling the flux doubles every sample bitwise
  for (int d = 0; d < 3; ++d)
    for (std::size_t i = 0; i < B1[d].size(); ++i) CHECK(B2[d][i] == 2.0 * B1[d][i]);

  TubeSpec t3 = t1;
  t3.flux = -3.0;
  VectorField B3 = build_tube_field(t3, g);
  CHECK(std::abs(flux_through_disk(B3, t3) + 3.0) < 3e-3);
}

TEST_CASE("zero field has zero flux") {
  VectorField z(grid64());
  CHECK(flux_through_disk(z, hopf_cfg().tubes[0]) == 0.0);
}

TEST_CASE("tube thinner than two cells is rejected") {
  Grid3 g(64);
  ClosedCurve c = make_circle({std::numbers::pi, std::numbers::pi, std::numbers::pi}, {0, 0, 1}, 1.0, 256);
  TubeSpec t = make_tube(c, 0.15, 1.0);  // 2h = 0.196
  CHECK_THROWS_AS(build_tube_field(t, g), std::invalid_argument);
}

TEST_CASE("flux disk leaving the box is rejected") {
  ClosedCurve c = make_circle({0.2, std::numbers::pi, std::numbers::pi}, {1, 0, 0}, 1.0, 64);
  TubeSpec t = make_tube(c, 0.25, 1.0);
  VectorField z(grid64());
  CHECK_THROWS_AS(flux_through_disk(z, t), std::invalid_argument);
}

TEST_CASE("hopf pair link field: cross-helicity identities") {
  const ComponentFields& f = hopf_fields();
  REQUIRE(f.components.size() == 4);
  CHECK(f.labels == hopf_cfg().labels);
  double h01 = cross_helicity(f.components[0], f.components[1]);
  double h23 = cross_helicity(f.components[2], f.components[3]);
  CHECK(std::abs(h01 - 1.0) < 2e-2);
  CHECK(std::abs(h23 + 1.0) < 2e-2);
  // cross-pair terms vanish
  for (int i : {0, 1})
    for (int j : {2, 3}) CHECK(std::abs(cross_helicity(f.components[i], f.components[j])) < 1e-2);
  // mirror antisymmetry of the two pairs
  CHECK(std::abs(h01 + h23) < 1e-3);
  for (const auto& c : f.components) CHECK(divergence_residual(c) < 1e-10);
}

TEST_CASE("hopf pair link field: total helicity cancels and is bilinear") {
  const ComponentFields& f = hopf_fields();
  VectorField total = f.total();
  double H = helicity(total);
  CHECK(std::abs(H) < 4e-2);
  double sum = 0;
  for (const auto& c : f.components) sum += helicity(c);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) sum += 2.0 * cross_helicity(f.components[i], f.components[j]);
  CHECK(std::abs(H - sum) < 1e-3 * energy(total));
}

TEST_CASE("hopf pair link field: bounded support overlap") {
  CHECK(support_overlap(hopf_fields()) < support_threshold);
}

TEST_CASE("vector potential round trip on the link field") {
  VectorField total = hopf_fields().total();
  VectorField back = curl(vector_potential(total));
  CHECK(l2_norm(back - total) < 1e-9 * l2_norm(total));
}

TEST_CASE("cross-helicity equals linking times flux product on random geometries") {
  Grid3 g(64);
  struct Geo {
    double r, f1, f2;
  };
  for (const Geo& geo : {Geo{0.8, 1.3, -0.7}, Geo{1.0, 0.5, 2.0}}) {
    HopfPairOptions opt;
    opt.circle_radius = geo.r;
    opt.flux = 1.0;
    opt.box_L = g.L;
    LinkConfig cfg = hopf_pair_config(opt, g);
    LinkConfig two;
    two.tubes = {cfg.tubes[0], cfg.tubes[1]};
    two.tubes[0].flux = geo.f1;
    two.tubes[1].flux = geo.f2;
    two.labels = {"A", "B"};
    double lk = gauss_linking(two.tubes[0].curve, two.tubes[1].curve);
    ComponentFields f = build_link_field(two, g);
    double ch = cross_helicity(f.components[0], f.components[1]);
    double expect = lk * geo.f1 * geo.f2;
    CHECK(std::abs(ch - expect) < 0.02 * std::abs(expect));
  }
}

TEST_CASE("unlinked rings have zero cross-helicity") {
  Grid3 g(64);
  double pi = std::numbers::pi;
  ClosedCurve c1 = make_circle({pi - 1.5, pi, pi}, {0, 0, 1}, 0.9, 256);
  ClosedCurve c2 = make_circle({pi + 1.5, pi, pi}, {0, 0, 1}, 0.9, 256);
  LinkConfig cfg{{make_tube(c1, 0.25, 1.0), make_tube(c2, 0.25, 1.0)}, {"A", "B"}};
  ComponentFields f = build_link_field(cfg, g);
  CHECK(std::abs(cross_helicity(f.components[0], f.components[1])) < 1e-2);
}
