#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mrelax/links.hpp"

using namespace mrelax;

namespace {

// Signed crossings of the projection along direction u.  For two curves the
// linking number is half the signed crossing count; for one curve the signed
// self-crossing count is the directional writhe.
struct Projected {
  std::vector<double> x, y, z, dx, dy, dz;
};

Projected project(const ClosedCurve& c, const Vec3& e1, const Vec3& e2, const Vec3& u) {
  Projected p;
  int m = c.m();
  for (auto* a : {&p.x, &p.y, &p.z, &p.dx, &p.dy, &p.dz}) a->resize(m);
  for (int i = 0; i < m; ++i) {
    p.x[i] = dot(c.p(i), e1);
    p.y[i] = dot(c.p(i), e2);
    p.z[i] = dot(c.p(i), u);
    Vec3 d = c.segment(i);
    p.dx[i] = dot(d, e1);
    p.dy[i] = dot(d, e2);
    p.dz[i] = dot(d, u);
  }
  return p;
}

// Sum of diagram crossing signs between segments of a and b; the sign uses
// the over strand's orientation against the under strand's.
double signed_crossings(const Projected& a, const Projected& b, bool self) {
  double total = 0;
  int ma = int(a.x.size()), mb = int(b.x.size());
  for (int i = 0; i < ma; ++i)
    for (int j = self ? i + 2 : 0; j < mb; ++j) {
      if (self && i == 0 && j == mb - 1) continue;
      double rx = b.x[j] - a.x[i], ry = b.y[j] - a.y[i];
      double den = a.dx[i] * b.dy[j] - a.dy[i] * b.dx[j];
      if (std::abs(den) < 1e-15) continue;
      double s = (rx * b.dy[j] - ry * b.dx[j]) / den;
      double t = (rx * a.dy[i] - ry * a.dx[i]) / den;
      if (s < 0 || s >= 1 || t < 0 || t >= 1) continue;
      double z1 = a.z[i] + s * a.dz[i], z2 = b.z[j] + t * b.dz[j];
      double eps = den > 0 ? 1.0 : -1.0;
      total += z1 > z2 ? eps : -eps;
    }
  return total;
}

void frame_for(const Vec3& u, Vec3& e1, Vec3& e2) {
  Vec3 ref = std::abs(u[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  e1 = normalized(cross(u, ref));
  e2 = cross(u, e1);
}

// Linking number from one generic projection: half the signed crossings.
double crossing_linking(const ClosedCurve& a, const ClosedCurve& b, const Vec3& u) {
  Vec3 e1, e2;
  frame_for(u, e1, e2);
  return 0.5 * signed_crossings(project(a, e1, e2, u), project(b, e1, e2, u), false);
}

double directional_writhe(const ClosedCurve& c, const Vec3& u) {
  Vec3 e1, e2;
  frame_for(u, e1, e2);
  Projected p = project(c, e1, e2, u);
  return signed_crossings(p, p, true);
}

ClosedCurve trefoil(int m) {
  std::vector<Vec3> pts(m);
  for (int i = 0; i < m; ++i) {
    double t = two_pi * i / m;
    pts[i] = {(2 + std::cos(3 * t)) * std::cos(2 * t), (2 + std::cos(3 * t)) * std::sin(2 * t), std::sin(3 * t)};
  }
  return ClosedCurve(std::move(pts));
}

ClosedCurve standard_hopf_1() { return make_circle({0, 0, 0}, {0, 0, 1}, 1.0, 512); }
ClosedCurve standard_hopf_2() { return make_circle({1, 0, 0}, {0, 1, 0}, 1.0, 512); }

}  // namespace

TEST_CASE("make_circle samples lie on the circle") {
  Vec3 c{std::numbers::pi, std::numbers::pi, std::numbers::pi};
  ClosedCurve circ = make_circle(c, {0, 0, 1}, 1.0, 256);
  CHECK(circ.m() == 256);
  for (const Vec3& p : circ.points) {
    CHECK(norm(p - c) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(c[2]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(make_circle(c, {0, 0, 0}, 1.0, 256), std::invalid_argument);
  CHECK_THROWS_AS(make_circle(c, {0, 0, 1}, -1.0, 256), std::invalid_argument);
}

TEST_CASE("planar circles have zero writhe") {
  CHECK(std::abs(writhe(make_circle({0, 0, 0}, {0.3, 0.5, 1}, 2.0, 256))) < 1e-6);
}

TEST_CASE("separated circles do not link") {
  ClosedCurve a = make_circle({0, 0, 0}, {0, 0, 1}, 1.0, 256);
  ClosedCurve b = make_circle({10, 0, 0}, {0, 1, 0}, 1.0, 256);
  CHECK(std::abs(gauss_linking(a, b)) < 1e-6);
}

TEST_CASE("coplanar disjoint circles do not link") {
  ClosedCurve a = make_circle({0, 0, 0}, {0, 0, 1}, 1.0, 256);
  ClosedCurve b = make_circle({3, 0, 0}, {0, 0, 1}, 1.0, 256);
  CHECK(std::abs(gauss_linking(a, b)) < 1e-6);
}

TEST_CASE("standard Hopf circles link once") {
  double lk = gauss_linking(standard_hopf_1(), standard_hopf_2());
  CHECK(std::abs(std::abs(lk) - 1.0) < 1e-4);
}

TEST_CASE("gauss_linking is symmetric") {
  ClosedCurve a = standard_hopf_1(), b = standard_hopf_2();
  CHECK(std::abs(gauss_linking(a, b) - gauss_linking(b, a)) < 1e-12);
}

TEST_CASE("reversing one curve negates the linking number bitwise") {
  ClosedCurve a = standard_hopf_1(), b = standard_hopf_2();
  double lk = gauss_linking(a, b);
  CHECK(gauss_linking(a, b.reversed()) == -lk);
  CHECK(gauss_linking(a.reversed(), b) == -lk);
}

TEST_CASE("touching curves are rejected") {
  ClosedCurve a = make_circle({0, 0, 0}, {0, 0, 1}, 1.0, 256);
  ClosedCurve b = make_circle({2.0 + 1e-9, 0, 0}, {0, 0, 1}, 1.0, 256);
  CHECK_THROWS_AS(gauss_linking(a, b), std::invalid_argument);
}

TEST_CASE("perturbed Hopf circles keep their integer linking number") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> d(-0.08, 0.08);
  for (int trial = 0; trial < 5; ++trial) {
    auto perturb = [&](const ClosedCurve& c) {
      std::vector<Vec3> pts = c.points;
      // smooth low-order perturbation keeps spacing near-uniform
      double a0 = d(rng), a1 = d(rng), a2 = d(rng), ph = d(rng) * 30;
      for (int i = 0; i < int(pts.size()); ++i) {
        double t = two_pi * i / double(pts.size());
        pts[i] = pts[i] + Vec3{a0 * std::sin(2 * t + ph), a1 * std::cos(3 * t), a2 * std::sin(t)};
      }
      return ClosedCurve(pts);
    };
    ClosedCurve a = perturb(standard_hopf_1());
    ClosedCurve b = perturb(standard_hopf_2());
    double lk = gauss_linking(a, b);
    double oracle = crossing_linking(a, b, normalized(Vec3{0.453, 0.771, 0.447}));
    CHECK(std::abs(lk - std::round(lk)) < 1e-3);
    CHECK(std::round(lk) == doctest::Approx(oracle));
  }
}

TEST_CASE("quadrature converges at second order") {
  double prev_change = -1;
  double coarse = 0, fine = 0;
  std::vector<double> vals;
  for (int m : {64, 128, 256, 512}) {
    ClosedCurve a = make_circle({0, 0, 0}, {0, 0, 1}, 1.0, m);
    ClosedCurve b = make_circle({1, 0, 0}, {0, 1, 0}, 1.0, m);
    vals.push_back(gauss_linking(a, b));
  }
  (void)coarse;
  (void)fine;
  (void)prev_change;
  double c1 = std::abs(vals[1] - vals[0]);
  double c2 = std::abs(vals[2] - vals[1]);
  double c3 = std::abs(vals[3] - vals[2]);
  CHECK(c2 <= c1 / 4 + 1e-15);
  CHECK(c3 <= c2 / 4 + 1e-15);
}

TEST_CASE("mirror image negates writhe") {
  // non-planar closed curve with nonzero writhe
  ClosedCurve c = trefoil(256);
  ClosedCurve m = c.reflected({0, 0, 0}, {1, 0, 0});
  double w = writhe(c);
  CHECK(std::abs(w) > 1.0);  // trefoil writhe is about 3.4 for this shape
  CHECK(writhe(m) == doctest::Approx(-w).epsilon(1e-8));
}

TEST_CASE("trefoil writhe matches projection-averaged signed crossings") {
  ClosedCurve c = trefoil(192);
  // average directional writhe over a fixed-seed set of directions; the
  // average over the whole sphere is the exact polygonal writhe
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss(0, 1);
  long double acc = 0;
  const int nproj = 6000;
  for (int i = 0; i < nproj; ++i) {
    Vec3 u = normalized(Vec3{gauss(rng), gauss(rng), gauss(rng)});
    acc += directional_writhe(c, u);
  }
  double oracle = double(acc / nproj);
  double w = writhe(c);
  CHECK(std::abs(w - oracle) < 5e-3);
}

TEST_CASE("hopf pair configuration has the prescribed linking matrix") {
  Grid3 g(64);
  LinkConfig cfg = hopf_pair_config(g);
  REQUIRE(cfg.tubes.size() == 4);
  auto lk = [&](int i, int j) { return gauss_linking(cfg.tubes[i].curve, cfg.tubes[j].curve); };
  CHECK(std::abs(lk(0, 1) - 1.0) < 1e-4);
  CHECK(std::abs(lk(2, 3) + 1.0) < 1e-4);
  for (int i : {0, 1})
    for (int j : {2, 3}) CHECK(std::abs(lk(i, j)) < 1e-4);
}

TEST_CASE("hopf pair configuration validates on the default grid") {
  Grid3 g(64);
  LinkConfig cfg = hopf_pair_config(g);
  ValidationReport rep = validate_config(cfg, g);
  CHECK(rep.ok);
  CHECK(rep.min_tube_clearance >= 2 * g.h());
  CHECK(rep.min_box_clearance >= 2 * g.h());
}

TEST_CASE("overlapping tubes are reported by name") {
  Grid3 g(64);
  LinkConfig cfg;
  cfg.labels = {"A", "B"};
  cfg.tubes.push_back(make_tube(make_circle({2, 3, 3}, {0, 0, 1}, 0.8, 128), 0.3, 1.0));
  cfg.tubes.push_back(make_tube(make_circle({2.6, 3, 3}, {0, 0, 1}, 0.8, 128), 0.3, 1.0));
  ValidationReport rep = validate_config(cfg, g);
  CHECK_FALSE(rep.ok);
  bool named = false;
  for (const auto& f : rep.failures) named |= f.find("A") != std::string::npos && f.find("B") != std::string::npos;
  CHECK(named);
}

TEST_CASE("tube near the box face fails box clearance") {
  Grid3 g(64);
  LinkConfig cfg;
  cfg.tubes.push_back(make_tube(make_circle({0.5, 3, 3}, {1, 0, 0}, 0.4, 128), 0.45, 1.0));
  ValidationReport rep = validate_config(cfg, g);
  CHECK_FALSE(rep.ok);
  bool named = false;
  for (const auto& f : rep.failures) named |= f.find("box clearance") != std::string::npos;
  CHECK(named);
}

TEST_CASE("grid too coarse for the tube radius") {
  Grid3 g(16);  // h = 0.39, tube radius 0.25 < 2h
  LinkConfig cfg;
  cfg.tubes.push_back(make_tube(make_circle({3, 3, 3}, {0, 0, 1}, 0.9, 128), 0.25, 1.0));
  ValidationReport rep = validate_config(cfg, g);
  CHECK_FALSE(rep.ok);
}

TEST_CASE("curve CSV import round trip and error reporting") {
  ClosedCurve c = make_circle({1, 2, 3}, {0, 1, 0}, 0.7, 128);
  const char* path = "test_curve.csv";
  {
    std::ofstream out(path);
    for (const Vec3& p : c.points) out << p[0] << "," << p[1] << "," << p[2] << "\n";
  }
  ClosedCurve r = load_curve_csv(path);
  REQUIRE(r.m() == c.m());
  double err = 0;
  for (int i = 0; i < c.m(); ++i) err = std::max(err, norm(r.p(i) - c.p(i)));
  CHECK(err < 1e-5);  // stream default precision
  {
    std::ofstream out(path);
    out << "1,2,3\nnot-a-point\n";
  }
  CHECK_THROWS_WITH_AS(load_curve_csv(path), doctest::Contains(":2"), std::runtime_error);
  std::remove(path);
}

TEST_CASE("closed curve invariants") {
  std::vector<Vec3> few(10, Vec3{0, 0, 0});
  CHECK_THROWS_AS((ClosedCurve{few}), std::invalid_argument);
}
