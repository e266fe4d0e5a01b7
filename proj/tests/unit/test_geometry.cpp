#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "rbfsurf/error.hpp"
#include "rbfsurf/geometry.hpp"

using namespace rbfsurf;
constexpr double pi = std::numbers::pi;

namespace {

// |F| / |grad F|: first-order distance to the zero set.
double level_distance(const Surface& s, const Vec3& x) { return std::abs(s.value(x)) / s.gradient(x).norm(); }

Vec3 torus_point(double phi, double th) {
  const double r = 1.0 + std::cos(th) / 3.0;
  return {r * std::cos(phi), r * std::sin(phi), std::sin(th) / 3.0};
}

// Standard Dupin cyclide parametrization, mirrored in x to match the
// implicit form used here.
Vec3 cyclide_point(double th, double ps) {
  const double a = 2.0, b = 1.9, d = 1.0, c = std::sqrt(a * a - b * b);
  const double den = a - c * std::cos(th) * std::cos(ps);
  return {-(d * (c - a * std::cos(th) * std::cos(ps)) + b * b * std::cos(th)) / den,
          b * std::sin(th) * (a - d * std::cos(ps)) / den, b * std::sin(ps) * (c * std::cos(th) - d) / den};
}

double min_distance(const Points& p) {
  double m = 1e300;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) m = std::min(m, (p[i] - p[j]).norm());
  return m;
}

}  // namespace

TEST_CASE("parametric points lie on the implicit surfaces") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-pi, pi);
  Torus torus;
  RedBloodCell rbc;
  DupinCyclide cyc;
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(level_distance(torus, torus_point(a, b)) <= 1e-14);
    CHECK(level_distance(rbc, rbc.point(0.5 * b, a)) <= 1e-13);
    CHECK(level_distance(cyc, cyclide_point(a, b)) <= 1e-12);
  }
  // bretzel2 slice z = 0: x^2 (1 - x^2) - y^2 = +-sqrt(1/40)
  Bretzel2 br;
  const double x = 0.6, g = std::sqrt(1.0 / 40.0);
  const double y = std::sqrt(x * x * (1.0 - x * x) - g);
  CHECK(std::abs(br.value(Vec3(x, y, 0.0))) <= 1e-15);
}

TEST_CASE("outward normals") {
  UnitSphere sphere;
  const Vec3 p = Vec3(1.0, 2.0, -2.0) / 3.0;
  CHECK((normal_at(sphere, p) - p).norm() <= 1e-15);

  Torus torus;
  for (double phi : {0.0, 1.0, 2.5})
    for (double th : {0.0, 0.7, -2.0}) {
      const Vec3 n(std::cos(th) * std::cos(phi), std::cos(th) * std::sin(phi), std::sin(th));
      CHECK((normal_at(torus, torus_point(phi, th)) - n).norm() <= 1e-14);
    }

  RedBloodCell rbc;
  for (double th : {-1.2, -0.4, 0.3, 1.0})
    for (double lam : {-2.0, 0.5, 2.9})
      CHECK((normal_at(rbc, rbc.point(th, lam)) - rbc.parametric_normal(th, lam)).norm() <= 1e-10);

  // every surface: normal points away from the interior point along a ray
  for (const auto& name : surface_names()) {
    auto s = make_surface(name);
    CHECK(s->value(s->interior_point()) < 0.0);
  }
}

TEST_CASE("rbc has a single sheet") {
  // no spurious zero level outside the disc radius
  RedBloodCell rbc;
  for (double r = 1.01 * RedBloodCell::r0; r < 2.5; r += 0.01) CHECK(rbc.value(Vec3(r, 0.0, 0.0)) > 0.0);
}

TEST_CASE("projection lands on the surface and is idempotent") {
  std::mt19937_64 rng(3);
  for (const auto& name : surface_names()) {
    auto s = make_surface(name);
    const BoundingBox b = s->bbox();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int done = 0;
    for (int i = 0; i < 400 && done < 50; ++i) {
      const Vec3 x = b.lo + (b.hi - b.lo).cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
      if (level_distance(*s, x) > 0.02 * b.diagonal()) continue;
      const Vec3 y = project(*s, x);
      CHECK(level_distance(*s, y) <= 1e-12 * b.diagonal());
      CHECK((project(*s, y) - y).norm() <= 1e-12 * b.diagonal());
      ++done;
    }
    CHECK(done > 10);
    CHECK_THROWS_AS(project(*s, b.hi + 10.0 * (b.hi - b.lo)), InvalidArgument);
  }
}

TEST_CASE("sampling is deterministic and on-surface") {
  for (const auto& name : surface_names()) {
    auto s = make_surface(name);
    const Points a = sample_surface(*s, 300, 17);
    const Points b = sample_surface(*s, 300, 17);
    const Points c = sample_surface(*s, 300, 18);
    REQUIRE(a.size() == 300);
    CHECK(a == b);
    CHECK(a != c);
    for (const auto& p : a) CHECK(level_distance(*s, p) <= 1e-12 * s->bbox().diagonal());
  }
}

TEST_CASE("area estimate matches known areas") {
  UnitSphere sphere;
  Torus torus;
  CHECK(estimate_area(sphere, 400000, 1) == doctest::Approx(4.0 * pi).epsilon(0.02));
  CHECK(estimate_area(torus, 400000, 1) == doctest::Approx(4.0 * pi * pi / 3.0).epsilon(0.02));
  RedBloodCell rbc;
  CHECK(estimate_area(rbc, 400000, 2) == doctest::Approx(*rbc.area()).epsilon(0.03));
}

TEST_CASE("thinning respects the minimum spacing") {
  UnitSphere sphere;
  const Points p = sample_surface(sphere, 2000, 4);
  const Points t = thin(p, 0.08);
  CHECK(t.size() < p.size());
  CHECK(min_distance(t) >= 0.08);
  // greedy: every dropped point is within qmin of a kept one
  NodeLocator loc(t);
  for (const auto& x : p) CHECK((t[loc.nearest(x)] - x).norm() < 0.08 + 1e-15);
}

TEST_CASE("reduce_to_count") {
  UnitSphere sphere;
  const Points p = sample_surface(sphere, 500, 8);
  const Points r = reduce_to_count(p, 321);
  CHECK(r.size() == 321);
  CHECK(min_distance(r) >= min_distance(p));
  CHECK(reduce_to_count(p, 600).size() == 500);
}

TEST_CASE("riesz energy") {
  CHECK(riesz_energy({Vec3(0, 0, 1), Vec3(0, 0, -1)}) == doctest::Approx(0.25));
  const Points tri{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  CHECK(riesz_energy(tri) == doctest::Approx(1.5));
  CHECK_THROWS_AS(riesz_energy({Vec3(1, 0, 0), Vec3(1, 0, 0)}), NumericalError);
}

TEST_CASE("riesz descent: energy non-increasing, octahedron from 6 points") {
  UnitSphere sphere;
  std::vector<double> trace;
  const NodeSet ns = riesz_minimize(sphere, sample_surface(sphere, 6, 21), 300, 0.25, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-14));
  // octahedron: energy 12 / 2 + 3 / 4, min distance sqrt 2
  CHECK(trace.back() == doctest::Approx(6.75).epsilon(1e-3));
  CHECK(min_distance(ns.points) == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  CHECK(ns.q == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(0.05));
}

TEST_CASE("generated node sets are quasi-uniform") {
  for (const auto& [name, n] : std::vector<std::pair<std::string, std::size_t>>{
           {"sphere", 400}, {"torus", 500}, {"rbc", 500}, {"cyclide", 500}, {"bretzel2", 500}}) {
    CAPTURE(name);
    auto s = make_surface(name);
    const NodeSet ns = generate_nodes(*s, n, 1);
    REQUIRE(ns.size() == n);
    CHECK(ns.normals.size() == n);
    CHECK(ns.weights.size() == n);
    CHECK(ns.rho < 3.0);
    CHECK(ns.q > 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(level_distance(*s, ns.points[i]) <= 1e-12 * s->bbox().diagonal());
      CHECK(std::abs(ns.normals[i].norm() - 1.0) <= 1e-14);
    }
    // determinism
    const NodeSet again = generate_nodes(*s, n, 1);
    CHECK(again.points == ns.points);
  }
}

TEST_CASE("quadrature weights sum to the area") {
  Torus torus;
  const NodeSet ns = generate_nodes(torus, 1000, 2);
  double w = 0.0;
  for (double x : ns.weights) {
    CHECK(x > 0.0);
    w += x;
  }
  CHECK(w == doctest::Approx(4.0 * pi * pi / 3.0).epsilon(0.05));
  // Voronoi masses of a quasi-uniform set stay within a modest band
  const double mean = w / 1000.0;
  for (double x : ns.weights) CHECK(x < 3.0 * mean);
}

TEST_CASE("mesh statistics on the sphere") {
  UnitSphere sphere;
  const NodeSet ns = generate_nodes(sphere, 1024, 1);
  // equal-area cap argument: h is at least the radius of a cap of area 4 pi / N
  CHECK(ns.h >= std::sqrt(4.0 / 1024.0) * 0.95);
  CHECK(ns.h <= 3.0 * std::sqrt(4.0 / 1024.0));
  CHECK(ns.rho == doctest::Approx(ns.h / ns.q));
}

TEST_CASE("node file round trip and errors") {
  const auto dir = std::filesystem::temp_directory_path() / "rbfsurf_geom_test";
  std::filesystem::create_directories(dir);
  UnitSphere sphere;
  const NodeSet ns = generate_nodes(sphere, 64, 2);
  save_nodes(ns, dir / "a.csv");
  const NodeSet back = load_nodes(dir / "a.csv", &sphere);
  REQUIRE(back.size() == 64);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(back.points[i] == ns.points[i]);
    CHECK(back.normals[i] == ns.normals[i]);
    CHECK(back.weights[i] == ns.weights[i]);
  }
  CHECK(back.q == doctest::Approx(ns.q));

  {
    std::ofstream f(dir / "b.csv");
    f << "x,y,z\n1,0,0\n0,1,0\n0,0,abc\n";
  }
  try {
    load_nodes(dir / "b.csv", &sphere);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  {
    std::ofstream f(dir / "c.csv");
    f << "x,y,z\n1,0,0\n0,1.1,0\n";
  }
  CHECK_THROWS_AS(load_nodes(dir / "c.csv", &sphere), ParseError);
  {
    std::ofstream f(dir / "d.csv");
    f << "x,y,z\n1,0,0\n0,1,0\n";
  }
  const NodeSet d = load_nodes(dir / "d.csv", &sphere);
  CHECK((d.normals[1] - Vec3(0, 1, 0)).norm() <= 1e-15);
  CHECK_THROWS_AS(load_nodes(dir / "d.csv"), InvalidArgument);
  CHECK_THROWS_AS(load_nodes(dir / "missing.csv", &sphere), InvalidArgument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("node locator agrees with brute force") {
  UnitSphere sphere;
  const Points p = sample_surface(sphere, 700, 9);
  const Points q = sample_surface(sphere, 200, 10);
  NodeLocator loc(p);
  for (const auto& x : q) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      if ((p[i] - x).squaredNorm() < (p[best] - x).squaredNorm()) best = i;
    CHECK(loc.nearest(x) == best);
  }
  CHECK(loc.nearest(p[5], 5) != 5);
}

TEST_CASE("unknown surface") { CHECK_THROWS_AS(make_surface("klein"), InvalidArgument); }
