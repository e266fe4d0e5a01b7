#include <doctest.h>

#include <cmath>

#include "rbfsurf/error.hpp"
#include "rbfsurf/experiments.hpp"
#include "rbfsurf/geometry.hpp"
#include "rbfsurf/operators.hpp"
#include "rbfsurf/timestepping.hpp"

using namespace rbfsurf;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

// u' = lambda u
double bdf4_scalar_error(double lambda, double dt, Startup st) {
  DiffusionProblem p{Matrix::Constant(1, 1, lambda), 1.0, {}, scalar(1.0)};
  Bdf4Options o;
  o.startup = st;
  o.exact = [lambda](double t) { return scalar(std::exp(lambda * t)); };
  const Trajectory tr = bdf4_run(p, dt, 1.0, o);
  return std::abs(tr.final_u[0] - std::exp(lambda));
}

// u' = -u (implicit) + sin t (explicit), u(0) = 1:
// u = (3/2) e^{-t} + (sin t - cos t) / 2.
double imex_exact(double t) { return 1.5 * std::exp(-t) + 0.5 * (std::sin(t) - std::cos(t)); }

double sbdf_scalar_error(int order, double dt, Startup st) {
  ImexSystem s;
  s.L = Matrix::Constant(1, 1, -1.0);
  s.delta_u = 1.0;
  s.delta_v = 0.0;
  s.reaction = [](double t, const Vector& u, const Vector&, Vector& fu, Vector& fv) {
    fu = Vector::Constant(u.size(), std::sin(t));
    fv = Vector::Zero(u.size());
  };
  s.u0 = scalar(1.0);
  s.v0 = scalar(0.0);
  SbdfOptions o;
  o.startup = st;
  o.exact_u = [](double t) { return scalar(imex_exact(t)); };
  o.exact_v = [](double) { return scalar(0.0); };
  const auto steps = static_cast<std::size_t>(std::llround(2.0 / dt));
  const Trajectory tr = sbdf_run(s, dt, steps, order, o);
  return std::abs(tr.final_u[0] - imex_exact(2.0));
}

}  // namespace

TEST_CASE("bdf4: zero operator and forcing keep u constant") {
  Vector u0 = Vector::LinSpaced(5, -1.0, 3.0);
  DiffusionProblem p{Matrix::Zero(5, 5), 1.0, {}, u0};
  const Trajectory tr = bdf4_run(p, 0.1, 1.0);
  CHECK((tr.final_u - u0).norm() <= 1e-14);
  CHECK(tr.steps == 10);
  CHECK(tr.final_time == doctest::Approx(1.0));
}

TEST_CASE("bdf4: fourth order on u' = lambda u") {
  std::vector<double> dts{1e-2, 5e-3, 2.5e-3}, exact, ramp;
  for (double dt : dts) {
    exact.push_back(bdf4_scalar_error(-2.0, dt, Startup::Exact));
    ramp.push_back(bdf4_scalar_error(-2.0, dt, Startup::BdfRamp));
  }
  CHECK(fit_order(dts, exact) >= 3.7);
  // the single BDF1 step leaves an O(dt^2) error that BDF4 carries along
  CHECK(fit_order(dts, ramp) >= 1.8);
  CHECK(ramp.back() < ramp.front());
}

TEST_CASE("bdf4: forcing is evaluated at the new time level") {
  // u' = 1 has the exact solution t; every BDF is exact on linear functions.
  DiffusionProblem p{Matrix::Zero(1, 1), 1.0, [](double) { return scalar(1.0); }, scalar(0.0)};
  const Trajectory tr = bdf4_run(p, 0.01, 0.37);
  CHECK(tr.final_u[0] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("bdf4: factor once per scheme") {
  DiffusionProblem p{Matrix::Constant(1, 1, -1.0), 1.0, {}, scalar(1.0)};
  CHECK(bdf4_run(p, 0.01, 1.0).factorizations == 4);  // BDF1, 2, 3 ramp + BDF4
  Bdf4Options o;
  o.startup = Startup::Exact;
  o.exact = [](double t) { return scalar(std::exp(-t)); };
  CHECK(bdf4_run(p, 0.01, 1.0, o).factorizations == 1);
}

TEST_CASE("bdf4: snapshots and blow-up") {
  DiffusionProblem p{Matrix::Constant(1, 1, -1.0), 1.0, {}, scalar(1.0)};
  Bdf4Options o;
  o.snap_every = 30;
  const Trajectory tr = bdf4_run(p, 0.01, 1.0, o);
  CHECK(tr.snapshots.size() == 4);  // steps 30, 60, 90 and the final 100
  CHECK(tr.times.back() == doctest::Approx(1.0));

  DiffusionProblem bad{Matrix::Constant(1, 1, 1.0), 1.0, [](double) { return scalar(1e13); }, scalar(1.0)};
  CHECK_THROWS_AS(bdf4_run(bad, 0.1, 1.0), BlowUp);
  CHECK_THROWS_AS(bdf4_run(p, 0.0, 1.0), InvalidArgument);
  Bdf4Options no_exact;
  no_exact.startup = Startup::Exact;
  CHECK_THROWS_AS(bdf4_run(p, 0.1, 1.0, no_exact), InvalidArgument);
}

TEST_CASE("bdf4: heat flow of z on the sphere") {
  const SurfaceOperators ops(Kernel::imq(2.8), generate_nodes(UnitSphere(), 1024, 1));
  const NodeSet& ns = ops.nodes();
  Vector z(ops.size());
  for (std::size_t i = 0; i < ns.size(); ++i) z[static_cast<Index>(i)] = ns.points[i][2];
  DiffusionProblem p{ops.L(), 1.0, {}, z};
  const Trajectory tr = bdf4_run(p, 1e-3, 0.2);
  const Vector want = std::exp(-0.4) * z;
  CHECK((tr.final_u - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff() <= 1e-2);
}

TEST_CASE("sbdf: temporal orders with exact history") {
  const double floors[] = {0.9, 1.8, 2.7};
  for (int order = 1; order <= 3; ++order) {
    std::vector<double> dts{0.02, 0.01, 0.005}, errs;
    for (double dt : dts) errs.push_back(sbdf_scalar_error(order, dt, Startup::Exact));
    CAPTURE(order);
    CHECK(fit_order(dts, errs) >= floors[order - 1]);
  }
}

TEST_CASE("sbdf: bootstrap startup") {
  // one SBDF1 step and one SBDF2 step contribute O(dt^2) and O(dt^3)
  // local errors; the bootstrapped SBDF3 run is at least second order.
  std::vector<double> dts{0.02, 0.01, 0.005}, errs;
  for (double dt : dts) errs.push_back(sbdf_scalar_error(3, dt, Startup::BdfRamp));
  CHECK(fit_order(dts, errs) >= 1.8);
}

TEST_CASE("sbdf: zero reaction and zero v diffusion") {
  ImexSystem s;
  Matrix l(3, 3);
  l << -2, 1, 1, 1, -2, 1, 1, 1, -2;
  s.L = l;
  s.delta_u = 0.5;
  s.delta_v = 0.0;
  s.reaction = [](double, const Vector& u, const Vector&, Vector& fu, Vector& fv) {
    fu = Vector::Zero(u.size());
    fv = Vector::Zero(u.size());
  };
  s.u0 = Vector::LinSpaced(3, 0.0, 1.0);
  s.v0 = Vector::LinSpaced(3, 2.0, 5.0);
  const Trajectory tr = sbdf_run(s, 0.01, 200, 3);
  CHECK((tr.final_v - s.v0).norm() <= 1e-14);
  // u diffuses toward its (conserved) mean
  CHECK(tr.final_u.mean() == doctest::Approx(s.u0.mean()).epsilon(1e-12));
  CHECK((tr.final_u.array() - s.u0.mean()).abs().maxCoeff() < 0.5 * (s.u0.array() - s.u0.mean()).abs().maxCoeff());
  // SBDF1, SBDF2, SBDF3 matrices for u; none for v
  CHECK(tr.factorizations == 3);
}

TEST_CASE("sbdf: observer stops the run") {
  ImexSystem s;
  s.L = Matrix::Constant(1, 1, -1.0);
  s.delta_u = 1.0;
  s.reaction = [](double, const Vector& u, const Vector&, Vector& fu, Vector& fv) {
    fu = Vector::Zero(u.size());
    fv = Vector::Zero(u.size());
  };
  s.u0 = scalar(1.0);
  s.v0 = scalar(0.0);
  SbdfOptions o;
  o.observer = [](std::size_t k, double, const Vector&, const Vector&, const Vector&) { return k < 17; };
  const Trajectory tr = sbdf_run(s, 0.01, 1000, 3, o);
  CHECK(tr.steps == 17);
  CHECK(tr.stopped_early);
  CHECK_THROWS_AS(sbdf_run(s, 0.01, 10, 4), InvalidArgument);
}

TEST_CASE("fit_order") {
  CHECK(fit_order({1.0, 0.5, 0.25}, {3.0, 0.75, 0.1875}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(fit_order({1.0}, {1.0}), InvalidArgument);
}
