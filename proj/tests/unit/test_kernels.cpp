#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rbfsurf/error.hpp"
#include "rbfsurf/kernels.hpp"

using namespace rbfsurf;

namespace {

// K_v(z) = int_0^inf exp(-z cosh t) cosh(v t) dt, trapezoid rule (spectrally
// accurate for this analytic, rapidly decaying integrand).
double bessel_k(double v, double z) {
  const double h = 0.01;
  double acc = 0.5 * std::exp(-z);
  for (int i = 1;; ++i) {
    const double t = i * h;
    const double term = std::exp(-z * std::cosh(t) + v * t) * 0.5 * (1.0 + std::exp(-2.0 * v * t));
    acc += term;
    if (term < 1e-300 || (t > 2.0 && term < 1e-18 * acc)) break;
  }
  return acc * h;
}

// z^v K_v(z) / (2^{v-1} Gamma(v)), which tends to 1 as z -> 0.
double matern_oracle(double nu, double z) {
  const double v = nu - 1.5;
  return std::pow(z, v) * bessel_k(v, z) / (std::pow(2.0, v - 1.0) * std::tgamma(v));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("matern closed form agrees with the Bessel integral") {
  for (int nu : {3, 4, 5, 6, 7, 9, 12}) {
    const Kernel k = Kernel::matern(nu, 1.0);
    for (double z : {0.05, 0.3, 1.0, 2.5, 6.0, 15.0}) {
      CAPTURE(nu);
      CAPTURE(z);
      CHECK(rel(k.phi(z), matern_oracle(nu, z)) <= 1e-10);
    }
  }
}

TEST_CASE("matern shape parameter scales the radius") {
  const Kernel a = Kernel::matern(5, 1.0), b = Kernel::matern(5, 3.7);
  for (double r : {0.0, 0.1, 0.4, 2.0}) CHECK(b.phi(r) == doctest::Approx(a.phi(3.7 * r)).epsilon(1e-14));
}

TEST_CASE("kernels are normalized and decreasing") {
  for (const Kernel& k : {Kernel::matern(3, 2.0), Kernel::matern(8, 4.0), Kernel::imq(3.0)}) {
    CHECK(k.phi(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    double prev = k.phi(0.0);
    for (double r = 0.05; r < 5.0; r += 0.05) {
      const double v = k.phi(r);
      CHECK(v < prev);
      CHECK(v > 0.0);
      prev = v;
    }
  }
}

TEST_CASE("eta matches phi'(r)/r by central differences") {
  for (const Kernel& k : {Kernel::matern(3, 1.5), Kernel::matern(4, 4.0), Kernel::matern(7, 8.0),
                          Kernel::matern(10, 2.0), Kernel::imq(2.8), Kernel::imq(0.5)}) {
    for (double r : {0.01, 0.07, 0.2, 0.5, 1.1, 1.9}) {
      const double h = 1e-5 * std::max(r, 1e-3);
      const double d = (k.phi(r + h) - k.phi(r - h)) / (2.0 * h);
      CAPTURE(k.spec());
      CAPTURE(r);
      CHECK(rel(k.eta(r), d / r) <= 1e-6);
    }
  }
}

TEST_CASE("eta at the origin is the limit phi''(0)") {
  // matern: phi''(0) from a one-sided second difference; imq: -eps^2.
  const Kernel m = Kernel::matern(5, 2.0);
  const double h = 1e-4;
  const double d2 = 2.0 * (m.phi(h) - m.phi(0.0)) / (h * h);
  CHECK(rel(m.eta(0.0), d2) <= 1e-6);
  CHECK(Kernel::imq(3.0).eta(0.0) == doctest::Approx(-9.0).epsilon(1e-15));
  CHECK(std::isfinite(m.eta(0.0)));
}

TEST_CASE("imq closed form") {
  const Kernel k = Kernel::imq(2.0);
  CHECK(k.phi(0.5) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(k.eta(0.5) == doctest::Approx(-4.0 / std::pow(2.0, 1.5)).epsilon(1e-15));
  CHECK(std::isinf(k.smoothness_s()));
}

TEST_CASE("matern smoothness and continuity") {
  const Kernel k = Kernel::matern(4, 1.0);
  CHECK(k.smoothness_s() == 3.5);
  CHECK(k.continuity() == 4);
  CHECK(Kernel::matern(7, 1.0).continuity() == 10);
}

TEST_CASE("kernel spec parsing") {
  const Kernel a = parse_kernel_spec("imq:eps=3.0");
  CHECK(a.family() == KernelFamily::IMQ);
  CHECK(a.epsilon() == 3.0);
  const Kernel b = parse_kernel_spec("matern:nu=4,eps=4.0");
  CHECK(b.family() == KernelFamily::Matern);
  CHECK(b.nu() == 4.0);
  CHECK(b.epsilon() == 4.0);
  CHECK(parse_kernel_spec(b.spec()).spec() == b.spec());
  CHECK(parse_kernel_spec("imq:eps=2.8").spec() == "imq:eps=2.8");

  CHECK_THROWS_AS(parse_kernel_spec("gauss:eps=1"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("imq"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("imq:eps=x"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("imq:eps=1,eps=2"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("imq:eps=1,nu=2"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("matern:eps=1"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("matern:nu=2,eps=1"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("matern:nu=4.5,eps=1"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("imq:eps=-1"), InvalidArgument);
  CHECK_THROWS_AS(parse_kernel_spec("imq:eps=0"), InvalidArgument);
}
