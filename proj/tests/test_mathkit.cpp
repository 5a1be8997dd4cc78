#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "nmvm/errors.hpp"
#include "nmvm/mathkit.hpp"
#include "nmvm/mixing.hpp"

using namespace nmvm;
using doctest::Approx;

namespace {

// K_v(x) = int_0^inf exp(-x cosh t) cosh(v t) dt by composite Simpson.
double bessel_k_by_integral(double v, double x) {
  const double t_max = std::acosh(std::max(2.0, 800.0 / x));
  const int n = 20000;
  const double step = t_max / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * step;
    const double f = std::exp(-x * std::cosh(t)) * std::cosh(v * t);
    sum += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return sum * step / 3.0;
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("mathkit") {
  TEST_CASE("bessel_k half-integer closed form") {
    CHECK(math::bessel_k(0.5, 1.0) == Approx(std::sqrt(std::numbers::pi / 2.0) * std::exp(-1.0)).epsilon(1e-14));
    CHECK(math::bessel_k(0.5, 1.0) == Approx(0.4610685).epsilon(1e-7));
  }

  TEST_CASE("bessel_k agrees with the integral representation") {
    for (double v : {0.0, 0.3, 0.5, 1.0, 1.7, 2.5, -0.878655}) {
      for (double x : {0.05, 0.4, 1.0, 3.0, 12.0}) {
        CAPTURE(v);
        CAPTURE(x);
        CHECK(math::bessel_k(v, x) == Approx(bessel_k_by_integral(v, x)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("bessel_k is even in the order") {
    CHECK(math::bessel_k(0.7, 2.3) == Approx(math::bessel_k(-0.7, 2.3)).epsilon(1e-14));
  }

  TEST_CASE("bessel_k recurrence K_{3/2} = K_{1/2}/x + K_{-1/2}") {
    const double x = 1.5;
    CHECK(math::bessel_k(1.5, x) ==
          Approx(math::bessel_k(0.5, x) / x + math::bessel_k(-0.5, x)).epsilon(1e-14));
  }

  TEST_CASE("log_bessel_k stays finite where K over- or underflows") {
    const double big = math::log_bessel_k(0.3, 2000.0);
    CHECK(std::isfinite(big));
    // Leading asymptotic term: log sqrt(pi/(2x)) - x.
    CHECK(big == Approx(0.5 * std::log(std::numbers::pi / 4000.0) - 2000.0).epsilon(1e-6));
    const double small = math::log_bessel_k(200.0, 1e-3);
    CHECK(std::isfinite(small));
    CHECK(small > 700.0);
    CHECK(math::log_bessel_k(1.3, 2.0) == Approx(std::log(math::bessel_k(1.3, 2.0))).epsilon(1e-13));
  }

  TEST_CASE("bessel_k_ratio") {
    CHECK(math::bessel_k_ratio(-0.5, 1.0, 0.75) ==
          Approx(math::bessel_k(0.5, 0.75) / math::bessel_k(-0.5, 0.75)).epsilon(1e-13));
  }

  TEST_CASE("bessel_k rejects non-positive arguments") {
    CHECK_THROWS_AS(math::bessel_k(0.5, 0.0), InputError);
    CHECK_THROWS_AS(math::bessel_k(0.5, -1.0), InputError);
  }

  TEST_CASE("normal cdf and quantile") {
    CHECK(math::normal_cdf(0.0) == 0.5);
    CHECK(math::normal_cdf(-1.7) + math::normal_cdf(1.7) == Approx(1.0).epsilon(1e-15));
    const double q = bisect([](double x) { return math::normal_cdf(x) - 0.05; }, -10.0, 10.0);
    CHECK(math::normal_quantile(0.05) == Approx(q).epsilon(1e-12));
    CHECK(math::normal_quantile(0.05) == Approx(-1.6448536).epsilon(1e-7));
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) {
      CAPTURE(p);
      CHECK(math::normal_cdf(math::normal_quantile(p)) == Approx(p).epsilon(1e-13));
    }
    CHECK_THROWS_AS(math::normal_quantile(0.0), InputError);
    CHECK_THROWS_AS(math::normal_quantile(1.0), InputError);
  }

  TEST_CASE("integrate and integrate_semi_infinite") {
    CHECK(math::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value ==
          Approx(2.0).epsilon(1e-12));
    CHECK(math::integrate_semi_infinite([](double s) { return std::exp(-s); }).value ==
          Approx(1.0).epsilon(1e-10));
    CHECK(math::integrate_semi_infinite([](double s) { return s * std::exp(-s); }).value ==
          Approx(1.0).epsilon(1e-10));
    const MixingDensity gig(fixtures::first_fit_gig());
    CHECK(math::integrate_semi_infinite([&](double w) { return gig(w); }).value ==
          Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("integrate reports exhaustion") {
    math::QuadratureSpec spec;
    spec.max_subdivisions = 3;
    spec.abs_tol = 1e-15;
    spec.rel_tol = 1e-15;
    CHECK_THROWS_AS(
        math::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, spec),
        QuadratureError);
  }

  TEST_CASE("find_root") {
    CHECK(math::find_root([](double x) { return x - 2.0; }, {0.0, 5.0}) == Approx(2.0).epsilon(1e-12));
    CHECK(math::find_root([](double x) { return math::normal_cdf(x) - 0.05; }, {-10.0, 10.0}) ==
          Approx(-1.6448536).epsilon(1e-7));
    CHECK(std::abs(math::find_root([](double x) { return x * x * x; }, {-1.0, 2.0})) < 1e-4);
    CHECK_THROWS_AS(math::find_root([](double x) { return x * x + 1.0; }, {-1.0, 1.0}), InputError);
  }

  TEST_CASE("minimize_scalar") {
    const auto r = math::minimize_scalar([](double x) { return (x - 0.3) * (x - 0.3) + 1.0; }, -2.0, 2.0);
    CHECK(r.x == Approx(0.3).epsilon(1e-8));
    CHECK(r.value == Approx(1.0).epsilon(1e-14));
  }
}
