#pragma once

#include <cstddef>
#include <functional>

namespace nmvm::math {

/// Modified Bessel function of the second (third) kind K_order(x), x > 0.
///
/// Half-integer orders use the closed form K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
/// plus upward recurrence; other orders use the Temme series / Steed
/// continued fraction from the standard library. K is even in the order.
/// Returns +inf when the true value overflows (x -> 0 with large |order|) and
/// 0 when it underflows (x > ~700); use log_bessel_k in those regimes.
/// Throws InputError for x <= 0 or non-finite arguments.
double bessel_k(double order, double x);

/// log K_order(x), finite over the whole domain x > 0.
double log_bessel_k(double order, double x);

/// K_{order + shift}(x) / K_order(x), evaluated in log space.
double bessel_k_ratio(double order, double shift, double x);

double normal_pdf(double x);
double normal_cdf(double x);

/// Inverse of normal_cdf (Wichura AS241, one Newton polish step).
/// Throws InputError unless 0 < p < 1.
double normal_quantile(double p);

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  std::size_t max_subdivisions = 200;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

using ScalarFunction = std::function<double(double)>;

/// Adaptive 15-point Gauss-Kronrod on [lo, hi]. Never evaluates f at the
/// endpoints. Throws QuadratureError once max_subdivisions panels are in use
/// without meeting max(abs_tol, rel_tol * |I|).
QuadratureResult integrate(const ScalarFunction& f, double lo, double hi,
                           const QuadratureSpec& spec = {});

/// Integral of f over (0, inf) through s = t / (1 - t).
QuadratureResult integrate_semi_infinite(const ScalarFunction& f,
                                         const QuadratureSpec& spec = {});

struct RootBracket {
  double lo;
  double hi;
  double tol = 1e-12;
};

/// Brent's method: bisection-safeguarded inverse quadratic interpolation.
/// Throws InputError if f(lo) and f(hi) share a sign, NumericalError if the
/// iteration budget is exhausted.
double find_root(const ScalarFunction& f, const RootBracket& bracket,
                 std::size_t max_iterations = 200);

struct MinimumResult {
  double x;
  double value;
  std::size_t evaluations;
};

/// Brent's derivative-free minimiser on [lo, hi] (golden section with
/// parabolic steps). Returns a local minimum; unimodal f gives the global one.
MinimumResult minimize_scalar(const ScalarFunction& f, double lo, double hi,
                              double tol = 1e-10, std::size_t max_iterations = 500);

}  // namespace nmvm::math
