#include "nmvm/mathkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nmvm/errors.hpp"

namespace nmvm::math {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_half_integer(double nu) { return nu - std::floor(nu) == 0.5; }

// K_nu(x) for nu = k + 1/2 by upward recurrence from K_{1/2} and K_{3/2}.
double bessel_k_half_integer(double nu, double x) {
  double k_lo = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
  if (nu == 0.5) return k_lo;
  double k_hi = k_lo * (1.0 + 1.0 / x);
  for (double mu = 1.5; mu < nu; mu += 1.0) {
    const double next = k_lo + (2.0 * mu / x) * k_hi;
    k_lo = k_hi;
    k_hi = next;
  }
  return k_hi;
}

// Large-x asymptotic expansion, in logs. Used once K underflows (x > ~700).
double log_bessel_k_large_x(double nu, double x) {
  const double mu4 = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < 60; ++j) {
    const double odd = 2.0 * j - 1.0;
    const double next = term * (mu4 - odd * odd) / (8.0 * j * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x + std::log(sum);
}

// Upward recurrence with rescaling, for the overflow regime (small x, large nu).
double log_bessel_k_recurrence(double nu, double x) {
  const double nu0 = nu - std::floor(nu);
  double k_lo = bessel_k(nu0, x);
  double k_hi = bessel_k(nu0 + 1.0, x);
  if (!std::isfinite(k_lo) || !std::isfinite(k_hi)) {
    throw NumericalError("log_bessel_k: argument " + std::to_string(x) +
                         " too small to evaluate order " + std::to_string(nu));
  }
  if (std::floor(nu) == 0.0) return std::log(k_lo);
  double log_scale = 0.0;
  for (double mu = nu0 + 1.0; mu < nu - 0.5; mu += 1.0) {
    const double next = k_lo + (2.0 * mu / x) * k_hi;
    k_lo = k_hi;
    k_hi = next;
    if (k_hi > 1e250) {
      k_lo *= 1e-250;
      k_hi *= 1e-250;
      log_scale += 250.0 * std::numbers::ln10;
    }
  }
  return std::log(k_hi) + log_scale;
}

}  // namespace

double bessel_k(double order, double x) {
  if (!(x > 0.0) || !std::isfinite(x) || !std::isfinite(order)) {
    throw InputError("bessel_k: need finite order and x > 0, got order=" +
                     std::to_string(order) + ", x=" + std::to_string(x));
  }
  const double nu = std::abs(order);
  if (is_half_integer(nu) && nu < 64.0) return bessel_k_half_integer(nu, x);
  try {
    return std::cyl_bessel_k(nu, x);
  } catch (const std::overflow_error&) {
    return kInf;
  }
}

double log_bessel_k(double order, double x) {
  const double nu = std::abs(order);
  const double k = bessel_k(nu, x);
  if (std::isfinite(k) && k > 1e-290) return std::log(k);
  if (!std::isfinite(k)) return log_bessel_k_recurrence(nu, x);
  return log_bessel_k_large_x(nu, x);
}

double bessel_k_ratio(double order, double shift, double x) {
  return std::exp(log_bessel_k(order + shift, x) - log_bessel_k(order, x));
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InputError("normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  // Wichura (1988), algorithm AS241 PPND16.
  const double q = p - 0.5;
  double z;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    z = q *
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
              67265.770927008700853) * r + 45921.953931549871457) * r +
            13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608) /
        (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
              39307.89580009271061) * r + 21213.794301586595867) * r +
            5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
  } else {
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      z = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
    } else {
      r -= 5.0;
      z = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
    }
    if (q < 0.0) z = -z;
  }
  const double density = normal_pdf(z);
  if (density > 0.0) z -= (normal_cdf(z) - p) / density;
  return z;
}

double find_root(const ScalarFunction& f, const RootBracket& bracket,
                 std::size_t max_iterations) {
  double a = bracket.lo;
  double b = bracket.hi;
  if (!(a < b)) throw InputError("find_root: bracket needs lo < hi");
  if (!(bracket.tol > 0.0)) throw InputError("find_root: tolerance must be positive");
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw InputError("find_root: no sign change on [" + std::to_string(a) + ", " +
                     std::to_string(b) + "]");
  }
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 =
        2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * bracket.tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw NumericalError("find_root: no convergence after " +
                       std::to_string(max_iterations) + " iterations");
}

MinimumResult minimize_scalar(const ScalarFunction& f, double lo, double hi, double tol,
                              std::size_t max_iterations) {
  if (!(lo < hi)) throw InputError("minimize_scalar: need lo < hi");
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lo;
  double b = hi;
  double x = a + golden * (b - a);
  double w = x;
  double v = x;
  double fx = f(x);
  double fw = fx;
  double fv = fx;
  double d = 0.0;
  double e = 0.0;
  std::size_t evals = 1;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * (std::abs(x) + 1.0);
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) return {x, fx, evals};
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = xm - x >= 0.0 ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= xm ? a : b) - x;
      d = golden * e;
    }
    const double u = x + (std::abs(d) >= tol1 ? d : (d > 0.0 ? tol1 : -tol1));
    const double fu = f(u);
    ++evals;
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  throw NumericalError("minimize_scalar: no convergence after " +
                       std::to_string(max_iterations) + " iterations");
}

}  // namespace nmvm::math
