// GIG random variates after Hormann and Leydold (2014), "Generating
// generalized inverse Gaussian random variates". Three generators cover the
// (lambda, omega) plane; lambda < 0 is handled by sampling 1/X.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "nmvm/errors.hpp"
#include "nmvm/mixing.hpp"

namespace nmvm::detail {

namespace {

using detail::open_uniform;

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) {
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  }
  // 0 <= lambda < 1: mode of f(1/x)
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms without shift (Dagpunar 1988, Lehner 1989).
void rou_noshift(std::vector<double>& out, double lambda, bool invert, double omega,
                 double alpha, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym =
      ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);

  for (auto& res : out) {
    double x;
    double v;
    do {
      const double u = um * open_uniform(rng);
      v = open_uniform(rng);
      x = u / v;
    } while (std::log(v) > t * std::log(x) - s * (x + 1.0 / x) - nc);
    res = invert ? alpha / x : alpha * x;
  }
}

// Constant hat in the log-concave part; 0 <= lambda < 1, omega <= 1.
void new_approach(std::vector<double>& out, double lambda, bool invert, double omega,
                  double alpha, Rng& rng) {
  if (lambda >= 1.0 || omega > 1.0) throw NumericalError("GIG sampler: invalid branch");
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);

  double area[3];
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  area[0] = k0 * x0;

  double k1;
  double k2;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    area[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area[1] = lambda == 0.0
                  ? k1 * std::log(2.0 / (omega * omega))
                  : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area[0] + area[1] + area[2];

  for (auto& res : out) {
    for (;;) {
      double v = total * open_uniform(rng);
      double x;
      double hx;
      if (v <= area[0]) {
        x = x0 * v / area[0];
        hx = k0;
      } else if ((v -= area[0]) <= area[1]) {
        if (lambda == 0.0) {
          x = omega * std::exp(std::exp(omega) * v);
          hx = k1 / x;
        } else {
          x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
          hx = k1 * std::pow(x, lambda - 1.0);
        }
      } else {
        v -= area[1];
        const double a = x0 > 2.0 / omega ? x0 : 2.0 / omega;
        x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * a) - omega / (2.0 * k2) * v);
        hx = k2 * std::exp(-omega / 2.0 * x);
      }
      const double u = open_uniform(rng) * hx;
      if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) {
        res = invert ? alpha / x : alpha * x;
        break;
      }
    }
  }
}

// Ratio-of-uniforms shifted by the mode (Dagpunar 1989, Lehner 1989).
void rou_shift(std::vector<double>& out, double lambda, bool invert, double omega,
               double alpha, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Extremes of x sqrt(f(x + xm)) are roots of y^3 + a y^2 + b y + c.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;

  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (auto& res : out) {
    double x;
    double v;
    do {
      const double u = uminus + open_uniform(rng) * (uplus - uminus);
      v = open_uniform(rng);
      x = u / v + xm;
    } while (x <= 0.0 || std::log(v) > t * std::log(x) - s * (x + 1.0 / x) - nc);
    res = invert ? alpha / x : alpha * x;
  }
}

}  // namespace

std::vector<double> sample_gig(const Gig& gig, Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  if (gig.chi == 0.0) {
    std::gamma_distribution<double> dist(gig.lambda, 2.0 / gig.psi);
    for (auto& v : out) v = dist(rng);
    return out;
  }
  if (gig.psi == 0.0) {
    std::gamma_distribution<double> dist(-gig.lambda, 2.0 / gig.chi);
    for (auto& v : out) v = 1.0 / dist(rng);
    return out;
  }
  const bool invert = gig.lambda < 0.0;
  const double lambda = std::abs(gig.lambda);
  const double alpha = std::sqrt(gig.chi / gig.psi);
  const double omega = std::sqrt(gig.psi * gig.chi);

  if (lambda > 2.0 || omega > 3.0) {
    rou_shift(out, lambda, invert, omega, alpha, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    rou_noshift(out, lambda, invert, omega, alpha, rng);
  } else {
    new_approach(out, lambda, invert, omega, alpha, rng);
  }
  return out;
}

}  // namespace nmvm::detail
