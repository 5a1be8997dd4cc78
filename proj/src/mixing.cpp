#include "nmvm/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nmvm/errors.hpp"

namespace nmvm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Every law reduces to one of four shapes.
struct Canonical {
  enum class Kind { kGig, kGamma, kInverseGamma, kPointMass } kind;
  double a = 0.0;  // lambda | shape | shape
  double b = 0.0;  // chi    | rate  | scale
  double c = 0.0;  // psi
};

bool finite_all(double x, double y, double z = 0.0) {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

Canonical canonical(const MixingLaw& law) {
  validate(law);
  using K = Canonical::Kind;
  return std::visit(
      Overloaded{
          [](const Gig& g) -> Canonical {
            if (g.chi == 0.0) return {K::kGamma, g.lambda, 0.5 * g.psi};
            if (g.psi == 0.0) return {K::kInverseGamma, -g.lambda, 0.5 * g.chi};
            return {K::kGig, g.lambda, g.chi, g.psi};
          },
          [](const Gamma& g) -> Canonical { return {K::kGamma, g.shape, g.rate}; },
          [](const InverseGaussian& g) -> Canonical {
            return {K::kGig, -0.5, g.delta * g.delta, g.gamma_ig * g.gamma_ig};
          },
          [](const Exponential&) -> Canonical { return {K::kGamma, 1.0, 1.0}; },
          [](const Degenerate&) -> Canonical { return {K::kPointMass}; },
      },
      law);
}

double gig_raw_moment(double lambda, double chi, double psi, double r) {
  const double omega = std::sqrt(chi * psi);
  return std::pow(chi / psi, 0.5 * r) *
         std::exp(math::log_bessel_k(lambda + r, omega) - math::log_bessel_k(lambda, omega));
}

MixingMoments from_raw(double ez, double ez2, double ez3, std::optional<double> ez4) {
  MixingMoments m;
  m.ez = ez;
  m.ez2 = ez2;
  m.ez3 = ez3;
  m.var = ez2 - ez * ez;
  m.m3 = ez3 - 3.0 * ez2 * ez + 2.0 * ez * ez * ez;
  if (ez4) m.m4 = *ez4 - 4.0 * ez3 * ez + 6.0 * ez2 * ez * ez - 3.0 * ez * ez * ez * ez;
  return m;
}

}  // namespace

std::string family_name(const MixingLaw& law) {
  return std::visit(Overloaded{
                        [](const Gig&) { return std::string("gig"); },
                        [](const Gamma&) { return std::string("gamma"); },
                        [](const InverseGaussian&) { return std::string("inverse_gaussian"); },
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const Degenerate&) { return std::string("degenerate"); },
                    },
                    law);
}

void validate(const MixingLaw& law) {
  std::visit(
      Overloaded{
          [](const Gig& g) {
            bool ok = finite_all(g.lambda, g.chi, g.psi) && g.chi >= 0.0 && g.psi >= 0.0;
            if (ok && g.lambda < 0.0) ok = g.chi > 0.0;
            if (ok && g.lambda == 0.0) ok = g.chi > 0.0 && g.psi > 0.0;
            if (ok && g.lambda > 0.0) ok = g.psi > 0.0;
            if (!ok) {
              throw InputError("GIG parameters outside domain: lambda=" +
                               std::to_string(g.lambda) + ", chi=" + std::to_string(g.chi) +
                               ", psi=" + std::to_string(g.psi));
            }
          },
          [](const Gamma& g) {
            if (!finite_all(g.shape, g.rate) || !(g.shape > 0.0) || !(g.rate > 0.0)) {
              throw InputError("Gamma needs shape > 0 and rate > 0");
            }
          },
          [](const InverseGaussian& g) {
            if (!finite_all(g.delta, g.gamma_ig) || !(g.delta > 0.0) || !(g.gamma_ig > 0.0)) {
              throw InputError("InverseGaussian needs delta > 0 and gamma > 0");
            }
          },
          [](const Exponential&) {},
          [](const Degenerate&) {},
      },
      law);
}

MixingDensity::MixingDensity(const MixingLaw& law) {
  const Canonical c = canonical(law);
  switch (c.kind) {
    case Canonical::Kind::kGig:
      kind_ = Kind::kGig;
      power_ = c.a - 1.0;
      inv_coef_ = 0.5 * c.b;
      lin_coef_ = 0.5 * c.c;
      log_norm_ = 0.5 * c.a * std::log(c.c / c.b) - std::log(2.0) -
                  math::log_bessel_k(c.a, std::sqrt(c.b * c.c));
      break;
    case Canonical::Kind::kGamma:
      kind_ = Kind::kGamma;
      power_ = c.a - 1.0;
      lin_coef_ = c.b;
      log_norm_ = c.a * std::log(c.b) - std::lgamma(c.a);
      break;
    case Canonical::Kind::kInverseGamma:
      kind_ = Kind::kInverseGamma;
      power_ = -c.a - 1.0;
      inv_coef_ = c.b;
      log_norm_ = c.a * std::log(c.b) - std::lgamma(c.a);
      break;
    case Canonical::Kind::kPointMass:
      throw InputError("degenerate mixing law has no density");
  }
}

double MixingDensity::log_density(double w) const {
  if (!(w > 0.0)) return -std::numeric_limits<double>::infinity();
  return log_norm_ + power_ * std::log(w) - inv_coef_ / w - lin_coef_ * w;
}

double MixingDensity::operator()(double w) const {
  if (!(w > 0.0) || !std::isfinite(w)) return 0.0;
  return std::exp(log_density(w));
}

double density(const MixingLaw& law, double w) { return MixingDensity(law)(w); }

double raw_moment(const MixingLaw& law, double order) {
  const Canonical c = canonical(law);
  switch (c.kind) {
    case Canonical::Kind::kGig:
      return gig_raw_moment(c.a, c.b, c.c, order);
    case Canonical::Kind::kGamma:
      if (!(c.a + order > 0.0)) {
        throw InputError("moment of order " + std::to_string(order) + " does not exist");
      }
      return std::exp(std::lgamma(c.a + order) - std::lgamma(c.a) - order * std::log(c.b));
    case Canonical::Kind::kInverseGamma:
      if (!(c.a - order > 0.0)) {
        throw InputError("moment of order " + std::to_string(order) + " does not exist");
      }
      return std::exp(std::lgamma(c.a - order) - std::lgamma(c.a) + order * std::log(c.b));
    case Canonical::Kind::kPointMass:
      return 1.0;
  }
  return 0.0;
}

MixingMoments moments(const MixingLaw& law) {
  validate(law);
  if (std::holds_alternative<Degenerate>(law)) {
    MixingMoments m;
    m.ez = m.ez2 = m.ez3 = 1.0;
    m.m4 = 0.0;
    return m;
  }
  if (const auto* ig = std::get_if<InverseGaussian>(&law)) {
    const double d = ig->delta;
    const double g = ig->gamma_ig;
    MixingMoments m;
    m.ez = d / g;
    m.var = d / (g * g * g);
    m.m3 = 3.0 * d / std::pow(g, 5);
    m.m4 = 15.0 * d / std::pow(g, 7) + 3.0 * d * d / std::pow(g, 6);
    m.ez2 = m.var + m.ez * m.ez;
    m.ez3 = m.m3 + 3.0 * m.ez2 * m.ez - 2.0 * m.ez * m.ez * m.ez;
    return m;
  }
  const Canonical c = canonical(law);
  if (c.kind == Canonical::Kind::kGamma) {
    const double k = c.a;
    const double s = 1.0 / c.b;
    MixingMoments m;
    m.ez = k * s;
    m.ez2 = k * (k + 1.0) * s * s;
    m.ez3 = k * (k + 1.0) * (k + 2.0) * s * s * s;
    m.var = k * s * s;
    m.m3 = 2.0 * k * s * s * s;
    m.m4 = 3.0 * k * (k + 2.0) * s * s * s * s;
    return m;
  }
  const double ez = raw_moment(law, 1.0);
  const double ez2 = raw_moment(law, 2.0);
  const double ez3 = raw_moment(law, 3.0);
  std::optional<double> ez4;
  if (c.kind == Canonical::Kind::kGig || c.a > 4.0) ez4 = raw_moment(law, 4.0);
  return from_raw(ez, ez2, ez3, ez4);
}

double skew_condition(const MixingLaw& law) {
  const MixingMoments m = moments(law);
  return m.m3 * m.ez - 2.0 * m.var * m.var;
}

double typical_scale(const MixingLaw& law) {
  const Canonical c = canonical(law);
  switch (c.kind) {
    case Canonical::Kind::kGig:
      return gig_raw_moment(c.a, c.b, c.c, 1.0);
    case Canonical::Kind::kGamma:
      return c.a / c.b;
    case Canonical::Kind::kInverseGamma:
      return c.a > 1.0 ? c.b / (c.a - 1.0) : c.b / (c.a + 1.0);
    case Canonical::Kind::kPointMass:
      return 1.0;
  }
  return 1.0;
}

math::QuadratureResult expect(const MixingLaw& law, const std::function<double(double)>& f,
                              const math::QuadratureSpec& spec) {
  validate(law);
  if (std::holds_alternative<Degenerate>(law)) return {f(1.0), 0.0, 1};
  const MixingDensity dens(law);
  const double scale = typical_scale(law);
  return math::integrate_semi_infinite(
      [&](double s) {
        const double w = scale * s;
        const double p = dens(w);
        return p == 0.0 ? 0.0 : scale * p * f(w);
      },
      spec);
}

double detail::open_uniform(Rng& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0) return u;
  }
}

namespace {

// Michael, Schucany and Haas (1976): root selection on a chi-square(1) variate.
double draw_inverse_gaussian(double mean, double shape, Rng& rng) {
  std::normal_distribution<double> normal;
  const double n = normal(rng);
  const double y = n * n;
  const double my = mean * y;
  const double x =
      mean + mean * my / (2.0 * shape) -
      mean / (2.0 * shape) * std::sqrt(4.0 * shape * my + my * my);
  return detail::open_uniform(rng) <= mean / (mean + x) ? x : mean * mean / x;
}

}  // namespace

std::vector<double> sample(const MixingLaw& law, Rng& rng, std::size_t n) {
  if (n == 0) throw InputError("sample: n must be at least 1");
  validate(law);
  std::vector<double> out(n);
  std::visit(Overloaded{
                 [&](const Gig& g) { out = detail::sample_gig(g, rng, n); },
                 [&](const Gamma& g) {
                   std::gamma_distribution<double> dist(g.shape, 1.0 / g.rate);
                   for (auto& v : out) v = dist(rng);
                 },
                 [&](const InverseGaussian& g) {
                   const double mean = g.delta / g.gamma_ig;
                   const double shape = g.delta * g.delta;
                   for (auto& v : out) v = draw_inverse_gaussian(mean, shape, rng);
                 },
                 [&](const Exponential&) {
                   std::gamma_distribution<double> dist(1.0, 1.0);
                   for (auto& v : out) v = dist(rng);
                 },
                 [&](const Degenerate&) { std::fill(out.begin(), out.end(), 1.0); },
             },
             law);
  return out;
}

double draw(const MixingLaw& law, Rng& rng) { return sample(law, rng, 1).front(); }

}  // namespace nmvm
