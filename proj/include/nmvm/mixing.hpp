#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "nmvm/mathkit.hpp"

namespace nmvm {

/// Random engine used by every sampler in the library. Streams are
/// caller-owned; identical seeds reproduce identical draws.
using Rng = std::mt19937_64;

/// Generalized inverse Gaussian GIG(lambda, chi, psi), density proportional
/// to w^{lambda-1} exp(-(chi/w + psi*w)/2) on w > 0.
struct Gig {
  double lambda;
  double chi;
  double psi;
};

/// Gamma law with shape k and rate theta: density theta^k w^{k-1} e^{-theta w} / Gamma(k).
struct Gamma {
  double shape;
  double rate;
};

/// Inverse Gaussian with density
/// delta/sqrt(2 pi) e^{delta g} z^{-3/2} exp(-(delta^2/z + g^2 z)/2), g = gamma_ig.
/// Equals GIG(-1/2, delta^2, g^2).
struct InverseGaussian {
  double delta;
  double gamma_ig;
};

/// Exp(1), i.e. Gamma{1, 1}. Mixing law of the asymmetric Laplace family.
struct Exponential {};

/// Point mass at 1. Turns the mixture into a Gaussian.
struct Degenerate {};

using MixingLaw = std::variant<Gig, Gamma, InverseGaussian, Exponential, Degenerate>;

/// Central moments are about EZ: m3 = E(Z - EZ)^3, m4 = E(Z - EZ)^4.
struct MixingMoments {
  double ez = 0.0;
  double ez2 = 0.0;
  double ez3 = 0.0;
  double var = 0.0;
  double m3 = 0.0;
  std::optional<double> m4;
};

std::string family_name(const MixingLaw& law);

/// Throws InputError when parameters leave the family's domain. For GIG:
/// chi > 0, psi >= 0 if lambda < 0; chi > 0, psi > 0 if lambda = 0;
/// chi >= 0, psi > 0 if lambda > 0.
void validate(const MixingLaw& law);

/// Lebesgue density at w (0 for w <= 0). Degenerate has none and throws.
double density(const MixingLaw& law, double w);

/// E[Z^order] for real order; throws InputError if the moment is infinite.
double raw_moment(const MixingLaw& law, double order);

/// EZ, EZ^2, EZ^3 and central moments. Throws if any of the first three
/// moments is infinite; m4 is left empty when the fourth is.
MixingMoments moments(const MixingLaw& law);

/// m3(Z) EZ - 2 Var(Z)^2. Non-negative values make the portfolio skewness
/// non-decreasing in the angle to the skewness direction.
double skew_condition(const MixingLaw& law);

/// Reusable density evaluator with the normalising constant computed once.
class MixingDensity {
 public:
  explicit MixingDensity(const MixingLaw& law);
  double operator()(double w) const;
  double log_density(double w) const;

 private:
  enum class Kind { kGig, kGamma, kInverseGamma, kPointMass };
  Kind kind_;
  double log_norm_ = 0.0;
  double power_ = 0.0;  // exponent of w
  double inv_coef_ = 0.0;  // coefficient of 1/w in the exponent
  double lin_coef_ = 0.0;  // coefficient of w in the exponent
};

/// A scale near the bulk of the law (mean, or mode when the mean is
/// infinite). Used to centre quadrature maps.
double typical_scale(const MixingLaw& law);

/// E[f(Z)] by quadrature against the density (exact for Degenerate).
math::QuadratureResult expect(const MixingLaw& law, const std::function<double(double)>& f,
                              const math::QuadratureSpec& spec = {});

/// One draw. GIG uses the Hormann-Leydold ratio-of-uniforms generators,
/// IG the Michael-Schucany-Haas transform, Gamma the standard library's
/// Marsaglia-Tsang rejection sampler.
double draw(const MixingLaw& law, Rng& rng);

/// n i.i.d. draws; throws InputError for n == 0.
std::vector<double> sample(const MixingLaw& law, Rng& rng, std::size_t n);

namespace detail {
/// Uniform on the open interval (0, 1).
double open_uniform(Rng& rng);
/// n GIG draws sharing one generator setup. Assumes validated parameters.
std::vector<double> sample_gig(const Gig& gig, Rng& rng, std::size_t n);
}  // namespace detail

}  // namespace nmvm
