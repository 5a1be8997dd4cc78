#pragma once

#include <cstddef>
#include <map>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "nmvm/mixing.hpp"
#include "nmvm/model.hpp"

namespace nmvm {

enum class Measure { VaR, CVaR };
enum class Method { ExactQuadrature, TwoPoint, Piecewise, MonteCarlo, ClosedFormNormal };

std::string to_string(Measure measure);
std::string to_string(Method method);
Measure parse_measure(const std::string& text);  // "var" / "cvar", case-insensitive

struct RiskDiagnostics {
  double error_estimate = 0.0;  // quadrature bound or Monte Carlo standard error
  std::size_t evaluations = 0;  // integrand evaluations
  std::size_t samples = 0;      // Monte Carlo draws
};

/// Risk values follow the return-side convention: VaR_beta(X) is minus the
/// lower beta-quantile of X and CVaR_beta(X) = -E[X | X <= -VaR_beta(X)].
struct RiskResult {
  double value = 0.0;
  Method method = Method::ExactQuadrature;
  Measure measure = Measure::VaR;
  double beta = 0.0;
  RiskDiagnostics diagnostics;
};

/// Y_a = a Z + sqrt(Z) N.
struct YaLaw {
  double a = 0.0;
  MixingLaw mixing = Degenerate{};
};

/// P(Y_a <= t).
double ya_cdf(const YaLaw& law, double t, const math::QuadratureSpec& spec = {});

/// Density of Y_a. GIG (and inverse Gaussian) mixing uses the Bessel closed
/// form; other laws integrate the normal density against the mixing law.
double density_ya(const YaLaw& law, double y);

/// Same density by direct quadrature of the mixture integral for every law.
double density_ya_quadrature(const YaLaw& law, double y);

struct YaRisk {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// y with P(Y_a <= -y) = beta. Bracket starts at +-(|a| EZ + 10 sqrt(EZ)) and
/// doubles up to 60 times.
YaRisk var_ya_detailed(const YaLaw& law, double beta);
/// -E[Y_a | Y_a <= -VaR]. Requires a finite mean.
YaRisk cvar_ya_detailed(const YaLaw& law, double beta);

double var_ya(const YaLaw& law, double beta);
double cvar_ya(const YaLaw& law, double beta);
double risk_ya(const YaLaw& law, Measure measure, double beta);

/// Risk of a univariate mixture loc + skew_coef Z + sqrt(Z) scale N,
/// computed directly in weight space.
RiskResult univariate_risk(const UnivariateMixture& um, Measure measure, double beta);

/// h(a) = risk of Y_a under the model's mixing law.
double h(const TransformedModel& tm, double a, Measure measure, double beta);

/// -x^T mu0 + |x| h(a), a = x^T gamma0 / |x|.
RiskResult portfolio_risk_exact(const TransformedModel& tm, const Eigen::VectorXd& x,
                                Measure measure, double beta);

/// Endpoint values of h at a = +-b, stored as half sums and half differences.
struct TwoPointCoefficients {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double v_plus = 0.0;
  double v_minus = 0.0;
  double b = 0.0;
  double beta = 0.0;
};

TwoPointCoefficients two_point_coefficients(const TransformedModel& tm, double beta);

/// Coefficients keyed by (mixing law, b, beta). Concurrent lookups share a
/// lock; a miss computes under the exclusive lock so each key is built once.
class TwoPointCache {
 public:
  TwoPointCoefficients get(const TransformedModel& tm, double beta);
  std::size_t computations() const;
  void clear();  // drops entries and resets the counter

 private:
  using Key = std::tuple<std::size_t, double, double, double, double, double>;
  static Key key_for(const TransformedModel& tm, double beta);

  mutable std::shared_mutex mutex_;
  std::map<Key, TwoPointCoefficients> entries_;
  std::size_t computations_ = 0;
};

/// Shared cache used by the command-line tool.
TwoPointCache& global_two_point_cache();

/// -x^T mu0 + |x| (w_plus + w_minus cos(x, gamma0)), or the v coefficients for CVaR.
RiskResult portfolio_risk_two_point(const TransformedModel& tm, const Eigen::VectorXd& x,
                                    Measure measure, double beta,
                                    const TwoPointCoefficients& coeffs);

enum class Interpolation { Step, Linear };

/// h sampled on a partition of [-b, b].
struct PiecewiseTable {
  std::vector<double> nodes;
  std::vector<double> values;
  Measure measure = Measure::VaR;
  double beta = 0.0;
  double b = 0.0;
  Interpolation interpolation = Interpolation::Step;

  /// Step uses the left endpoint of the cell containing a; the last node
  /// keeps its own value.
  double evaluate(double a) const;
};

PiecewiseTable build_piecewise_table(const TransformedModel& tm, Measure measure, double beta,
                                     const std::vector<double>& partition,
                                     Interpolation interpolation = Interpolation::Step);

std::vector<double> uniform_partition(double b, std::size_t points);

RiskResult portfolio_risk_piecewise(const TransformedModel& tm, const Eigen::VectorXd& x,
                                    const PiecewiseTable& table);

/// Loss-side auxiliary function alpha + E[(-w^T X - alpha)^+] / (1 - beta),
/// beta a confidence level such as 0.95.
double rockafellar_F(const UnivariateMixture& um, double alpha, double beta);

struct AuxiliaryMinimum {
  double cvar = 0.0;
  double alpha = 0.0;  // minimiser, the loss-side VaR
};

/// min over alpha of rockafellar_F. Equals the return-side CVaR at 1 - beta.
AuxiliaryMinimum minimize_rockafellar(const UnivariateMixture& um, double beta);
double cvar_via_F(const UnivariateMixture& um, double beta);

/// Empirical quantile or tail mean from n_samples draws (n_samples >= 10^4).
/// VaR errors use the Siddiqui spacing estimate of the density at the
/// quantile; CVaR errors use the asymptotic tail-mean variance.
RiskResult mc_risk(const UnivariateMixture& um, Measure measure, double beta,
                   std::size_t n_samples, Rng& rng);

/// Both measures from one set of draws.
std::pair<RiskResult, RiskResult> mc_risk_both(const UnivariateMixture& um, double beta,
                                               std::size_t n_samples, Rng& rng);

}  // namespace nmvm
