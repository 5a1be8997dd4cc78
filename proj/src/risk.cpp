#include "nmvm/risk.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "nmvm/errors.hpp"

namespace nmvm {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw InputError("beta must lie in (0, 1), got " + std::to_string(beta));
  }
}

bool is_point_mass(const MixingLaw& law) { return std::holds_alternative<Degenerate>(law); }

// Gig-shaped laws with chi > 0 and psi > 0 have a closed-form Y_a density.
bool gig_parameters(const MixingLaw& law, double& lambda, double& chi, double& psi) {
  if (const auto* g = std::get_if<Gig>(&law)) {
    if (g->chi > 0.0 && g->psi > 0.0) {
      lambda = g->lambda;
      chi = g->chi;
      psi = g->psi;
      return true;
    }
  }
  if (const auto* ig = std::get_if<InverseGaussian>(&law)) {
    lambda = -0.5;
    chi = ig->delta * ig->delta;
    psi = ig->gamma_ig * ig->gamma_ig;
    return true;
  }
  return false;
}

double bracket_start(const YaLaw& law) {
  double ez;
  try {
    ez = raw_moment(law.mixing, 1.0);
  } catch (const InputError&) {
    ez = typical_scale(law.mixing);
  }
  return std::abs(law.a) * ez + 10.0 * std::sqrt(ez);
}

}  // namespace

std::string to_string(Measure measure) { return measure == Measure::VaR ? "var" : "cvar"; }

std::string to_string(Method method) {
  switch (method) {
    case Method::ExactQuadrature: return "exact";
    case Method::TwoPoint: return "two-point";
    case Method::Piecewise: return "piecewise";
    case Method::MonteCarlo: return "mc";
    case Method::ClosedFormNormal: return "closed-form-normal";
  }
  return "unknown";
}

Measure parse_measure(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "var") return Measure::VaR;
  if (lower == "cvar") return Measure::CVaR;
  throw InputError("unknown risk measure '" + text + "' (expected var or cvar)");
}

double ya_cdf(const YaLaw& law, double t, const math::QuadratureSpec& spec) {
  if (is_point_mass(law.mixing)) return math::normal_cdf(t - law.a);
  const double a = law.a;
  return expect(
             law.mixing,
             [a, t](double s) { return math::normal_cdf((t - a * s) / std::sqrt(s)); }, spec)
      .value;
}

double density_ya_quadrature(const YaLaw& law, double y) {
  if (is_point_mass(law.mixing)) return math::normal_pdf(y - law.a);
  const double a = law.a;
  return expect(law.mixing,
                [a, y](double s) {
                  const double root = std::sqrt(s);
                  return math::normal_pdf((y - a * s) / root) / root;
                })
      .value;
}

double density_ya(const YaLaw& law, double y) {
  double lambda;
  double chi;
  double psi;
  if (!gig_parameters(law.mixing, lambda, chi, psi)) return density_ya_quadrature(law, y);
  validate(law.mixing);
  const double q = chi + y * y;
  const double p = psi + law.a * law.a;
  const double arg = std::sqrt(q * p);
  const double log_value = law.a * y - 0.5 * std::log(2.0 * std::numbers::pi) +
                           0.5 * lambda * std::log(psi / chi) -
                           math::log_bessel_k(lambda, std::sqrt(chi * psi)) +
                           0.5 * (lambda - 0.5) * std::log(q / p) +
                           math::log_bessel_k(lambda - 0.5, arg);
  return std::exp(log_value);
}

YaRisk var_ya_detailed(const YaLaw& law, double beta) {
  check_beta(beta);
  validate(law.mixing);
  if (is_point_mass(law.mixing)) return {-law.a - math::normal_quantile(beta), 0.0, 0};

  std::size_t evaluations = 0;
  double worst_error = 0.0;
  const MixingDensity dens(law.mixing);
  const double scale = typical_scale(law.mixing);
  const double a = law.a;
  const auto excess = [&](double y) {
    const auto r = math::integrate_semi_infinite(
        [&](double s) {
          const double w = scale * s;
          const double p = dens(w);
          return p == 0.0 ? 0.0 : scale * p * math::normal_cdf((-y - a * w) / std::sqrt(w));
        },
        {});
    evaluations += r.evaluations;
    worst_error = std::max(worst_error, r.error);
    return r.value - beta;
  };

  double half = bracket_start(law);
  for (int doubling = 0; doubling <= 60; ++doubling) {
    if (excess(-half) > 0.0 && excess(half) < 0.0) {
      const double y = math::find_root(excess, {-half, half, 1e-13});
      return {y, worst_error, evaluations};
    }
    half *= 2.0;
  }
  throw NumericalError("var_ya: no quantile bracket found after 60 doublings");
}

YaRisk cvar_ya_detailed(const YaLaw& law, double beta) {
  check_beta(beta);
  validate(law.mixing);
  if (is_point_mass(law.mixing)) {
    const double z = math::normal_quantile(beta);
    return {-law.a + math::normal_pdf(z) / beta, 0.0, 0};
  }
  try {
    raw_moment(law.mixing, 1.0);
  } catch (const InputError&) {
    throw InputError("CVaR needs a mixing law with finite mean");
  }
  const YaRisk var = var_ya_detailed(law, beta);
  const double y = var.value;
  const double a = law.a;
  const auto r = expect(law.mixing, [a, y](double s) {
    const double root = std::sqrt(s);
    const double u = (-y - a * s) / root;
    return a * s * math::normal_cdf(u) - root * math::normal_pdf(u);
  });
  return {-r.value / beta, var.error + r.error / beta, var.evaluations + r.evaluations};
}

double var_ya(const YaLaw& law, double beta) { return var_ya_detailed(law, beta).value; }
double cvar_ya(const YaLaw& law, double beta) { return cvar_ya_detailed(law, beta).value; }

double risk_ya(const YaLaw& law, Measure measure, double beta) {
  return measure == Measure::VaR ? var_ya(law, beta) : cvar_ya(law, beta);
}

RiskResult univariate_risk(const UnivariateMixture& um, Measure measure, double beta) {
  if (!(um.scale > 0.0)) throw InputError("univariate mixture needs a positive scale");
  const YaLaw law{um.skew_coef / um.scale, um.mixing};
  const YaRisk r =
      measure == Measure::VaR ? var_ya_detailed(law, beta) : cvar_ya_detailed(law, beta);
  RiskResult out;
  out.value = -um.loc + um.scale * r.value;
  out.method = is_point_mass(um.mixing) ? Method::ClosedFormNormal : Method::ExactQuadrature;
  out.measure = measure;
  out.beta = beta;
  out.diagnostics.error_estimate = um.scale * r.error;
  out.diagnostics.evaluations = r.evaluations;
  return out;
}

double h(const TransformedModel& tm, double a, Measure measure, double beta) {
  return risk_ya({a, tm.mixing}, measure, beta);
}

RiskResult portfolio_risk_exact(const TransformedModel& tm, const Eigen::VectorXd& x,
                                Measure measure, double beta) {
  if (x.size() != tm.dim()) throw InputError("x vector has wrong dimension");
  const double norm = x.norm();
  if (!(norm > 0.0)) throw InputError("x must be nonzero");
  const YaLaw law{x.dot(tm.gamma0) / norm, tm.mixing};
  const YaRisk r =
      measure == Measure::VaR ? var_ya_detailed(law, beta) : cvar_ya_detailed(law, beta);
  RiskResult out;
  out.value = -x.dot(tm.mu0) + norm * r.value;
  out.method = is_point_mass(tm.mixing) ? Method::ClosedFormNormal : Method::ExactQuadrature;
  out.measure = measure;
  out.beta = beta;
  out.diagnostics.error_estimate = norm * r.error;
  out.diagnostics.evaluations = r.evaluations;
  return out;
}

double rockafellar_F(const UnivariateMixture& um, double alpha, double beta) {
  check_beta(beta);
  if (!(um.scale > 0.0)) throw InputError("univariate mixture needs a positive scale");
  const YaLaw law{um.skew_coef / um.scale, um.mixing};
  // Loss exceeds alpha when w^T X < -alpha, i.e. Y_a < y_cut.
  const double y_cut = (-alpha - um.loc) / um.scale;
  const auto tail = math::integrate_semi_infinite(
      [&](double u) { return u * density_ya(law, y_cut - u); }, {1e-12, 1e-10, 400});
  return alpha + um.scale * tail.value / (1.0 - beta);
}

AuxiliaryMinimum minimize_rockafellar(const UnivariateMixture& um, double beta) {
  check_beta(beta);
  const YaLaw law{um.skew_coef / um.scale, um.mixing};
  const double center = -um.loc;
  double half = um.scale * bracket_start(law);
  const auto f = [&](double alpha) { return rockafellar_F(um, alpha, beta); };
  for (int doubling = 0; doubling <= 60; ++doubling) {
    const auto m = math::minimize_scalar(f, center - half, center + half, 1e-10);
    const double margin = 1e-6 * half;
    if (m.x > center - half + margin && m.x < center + half - margin) {
      return {m.value, m.x};
    }
    half *= 2.0;
  }
  throw NumericalError("cvar_via_F: minimiser escaped every window");
}

double cvar_via_F(const UnivariateMixture& um, double beta) {
  return minimize_rockafellar(um, beta).cvar;
}

namespace {

std::vector<double> draw_portfolio(const UnivariateMixture& um, std::size_t n, Rng& rng) {
  if (n < 10000) throw InputError("Monte Carlo needs at least 10^4 samples");
  if (!(um.scale > 0.0)) throw InputError("univariate mixture needs a positive scale");
  std::vector<double> z = sample(um.mixing, rng, n);
  std::normal_distribution<double> normal;
  for (auto& v : z) v = um.loc + um.skew_coef * v + um.scale * std::sqrt(v) * normal(rng);
  return z;
}

// Rearranges draws so the k smallest occupy [0, k) and the k-th smallest sits at k - 1.
std::size_t tail_count(std::size_t n, double beta) {
  const auto k = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

RiskResult var_from_draws(std::vector<double>& draws, double beta) {
  const std::size_t n = draws.size();
  const std::size_t k = tail_count(n, beta);
  auto nth = [&draws](std::size_t i) {
    std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(i), draws.end());
    return draws[i];
  };
  const double q = nth(k - 1);
  // Siddiqui: f(q) ~ 2m / (n (x_(k+m) - x_(k-m))), m of order sqrt(n).
  const auto m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  const std::size_t lo = k - 1 >= m ? k - 1 - m : 0;
  const std::size_t hi = std::min(n - 1, k - 1 + m);
  const double x_hi = nth(hi);
  const double x_lo = nth(lo);
  const double f_hat = static_cast<double>(hi - lo) / (static_cast<double>(n) * (x_hi - x_lo));
  RiskResult r;
  r.value = -q;
  r.method = Method::MonteCarlo;
  r.measure = Measure::VaR;
  r.beta = beta;
  r.diagnostics.error_estimate =
      std::sqrt(beta * (1.0 - beta) / static_cast<double>(n)) / f_hat;
  r.diagnostics.samples = n;
  return r;
}

RiskResult cvar_from_draws(std::vector<double>& draws, double beta) {
  const std::size_t n = draws.size();
  const std::size_t k = tail_count(n, beta);
  std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   draws.end());
  const double q = draws[k - 1];
  const double mean =
      std::accumulate(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
      static_cast<double>(k);
  double ss = 0.0;
  for (std::size_t i = 0; i < k; ++i) ss += (draws[i] - mean) * (draws[i] - mean);
  const double tail_var = k > 1 ? ss / static_cast<double>(k - 1) : 0.0;
  RiskResult r;
  r.value = -mean;
  r.method = Method::MonteCarlo;
  r.measure = Measure::CVaR;
  r.beta = beta;
  r.diagnostics.error_estimate =
      std::sqrt((tail_var + (1.0 - beta) * (mean - q) * (mean - q)) /
                (static_cast<double>(n) * beta));
  r.diagnostics.samples = n;
  return r;
}

}  // namespace

RiskResult mc_risk(const UnivariateMixture& um, Measure measure, double beta,
                   std::size_t n_samples, Rng& rng) {
  check_beta(beta);
  std::vector<double> draws = draw_portfolio(um, n_samples, rng);
  return measure == Measure::VaR ? var_from_draws(draws, beta) : cvar_from_draws(draws, beta);
}

std::pair<RiskResult, RiskResult> mc_risk_both(const UnivariateMixture& um, double beta,
                                               std::size_t n_samples, Rng& rng) {
  check_beta(beta);
  std::vector<double> draws = draw_portfolio(um, n_samples, rng);
  RiskResult cvar = cvar_from_draws(draws, beta);
  RiskResult var = var_from_draws(draws, beta);
  return {var, cvar};
}

}  // namespace nmvm
