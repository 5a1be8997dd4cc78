// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "nmvm/fit.hpp"
#include "nmvm/mathkit.hpp"
#include "nmvm/optimize.hpp"
#include "nmvm/risk.hpp"

using namespace nmvm;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const std::vector<std::vector<double>> kPortfolios = {{0.1, 0.4, 0.2, 0.1, 0.2},
                                                      {0.2, 0.1, 0.5, 0.1, 0.1},
                                                      {0.1, 0.4, 0.1, 0.3, 0.1},
                                                      {0.3, 0.1, 0.3, 0.1, 0.2},
                                                      {0.1, 0.3, 0.1, 0.3, 0.2}};
const std::vector<double> kBetas = {0.1, 0.05, 0.01};

// Rows: portfolios; columns: exact at the three betas, then the approximation.
const std::vector<std::vector<double>> kVarTable = {
    {0.027729, 0.042165, 0.082055, 0.029828, 0.044277, 0.084206},
    {0.038508, 0.058196, 0.112613, 0.040006, 0.059714, 0.114193},
    {0.02568, 0.039183, 0.076513, 0.02816, 0.041678, 0.079054},
    {0.03131, 0.047384, 0.091771, 0.032775, 0.048857, 0.093264},
    {0.025091, 0.038256, 0.074639, 0.027397, 0.040574, 0.076994}};
const std::vector<std::vector<double>> kCvarTable = {
    {0.050643, 0.067315, 0.111296, 0.050654, 0.067341, 0.111366},
    {0.069764, 0.092505, 0.152508, 0.0698, 0.092567, 0.15264},
    {0.04712, 0.062719, 0.103883, 0.047136, 0.062755, 0.103972},
    {0.056816, 0.075369, 0.124296, 0.056815, 0.075376, 0.124327},
    {0.04599, 0.061195, 0.10131, 0.046, 0.06122, 0.101378}};

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Outcome golden_table(Measure measure, const std::vector<std::vector<double>>& table, double tol) {
  const TransformedModel tm = transform(fixtures::second_fit());
  double worst_exact = 0.0;
  double worst_approx = 0.0;
  for (std::size_t p = 0; p < kPortfolios.size(); ++p) {
    const Eigen::VectorXd x = tm.to_x(vec(kPortfolios[p]));
    for (std::size_t k = 0; k < kBetas.size(); ++k) {
      const double beta = kBetas[k];
      const double exact = portfolio_risk_exact(tm, x, measure, beta).value;
      const double approx =
          portfolio_risk_two_point(tm, x, measure, beta, global_two_point_cache().get(tm, beta)).value;
      worst_exact = std::max(worst_exact, std::abs(exact - table[p][k]));
      worst_approx = std::max(worst_approx, std::abs(approx - table[p][3 + k]));
    }
  }
  Outcome o;
  o.pass = worst_exact <= tol && worst_approx <= tol;
  o.detail = fmt("max |exact - table| = %.6f", worst_exact) +
             fmt(", max |two-point - table| = %.6f", worst_approx) + fmt(", tolerance %.0e", tol);
  return o;
}

Outcome optimizer_table() {
  const TransformedModel tm =
      transform(fixtures::first_fit(), Factorization::SymmetricSqrt, MeanVectorMode::SkewOnly);
  const std::vector<std::vector<double>> weights = {
      {0.077077, 0.252863, 0.067729, 0.399764, 0.202566},
      {0.194069, 0.22433, 0.101723, 0.26734, 0.212539},
      {0.31106, 0.195798, 0.135716, 0.134915, 0.222512},
      {0.428051, 0.167265, 0.169709, 0.00249, 0.232485},
      {0.545042, 0.138732, 0.203703, -0.12994, 0.242458}};
  const std::vector<double> skew = {0.34231, 0.370487, 0.383957, 0.385706, 0.380047};
  double worst_w = 0.0;
  double worst_s = 0.0;
  double worst_c = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double r = 0.002 + k * 0.002 / 9.0;
    const QuadraticSolution sol = solve_mean_risk_skew(tm, r);
    worst_w = std::max(worst_w, (sol.omega_star - vec(weights[k])).cwiseAbs().maxCoeff());
    worst_s = std::max(worst_s, std::abs(sol.skewness - skew[k]));
    worst_c = std::max({worst_c, std::abs(sol.omega_star.sum() - 1.0),
                        std::abs(sol.achieved_return - r)});
  }
  Outcome o;
  o.pass = worst_w <= 5e-3 && worst_s <= 1e-3 && worst_c <= 1e-10;
  o.detail = fmt("max weight gap %.2e", worst_w) + fmt(", max skewness gap %.2e", worst_s) +
             fmt(", max constraint residual %.1e", worst_c);
  return o;
}

Outcome monte_carlo_oracle() {
  const double b = transform(fixtures::second_fit()).gamma0_norm;
  struct Case {
    double a;
    double beta;
    MixingLaw law;
  };
  std::vector<Case> cases;
  for (double a : {-b, 0.0, b}) {
    for (double beta : kBetas) cases.push_back({a, beta, fixtures::second_fit_gig()});
  }
  for (double a : {-b, 0.0, b}) cases.push_back({a, 0.05, Gamma{1.5, 1.5}});

  Rng rng(20260101);
  double worst = 0.0;
  int misses = 0;
  for (const Case& c : cases) {
    const UnivariateMixture um{0.0, c.a, 1.0, c.law};
    const auto [var, cvar] = mc_risk_both(um, c.beta, 10000000, rng);
    const YaLaw law{c.a, c.law};
    const double zv = std::abs(var_ya(law, c.beta) - var.value) / var.diagnostics.error_estimate;
    const double zc = std::abs(cvar_ya(law, c.beta) - cvar.value) / cvar.diagnostics.error_estimate;
    worst = std::max({worst, zv, zc});
    if (zv > 3.0) ++misses;
    if (zc > 3.0) ++misses;
  }
  Outcome o;
  o.pass = misses == 0;
  o.detail = std::to_string(cases.size()) + " cases x {VaR, CVaR}, 1e7 draws each" +
             fmt(", largest gap %.2f standard errors", worst);
  return o;
}

// VaR of sqrt(Z) N by bisection on the mixture CDF.
double elliptical_var(const MixingLaw& law, double beta) {
  const auto cdf = [&](double y) {
    return expect(law, [&](double z) { return math::normal_cdf(-y / std::sqrt(z)); }).value;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (cdf(hi) > beta) hi *= 2.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) > beta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Outcome closed_forms() {
  NmvmModel normal = fixtures::second_fit();
  normal.mixing = Degenerate{};
  const TransformedModel tn = transform(normal);
  double worst_normal = 0.0;
  for (const auto& wv : kPortfolios) {
    const Eigen::VectorXd w = vec(wv);
    const double mean = w.dot(normal.mu + normal.gamma);
    const double sd = std::sqrt(w.dot(normal.sigma * w));
    for (double beta : kBetas) {
      const double q = math::normal_quantile(beta);
      const double var = -mean - sd * q;
      const double cvar = -mean + sd * std::exp(-q * q / 2.0) / (beta * std::sqrt(2.0 * std::numbers::pi));
      const Eigen::VectorXd x = tn.to_x(w);
      worst_normal = std::max(
          {worst_normal, std::abs(portfolio_risk_exact(tn, x, Measure::VaR, beta).value - var),
           std::abs(portfolio_risk_exact(tn, x, Measure::CVaR, beta).value - cvar)});
    }
  }
  NmvmModel sym = fixtures::second_fit();
  sym.gamma.setZero();
  const TransformedModel ts = transform(sym);
  double worst_elliptic = 0.0;
  for (const auto& wv : kPortfolios) {
    const Eigen::VectorXd w = vec(wv);
    const Eigen::VectorXd x = ts.to_x(w);
    for (double beta : kBetas) {
      const double expected = -w.dot(sym.mu) + x.norm() * elliptical_var(sym.mixing, beta);
      worst_elliptic = std::max(
          worst_elliptic, std::abs(portfolio_risk_exact(ts, x, Measure::VaR, beta).value - expected));
    }
  }
  Outcome o;
  o.pass = worst_normal <= 1e-8 && worst_elliptic <= 1e-8;
  o.detail = fmt("normal max gap %.1e", worst_normal) + fmt(", elliptical max gap %.1e", worst_elliptic);
  return o;
}

Outcome condition_identities() {
  double worst_gamma = 0.0;
  double worst_ig = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double lambda = 0.3 + 0.45 * i;
    const double g = 0.2 + 0.35 * i;
    const Gamma law{lambda, g * g / 2.0};
    const MixingMoments mm = moments(law);
    worst_gamma = std::max(worst_gamma, std::abs(skew_condition(law)) / (mm.m3 * mm.ez));
    const double delta = 0.15 + 0.4 * i;
    const InverseGaussian ig{delta, g};
    const double expected = delta * delta / std::pow(g, 6);
    worst_ig = std::max(worst_ig, std::abs(skew_condition(ig) - expected) / expected);
  }
  Outcome o;
  o.pass = worst_gamma <= 1e-14 && worst_ig <= 1e-12;
  o.detail = fmt("Gamma max relative |condition| %.1e", worst_gamma) +
             fmt(", inverse Gaussian max relative error %.1e", worst_ig);
  return o;
}

Outcome property_suite() {
  std::vector<std::string> problems;
  NmvmModel second = fixtures::second_fit();
  NmvmModel gamma_model = second;
  gamma_model.mixing = Gamma{1.2, 0.8};
  for (const NmvmModel& m : {second, gamma_model}) {
    const TransformedModel tm = transform(m);
    const double b = tm.gamma0_norm;
    for (double beta : kBetas) {
      std::vector<double> hc;
      for (int i = 0; i <= 20; ++i) {
        const double a = -b + 2.0 * b * i / 20.0;
        hc.push_back(h(tm, a, Measure::CVaR, beta));
        if (hc.back() < h(tm, a, Measure::VaR, beta)) problems.push_back("CVaR < VaR");
      }
      for (int i = 0; i < 20; ++i) {
        if (hc[i + 1] > hc[i] + 1e-9) problems.push_back("h not decreasing");
      }
      for (int i = 1; i < 20; ++i) {
        if (hc[i] > 0.5 * (hc[i - 1] + hc[i + 1]) + 1e-8) problems.push_back("h not convex");
      }
      const TwoPointCoefficients c = two_point_coefficients(tm, beta);
      for (double sign : {1.0, -1.0}) {
        const Eigen::VectorXd x = sign * 0.4 * tm.gamma0 / b;
        for (Measure measure : {Measure::VaR, Measure::CVaR}) {
          const double gap = std::abs(portfolio_risk_two_point(tm, x, measure, beta, c).value -
                                      portfolio_risk_exact(tm, x, measure, beta).value);
          if (gap > 1e-9) problems.push_back(fmt("two-point endpoint gap %.1e", gap));
        }
      }
    }
  }
  // Factorization invariance.
  for (const NmvmModel& m : {fixtures::first_fit(), second}) {
    const TransformedModel s = transform(m, Factorization::SymmetricSqrt);
    const TransformedModel c = transform(m, Factorization::Cholesky);
    const QuadraticSolution qs = solve_mean_risk_skew(s, 0.0025, Measure::CVaR, 0.05);
    const QuadraticSolution qc = solve_mean_risk_skew(c, 0.0025, Measure::CVaR, 0.05);
    if ((qs.omega_star - qc.omega_star).cwiseAbs().maxCoeff() > 1e-9) problems.push_back("weights depend on factor");
    if (std::abs(*qs.risk_value - *qc.risk_value) > 1e-9) problems.push_back("risk depends on factor");
    for (const auto& wv : kPortfolios) {
      const Eigen::VectorXd w = vec(wv);
      const PortfolioMoments ms = portfolio_moments(s, s.to_x(w));
      const PortfolioMoments mc = portfolio_moments(c, c.to_x(w));
      if (std::abs(ms.std_dev - mc.std_dev) > 1e-9 || std::abs(ms.skewness - mc.skewness) > 1e-9 ||
          std::abs(*ms.kurtosis - *mc.kurtosis) > 1e-9) {
        problems.push_back("moments depend on factor");
      }
      for (Measure measure : {Measure::VaR, Measure::CVaR}) {
        if (std::abs(portfolio_risk_exact(s, s.to_x(w), measure, 0.05).value -
                     portfolio_risk_exact(c, c.to_x(w), measure, 0.05).value) > 1e-9) {
          problems.push_back("risk depends on factor");
        }
      }
    }
  }
  Outcome o;
  o.pass = problems.empty();
  o.detail = problems.empty() ? "monotonicity, convexity, dominance, endpoint exactness and factor "
                                "invariance hold"
                              : std::to_string(problems.size()) + " violations, first: " + problems[0];
  return o;
}

Outcome em_suite() {
  NmvmModel truth;
  truth.mu = Eigen::Vector3d(0.0005, -0.0002, 0.0003);
  truth.gamma = Eigen::Vector3d(-0.0004, 0.0006, 0.0001);
  truth.sigma = (Eigen::Matrix3d() << 1.0e-4, 0.3e-4, 0.1e-4, 0.3e-4, 2.0e-4, 0.5e-4, 0.1e-4,
                 0.5e-4, 1.5e-4)
                    .finished();
  truth.mixing = Gig{-0.5, 2.0, 2.0};
  Rng rng(20240601);
  const Eigen::MatrixXd x = sample_model(truth, rng, 20000);

  const auto t0 = Clock::now();
  FitConfig cfg;
  cfg.identification = Identification::UnitEz;
  const FitResult fit = mcecm_fit(x, cfg);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();

  double worst_drop = 0.0;
  for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
    worst_drop = std::max(worst_drop, fit.log_likelihood_trace[i - 1] - fit.log_likelihood_trace[i]);
  }
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd mean = implied_mean(fit.model);
  const Eigen::MatrixXd cov = implied_covariance(fit.model);
  const Eigen::VectorXd true_mean = implied_mean(truth);
  const Eigen::MatrixXd true_cov = implied_covariance(truth);
  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  double worst_z = 0.0;
  for (int i = 0; i < 3; ++i) {
    worst_z = std::max(worst_z, std::abs(mean(i) - true_mean(i)) / std::sqrt(true_cov(i, i) / n));
    for (int j = 0; j < 3; ++j) {
      const Eigen::ArrayXd prod = xc.col(i).array() * xc.col(j).array();
      const double se = std::sqrt((prod - prod.mean()).square().mean() / n);
      worst_z = std::max(worst_z, std::abs(cov(i, j) - true_cov(i, j)) / se);
    }
  }
  Outcome o;
  o.pass = worst_drop <= 1e-8 && worst_z < 4.0 && secs < 120.0 && fit.converged;
  o.detail = std::to_string(fit.iterations) + " iterations" +
             (fit.converged ? ", converged" : ", not converged") +
             fmt(", largest likelihood drop %.1e", worst_drop) +
             fmt(", worst moment gap %.2f standard errors", worst_z) + fmt(", fit time %.1f s", secs);
  return o;
}

Outcome rockafellar_check() {
  const NmvmModel m = fixtures::second_fit();
  double worst = 0.0;
  for (const auto& wv : kPortfolios) {
    const UnivariateMixture um = project(m, vec(wv));
    for (double beta : kBetas) {
      worst = std::max(worst, std::abs(cvar_via_F(um, 1.0 - beta) -
                                       univariate_risk(um, Measure::CVaR, beta).value));
    }
  }
  Outcome o;
  o.pass = worst <= 1e-5;
  o.detail = fmt("max |auxiliary minimum - tail integral| = %.1e", worst);
  return o;
}

}  // namespace

int main() {
  report(1, "VaR table, exact and two-point", [] { return golden_table(Measure::VaR, kVarTable, 2e-3); });
  report(2, "CVaR table, exact and two-point",
         [] { return golden_table(Measure::CVaR, kCvarTable, 1e-3); });
  report(3, "optimal weights and skewness", optimizer_table);
  report(4, "Monte Carlo oracle", monte_carlo_oracle);
  report(5, "closed-form consistency", closed_forms);
  report(6, "skew condition identities", condition_identities);
  report(7, "property suite", property_suite);
  report(8, "MCECM suite", em_suite);
  report(9, "Rockafellar-Uryasev cross-check", rockafellar_check);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
