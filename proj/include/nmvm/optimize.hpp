#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmvm/model.hpp"
#include "nmvm/risk.hpp"

namespace nmvm {

/// Minimum-norm x with x^T m = r and x^T e_A = 1.
///
/// x = (s/2) m + (t/2) e_A; s and t are the Lagrange multipliers of
/// L = x^T x + s (r - x^T m) + t (1 - x^T e_A).
struct QuadraticSolution {
  Eigen::VectorXd x_star;
  Eigen::VectorXd omega_star;
  double s = 0.0;
  double t = 0.0;
  double achieved_return = 0.0;
  double skewness = 0.0;
  std::optional<double> risk_value;
  double condition_value = 0.0;   // m3 EZ - 2 Var^2 of the mixing law
  bool hypothesis_holds = false;  // condition_value >= 0
};

/// Throws NumericalError when m and e_A are (nearly) parallel.
QuadraticSolution solve_mean_risk_skew(const TransformedModel& tm, double r);

/// Same, plus the risk of the solution under (measure, beta).
QuadraticSolution solve_mean_risk_skew(const TransformedModel& tm, double r, Measure measure,
                                       double beta);

struct FrontierPoint {
  double target_return = 0.0;
  double cvar = 0.0;
  double skewness = 0.0;
  Eigen::VectorXd weights;
  std::optional<std::string> error;  // set when this point failed
};

/// One minimum-norm solution per target return, in grid order, with exact
/// CVaR at beta and skewness. Failed points carry an error message.
std::vector<FrontierPoint> frontier(const TransformedModel& tm, const std::vector<double>& r_grid,
                                    double beta);

struct ReducedSolution {
  double mu_tilde_star = 0.0;
  double gamma_tilde_star = 0.0;
  Eigen::VectorXd x_star;
  Eigen::VectorXd omega_star;
  double g_value = 0.0;
  double risk_value = 0.0;
};

/// Gram matrix of (mu0, gamma0, e_A).
Eigen::Matrix3d reduced_gram(const TransformedModel& tm);

/// Minimises risk(x^T Y) over x^T e_A = 1, x^T m >= k through the
/// two-parameter form -mu~ + sqrt(g) h(gamma~ / sqrt(g)), where
/// (mu~, gamma~) = (x^T mu0, x^T gamma0) and g = |x|^2 at the minimum-norm x
/// with those values. A 41x41 grid seeds nested Brent refinement; the search
/// box grows when the optimum sits on its edge. Zero mu0 or gamma0 drops the
/// corresponding coordinate. Throws NumericalError when the Gram matrix of
/// the remaining vectors is singular, InputError when k is unreachable.
ReducedSolution solve_mean_risk_reduced(const TransformedModel& tm, Measure measure,
                                        double beta, double k);

struct HypothesisCheck {
  double condition_value = 0.0;
  bool monotone_on_grid = false;
};

/// Skew condition value and a 201-point scan of d skew / d phi >= -1e-12 on [-1, 1].
HypothesisCheck check_theorem_hypothesis(const TransformedModel& tm);

}  // namespace nmvm
