#pragma once

#include <optional>

#include <Eigen/Dense>

#include "nmvm/mixing.hpp"

namespace nmvm {

/// X = mu + gamma Z + sqrt(Z) A N with Sigma = A A^T, Z ~ mixing independent of N.
struct NmvmModel {
  Eigen::VectorXd mu;
  Eigen::VectorXd gamma;
  Eigen::MatrixXd sigma;
  MixingLaw mixing = Degenerate{};

  Eigen::Index dim() const { return mu.size(); }

  /// Dimensions agree, entries finite, sigma symmetric positive definite with
  /// every eigenvalue above 1e-12 * trace and condition number at most 1e12,
  /// mixing parameters valid. Throws InputError otherwise.
  void validate() const;
};

enum class Factorization { SymmetricSqrt, Cholesky };

/// A with A A^T = sigma. SymmetricSqrt gives the unique SPD root.
Eigen::MatrixXd factorize(const Eigen::MatrixXd& sigma,
                          Factorization method = Factorization::SymmetricSqrt);

/// Which vector the mean-risk-skewness problem uses for m: the skewness term
/// gamma0 EZ alone, or the full mean mu0 + gamma0 EZ.
enum class MeanVectorMode { SkewOnly, WithLocation };

/// Quantities in x = A^T w coordinates, where w^T X = x^T Y and
/// Y = mu0 + gamma0 Z + sqrt(Z) N_n.
struct TransformedModel {
  Eigen::MatrixXd a_factor;
  Eigen::MatrixXd a_inverse;
  Eigen::VectorXd mu0;
  Eigen::VectorXd gamma0;
  Eigen::VectorXd e_a;  // A^{-1} e, e the all-ones vector
  Eigen::VectorXd m;    // empty when EZ is infinite
  double gamma0_norm = 0.0;
  MeanVectorMode mode = MeanVectorMode::WithLocation;
  MixingLaw mixing = Degenerate{};

  Eigen::Index dim() const { return mu0.size(); }
  Eigen::VectorXd to_x(const Eigen::VectorXd& weights) const;
  Eigen::VectorXd to_weights(const Eigen::VectorXd& x) const;
};

TransformedModel transform(const NmvmModel& model,
                           Factorization method = Factorization::SymmetricSqrt,
                           MeanVectorMode mode = MeanVectorMode::WithLocation);

/// Law of w^T X: loc + skew_coef Z + sqrt(Z) scale N.
struct UnivariateMixture {
  double loc = 0.0;
  double skew_coef = 0.0;
  double scale = 1.0;
  MixingLaw mixing = Degenerate{};
};

UnivariateMixture project(const NmvmModel& model, const Eigen::VectorXd& weights);

struct PortfolioMoments {
  double std_dev = 0.0;
  double skewness = 0.0;
  std::optional<double> kurtosis;  // absent when the fourth moment is infinite
};

/// cos of the angle between x and gamma0; 0 when gamma0 = 0.
double cos_to_skew_direction(const TransformedModel& tm, const Eigen::VectorXd& x);

PortfolioMoments portfolio_moments(const TransformedModel& tm, const Eigen::VectorXd& x);

/// Skewness of x^T Y as a function of phi = cos(x, gamma0) alone.
double skewness_at(const TransformedModel& tm, double phi);

/// d skewness / d phi.
double skew_derivative(const TransformedModel& tm, double phi);

}  // namespace nmvm
