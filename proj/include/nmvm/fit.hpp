#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmvm/model.hpp"

namespace nmvm {

/// Daily log returns, one row per retained date (the later date of each pair).
struct ReturnsMatrix {
  std::vector<std::string> assets;
  std::vector<std::string> dates;
  Eigen::MatrixXd values;  // T x n
  std::size_t dropped_rows = 0;  // price rows discarded for missing cells
};

/// CSV with header `date,<asset1>,...,<assetN>`, ISO-8601 dates in strictly
/// ascending order and decimal prices. Rows with an empty or NA cell are
/// dropped before differencing. Throws ParseError (line-numbered) on
/// malformed input and InputError on non-positive prices.
ReturnsMatrix parse_prices(std::istream& in);
ReturnsMatrix load_prices(const std::string& path);

struct AssetSummary {
  std::string asset;
  double mean = 0.0;
  double std_dev = 0.0;  // T - 1 denominator
  double min = 0.0;
  double max = 0.0;
};

std::vector<AssetSummary> summarize(const ReturnsMatrix& rm);

enum class LambdaMode { Fixed, Free };
enum class Identification { None, UnitEz };

struct FitConfig {
  LambdaMode lambda_mode = LambdaMode::Fixed;
  double lambda = -0.5;  // fixed value, or the starting value when free
  bool include_mu = true;
  int max_iters = 500;
  double ll_tol = 1e-8;
  Identification identification = Identification::None;

  void validate() const;
};

struct FitResult {
  NmvmModel model;
  std::vector<double> log_likelihood_trace;  // initial value, then one per iteration
  int iterations = 0;
  bool converged = false;
};

/// Posterior moments of Z given one observation.
struct PosteriorMoments {
  double mean = 0.0;      // E[Z | x]
  double inv_mean = 0.0;  // E[1/Z | x]
  double log_mean = 0.0;  // E[log Z | x]
};

/// Z | X = x is GIG(lambda - n/2, chi + Q(x), psi + gamma^T Sigma^{-1} gamma).
/// Model mixing must be GIG-shaped with chi > 0 and psi > 0 (or inverse Gaussian).
std::vector<PosteriorMoments> posterior_moments(const NmvmModel& model,
                                                const Eigen::MatrixXd& data,
                                                bool with_log = false);

/// Sum of log densities of the multivariate generalized hyperbolic law.
double log_likelihood(const NmvmModel& model, const Eigen::MatrixXd& data);

/// Multi-cycle ECM started from mu = sample mean, gamma = 0, Sigma = sample
/// covariance, chi = psi = 1. Each iteration: E-step, closed-form update of
/// (mu, gamma, Sigma), second E-step, numeric update of the GIG parameters.
/// Converged means two consecutive iterations changed the log-likelihood by
/// less than ll_tol.
FitResult mcecm_fit(const ReturnsMatrix& rm, const FitConfig& cfg);
FitResult mcecm_fit(const Eigen::MatrixXd& data, const FitConfig& cfg);

/// Same iteration from given starting parameters. The start's mixing law
/// supplies lambda; cfg.lambda is ignored. Without location mu is zeroed.
FitResult mcecm_fit(const Eigen::MatrixXd& data, const FitConfig& cfg, const NmvmModel& start);

/// Model-implied mean mu + gamma EZ and covariance EZ Sigma + Var(Z) gamma gamma^T.
Eigen::VectorXd implied_mean(const NmvmModel& model);
Eigen::MatrixXd implied_covariance(const NmvmModel& model);

/// Rescales Z to EZ = 1, compensating in gamma and Sigma.
NmvmModel normalize_unit_ez(const NmvmModel& model);

/// n i.i.d. draws of X, one per row.
Eigen::MatrixXd sample_model(const NmvmModel& model, Rng& rng, std::size_t n);

}  // namespace nmvm
