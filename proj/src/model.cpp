#include "nmvm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "nmvm/errors.hpp"

namespace nmvm {

namespace {

void check_spd(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw InputError("sigma must be a non-empty square matrix");
  }
  if (!sigma.allFinite()) throw InputError("sigma has non-finite entries");
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
    throw InputError("sigma is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double tol = 1e-12 * sigma.trace();
  if (!(ev.minCoeff() > tol)) {
    std::ostringstream msg;
    msg << "sigma is not positive definite: eigenvalue " << ev.minCoeff()
        << " is below " << tol;
    throw InputError(msg.str());
  }
  const double cond = ev.maxCoeff() / ev.minCoeff();
  if (cond > 1e12) {
    std::ostringstream msg;
    msg << "sigma is near-singular: condition number " << cond << " exceeds 1e12";
    throw InputError(msg.str());
  }
}

}  // namespace

void NmvmModel::validate() const {
  const Eigen::Index n = mu.size();
  if (n == 0) throw InputError("model dimension must be at least 1");
  if (gamma.size() != n || sigma.rows() != n || sigma.cols() != n) {
    throw InputError("model dimensions disagree: mu has " + std::to_string(n) +
                     ", gamma has " + std::to_string(gamma.size()) + ", sigma is " +
                     std::to_string(sigma.rows()) + "x" + std::to_string(sigma.cols()));
  }
  if (!mu.allFinite() || !gamma.allFinite()) throw InputError("mu or gamma not finite");
  check_spd(sigma);
  nmvm::validate(mixing);
}

Eigen::MatrixXd factorize(const Eigen::MatrixXd& sigma, Factorization method) {
  check_spd(sigma);
  if (method == Factorization::Cholesky) {
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw InputError("Cholesky factorization failed");
    return llt.matrixL();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  return eig.operatorSqrt();
}

Eigen::VectorXd TransformedModel::to_x(const Eigen::VectorXd& weights) const {
  if (weights.size() != dim()) throw InputError("weight vector has wrong dimension");
  return a_factor.transpose() * weights;
}

Eigen::VectorXd TransformedModel::to_weights(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw InputError("x vector has wrong dimension");
  return a_inverse.transpose() * x;
}

TransformedModel transform(const NmvmModel& model, Factorization method, MeanVectorMode mode) {
  model.validate();
  TransformedModel tm;
  tm.a_factor = factorize(model.sigma, method);
  tm.a_inverse = tm.a_factor.partialPivLu().inverse();
  tm.mu0 = tm.a_inverse * model.mu;
  tm.gamma0 = tm.a_inverse * model.gamma;
  tm.e_a = tm.a_inverse * Eigen::VectorXd::Ones(model.dim());
  tm.gamma0_norm = tm.gamma0.norm();
  tm.mode = mode;
  tm.mixing = model.mixing;
  try {
    const double ez = raw_moment(model.mixing, 1.0);
    tm.m = mode == MeanVectorMode::SkewOnly ? Eigen::VectorXd(tm.gamma0 * ez)
                                            : Eigen::VectorXd(tm.mu0 + tm.gamma0 * ez);
  } catch (const InputError&) {
    tm.m.resize(0);
  }
  return tm;
}

UnivariateMixture project(const NmvmModel& model, const Eigen::VectorXd& weights) {
  if (weights.size() != model.dim()) {
    throw InputError("weight vector has dimension " + std::to_string(weights.size()) +
                     ", model has " + std::to_string(model.dim()));
  }
  if (weights.isZero(0.0)) throw InputError("weight vector must be nonzero");
  UnivariateMixture u;
  u.loc = weights.dot(model.mu);
  u.skew_coef = weights.dot(model.gamma);
  u.scale = std::sqrt(weights.dot(model.sigma * weights));
  u.mixing = model.mixing;
  return u;
}

double cos_to_skew_direction(const TransformedModel& tm, const Eigen::VectorXd& x) {
  const double xn = x.norm();
  if (xn == 0.0) throw InputError("x must be nonzero");
  if (tm.gamma0_norm == 0.0) return 0.0;
  return std::clamp(x.dot(tm.gamma0) / (xn * tm.gamma0_norm), -1.0, 1.0);
}

double skewness_at(const TransformedModel& tm, double phi) {
  const MixingMoments mm = moments(tm.mixing);
  const double b = tm.gamma0_norm;
  const double spread = b * b * phi * phi * mm.var + mm.ez;
  return (b * b * b * phi * phi * phi * mm.m3 + 3.0 * b * phi * mm.var) /
         std::pow(spread, 1.5);
}

double skew_derivative(const TransformedModel& tm, double phi) {
  const MixingMoments mm = moments(tm.mixing);
  const double b = tm.gamma0_norm;
  const double spread = b * b * phi * phi * mm.var + mm.ez;
  return (3.0 * b * b * b * (mm.m3 * mm.ez - 2.0 * mm.var * mm.var) * phi * phi +
          3.0 * b * mm.var * mm.ez) /
         std::pow(spread, 2.5);
}

PortfolioMoments portfolio_moments(const TransformedModel& tm, const Eigen::VectorXd& x) {
  const double phi = cos_to_skew_direction(tm, x);
  const MixingMoments mm = moments(tm.mixing);
  const double b = tm.gamma0_norm;
  const double bp = b * phi;
  const double spread = bp * bp * mm.var + mm.ez;
  PortfolioMoments out;
  out.std_dev = x.norm() * std::sqrt(spread);
  out.skewness = skewness_at(tm, phi);
  if (mm.m4) {
    const double cross = mm.ez3 - 2.0 * mm.ez2 * mm.ez + mm.ez * mm.ez * mm.ez;
    out.kurtosis = (bp * bp * bp * bp * *mm.m4 + 6.0 * bp * bp * cross + 3.0 * mm.ez2) /
                   (spread * spread);
  }
  return out;
}

}  // namespace nmvm
