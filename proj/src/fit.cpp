#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>
#include <variant>

#include "nmvm/errors.hpp"
#include "nmvm/fit.hpp"
#include "nmvm/mathkit.hpp"

namespace nmvm {

namespace {

Gig as_fittable_gig(const MixingLaw& law) {
  Gig g{};
  if (const auto* p = std::get_if<Gig>(&law)) {
    g = *p;
  } else if (const auto* p = std::get_if<InverseGaussian>(&law)) {
    g = Gig{-0.5, p->delta * p->delta, p->gamma_ig * p->gamma_ig};
  } else {
    throw InputError("fitting needs GIG or inverse Gaussian mixing, got " + family_name(law));
  }
  if (!(g.chi > 0.0) || !(g.psi > 0.0) || !std::isfinite(g.lambda)) {
    throw InputError("fitting needs GIG mixing with chi > 0 and psi > 0");
  }
  return g;
}

// GIG log density constant: (lambda/2) log(psi/chi) - log 2 - log K_lambda(sqrt(chi psi)).
double gig_log_norm(const Gig& g) {
  return 0.5 * g.lambda * std::log(g.psi / g.chi) - std::numbers::ln2 -
         math::log_bessel_k(g.lambda, std::sqrt(g.chi * g.psi));
}

struct EStep {
  std::vector<PosteriorMoments> post;
  double log_likelihood = 0.0;
  double mean_z = 0.0;
  double mean_inv_z = 0.0;
  double mean_log_z = 0.0;
};

EStep run_estep(const NmvmModel& model, const Eigen::MatrixXd& data, bool with_log) {
  const Gig g = as_fittable_gig(model.mixing);
  const Eigen::Index d = model.dim();
  const Eigen::Index t = data.rows();
  if (data.cols() != d) {
    throw InputError("data has " + std::to_string(data.cols()) + " columns, model has dimension " +
                     std::to_string(d));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma);
  if (llt.info() != Eigen::Success) throw InputError("sigma is not positive definite");
  const Eigen::MatrixXd& lower = llt.matrixLLT();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) log_det += 2.0 * std::log(lower(i, i));

  const Eigen::VectorXd sinv_gamma = llt.solve(model.gamma);
  const double gsg = model.gamma.dot(sinv_gamma);
  const double half_d = 0.5 * static_cast<double>(d);
  const double post_lambda = g.lambda - half_d;
  const double post_psi = g.psi + gsg;

  // Centred data, whitened: rows of (x - mu) L^{-T}.
  const Eigen::MatrixXd centred = data.rowwise() - model.mu.transpose();
  const Eigen::MatrixXd white =
      llt.matrixL().solve(centred.transpose());  // d x T
  const Eigen::VectorXd skew_term = centred * sinv_gamma;

  const double ll_const = 0.5 * g.lambda * std::log(g.psi / g.chi) +
                          (half_d - g.lambda) * std::log(post_psi) -
                          half_d * std::log(2.0 * std::numbers::pi) - 0.5 * log_det -
                          math::log_bessel_k(g.lambda, std::sqrt(g.chi * g.psi));

  EStep out;
  out.post.resize(static_cast<std::size_t>(t));
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < t; ++i) {
    const double q = white.col(i).squaredNorm();
    const double post_chi = g.chi + q;
    const double omega = std::sqrt(post_chi * post_psi);
    const double log_k0 = math::log_bessel_k(post_lambda, omega);
    const double log_k1 = math::log_bessel_k(post_lambda + 1.0, omega);
    if (!std::isfinite(log_k0) || !std::isfinite(log_k1)) {
      throw NumericalError("E-step: Bessel function overflow at observation " +
                           std::to_string(i + 1));
    }
    const double ratio_up = std::exp(log_k1 - log_k0);
    // K_{v-1} = K_{v+1} - (2v/x) K_v; both terms are positive when v <= 0.
    const double ratio_down =
        post_lambda <= 0.0
            ? ratio_up - 2.0 * post_lambda / omega
            : std::exp(math::log_bessel_k(post_lambda - 1.0, omega) - log_k0);
    const double scale = std::sqrt(post_chi / post_psi);
    PosteriorMoments& pm = out.post[static_cast<std::size_t>(i)];
    pm.mean = scale * ratio_up;
    pm.inv_mean = ratio_down / scale;
    if (with_log) {
      const double dlog = (math::log_bessel_k(post_lambda + h, omega) -
                           math::log_bessel_k(post_lambda - h, omega)) /
                          (2.0 * h);
      pm.log_mean = std::log(scale) + dlog;
    }
    if (!std::isfinite(pm.mean) || !std::isfinite(pm.inv_mean) || !std::isfinite(pm.log_mean)) {
      throw NumericalError("E-step: non-finite posterior moment at observation " +
                           std::to_string(i + 1));
    }
    out.log_likelihood +=
        ll_const + log_k0 + skew_term(i) - (half_d - g.lambda) * std::log(omega);
    out.mean_z += pm.mean;
    out.mean_inv_z += pm.inv_mean;
    out.mean_log_z += pm.log_mean;
  }
  const double n = static_cast<double>(t);
  out.mean_z /= n;
  out.mean_inv_z /= n;
  out.mean_log_z /= n;
  return out;
}

// Expected complete-data GIG log-likelihood per observation.
double gig_objective(const Gig& g, const EStep& e) {
  return gig_log_norm(g) + (g.lambda - 1.0) * e.mean_log_z -
         0.5 * (g.chi * e.mean_inv_z + g.psi * e.mean_z);
}

// Maximises a concave function of one variable over the real line, starting
// from a window centred on `start` and moving it while the optimum sits on an edge.
math::MinimumResult maximize_line(const std::function<double(double)>& f, double start,
                                  double half_width) {
  const auto neg = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
  };
  double centre = start;
  math::MinimumResult best{start, neg(start), 1};
  for (int pass = 0; pass < 20; ++pass) {
    const double lo = centre - half_width;
    const double hi = centre + half_width;
    const math::MinimumResult r = math::minimize_scalar(neg, lo, hi, 1e-9, 200);
    if (r.value <= best.value) best = r;
    const double margin = 1e-4 * half_width;
    if (r.x > lo + margin && r.x < hi - margin) break;
    centre = r.x;
  }
  return best;
}

Gig optimize_chi_psi(double lambda, const Gig& start, const EStep& e, double* value) {
  const auto profile = [&](double log_chi, double* log_psi_out) {
    const auto inner = [&](double log_psi) {
      return gig_objective(Gig{lambda, std::exp(log_chi), std::exp(log_psi)}, e);
    };
    const math::MinimumResult r = maximize_line(inner, std::log(start.psi), 10.0);
    if (log_psi_out != nullptr) *log_psi_out = r.x;
    return -r.value;
  };
  const math::MinimumResult outer =
      maximize_line([&](double u) { return profile(u, nullptr); }, std::log(start.chi), 10.0);
  double log_psi = 0.0;
  const double best = profile(outer.x, &log_psi);
  if (value != nullptr) *value = best;
  return Gig{lambda, std::exp(outer.x), std::exp(log_psi)};
}

void check_data(const Eigen::MatrixXd& data) {
  const Eigen::Index t = data.rows();
  const Eigen::Index d = data.cols();
  if (d < 1) throw InputError("data has no columns");
  if (t <= d + 2) {
    throw InputError("need more than n + 2 = " + std::to_string(d + 2) + " observations, got " +
                     std::to_string(t));
  }
  if (!data.allFinite()) throw InputError("data contains non-finite values");
}

}  // namespace

void FitConfig::validate() const {
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(ll_tol > 0.0)) throw InputError("ll_tol must be positive");
  if (!std::isfinite(lambda)) throw InputError("lambda must be finite");
}

std::vector<PosteriorMoments> posterior_moments(const NmvmModel& model,
                                                const Eigen::MatrixXd& data, bool with_log) {
  return run_estep(model, data, with_log).post;
}

double log_likelihood(const NmvmModel& model, const Eigen::MatrixXd& data) {
  return run_estep(model, data, false).log_likelihood;
}

FitResult mcecm_fit(const ReturnsMatrix& rm, const FitConfig& cfg) {
  return mcecm_fit(rm.values, cfg);
}

FitResult mcecm_fit(const Eigen::MatrixXd& data, const FitConfig& cfg) {
  cfg.validate();
  check_data(data);
  const Eigen::Index d = data.cols();
  const double n = static_cast<double>(data.rows());
  const Eigen::VectorXd sample_mean = data.colwise().mean();
  const Eigen::MatrixXd dev = data.rowwise() - sample_mean.transpose();
  NmvmModel start;
  start.mu = cfg.include_mu ? sample_mean : Eigen::VectorXd::Zero(d);
  start.gamma = Eigen::VectorXd::Zero(d);
  start.sigma = dev.transpose() * dev / (n - 1.0);
  start.mixing = Gig{cfg.lambda, 1.0, 1.0};
  if (Eigen::LLT<Eigen::MatrixXd>(start.sigma).info() != Eigen::Success) {
    throw InputError("sample covariance is not positive definite");
  }
  return mcecm_fit(data, cfg, start);
}

FitResult mcecm_fit(const Eigen::MatrixXd& data, const FitConfig& cfg, const NmvmModel& start) {
  cfg.validate();
  check_data(data);
  if (start.dim() != data.cols()) throw InputError("starting model dimension does not match data");
  const double n = static_cast<double>(data.rows());
  const bool free_lambda = cfg.lambda_mode == LambdaMode::Free;
  const Eigen::VectorXd sample_mean = data.colwise().mean();

  NmvmModel model = start;
  model.mixing = as_fittable_gig(start.mixing);
  if (!cfg.include_mu) model.mu.setZero();

  FitResult result;
  EStep e = run_estep(model, data, false);
  result.log_likelihood_trace.push_back(e.log_likelihood);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    // CM-step 1: location, skewness and dispersion with the mixing law fixed.
    const Eigen::Index t = data.rows();
    Eigen::VectorXd eta(t);
    Eigen::VectorXd delta(t);
    for (Eigen::Index i = 0; i < t; ++i) {
      delta(i) = e.post[static_cast<std::size_t>(i)].mean;
      eta(i) = e.post[static_cast<std::size_t>(i)].inv_mean;
    }
    const double delta_bar = e.mean_z;
    const double eta_bar = e.mean_inv_z;
    if (cfg.include_mu) {
      const Eigen::VectorXd weighted_x = data.transpose() * eta / n;
      const double denom = eta_bar * delta_bar - 1.0;
      if (denom > 0.0) {
        model.gamma = (eta_bar * sample_mean - weighted_x) / denom;
      } else {
        model.gamma.setZero();
      }
      model.mu = (weighted_x - model.gamma) / eta_bar;
    } else {
      model.gamma = sample_mean / delta_bar;
    }
    const Eigen::MatrixXd c = data.rowwise() - model.mu.transpose();
    Eigen::MatrixXd sigma = c.transpose() * eta.asDiagonal() * c / n -
                            delta_bar * model.gamma * model.gamma.transpose();
    sigma = 0.5 * (sigma + sigma.transpose());
    if (!sigma.allFinite() || Eigen::LLT<Eigen::MatrixXd>(sigma).info() != Eigen::Success) {
      throw NumericalError("iteration " + std::to_string(it) +
                           ": sigma update is not positive definite");
    }
    model.sigma = sigma;

    // CM-step 2: mixing parameters against refreshed posterior moments.
    const EStep e2 = run_estep(model, data, free_lambda);
    const Gig current = std::get<Gig>(model.mixing);
    const double current_value = gig_objective(current, e2);
    Gig candidate = current;
    double candidate_value = current_value;
    if (free_lambda) {
      const auto profile = [&](double lam) {
        double v = 0.0;
        optimize_chi_psi(lam, current, e2, &v);
        return v;
      };
      const math::MinimumResult r = maximize_line(profile, current.lambda, 2.0);
      candidate = optimize_chi_psi(r.x, current, e2, &candidate_value);
    } else {
      candidate = optimize_chi_psi(current.lambda, current, e2, &candidate_value);
    }
    if (candidate_value > current_value) model.mixing = candidate;

    if (cfg.identification == Identification::UnitEz) model = normalize_unit_ez(model);

    e = run_estep(model, data, false);
    result.log_likelihood_trace.push_back(e.log_likelihood);
    result.iterations = it;
    if (it >= 2) {
      const std::size_t k = result.log_likelihood_trace.size();
      if (std::abs(result.log_likelihood_trace[k - 1] - result.log_likelihood_trace[k - 2]) <
          cfg.ll_tol) {
        result.converged = true;
        break;
      }
    }
  }
  result.model = model;
  return result;
}

Eigen::VectorXd implied_mean(const NmvmModel& model) {
  return model.mu + model.gamma * moments(model.mixing).ez;
}

Eigen::MatrixXd implied_covariance(const NmvmModel& model) {
  const MixingMoments mm = moments(model.mixing);
  return mm.ez * model.sigma + mm.var * model.gamma * model.gamma.transpose();
}

NmvmModel normalize_unit_ez(const NmvmModel& model) {
  const double c = raw_moment(model.mixing, 1.0);
  NmvmModel out = model;
  out.gamma = model.gamma * c;
  out.sigma = model.sigma * c;
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Gig>) {
          out.mixing = Gig{law.lambda, law.chi / c, law.psi * c};
        } else if constexpr (std::is_same_v<T, Gamma>) {
          out.mixing = Gamma{law.shape, law.rate * c};
        } else if constexpr (std::is_same_v<T, InverseGaussian>) {
          out.mixing = InverseGaussian{law.delta / std::sqrt(c), law.gamma_ig * std::sqrt(c)};
        }
      },
      model.mixing);
  return out;
}

Eigen::MatrixXd sample_model(const NmvmModel& model, Rng& rng, std::size_t n) {
  model.validate();
  const std::vector<double> z = sample(model.mixing, rng, n);
  const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(model.sigma).matrixL();
  const Eigen::Index d = model.dim();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd noise(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) noise(j) = normal(rng);
    const double zi = z[i];
    out.row(static_cast<Eigen::Index>(i)) =
        (model.mu + model.gamma * zi + std::sqrt(zi) * (lower * noise)).transpose();
  }
  return out;
}

}  // namespace nmvm
