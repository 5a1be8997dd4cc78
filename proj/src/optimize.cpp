#include "nmvm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "nmvm/errors.hpp"

namespace nmvm {

QuadraticSolution solve_mean_risk_skew(const TransformedModel& tm, double r) {
  if (tm.m.size() == 0) throw InputError("mean vector m needs a mixing law with finite mean");
  const Eigen::VectorXd& m = tm.m;
  const Eigen::VectorXd& e = tm.e_a;
  const double mm = m.squaredNorm();
  const double me = m.dot(e);
  const double ee = e.squaredNorm();
  const double det = mm * ee - me * me;
  if (std::abs(det) < 1e-14 * mm * ee) {
    throw NumericalError("constraints are degenerate: m and e_A are parallel");
  }
  // Half multipliers solve the constraint system directly.
  const double s_half = (r * ee - me) / det;
  const double t_half = (mm - r * me) / det;

  QuadraticSolution sol;
  sol.x_star = s_half * m + t_half * e;
  sol.omega_star = tm.to_weights(sol.x_star);
  sol.s = 2.0 * s_half;
  sol.t = 2.0 * t_half;
  sol.achieved_return = sol.x_star.dot(m);
  sol.skewness = portfolio_moments(tm, sol.x_star).skewness;
  sol.condition_value = skew_condition(tm.mixing);
  sol.hypothesis_holds = sol.condition_value >= 0.0;
  return sol;
}

QuadraticSolution solve_mean_risk_skew(const TransformedModel& tm, double r, Measure measure,
                                       double beta) {
  QuadraticSolution sol = solve_mean_risk_skew(tm, r);
  sol.risk_value = portfolio_risk_exact(tm, sol.x_star, measure, beta).value;
  return sol;
}

std::vector<FrontierPoint> frontier(const TransformedModel& tm, const std::vector<double>& r_grid,
                                    double beta) {
  if (r_grid.empty()) throw InputError("return grid is empty");
  std::vector<FrontierPoint> points;
  points.reserve(r_grid.size());
  for (double r : r_grid) {
    FrontierPoint p;
    p.target_return = r;
    try {
      if (!std::isfinite(r)) throw InputError("target return is not finite");
      const QuadraticSolution sol = solve_mean_risk_skew(tm, r, Measure::CVaR, beta);
      p.cvar = *sol.risk_value;
      p.skewness = sol.skewness;
      p.weights = sol.omega_star;
    } catch (const std::exception& ex) {
      p.cvar = std::numeric_limits<double>::quiet_NaN();
      p.skewness = std::numeric_limits<double>::quiet_NaN();
      p.error = ex.what();
    }
    points.push_back(std::move(p));
  }
  return points;
}

Eigen::Matrix3d reduced_gram(const TransformedModel& tm) {
  Eigen::MatrixXd basis(tm.dim(), 3);
  basis << tm.mu0, tm.gamma0, tm.e_a;
  return basis.transpose() * basis;
}

namespace {

// (mu~, gamma~) parametrisation with dropped coordinates pinned at zero.
struct ReducedProblem {
  bool use_mu = true;
  bool use_gamma = true;
  Eigen::MatrixXd basis;
  Eigen::MatrixXd ginv;
  double ez = 1.0;
  double k = 0.0;
  double b = 0.0;

  Eigen::VectorXd coords(double mu, double ga) const {
    Eigen::VectorXd c(basis.cols());
    Eigen::Index i = 0;
    if (use_mu) c(i++) = mu;
    if (use_gamma) c(i++) = ga;
    c(i) = 1.0;
    return c;
  }
  double g(double mu, double ga) const {
    const Eigen::VectorXd c = coords(mu, ga);
    return c.dot(ginv * c);
  }
  Eigen::VectorXd x(double mu, double ga) const { return basis * (ginv * coords(mu, ga)); }
  double objective(double mu, double ga, const std::function<double(double)>& hfun) const {
    const double gv = std::max(g(mu, ga), std::numeric_limits<double>::min());
    const double root = std::sqrt(gv);
    const double a = b > 0.0 ? std::clamp(ga / root, -b, b) : 0.0;
    return -mu + root * hfun(a);
  }
  bool feasible(double mu, double ga) const {
    return mu + ga * ez >= k - 1e-14 * (1.0 + std::abs(k));
  }
};

}  // namespace

ReducedSolution solve_mean_risk_reduced(const TransformedModel& tm, Measure measure,
                                        double beta, double k) {
  if (!std::isfinite(k)) throw InputError("target return k must be finite");
  ReducedProblem prob;
  try {
    prob.ez = raw_moment(tm.mixing, 1.0);
  } catch (const InputError&) {
    throw InputError("reduced problem needs a mixing law with finite mean");
  }
  prob.k = k;
  prob.b = tm.gamma0_norm;
  prob.use_mu = tm.mu0.norm() > 0.0;
  prob.use_gamma = tm.gamma0_norm > 0.0;
  const int p = static_cast<int>(prob.use_mu) + static_cast<int>(prob.use_gamma);
  prob.basis.resize(tm.dim(), p + 1);
  {
    Eigen::Index col = 0;
    if (prob.use_mu) prob.basis.col(col++) = tm.mu0;
    if (prob.use_gamma) prob.basis.col(col++) = tm.gamma0;
    prob.basis.col(col) = tm.e_a;
  }
  const Eigen::MatrixXd gram = prob.basis.transpose() * prob.basis;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * eig.eigenvalues().maxCoeff())) {
    throw NumericalError("Gram matrix of (mu0, gamma0, e_A) is singular");
  }
  prob.ginv = gram.inverse();

  const auto exact_h = [&](double a) { return h(tm, a, measure, beta); };

  ReducedSolution out;
  const auto finish = [&](double mu, double ga) {
    out.mu_tilde_star = mu;
    out.gamma_tilde_star = ga;
    out.g_value = prob.g(mu, ga);
    out.x_star = prob.x(mu, ga);
    out.omega_star = tm.to_weights(out.x_star);
    out.risk_value = prob.objective(mu, ga, exact_h);
    return out;
  };

  if (p == 0) {
    if (!prob.feasible(0.0, 0.0)) {
      throw InputError("target return unreachable: every portfolio has mean 0");
    }
    return finish(0.0, 0.0);
  }

  // Free coordinates f, last coordinate pinned at 1: g = g_min + d^T S d.
  const Eigen::MatrixXd s_mat = prob.ginv.topLeftCorner(p, p);
  const Eigen::VectorXd cross = prob.ginv.topRightCorner(p, 1);
  const Eigen::VectorXd c_min = -s_mat.ldlt().solve(cross);
  Eigen::VectorXd n_vec(p);  // constraint normal in free coordinates
  {
    Eigen::Index i = 0;
    if (prob.use_mu) n_vec(i++) = 1.0;
    if (prob.use_gamma) n_vec(i++) = prob.ez;
  }
  Eigen::VectorXd center = c_min;
  if (n_vec.dot(center) < k) {
    const Eigen::VectorXd dir = s_mat.ldlt().solve(n_vec);
    center += dir * (k - n_vec.dot(center)) / n_vec.dot(dir);
  }
  const auto unpack = [&](const Eigen::VectorXd& c, double& mu, double& ga) {
    Eigen::Index i = 0;
    mu = prob.use_mu ? c(i++) : 0.0;
    ga = prob.use_gamma ? c(i++) : 0.0;
  };
  double mu_c;
  double ga_c;
  unpack(center, mu_c, ga_c);
  const double g_center = prob.g(mu_c, ga_c);

  // Box half-widths from the metric S and the size of the risk function.
  const double h_scale = std::max(std::abs(exact_h(0.0)), 0.1);
  double half_mu = 0.0;
  double half_ga = 0.0;
  {
    Eigen::Index i = 0;
    if (prob.use_mu) {
      const double sii = s_mat(i, i);
      half_mu = 2.0 * std::sqrt(g_center / sii) + std::sqrt(g_center) / (sii * h_scale);
      ++i;
    }
    if (prob.use_gamma) {
      const double sii = s_mat(i, i);
      half_ga = 2.0 * std::sqrt(g_center / sii) + std::sqrt(g_center) / (sii * h_scale);
    }
  }

  // Grid stage on an interpolated h.
  std::function<double(double)> grid_h = exact_h;
  PiecewiseTable table;
  if (prob.use_gamma) {
    table = build_piecewise_table(tm, measure, beta, uniform_partition(prob.b, 101),
                                  Interpolation::Linear);
    grid_h = [&table](double a) { return table.evaluate(a); };
  }
  constexpr int kGrid = 41;
  const int n_mu = prob.use_mu ? kGrid : 1;
  const int n_ga = prob.use_gamma ? kGrid : 1;
  double best = std::numeric_limits<double>::infinity();
  double mu_best = mu_c;
  double ga_best = ga_c;
  for (int i = 0; i < n_mu; ++i) {
    const double mu = n_mu == 1 ? mu_c : mu_c - half_mu + 2.0 * half_mu * i / (kGrid - 1);
    for (int j = 0; j < n_ga; ++j) {
      const double ga = n_ga == 1 ? ga_c : ga_c - half_ga + 2.0 * half_ga * j / (kGrid - 1);
      if (!prob.feasible(mu, ga)) continue;
      const double v = prob.objective(mu, ga, grid_h);
      if (v < best) {
        best = v;
        mu_best = mu;
        ga_best = ga;
      }
    }
  }
  if (!std::isfinite(best)) {
    mu_best = mu_c;
    ga_best = ga_c;
  }

  // Nested Brent refinement on a window of +-2 grid cells, re-centred and
  // widened whenever the optimum lands on a window edge.
  double step_mu = 2.0 * half_mu / (kGrid - 1);
  double step_ga = 2.0 * half_ga / (kGrid - 1);
  for (int pass = 0; pass < 60; ++pass) {
    const double mu_lo = mu_best - 2.0 * step_mu;
    const double mu_hi = mu_best + 2.0 * step_mu;
    const double ga_lo = ga_best - 2.0 * step_ga;
    const double ga_hi = ga_best + 2.0 * step_ga;

    // Best mu for a fixed gamma, with the constraint as the lower bound.
    double inner_mu = 0.0;
    const auto inner = [&](double ga) {
      if (!prob.use_mu) {
        inner_mu = 0.0;
        return prob.objective(0.0, ga, exact_h);
      }
      const double lo = std::max(mu_lo, k - ga * prob.ez);
      if (lo >= mu_hi) {
        inner_mu = lo;
        return prob.objective(lo, ga, exact_h);
      }
      const auto m = math::minimize_scalar(
          [&](double mu) { return prob.objective(mu, ga, exact_h); }, lo, mu_hi,
          1e-7 * step_mu);
      // Brent never samples the endpoint; the constraint edge may be the optimum.
      const double at_lo = prob.objective(lo, ga, exact_h);
      inner_mu = at_lo <= m.value ? lo : m.x;
      return std::min(at_lo, m.value);
    };

    double mu_r;
    double ga_r;
    double ga_floor = ga_lo;
    if (prob.use_gamma) {
      const double constraint_floor = prob.use_mu ? (k - mu_hi) / prob.ez : k / prob.ez;
      ga_floor = std::max(ga_lo, constraint_floor);
      if (ga_floor >= ga_hi) {
        ga_r = ga_floor;
      } else {
        const auto m = math::minimize_scalar(inner, ga_floor, ga_hi, 1e-7 * step_ga);
        const double at_floor = inner(ga_floor);
        ga_r = at_floor <= m.value ? ga_floor : m.x;
      }
    } else {
      ga_r = 0.0;
    }
    inner(ga_r);
    mu_r = inner_mu;

    const double eps_mu = 1e-4 * step_mu;
    const double eps_ga = 1e-4 * step_ga;
    const bool constraint_active = std::abs(mu_r + ga_r * prob.ez - k) <=
                                   1e-9 * (std::abs(k) + step_mu + step_ga * prob.ez);
    bool on_edge = false;
    if (prob.use_mu) {
      on_edge |= mu_r > mu_hi - eps_mu;
      on_edge |= mu_r < mu_lo + eps_mu && !constraint_active;
    }
    if (prob.use_gamma) {
      on_edge |= ga_r > ga_hi - eps_ga;
      on_edge |= ga_r < ga_lo + eps_ga;
      on_edge |= ga_r < ga_floor + eps_ga && ga_floor > ga_lo && !constraint_active;
    }
    mu_best = mu_r;
    ga_best = ga_r;
    if (!on_edge) return finish(mu_r, ga_r);
    step_mu *= 2.0;
    step_ga *= 2.0;
  }
  throw NumericalError("reduced mean-risk problem: optimum not enclosed after 60 passes");
}

HypothesisCheck check_theorem_hypothesis(const TransformedModel& tm) {
  HypothesisCheck out;
  out.condition_value = skew_condition(tm.mixing);
  out.monotone_on_grid = true;
  for (int i = 0; i <= 200; ++i) {
    const double phi = -1.0 + 2.0 * i / 200.0;
    if (skew_derivative(tm, phi) < -1e-12) {
      out.monotone_on_grid = false;
      break;
    }
  }
  return out;
}

}  // namespace nmvm
