#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nmvm/errors.hpp"
#include "nmvm/optimize.hpp"
#include "nmvm/risk.hpp"

using namespace nmvm;
using doctest::Approx;

namespace {

TransformedModel first_fit_tm(Factorization f = Factorization::SymmetricSqrt) {
  return transform(fixtures::first_fit(), f, MeanVectorMode::SkewOnly);
}

// Published returns are these values rounded to four decimals.
double published_return(int k) { return 0.002 + k * 0.002 / 9.0; }

}  // namespace

TEST_SUITE("optimize") {
  TEST_CASE("published optimal weights and skewness") {
    const TransformedModel tm = first_fit_tm();
    const std::vector<std::vector<double>> expected = {
        {0.077077, 0.252863, 0.067729, 0.399764, 0.202566},
        {0.194069, 0.22433, 0.101723, 0.26734, 0.212539},
        {0.31106, 0.195798, 0.135716, 0.134915, 0.222512},
        {0.428051, 0.167265, 0.169709, 0.00249, 0.232485},
        {0.545042, 0.138732, 0.203703, -0.12994, 0.242458}};
    const std::vector<double> skew = {0.34231, 0.370487, 0.383957, 0.385706, 0.380047};
    for (int k = 0; k < 5; ++k) {
      const QuadraticSolution sol = solve_mean_risk_skew(tm, published_return(k));
      for (int i = 0; i < 5; ++i) CHECK(sol.omega_star(i) == Approx(expected[k][i]).epsilon(5e-3));
      CHECK(sol.skewness == Approx(skew[k]).epsilon(1e-3));
      CHECK(sol.omega_star.sum() == Approx(1.0).epsilon(1e-10));
      CHECK(sol.achieved_return == Approx(published_return(k)).epsilon(1e-10));
    }
  }

  TEST_CASE("constraints, KKT residual and norm minimality") {
    const TransformedModel tm = first_fit_tm();
    const double r = 0.0025;
    const QuadraticSolution sol = solve_mean_risk_skew(tm, r);
    CHECK(sol.x_star.dot(tm.m) == Approx(r).epsilon(1e-12));
    CHECK(sol.x_star.dot(tm.e_a) == Approx(1.0).epsilon(1e-12));
    CHECK((2.0 * sol.x_star - sol.s * tm.m - sol.t * tm.e_a).cwiseAbs().maxCoeff() < 1e-10);

    // Random feasible points: x* + projection of noise onto the null space of [m e_A].
    Eigen::MatrixXd c(2, 5);
    c.row(0) = tm.m.transpose();
    c.row(1) = tm.e_a.transpose();
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(5, 5) -
                                 c.transpose() * (c * c.transpose()).inverse() * c;
    Rng rng(9);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd noise(5);
      for (int i = 0; i < 5; ++i) noise(i) = normal(rng);
      const Eigen::VectorXd x = sol.x_star + proj * noise;
      CHECK(x.dot(tm.e_a) == Approx(1.0).epsilon(1e-9));
      CHECK(x.norm() >= sol.x_star.norm() - 1e-12);
    }
  }

  TEST_CASE("two-asset toy problem") {
    NmvmModel m;
    m.mu = Eigen::Vector2d::Zero();
    m.gamma = Eigen::Vector2d(1.0, 0.0);
    m.sigma = Eigen::Matrix2d::Identity();
    m.mixing = Degenerate{};
    const TransformedModel tm = transform(m, Factorization::SymmetricSqrt, MeanVectorMode::SkewOnly);
    const QuadraticSolution sol = solve_mean_risk_skew(tm, 0.3);
    // In two dimensions the two constraints leave a single feasible point.
    CHECK(sol.x_star(0) == Approx(0.3));
    CHECK(sol.x_star(1) == Approx(0.7));
  }

  TEST_CASE("three-asset line search oracle") {
    NmvmModel m;
    m.mu = Eigen::Vector3d::Zero();
    m.gamma = Eigen::Vector3d(0.02, 0.01, -0.005);
    m.sigma = (Eigen::Matrix3d() << 0.04, 0.01, 0.0, 0.01, 0.09, 0.02, 0.0, 0.02, 0.05).finished();
    m.mixing = Gamma{2.0, 2.0};
    const TransformedModel tm = transform(m, Factorization::Cholesky, MeanVectorMode::SkewOnly);
    const double r = 0.012;
    const QuadraticSolution sol = solve_mean_risk_skew(tm, r);
    // Feasible line: x(s) = p + s d with d spanning the null space of [m e_A].
    const Eigen::Vector3d d = Eigen::Vector3d(tm.m).cross(Eigen::Vector3d(tm.e_a)).normalized();
    const Eigen::Vector3d p = sol.x_star + 0.7 * d;  // any feasible point
    double best_s = 0.0;
    double best = 1e300;
    for (int i = -200000; i <= 200000; ++i) {
      const double s = i * 1e-5;
      const double v = (p + s * d).squaredNorm();
      if (v < best) {
        best = v;
        best_s = s;
      }
    }
    CHECK(((p + best_s * d) - sol.x_star).cwiseAbs().maxCoeff() < 2e-5);
  }

  TEST_CASE("degenerate direction is reported") {
    NmvmModel m;
    m.mu = Eigen::Vector2d::Zero();
    m.gamma = Eigen::Vector2d(0.01, 0.01);
    m.sigma = Eigen::Matrix2d::Identity();
    m.mixing = Exponential{};
    const TransformedModel tm = transform(m, Factorization::SymmetricSqrt, MeanVectorMode::SkewOnly);
    CHECK_THROWS_AS(solve_mean_risk_skew(tm, 0.01), NumericalError);
  }

  TEST_CASE("factorization invariance") {
    const TransformedModel s = first_fit_tm(Factorization::SymmetricSqrt);
    const TransformedModel c = first_fit_tm(Factorization::Cholesky);
    const QuadraticSolution a = solve_mean_risk_skew(s, 0.0024, Measure::CVaR, 0.05);
    const QuadraticSolution b = solve_mean_risk_skew(c, 0.0024, Measure::CVaR, 0.05);
    CHECK((a.omega_star - b.omega_star).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(a.skewness == Approx(b.skewness).epsilon(1e-9));
    CHECK(*a.risk_value == Approx(*b.risk_value).epsilon(1e-9));
  }

  TEST_CASE("frontier") {
    const TransformedModel tm = first_fit_tm();
    std::vector<double> grid;
    for (int k = 0; k < 5; ++k) grid.push_back(published_return(k));
    const auto pts = frontier(tm, grid, 0.05);
    REQUIRE(pts.size() == 5);
    const std::vector<double> skew = {0.34231, 0.370487, 0.383957, 0.385706, 0.380047};
    for (int k = 0; k < 5; ++k) {
      CHECK_FALSE(pts[k].error.has_value());
      CHECK(pts[k].skewness == Approx(skew[k]).epsilon(1e-3));
      // Skewness recomputed from the weights.
      CHECK(portfolio_moments(tm, tm.to_x(pts[k].weights)).skewness ==
            Approx(pts[k].skewness).epsilon(1e-12));
    }
    const auto single = frontier(tm, {0.0025}, 0.05);
    const QuadraticSolution sol = solve_mean_risk_skew(tm, 0.0025, Measure::CVaR, 0.05);
    CHECK(single[0].cvar == Approx(*sol.risk_value).epsilon(1e-14));
    CHECK((single[0].weights - sol.omega_star).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("frontier CVaR grows away from the minimum-risk return") {
    const TransformedModel tm = first_fit_tm();
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(0.002 * i / 10.0 - 0.05);
    const auto pts = frontier(tm, grid, 0.05);
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].cvar < pts[best].cvar) best = i;
    }
    for (std::size_t i = best; i + 1 < pts.size(); ++i) CHECK(pts[i + 1].cvar >= pts[i].cvar - 1e-12);
    for (std::size_t i = best; i > 0; --i) CHECK(pts[i - 1].cvar >= pts[i].cvar - 1e-12);
  }

  TEST_CASE("skew monotonicity hypothesis") {
    NmvmModel m = fixtures::first_fit();
    const HypothesisCheck gig = check_theorem_hypothesis(transform(m));
    CHECK(gig.condition_value > 0.0);
    CHECK(gig.monotone_on_grid);
    m.mixing = Gamma{1.5, 0.7};
    const HypothesisCheck gam = check_theorem_hypothesis(transform(m));
    CHECK(std::abs(gam.condition_value) < 1e-12);
    CHECK(gam.monotone_on_grid);
    m.mixing = InverseGaussian{0.8, 1.3};
    const HypothesisCheck ig = check_theorem_hypothesis(transform(m));
    CHECK(ig.condition_value == Approx(0.64 / std::pow(1.3, 6)).epsilon(1e-12));
    CHECK(ig.monotone_on_grid);
  }

  TEST_CASE("reduced problem") {
    const TransformedModel tm = transform(fixtures::second_fit());
    const Eigen::Matrix3d g = reduced_gram(tm);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(g).eigenvalues().minCoeff() > 0.0);

    // With mu forced to zero the reduced problem must do at least as well as
    // the closed-form portfolio at the same return.
    NmvmModel no_mu = fixtures::second_fit();
    no_mu.mu.setZero();
    const TransformedModel tz = transform(no_mu);
    const QuadraticSolution quad = solve_mean_risk_skew(tz, 0.0015, Measure::CVaR, 0.05);
    const ReducedSolution red = solve_mean_risk_reduced(tz, Measure::CVaR, 0.05, quad.achieved_return);
    CHECK(red.risk_value <= *quad.risk_value + 1e-6);
    CHECK(red.x_star.dot(tz.e_a) == Approx(1.0).epsilon(1e-9));
    CHECK(red.x_star.dot(tz.m) >= quad.achieved_return - 1e-9);
    CHECK(portfolio_risk_exact(tz, red.x_star, Measure::CVaR, 0.05).value ==
          Approx(red.risk_value).epsilon(1e-8));
  }

  TEST_CASE("reduced problem without skewness is the minimum-variance portfolio") {
    NmvmModel m = fixtures::second_fit();
    m.mu.setZero();
    m.gamma.setZero();
    const TransformedModel tm = transform(m);
    const ReducedSolution red = solve_mean_risk_reduced(tm, Measure::CVaR, 0.05, -1.0);
    const Eigen::VectorXd e = Eigen::VectorXd::Ones(5);
    const Eigen::VectorXd sinv_e = m.sigma.ldlt().solve(e);
    const Eigen::VectorXd w_mv = sinv_e / e.dot(sinv_e);
    CHECK((red.omega_star - w_mv).cwiseAbs().maxCoeff() < 1e-6);
    const double rho = h(tm, 0.0, Measure::CVaR, 0.05);
    CHECK(red.risk_value == Approx(std::sqrt(w_mv.dot(m.sigma * w_mv)) * rho).epsilon(1e-6));
  }
}
