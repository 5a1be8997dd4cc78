#include <algorithm>
#include <cmath>
#include <mutex>

#include "nmvm/errors.hpp"
#include "nmvm/risk.hpp"

namespace nmvm {

TwoPointCoefficients two_point_coefficients(const TransformedModel& tm, double beta) {
  const double b = tm.gamma0_norm;
  TwoPointCoefficients c;
  c.b = b;
  c.beta = beta;
  if (b == 0.0) {
    // Elliptical case: h is the single value h(0).
    c.w_plus = h(tm, 0.0, Measure::VaR, beta);
    c.v_plus = h(tm, 0.0, Measure::CVaR, beta);
    return c;
  }
  const double var_up = h(tm, b, Measure::VaR, beta);
  const double var_down = h(tm, -b, Measure::VaR, beta);
  const double cvar_up = h(tm, b, Measure::CVaR, beta);
  const double cvar_down = h(tm, -b, Measure::CVaR, beta);
  c.w_plus = 0.5 * (var_up + var_down);
  c.w_minus = 0.5 * (var_up - var_down);
  c.v_plus = 0.5 * (cvar_up + cvar_down);
  c.v_minus = 0.5 * (cvar_up - cvar_down);
  return c;
}

TwoPointCache::Key TwoPointCache::key_for(const TransformedModel& tm, double beta) {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Gig>) {
          p1 = law.lambda;
          p2 = law.chi;
          p3 = law.psi;
        } else if constexpr (std::is_same_v<T, Gamma>) {
          p1 = law.shape;
          p2 = law.rate;
        } else if constexpr (std::is_same_v<T, InverseGaussian>) {
          p1 = law.delta;
          p2 = law.gamma_ig;
        }
      },
      tm.mixing);
  return {tm.mixing.index(), p1, p2, p3, tm.gamma0_norm, beta};
}

TwoPointCoefficients TwoPointCache::get(const TransformedModel& tm, double beta) {
  const Key key = key_for(tm, beta);
  {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  std::unique_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  const TwoPointCoefficients c = two_point_coefficients(tm, beta);
  ++computations_;
  entries_.emplace(key, c);
  return c;
}

std::size_t TwoPointCache::computations() const {
  std::shared_lock lock(mutex_);
  return computations_;
}

void TwoPointCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
  computations_ = 0;
}

TwoPointCache& global_two_point_cache() {
  static TwoPointCache cache;
  return cache;
}

RiskResult portfolio_risk_two_point(const TransformedModel& tm, const Eigen::VectorXd& x,
                                    Measure measure, double beta,
                                    const TwoPointCoefficients& coeffs) {
  if (x.size() != tm.dim()) throw InputError("x vector has wrong dimension");
  if (coeffs.beta != beta || std::abs(coeffs.b - tm.gamma0_norm) > 1e-12 * (1.0 + coeffs.b)) {
    throw InputError("two-point coefficients were built for a different model or beta");
  }
  const double norm = x.norm();
  if (!(norm > 0.0)) throw InputError("x must be nonzero");
  const double cosine = cos_to_skew_direction(tm, x);
  const double level = measure == Measure::VaR ? coeffs.w_plus : coeffs.v_plus;
  const double slope = measure == Measure::VaR ? coeffs.w_minus : coeffs.v_minus;
  RiskResult out;
  out.value = -x.dot(tm.mu0) + norm * (level + slope * cosine);
  out.method = Method::TwoPoint;
  out.measure = measure;
  out.beta = beta;
  return out;
}

std::vector<double> uniform_partition(double b, std::size_t points) {
  if (points < 2) throw InputError("partition needs at least 2 points");
  std::vector<double> nodes(points);
  for (std::size_t i = 0; i < points; ++i) {
    nodes[i] = -b + 2.0 * b * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  nodes.back() = b;
  return nodes;
}

PiecewiseTable build_piecewise_table(const TransformedModel& tm, Measure measure, double beta,
                                     const std::vector<double>& partition,
                                     Interpolation interpolation) {
  const double b = tm.gamma0_norm;
  if (partition.size() < 2) throw InputError("partition needs at least 2 points");
  if (!std::is_sorted(partition.begin(), partition.end()) ||
      std::adjacent_find(partition.begin(), partition.end()) != partition.end()) {
    if (b > 0.0) throw InputError("partition must be strictly increasing");
  }
  const double tol = 1e-12 * std::max(1.0, b);
  if (std::abs(partition.front() + b) > tol || std::abs(partition.back() - b) > tol) {
    throw InputError("partition must start at -b and end at b");
  }
  PiecewiseTable table;
  table.nodes = partition;
  table.measure = measure;
  table.beta = beta;
  table.b = b;
  table.interpolation = interpolation;
  table.values.reserve(partition.size());
  for (double a : partition) table.values.push_back(h(tm, a, measure, beta));
  return table;
}

double PiecewiseTable::evaluate(double a) const {
  if (nodes.size() < 2 || values.size() != nodes.size()) {
    throw InputError("piecewise table is malformed");
  }
  if (a <= nodes.front()) return values.front();
  if (a >= nodes.back()) return values.back();
  const auto upper = std::upper_bound(nodes.begin(), nodes.end(), a);
  const auto i = static_cast<std::size_t>(upper - nodes.begin()) - 1;
  if (interpolation == Interpolation::Step) return values[i];
  const double t = (a - nodes[i]) / (nodes[i + 1] - nodes[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

RiskResult portfolio_risk_piecewise(const TransformedModel& tm, const Eigen::VectorXd& x,
                                    const PiecewiseTable& table) {
  if (x.size() != tm.dim()) throw InputError("x vector has wrong dimension");
  if (std::abs(table.b - tm.gamma0_norm) > 1e-12 * (1.0 + table.b)) {
    throw InputError("piecewise table was built for a different model");
  }
  const double norm = x.norm();
  if (!(norm > 0.0)) throw InputError("x must be nonzero");
  const double a = x.dot(tm.gamma0) / norm;
  RiskResult out;
  out.value = -x.dot(tm.mu0) + norm * table.evaluate(a);
  out.method = Method::Piecewise;
  out.measure = table.measure;
  out.beta = table.beta;
  return out;
}

}  // namespace nmvm
