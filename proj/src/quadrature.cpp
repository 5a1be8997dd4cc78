#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "nmvm/errors.hpp"
#include "nmvm/mathkit.hpp"

namespace nmvm::math {

namespace {

// Kronrod 15-point abscissae (positive half) and weights; the embedded
// 7-point Gauss rule uses every other node.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod(const ScalarFunction& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrod[7];
  double gauss = fc * kGauss[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrod[j] * sum;
    if (j % 2 == 1) gauss += kGauss[j / 2] * sum;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw InputError("QuadratureSpec: tolerances must be strictly positive");
  }
  if (max_subdivisions < 1) throw InputError("QuadratureSpec: max_subdivisions must be >= 1");
}

QuadratureResult integrate(const ScalarFunction& f, double lo, double hi,
                           const QuadratureSpec& spec) {
  spec.validate();
  if (!(lo < hi)) throw InputError("integrate: need lo < hi");

  std::priority_queue<Panel> panels;
  panels.push(gauss_kronrod(f, lo, hi));
  double total = panels.top().value;
  double error = panels.top().error;
  std::size_t evaluations = 15;

  // Start from a few panels so narrow features are not missed by one rule.
  while (panels.size() < 4) {
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Panel left = gauss_kronrod(f, worst.lo, mid);
    const Panel right = gauss_kronrod(f, mid, worst.hi);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (panels.size() >= spec.max_subdivisions) {
      throw QuadratureError("integrate: tolerance not met with " +
                                std::to_string(spec.max_subdivisions) +
                                " subdivisions (estimate " + std::to_string(total) +
                                ", error bound " + std::to_string(error) + ")",
                            total, error);
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Panel left = gauss_kronrod(f, worst.lo, mid);
    const Panel right = gauss_kronrod(f, mid, worst.hi);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  // Re-sum to shed the drift from the incremental updates.
  total = 0.0;
  error = 0.0;
  while (!panels.empty()) {
    total += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  return {total, error, evaluations};
}

QuadratureResult integrate_semi_infinite(const ScalarFunction& f,
                                         const QuadratureSpec& spec) {
  const auto mapped = [&f](double t) {
    const double one_minus = 1.0 - t;
    const double s = t / one_minus;
    const double value = f(s);
    return value == 0.0 ? 0.0 : value / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, spec);
}

}  // namespace nmvm::math
