#pragma once

#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace arboreal {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1].
inline constexpr double kKronrodX[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
inline constexpr double kKronrodW[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
inline constexpr double kGaussW[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

inline Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double k15 = kKronrodW[7] * f(c);
  double g7 = kGaussW[3] * f(c);
  for (int j = 0; j < 7; ++j) {
    double fl = f(c - h * kKronrodX[j]);
    double fr = f(c + h * kKronrodX[j]);
    if (!std::isfinite(fl) || !std::isfinite(fr)) throw std::invalid_argument("integrand returned a non-finite value");
    k15 += kKronrodW[j] * (fl + fr);
    if (j % 2 == 1) g7 += kGaussW[j / 2] * (fl + fr);
  }
  double delta = std::abs(k15 - g7) * h;
  return {a, b, k15 * h, std::pow(200.0 * delta, 1.5)};
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration: split the worst panel until the summed
// error estimate drops under abs_tol or the panel budget runs out.
inline QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                           int max_panels = 2000) {
  if (!(abs_tol > 0)) throw std::invalid_argument("tolerance must be positive");
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::priority_queue<detail::Panel> panels;
  panels.push(detail::evaluate_panel(f, a, b));
  out.evaluations = 15;
  double total_value = panels.top().value;
  double total_error = panels.top().error;
  int count = 1;
  while (total_error > abs_tol && count < max_panels) {
    auto worst = panels.top();
    panels.pop();
    double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::evaluate_panel(f, worst.a, mid);
    auto right = detail::evaluate_panel(f, mid, worst.b);
    out.evaluations += 30;
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }
  out.value = sign * total_value;
  out.error = total_error;
  out.converged = total_error <= abs_tol;
  return out;
}

}  // namespace arboreal
