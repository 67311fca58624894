#include "mixedop/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace mixedop {
namespace {

// Boost stores the non-negative half of the symmetric rule on [-1, 1].
template <unsigned N>
QuadratureRule from_boost() {
  using rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  QuadratureRule q;
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    q.points.push_back(0.5 * (1.0 - x[i]));
    q.weights.push_back(0.5 * w[i]);
  }
  if (N % 2 == 1) {
    q.points.push_back(0.5);
    q.weights.push_back(0.5 * w[0]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    q.points.push_back(0.5 * (1.0 + x[i]));
    q.weights.push_back(0.5 * w[i]);
  }
  return q;
}

}  // namespace

const QuadratureRule& gauss4() {
  static const QuadratureRule rule = [] {
    const double r = 2.0 * std::sqrt(6.0 / 5.0) / 7.0;
    const double x_in = std::sqrt(3.0 / 7.0 - r);
    const double x_out = std::sqrt(3.0 / 7.0 + r);
    const double w_in = (18.0 + std::sqrt(30.0)) / 36.0;
    const double w_out = (18.0 - std::sqrt(30.0)) / 36.0;
    QuadratureRule q;
    q.points = {0.5 * (1.0 - x_out), 0.5 * (1.0 - x_in), 0.5 * (1.0 + x_in), 0.5 * (1.0 + x_out)};
    q.weights = {0.5 * w_out, 0.5 * w_in, 0.5 * w_in, 0.5 * w_out};
    return q;
  }();
  return rule;
}

const QuadratureRule& gauss10() {
  static const QuadratureRule rule = from_boost<10>();
  return rule;
}

const QuadratureRule& gauss15() {
  static const QuadratureRule rule = from_boost<15>();
  return rule;
}

}  // namespace mixedop
