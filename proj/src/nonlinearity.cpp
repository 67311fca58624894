#include "mixedop/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixedop/error.hpp"

namespace mixedop {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double signed_power(double t, double e) { return std::copysign(std::pow(std::abs(t), e), t); }

}  // namespace

Nonlinearity Nonlinearity::affine(double lambda, std::function<double(double)> a) {
  if (!std::isfinite(lambda)) throw DomainError("affine nonlinearity: lambda must be finite");
  return Nonlinearity(AffineLinear{lambda, std::move(a)});
}

Nonlinearity Nonlinearity::power(double lambda, double p) {
  if (!std::isfinite(lambda)) throw DomainError("power nonlinearity: lambda must be finite");
  if (!(p > 2.0) || !std::isfinite(p)) throw DomainError("power nonlinearity: p must lie in (2, inf)");
  return Nonlinearity(PowerPerturbed{lambda, p});
}

Nonlinearity Nonlinearity::custom(PointwiseMap f, PointwiseMap F, PointwiseMap df, const std::vector<double>& x_samples) {
  if (!f || !F) throw DomainError("custom nonlinearity needs both f and F");
  for (double x : x_samples) {
    for (int i = -40; i <= 40; ++i) {
      const double t = 0.25 * i;
      const double step = 1e-4 * std::max(1.0, std::abs(t));
      // Fourth-order central difference of F.
      const double dF = (F(x, t - 2 * step) - 8 * F(x, t - step) + 8 * F(x, t + step) - F(x, t + 2 * step)) / (12 * step);
      const double ref = f(x, t);
      const double scale = std::max({1.0, std::abs(ref), std::abs(F(x, t)) / std::max(1.0, std::abs(t))});
      if (!(std::abs(dF - ref) <= 1e-6 * scale)) {
        std::ostringstream msg;
        msg << "custom nonlinearity: dF/dt = " << dF << " but f = " << ref << " at (x, t) = (" << x << ", " << t << ")";
        throw DomainError(msg.str());
      }
    }
  }
  return Nonlinearity(Custom{std::move(f), std::move(F), std::move(df)});
}

std::string Nonlinearity::kind_name() const {
  return std::visit(overloaded{[](const AffineLinear&) { return std::string("affine"); },
                               [](const PowerPerturbed&) { return std::string("power"); },
                               [](const Custom&) { return std::string("custom"); }},
                    kind_);
}

std::optional<double> Nonlinearity::linear_coefficient() const {
  return std::visit(overloaded{[](const AffineLinear& k) -> std::optional<double> { return k.lambda; },
                               [](const PowerPerturbed& k) -> std::optional<double> { return k.lambda; },
                               [](const Custom&) -> std::optional<double> { return std::nullopt; }},
                    kind_);
}

Nonlinearity Nonlinearity::with_constants(HypothesisConstants c) const {
  Nonlinearity out = *this;
  out.constants_ = c;
  return out;
}

double Nonlinearity::f(double x, double t) const {
  return std::visit(overloaded{[&](const AffineLinear& k) { return k.lambda * t + (k.a ? k.a(x) : 0.0); },
                               [&](const PowerPerturbed& k) { return k.lambda * t + signed_power(t, k.p - 1.0); },
                               [&](const Custom& k) { return k.f(x, t); }},
                    kind_);
}

double Nonlinearity::F(double x, double t) const {
  if (t == 0.0) return 0.0;
  return std::visit(
      overloaded{[&](const AffineLinear& k) { return 0.5 * k.lambda * t * t + (k.a ? k.a(x) : 0.0) * t; },
                 [&](const PowerPerturbed& k) { return 0.5 * k.lambda * t * t + std::pow(std::abs(t), k.p) / k.p; },
                 [&](const Custom& k) { return k.F(x, t) - k.F(x, 0.0); }},
      kind_);
}

double Nonlinearity::df(double x, double t) const {
  return std::visit(overloaded{[&](const AffineLinear& k) { return k.lambda; },
                               [&](const PowerPerturbed& k) {
                                 return k.lambda + (k.p - 1.0) * std::pow(std::abs(t), k.p - 2.0);
                               },
                               [&](const Custom& k) {
                                 if (k.df) return k.df(x, t);
                                 const double step = 1e-6 * std::max(1.0, std::abs(t));
                                 return (k.f(x, t + step) - k.f(x, t - step)) / (2 * step);
                               }},
                    kind_);
}

}  // namespace mixedop
