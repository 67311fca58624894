#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mixedop {

using PointwiseMap = std::function<double(double x, double t)>;

/// Constants declared for the growth and structure conditions. Unset entries
/// mean "not declared"; checks that need them refuse to run.
struct HypothesisConstants {
  std::optional<double> a_bound;   ///< sup of a(x) in |f| <= a + b|t| or a + b|t|^{r-1}
  std::optional<double> b;
  std::optional<double> r;
  std::optional<double> mu;
  std::optional<double> mu_tilde;
  std::optional<double> R;
  std::optional<double> c;
  std::optional<double> A;
  std::optional<double> d;
  std::optional<double> lambda_k;  ///< threshold in F >= lambda_k t^2 / 2
};

struct AffineLinear {
  double lambda = 0.0;
  std::function<double(double)> a;  ///< empty means a == 0
};

struct PowerPerturbed {
  double lambda = 0.0;
  double p = 4.0;
};

struct Custom {
  PointwiseMap f;
  PointwiseMap F;
  PointwiseMap df;  ///< optional; central differences of f otherwise
};

/// f(x, t) with its primitive F(x, t) = int_0^t f(x, s) ds.
class Nonlinearity {
 public:
  using Kind = std::variant<AffineLinear, PowerPerturbed, Custom>;

  /// f = lambda t + a(x).
  static Nonlinearity affine(double lambda, std::function<double(double)> a = {});
  /// f = lambda t + |t|^{p-2} t. Throws DomainError unless p > 2.
  static Nonlinearity power(double lambda, double p);
  /// Throws DomainError when dF/dt and f disagree by more than 1e-6 (relative) on
  /// t in [-10, 10] at the given sample abscissae.
  static Nonlinearity custom(PointwiseMap f, PointwiseMap F, PointwiseMap df = {},
                             const std::vector<double>& x_samples = {0.0, 0.25, 0.5, 0.75, 1.0});
  /// f == 0.
  static Nonlinearity none() { return affine(0.0); }

  const Kind& kind() const { return kind_; }
  std::string kind_name() const;
  /// The linear coefficient of the model kinds; nullopt for Custom.
  std::optional<double> linear_coefficient() const;

  const HypothesisConstants& constants() const { return constants_; }
  Nonlinearity with_constants(HypothesisConstants c) const;

  double f(double x, double t) const;
  /// Exactly 0 at t = 0.
  double F(double x, double t) const;
  /// Partial derivative of f in t.
  double df(double x, double t) const;

 private:
  explicit Nonlinearity(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
  HypothesisConstants constants_;
};

inline double f_eval(const Nonlinearity& nl, double x, double t) { return nl.f(x, t); }
inline double F_eval(const Nonlinearity& nl, double x, double t) { return nl.F(x, t); }

}  // namespace mixedop
