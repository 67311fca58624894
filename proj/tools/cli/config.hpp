#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixedop/nonlinearity.hpp"

namespace mixedop::cli {

/// Malformed file (with line number) or a field outside its allowed range (naming the field).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// lambda of the nonlinearity: a number, or a rule on the computed spectrum.
///   value        lambda = 4.5
///   midgap(k)    (lambda_k + lambda_{k+1}) / 2
///   halfbelow(k) lambda_k - |lambda_k| / 2
struct LambdaSpec {
  enum class Rule { value, midgap, halfbelow };
  Rule rule = Rule::value;
  double value = 0.0;
  int k = 1;
  std::string text = "0";
};

struct RunConfig {
  // [domain]
  double a = 0.0;
  double b = 1.0;
  int n_elem = 64;
  // [operator]
  double s = 0.5;
  std::vector<double> alpha{0.0};
  std::string alpha_text = "0";
  int eigenpairs = 12;
  // [nonlinearity]
  std::string kind = "none";  ///< none | affine | power
  LambdaSpec lambda;
  double p = 4.0;
  double load = 1.0;  ///< affine: constant a(x)
  HypothesisConstants constants;
  // [solver]
  double tol = 1e-8;
  int max_iter = 2000;
  std::uint64_t seed = 0;
  int k = 1;  ///< linking index
  double switch_tol = 1e-4;
  int path_nodes = 41;
  int newton_max_iter = 50;
  double blowup_bound = 1e6;
  double nontrivial_factor = 1e-4;
  // [threshold]
  double bracket_lo = -10.0;
  double bracket_hi = 0.0;
  double threshold_tol = 1e-10;
  // [analysis]
  int restarts = 64;
  int audit_trials = 1000;
  std::vector<double> epsilon_grid{0.01, 0.1, 1.0, 10.0};
  // [hypotheses]
  double t_min = 1e-6;
  double t_max = 1e6;
  int t_count = 200;
  std::vector<double> x_samples{0.5};
  double hypothesis_tol = 1e-9;
  // [output]
  std::string out_dir = "out";

  bool is_grid() const { return alpha.size() > 1; }
};

/// Flags that override file values.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> tol;
  std::optional<int> max_iter;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Applies the flags and revalidates.
RunConfig apply_overrides(RunConfig cfg, const Overrides& o);

/// Throws ConfigError naming the first field that breaks its constraint.
void validate(const RunConfig& cfg);

/// Every effective value, in file sections; alpha is the expanded list.
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Parses "v", "v1,v2,..." or "lo:hi:count" (count >= 2, endpoints included).
std::vector<double> parse_grid(const std::string& text, const std::string& field);

}  // namespace mixedop::cli
