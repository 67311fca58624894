#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace mixedop::cli {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"domain", {"a", "b", "n_elem"}},
      {"operator", {"s", "alpha", "eigenpairs"}},
      {"nonlinearity",
       {"kind", "lambda", "p", "load", "a_bound", "b", "r", "mu", "mu_tilde", "R", "c", "A", "d", "lambda_k"}},
      {"solver",
       {"tol", "max_iter", "seed", "k", "switch_tol", "path_nodes", "newton_max_iter", "blowup_bound",
        "nontrivial_factor"}},
      {"threshold", {"bracket_lo", "bracket_hi", "tol"}},
      {"analysis", {"restarts", "audit_trials", "epsilon_grid"}},
      {"hypotheses", {"t_min", "t_max", "count", "x", "tolerance"}},
      {"output", {"dir"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& raw, const std::string& field) {
  const std::string text = trim(raw);
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw ConfigError(field + ": not a number: '" + text + "'");
  if (!std::isfinite(v)) throw ConfigError(field + ": must be finite");
  return v;
}

long long to_integer(const std::string& raw, const std::string& field) {
  const std::string text = trim(raw);
  long long v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw ConfigError(field + ": not an integer: '" + text + "'");
  return v;
}

LambdaSpec parse_lambda(const std::string& raw) {
  const std::string text = trim(raw);
  LambdaSpec spec;
  spec.text = text;
  for (const auto& [name, rule] :
       {std::pair{std::string("midgap"), LambdaSpec::Rule::midgap}, {std::string("halfbelow"), LambdaSpec::Rule::halfbelow}}) {
    if (text.rfind(name + "(", 0) == 0) {
      if (text.back() != ')') throw ConfigError("nonlinearity.lambda: missing ')' in '" + text + "'");
      spec.rule = rule;
      const long long k = to_integer(text.substr(name.size() + 1, text.size() - name.size() - 2), "nonlinearity.lambda");
      if (k < 1 || k > 1000) throw ConfigError("nonlinearity.lambda: spectral index k ∈ [1, 1000] violated");
      spec.k = static_cast<int>(k);
      return spec;
    }
  }
  spec.value = to_double(text, "nonlinearity.lambda");
  return spec;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what + " violated");
}

}  // namespace

std::vector<double> parse_grid(const std::string& raw, const std::string& field) {
  const std::string text = trim(raw);
  std::vector<double> out;
  if (std::count(text.begin(), text.end(), ':') == 2) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    const double lo = to_double(text.substr(0, c1), field);
    const double hi = to_double(text.substr(c1 + 1, c2 - c1 - 1), field);
    const long long count = to_integer(text.substr(c2 + 1), field);
    if (count < 2 || count > 10000) throw ConfigError(field + ": grid count ∈ [2, 10000] violated");
    if (!(hi > lo)) throw ConfigError(field + ": grid needs lo < hi");
    for (long long i = 0; i < count; ++i) {
      out.push_back(i == count - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item, field));
  if (out.empty()) throw ConfigError(field + ": empty list");
  return out;
}

RunConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    const auto known = schema().find(section);
    if (known == schema().end()) {
      if (!body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (known->second.count(key) == 0) throw ConfigError("unknown key " + section + "." + key);
      const std::string field = section + "." + key;
      const std::string v = node.data();
      if (section == "domain") {
        if (key == "a") cfg.a = to_double(v, field);
        if (key == "b") cfg.b = to_double(v, field);
        if (key == "n_elem") cfg.n_elem = static_cast<int>(to_integer(v, field));
      } else if (section == "operator") {
        if (key == "s") cfg.s = to_double(v, field);
        if (key == "alpha") {
          cfg.alpha = parse_grid(v, field);
          cfg.alpha_text = trim(v);
        }
        if (key == "eigenpairs") cfg.eigenpairs = static_cast<int>(to_integer(v, field));
      } else if (section == "nonlinearity") {
        if (key == "kind") cfg.kind = trim(v);
        else if (key == "lambda") cfg.lambda = parse_lambda(v);
        else if (key == "p") cfg.p = to_double(v, field);
        else if (key == "load") cfg.load = to_double(v, field);
        else if (key == "a_bound") cfg.constants.a_bound = to_double(v, field);
        else if (key == "b") cfg.constants.b = to_double(v, field);
        else if (key == "r") cfg.constants.r = to_double(v, field);
        else if (key == "mu") cfg.constants.mu = to_double(v, field);
        else if (key == "mu_tilde") cfg.constants.mu_tilde = to_double(v, field);
        else if (key == "R") cfg.constants.R = to_double(v, field);
        else if (key == "c") cfg.constants.c = to_double(v, field);
        else if (key == "A") cfg.constants.A = to_double(v, field);
        else if (key == "d") cfg.constants.d = to_double(v, field);
        else if (key == "lambda_k") cfg.constants.lambda_k = to_double(v, field);
      } else if (section == "solver") {
        if (key == "tol") cfg.tol = to_double(v, field);
        else if (key == "max_iter") cfg.max_iter = static_cast<int>(to_integer(v, field));
        else if (key == "seed") {
          const long long seed = to_integer(v, field);
          if (seed < 0) throw ConfigError("solver.seed ≥ 0 violated");
          cfg.seed = static_cast<std::uint64_t>(seed);
        } else if (key == "k") cfg.k = static_cast<int>(to_integer(v, field));
        else if (key == "switch_tol") cfg.switch_tol = to_double(v, field);
        else if (key == "path_nodes") cfg.path_nodes = static_cast<int>(to_integer(v, field));
        else if (key == "newton_max_iter") cfg.newton_max_iter = static_cast<int>(to_integer(v, field));
        else if (key == "blowup_bound") cfg.blowup_bound = to_double(v, field);
        else if (key == "nontrivial_factor") cfg.nontrivial_factor = to_double(v, field);
      } else if (section == "threshold") {
        if (key == "bracket_lo") cfg.bracket_lo = to_double(v, field);
        if (key == "bracket_hi") cfg.bracket_hi = to_double(v, field);
        if (key == "tol") cfg.threshold_tol = to_double(v, field);
      } else if (section == "analysis") {
        if (key == "restarts") cfg.restarts = static_cast<int>(to_integer(v, field));
        if (key == "audit_trials") cfg.audit_trials = static_cast<int>(to_integer(v, field));
        if (key == "epsilon_grid") cfg.epsilon_grid = parse_grid(v, field);
      } else if (section == "hypotheses") {
        if (key == "t_min") cfg.t_min = to_double(v, field);
        if (key == "t_max") cfg.t_max = to_double(v, field);
        if (key == "count") cfg.t_count = static_cast<int>(to_integer(v, field));
        if (key == "x") cfg.x_samples = parse_grid(v, field);
        if (key == "tolerance") cfg.hypothesis_tol = to_double(v, field);
      } else if (section == "output") {
        if (key == "dir") cfg.out_dir = trim(v);
      }
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

RunConfig apply_overrides(RunConfig cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.tol) cfg.tol = *o.tol;
  if (o.max_iter) cfg.max_iter = *o.max_iter;
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& c) {
  require(c.b > c.a, "domain: a < b");
  require(c.n_elem >= 2 && c.n_elem <= 4096, "domain.n_elem ∈ [2, 4096]");
  require(c.s > 0.0 && c.s < 1.0, "operator.s ∈ (0,1)");
  require(!c.alpha.empty(), "operator.alpha nonempty");
  require(c.eigenpairs >= 1 && c.eigenpairs <= c.n_elem - 1, "operator.eigenpairs ∈ [1, n_elem - 1]");
  require(c.kind == "none" || c.kind == "affine" || c.kind == "power", "nonlinearity.kind ∈ {none, affine, power}");
  require(c.p > 2.0, "nonlinearity.p > 2");
  if (c.lambda.rule != LambdaSpec::Rule::value) {
    const int needed = c.lambda.k + (c.lambda.rule == LambdaSpec::Rule::midgap ? 1 : 0);
    require(needed <= c.n_elem - 1, "nonlinearity.lambda: spectral index within n_elem - 1");
  }
  require(c.tol > 0.0 && c.tol < 1.0, "solver.tol ∈ (0,1)");
  require(c.max_iter >= 1, "solver.max_iter ≥ 1");
  require(c.k >= 0 && c.k + 1 <= c.n_elem - 1, "solver.k ∈ [0, n_elem - 2]");
  require(c.switch_tol > 0.0, "solver.switch_tol > 0");
  require(c.path_nodes >= 3, "solver.path_nodes ≥ 3");
  require(c.newton_max_iter >= 1, "solver.newton_max_iter ≥ 1");
  require(c.blowup_bound > 0.0, "solver.blowup_bound > 0");
  require(c.nontrivial_factor > 0.0 && c.nontrivial_factor < 1.0, "solver.nontrivial_factor ∈ (0,1)");
  require(c.bracket_lo < c.bracket_hi, "threshold: bracket_lo < bracket_hi");
  require(c.threshold_tol > 0.0, "threshold.tol > 0");
  require(c.restarts >= 1, "analysis.restarts ≥ 1");
  require(c.audit_trials >= 0, "analysis.audit_trials ≥ 0");
  for (double e : c.epsilon_grid) require(e > 0.0, "analysis.epsilon_grid entries > 0");
  require(c.t_min > 0.0 && c.t_max > c.t_min, "hypotheses: 0 < t_min < t_max");
  require(c.t_count >= 2, "hypotheses.count ≥ 2");
  for (double x : c.x_samples) require(x > c.a && x < c.b, "hypotheses.x ∈ (a, b)");
  require(c.hypothesis_tol >= 0.0, "hypotheses.tolerance ≥ 0");
  require(!c.out_dir.empty(), "output.dir nonempty");
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  using nlohmann::ordered_json;
  ordered_json nl{{"kind", c.kind}, {"lambda", c.lambda.text}, {"p", c.p}, {"load", c.load}};
  const auto put = [&](const char* name, const std::optional<double>& v) {
    if (v) nl[name] = *v;
  };
  put("a_bound", c.constants.a_bound);
  put("b", c.constants.b);
  put("r", c.constants.r);
  put("mu", c.constants.mu);
  put("mu_tilde", c.constants.mu_tilde);
  put("R", c.constants.R);
  put("c", c.constants.c);
  put("A", c.constants.A);
  put("d", c.constants.d);
  put("lambda_k", c.constants.lambda_k);
  return ordered_json{
      {"domain", {{"a", c.a}, {"b", c.b}, {"n_elem", c.n_elem}}},
      {"operator", {{"s", c.s}, {"alpha", c.alpha}, {"eigenpairs", c.eigenpairs}}},
      {"nonlinearity", nl},
      {"solver",
       {{"tol", c.tol},
        {"max_iter", c.max_iter},
        {"seed", c.seed},
        {"k", c.k},
        {"switch_tol", c.switch_tol},
        {"path_nodes", c.path_nodes},
        {"newton_max_iter", c.newton_max_iter},
        {"blowup_bound", c.blowup_bound},
        {"nontrivial_factor", c.nontrivial_factor}}},
      {"threshold", {{"bracket_lo", c.bracket_lo}, {"bracket_hi", c.bracket_hi}, {"tol", c.threshold_tol}}},
      {"analysis", {{"restarts", c.restarts}, {"audit_trials", c.audit_trials}, {"epsilon_grid", c.epsilon_grid}}},
      {"hypotheses",
       {{"t_min", c.t_min}, {"t_max", c.t_max}, {"count", c.t_count}, {"x", c.x_samples}, {"tolerance", c.hypothesis_tol}}},
      {"output", {{"dir", c.out_dir}}},
  };
}

}  // namespace mixedop::cli
