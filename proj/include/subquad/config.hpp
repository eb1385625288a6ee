// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_CONFIG_HPP
#define SUBQUAD_CONFIG_HPP

#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "subquad/common.hpp"
#include "subquad/expression.hpp"
#include "subquad/grid.hpp"
#include "subquad/nonlinearity.hpp"
#include "subquad/solvers.hpp"
#include "subquad/thresholds.hpp"

namespace subquad {

/// A number that may be divided by one of the computed thresholds, e.g.
/// "0.5/S_F" or "2/s_F" — resolved only after the thresholds are known.
struct ScalarSpec {
  enum class Divisor { None, LowerThreshold, UpperThreshold };
  double value = 0.0;
  Divisor divisor = Divisor::None;

  double resolve(double s_F, double S_F) const {
    switch (divisor) {
      case Divisor::LowerThreshold: return value / s_F;
      case Divisor::UpperThreshold: return value / S_F;
      default: return value;
    }
  }
};

/// One entry of a lambda list: a scalar or linspace(a, b, n).
struct LambdaItem {
  bool is_linspace = false;
  ScalarSpec a;
  ScalarSpec b;
  int n = 0;
};

struct LambdaSpec {
  std::string raw;
  std::vector<LambdaItem> items;
  bool empty() const { return items.empty(); }
};

inline std::vector<double> resolve_lambdas(const LambdaSpec& spec, double s_F, double S_F) {
  std::vector<double> out;
  for (const auto& item : spec.items) {
    if (!item.is_linspace) {
      out.push_back(item.a.resolve(s_F, S_F));
      continue;
    }
    const double lo = item.a.resolve(s_F, S_F);
    const double hi = item.b.resolve(s_F, S_F);
    if (item.n == 1) {
      out.push_back(lo);
      continue;
    }
    for (int k = 0; k < item.n; ++k)
      out.push_back(lo + (hi - lo) * static_cast<double>(k) / (item.n - 1));
  }
  return out;
}

/// One entry of a mu list: a plain number or NUMBER*lambda.
struct MuItem {
  double value = 0.0;
  bool times_lambda = false;
};

inline std::vector<double> resolve_mus(const std::vector<MuItem>& mus, double lambda) {
  std::vector<double> out;
  out.reserve(mus.size());
  for (const auto& m : mus) out.push_back(m.times_lambda ? m.value * lambda : m.value);
  return out;
}

/// Fully parsed run configuration; defaults cover every omissible field.
/// lambda has no default — commands that need it say so.
struct RunConfig {
  int dim = 2;
  std::array<double, 2> lengths{1.0, 1.0};
  std::array<int, 2> counts{17, 17};

  std::string a_expr = "1";
  std::string b_expr = "1";
  std::string c_expr = "1";
  std::string d_expr;  // empty: no perturbation weight field (treated as 1)

  std::string nl_name = "log-coupled";  // catalog name (short-circuits parsing)
  std::string nl_expr;                  // expression in s, t; excludes nl_name

  SolveConfig solver;
  LambdaSpec lambda;
  ThresholdSearchConfig thresholds;

  std::string g_name = "log-coupled";
  std::string g_expr;
  std::vector<MuItem> mus{{0.0, false}, {1e-4, true}};

  std::string out_dir = "out";
  bool quiet = false;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] inline void config_fail(const std::string& origin, int line,
                                     const std::string& what) {
  throw UsageError(origin + ":" + std::to_string(line) + ": " + what);
}

inline double parse_double_strict(const std::string& s, const std::string& origin, int line,
                                  const std::string& key) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    config_fail(origin, line, "key '" + key + "': expected a number, got '" + s + "'");
  return v;
}

inline long long parse_int_strict(const std::string& s, const std::string& origin, int line,
                                  const std::string& key) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0')
    config_fail(origin, line, "key '" + key + "': expected an integer, got '" + s + "'");
  return v;
}

inline bool parse_bool_strict(const std::string& s, const std::string& origin, int line,
                              const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  config_fail(origin, line, "key '" + key + "': expected true/false, got '" + s + "'");
}

// Splits on commas that are not nested inside parentheses.
inline std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  const std::string last = trim(cur);
  if (!last.empty() || !parts.empty()) parts.push_back(last);
  return parts;
}

inline ScalarSpec parse_scalar_spec(const std::string& text, const std::string& origin,
                                    int line) {
  ScalarSpec spec;
  const auto slash = text.find('/');
  std::string num = trim(slash == std::string::npos ? text : text.substr(0, slash));
  spec.value = parse_double_strict(num, origin, line, "lambda");
  if (slash != std::string::npos) {
    const std::string denom = trim(text.substr(slash + 1));
    if (denom == "s_F")
      spec.divisor = ScalarSpec::Divisor::LowerThreshold;
    else if (denom == "S_F")
      spec.divisor = ScalarSpec::Divisor::UpperThreshold;
    else
      config_fail(origin, line,
                  "lambda spec: divisor must be s_F or S_F, got '" + denom + "'");
  }
  return spec;
}

inline LambdaSpec parse_lambda_spec(const std::string& text, const std::string& origin,
                                    int line) {
  LambdaSpec spec;
  spec.raw = trim(text);
  for (const auto& part : split_top_level(spec.raw)) {
    if (part.empty()) config_fail(origin, line, "lambda spec: empty list entry");
    LambdaItem item;
    if (part.rfind("linspace", 0) == 0) {
      const auto open = part.find('(');
      const auto close = part.rfind(')');
      if (open == std::string::npos || close == std::string::npos || close < open ||
          trim(part.substr(8, open - 8)) != "")
        config_fail(origin, line, "lambda spec: malformed linspace in '" + part + "'");
      const auto args = split_top_level(part.substr(open + 1, close - open - 1));
      if (args.size() != 3)
        config_fail(origin, line, "lambda spec: linspace needs (start, stop, count)");
      item.is_linspace = true;
      item.a = parse_scalar_spec(args[0], origin, line);
      item.b = parse_scalar_spec(args[1], origin, line);
      item.n = static_cast<int>(parse_int_strict(args[2], origin, line, "linspace count"));
      if (item.n < 1) config_fail(origin, line, "lambda spec: linspace count must be >= 1");
    } else {
      item.a = parse_scalar_spec(part, origin, line);
    }
    spec.items.push_back(item);
  }
  if (spec.items.empty()) config_fail(origin, line, "lambda spec: empty list");
  return spec;
}

inline std::vector<MuItem> parse_mu_spec(const std::string& text, const std::string& origin,
                                         int line) {
  std::vector<MuItem> mus;
  for (const auto& part : split_top_level(trim(text))) {
    if (part.empty()) config_fail(origin, line, "mus: empty list entry");
    MuItem item;
    const auto star = part.find('*');
    if (star != std::string::npos) {
      if (trim(part.substr(star + 1)) != "lambda")
        config_fail(origin, line, "mus: entries are NUMBER or NUMBER*lambda, got '" + part + "'");
      item.times_lambda = true;
      item.value = parse_double_strict(trim(part.substr(0, star)), origin, line, "mus");
    } else {
      item.value = parse_double_strict(part, origin, line, "mus");
    }
    mus.push_back(item);
  }
  if (mus.empty()) config_fail(origin, line, "mus: empty list");
  return mus;
}

}  // namespace detail

/// Parses the sectioned key = value configuration format. Unknown sections
/// or keys are errors; every message carries origin and line number.
inline RunConfig parse_config_text(std::string_view text, const std::string& origin) {
  using detail::config_fail;
  using detail::trim;
  RunConfig cfg;
  bool nl_name_set = false, nl_expr_set = false;
  bool g_name_set = false, g_expr_set = false;

  std::string section;
  int line_no = 0;
  std::istringstream stream{std::string(text)};
  std::string raw;
  while (std::getline(stream, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') config_fail(origin, line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "domain" && section != "coefficients" && section != "nonlinearity" &&
          section != "solver" && section != "thresholds" && section != "perturbation" &&
          section != "output")
        config_fail(origin, line_no, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      config_fail(origin, line_no, "expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_fail(origin, line_no, "empty key");
    if (section.empty())
      config_fail(origin, line_no, "key '" + key + "' appears outside any section");

    auto num = [&] { return detail::parse_double_strict(value, origin, line_no, key); };
    auto integer = [&] {
      return detail::parse_int_strict(value, origin, line_no, key);
    };

    if (section == "domain") {
      if (key == "dim") {
        cfg.dim = static_cast<int>(integer());
        if (cfg.dim != 1 && cfg.dim != 2)
          config_fail(origin, line_no, "dim must be 1 or 2, got " + value);
      } else if (key == "lengths" || key == "counts") {
        std::istringstream vs(value);
        std::vector<std::string> parts;
        std::string tok;
        while (vs >> tok) {
          if (!tok.empty() && tok.back() == ',') tok.pop_back();
          if (!tok.empty()) parts.push_back(tok);
        }
        if (parts.empty() || parts.size() > 2)
          config_fail(origin, line_no, "key '" + key + "': expected 1 or 2 values");
        for (std::size_t i = 0; i < parts.size(); ++i) {
          if (key == "lengths") {
            cfg.lengths[i] = detail::parse_double_strict(parts[i], origin, line_no, key);
            if (!(cfg.lengths[i] > 0.0))
              config_fail(origin, line_no, "lengths must be positive, got " + parts[i]);
          } else {
            cfg.counts[i] =
                static_cast<int>(detail::parse_int_strict(parts[i], origin, line_no, key));
            if (cfg.counts[i] < 3)
              config_fail(origin, line_no, "counts must be >= 3 per axis, got " + parts[i]);
          }
        }
        if (parts.size() == 1) {
          if (key == "lengths")
            cfg.lengths[1] = cfg.lengths[0];
          else
            cfg.counts[1] = cfg.counts[0];
        }
      } else {
        config_fail(origin, line_no, "unknown key '" + key + "' in [domain]");
      }
    } else if (section == "coefficients") {
      if (key == "a")
        cfg.a_expr = value;
      else if (key == "b")
        cfg.b_expr = value;
      else if (key == "c")
        cfg.c_expr = value;
      else if (key == "d")
        cfg.d_expr = value;
      else
        config_fail(origin, line_no, "unknown key '" + key + "' in [coefficients]");
    } else if (section == "nonlinearity") {
      if (key == "name") {
        cfg.nl_name = value;
        nl_name_set = true;
      } else if (key == "expression") {
        cfg.nl_expr = value;
        nl_expr_set = true;
      } else {
        config_fail(origin, line_no, "unknown key '" + key + "' in [nonlinearity]");
      }
      if (nl_name_set && nl_expr_set)
        config_fail(origin, line_no, "[nonlinearity]: give either name or expression, not both");
    } else if (section == "solver") {
      if (key == "grad_tol_abs")
        cfg.solver.grad_tol_abs = num();
      else if (key == "grad_tol_rel")
        cfg.solver.grad_tol_rel = value == "auto" ? -1.0 : num();
      else if (key == "max_iters")
        cfg.solver.max_iters = static_cast<int>(integer());
      else if (key == "n_starts")
        cfg.solver.n_starts = static_cast<int>(integer());
      else if (key == "seed")
        cfg.solver.rng_seed = static_cast<std::uint64_t>(integer());
      else if (key == "distinct_tol")
        cfg.solver.distinct_tol = num();
      else if (key == "deflation_power")
        cfg.solver.deflation_power = num();
      else if (key == "deflation_shift")
        cfg.solver.deflation_shift = num();
      else if (key == "start_amplitude")
        cfg.solver.start_amplitude = num();
      else if (key == "cg_max_iters")
        cfg.solver.cg_max_iters = static_cast<int>(integer());
      else if (key == "polish_iters")
        cfg.solver.polish_iters = static_cast<int>(integer());
      else if (key == "lambda")
        cfg.lambda = detail::parse_lambda_spec(value, origin, line_no);
      else
        config_fail(origin, line_no, "unknown key '" + key + "' in [solver]");
    } else if (section == "thresholds") {
      if (key == "n_radii")
        cfg.thresholds.n_radii = static_cast<int>(integer());
      else if (key == "n_angles")
        cfg.thresholds.n_angles = static_cast<int>(integer());
      else if (key == "r_min")
        cfg.thresholds.r_min = num();
      else if (key == "r_max")
        cfg.thresholds.r_max = num();
      else if (key == "multistart")
        cfg.thresholds.multistart = static_cast<int>(integer());
      else if (key == "refine_tol")
        cfg.thresholds.refine_tol = num();
      else
        config_fail(origin, line_no, "unknown key '" + key + "' in [thresholds]");
    } else if (section == "perturbation") {
      if (key == "g_name") {
        cfg.g_name = value;
        g_name_set = true;
      } else if (key == "g_expression") {
        cfg.g_expr = value;
        g_expr_set = true;
      } else if (key == "mus") {
        cfg.mus = detail::parse_mu_spec(value, origin, line_no);
      } else {
        config_fail(origin, line_no, "unknown key '" + key + "' in [perturbation]");
      }
      if (g_name_set && g_expr_set)
        config_fail(origin, line_no, "[perturbation]: give either g_name or g_expression, not both");
    } else if (section == "output") {
      if (key == "dir")
        cfg.out_dir = value;
      else if (key == "quiet")
        cfg.quiet = detail::parse_bool_strict(value, origin, line_no, key);
      else
        config_fail(origin, line_no, "unknown key '" + key + "' in [output]");
    }
  }

  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

/// Grid construction from the parsed domain block.
inline std::shared_ptr<const GridDomain> build_grid(const RunConfig& cfg) {
  std::vector<double> lengths(cfg.lengths.begin(), cfg.lengths.begin() + cfg.dim);
  std::vector<int> counts(cfg.counts.begin(), cfg.counts.begin() + cfg.dim);
  return std::make_shared<const GridDomain>(build_uniform_grid(cfg.dim, lengths, counts));
}

/// Coefficient fields from their expressions (a plain number is the common
/// case and parses as a constant expression).
inline CoefficientField build_coefficients(const RunConfig& cfg,
                                           std::shared_ptr<const GridDomain> grid) {
  CoefficientField cf;
  cf.grid = grid;
  cf.a = field_from_expression(*grid, cfg.a_expr);
  cf.b = field_from_expression(*grid, cfg.b_expr);
  cf.c = field_from_expression(*grid, cfg.c_expr);
  if (!cfg.d_expr.empty()) cf.d = field_from_expression(*grid, cfg.d_expr);
  validate_coefficients(cf);
  return cf;
}

/// The coupling nonlinearity: catalog names short-circuit expression parsing.
inline Nonlinearity build_nonlinearity(const RunConfig& cfg) {
  if (!cfg.nl_expr.empty()) return nonlinearity_from_expression(cfg.nl_expr);
  return catalog(cfg.nl_name);
}

/// The perturbation nonlinearity G.
inline Nonlinearity build_perturbation(const RunConfig& cfg) {
  if (!cfg.g_expr.empty()) return nonlinearity_from_expression(cfg.g_expr);
  return catalog(cfg.g_name);
}

}  // namespace subquad

#endif
