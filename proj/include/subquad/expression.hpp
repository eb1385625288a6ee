// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_EXPRESSION_HPP
#define SUBQUAD_EXPRESSION_HPP

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subquad/common.hpp"
#include "subquad/grid.hpp"
#include "subquad/nonlinearity.hpp"

namespace subquad {

/// A compiled closed-form expression in a fixed set of variables. Grammar:
/// + - * / with usual precedence, right-associative ^, unary sign, parens,
/// the unary functions ln (alias log), exp, sqrt, sin, cos, tan, tanh, atan,
/// abs, and the constants pi and e. Errors carry the 1-based column.
class Expression {
 public:
  static Expression compile(std::string_view text, std::vector<std::string> variables) {
    Expression ex;
    ex.text_.assign(text);
    ex.variables_ = std::move(variables);
    Parser p(ex);
    ex.root_ = p.parse();
    return ex;
  }

  double operator()(std::span<const double> values) const {
    if (values.size() != variables_.size())
      throw UsageError("expression: wrong number of variable values");
    return eval_node(root_, values);
  }

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return variables_; }

 private:
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
  struct Node {
    Kind kind;
    double value = 0.0;         // Const
    int var = 0;                // Var
    int a = -1, b = -1;         // children
    double (*fn)(double) = nullptr;  // Call
  };

  std::string text_;
  std::vector<std::string> variables_;
  std::vector<Node> nodes_;
  int root_ = -1;

  double eval_node(int id, std::span<const double> vals) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.kind) {
      case Kind::Const: return n.value;
      case Kind::Var: return vals[static_cast<std::size_t>(n.var)];
      case Kind::Add: return eval_node(n.a, vals) + eval_node(n.b, vals);
      case Kind::Sub: return eval_node(n.a, vals) - eval_node(n.b, vals);
      case Kind::Mul: return eval_node(n.a, vals) * eval_node(n.b, vals);
      case Kind::Div: return eval_node(n.a, vals) / eval_node(n.b, vals);
      case Kind::Pow: return std::pow(eval_node(n.a, vals), eval_node(n.b, vals));
      case Kind::Neg: return -eval_node(n.a, vals);
      case Kind::Call: return n.fn(eval_node(n.a, vals));
    }
    return 0.0;  // unreachable
  }

  struct Parser {
    Expression& ex;
    std::size_t pos = 0;

    explicit Parser(Expression& e) : ex(e) {}

    [[noreturn]] void fail(const std::string& what) const {
      throw UsageError("expression error at position " + std::to_string(pos + 1) + ": " +
                       what);
    }

    void skip_ws() {
      while (pos < ex.text_.size() && std::isspace(static_cast<unsigned char>(ex.text_[pos])))
        ++pos;
    }

    bool eat(char c) {
      skip_ws();
      if (pos < ex.text_.size() && ex.text_[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    char peek() {
      skip_ws();
      return pos < ex.text_.size() ? ex.text_[pos] : '\0';
    }

    int add(Node n) {
      ex.nodes_.push_back(n);
      return static_cast<int>(ex.nodes_.size()) - 1;
    }

    int parse() {
      skip_ws();
      if (pos >= ex.text_.size()) fail("empty expression");
      const int r = parse_expr();
      skip_ws();
      if (pos != ex.text_.size()) fail("unexpected trailing input");
      return r;
    }

    int parse_expr() {
      int lhs = parse_term();
      for (;;) {
        if (eat('+'))
          lhs = add({Kind::Add, 0.0, 0, lhs, parse_term(), nullptr});
        else if (eat('-'))
          lhs = add({Kind::Sub, 0.0, 0, lhs, parse_term(), nullptr});
        else
          return lhs;
      }
    }

    int parse_term() {
      int lhs = parse_unary();
      for (;;) {
        if (eat('*'))
          lhs = add({Kind::Mul, 0.0, 0, lhs, parse_unary(), nullptr});
        else if (eat('/'))
          lhs = add({Kind::Div, 0.0, 0, lhs, parse_unary(), nullptr});
        else
          return lhs;
      }
    }

    int parse_unary() {
      if (eat('+')) return parse_unary();
      if (eat('-')) return add({Kind::Neg, 0.0, 0, parse_unary(), -1, nullptr});
      return parse_power();
    }

    int parse_power() {
      const int base = parse_atom();
      if (eat('^'))  // right-associative; exponent may carry its own sign
        return add({Kind::Pow, 0.0, 0, base, parse_unary(), nullptr});
      return base;
    }

    static double (*lookup_fn(const std::string& name))(double) {
      struct Entry {
        const char* name;
        double (*fn)(double);
      };
      static constexpr Entry table[] = {
          {"ln", [](double x) { return std::log(x); }},
          {"log", [](double x) { return std::log(x); }},
          {"exp", [](double x) { return std::exp(x); }},
          {"sqrt", [](double x) { return std::sqrt(x); }},
          {"sin", [](double x) { return std::sin(x); }},
          {"cos", [](double x) { return std::cos(x); }},
          {"tan", [](double x) { return std::tan(x); }},
          {"tanh", [](double x) { return std::tanh(x); }},
          {"atan", [](double x) { return std::atan(x); }},
          {"abs", [](double x) { return std::fabs(x); }},
      };
      for (const auto& e : table)
        if (name == e.name) return e.fn;
      return nullptr;
    }

    int parse_atom() {
      skip_ws();
      if (pos >= ex.text_.size()) fail("expected a value");
      const char c = ex.text_[pos];

      if (c == '(') {
        ++pos;
        const int inner = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return inner;
      }

      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const char* begin = ex.text_.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos += static_cast<std::size_t>(end - begin);
        return add({Kind::Const, v, 0, -1, -1, nullptr});
      }

      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos;
        while (pos < ex.text_.size() &&
               (std::isalnum(static_cast<unsigned char>(ex.text_[pos])) || ex.text_[pos] == '_'))
          ++pos;
        const std::string name = ex.text_.substr(start, pos - start);

        if (peek() == '(') {
          auto fn = lookup_fn(name);
          if (fn == nullptr) {
            pos = start;
            fail("unknown function '" + name + "'");
          }
          eat('(');
          const int arg = parse_expr();
          if (!eat(')')) fail("expected ')' after function argument");
          return add({Kind::Call, 0.0, 0, arg, -1, fn});
        }

        for (std::size_t i = 0; i < ex.variables_.size(); ++i)
          if (name == ex.variables_[i])
            return add({Kind::Var, 0.0, static_cast<int>(i), -1, -1, nullptr});
        if (name == "pi")
          return add({Kind::Const, 3.141592653589793238462643383280, 0, -1, -1, nullptr});
        if (name == "e")
          return add({Kind::Const, 2.718281828459045235360287471353, 0, -1, -1, nullptr});

        pos = start;
        std::string allowed;
        for (const auto& v : ex.variables_) {
          if (!allowed.empty()) allowed += ", ";
          allowed += v;
        }
        fail("unknown identifier '" + name + "' (variables here: " + allowed + ")");
      }

      fail(std::string("unexpected character '") + c + "'");
    }
  };
};

/// Nonlinearity from a closed-form expression in (s, t); derivatives use the
/// central-difference fallbacks.
inline Nonlinearity nonlinearity_from_expression(const std::string& text) {
  Expression ex = Expression::compile(text, {"s", "t"});
  return from_value(text, [ex = std::move(ex)](double s, double t) {
    const double vals[2] = {s, t};
    return ex(vals);
  });
}

/// Nodal coefficient field from an expression in the spatial variables —
/// x in one dimension, x and y in two.
inline std::vector<double> field_from_expression(const GridDomain& grid,
                                                 const std::string& text) {
  std::vector<std::string> vars =
      grid.dim == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
  Expression ex = Expression::compile(text, std::move(vars));
  std::vector<double> field(static_cast<std::size_t>(grid.n_nodes()));
  for (int i = 0; i < grid.n_nodes(); ++i) {
    if (grid.dim == 1) {
      const double vals[1] = {grid.node_x(i)};
      field[static_cast<std::size_t>(i)] = ex(vals);
    } else {
      const double vals[2] = {grid.node_x(i), grid.node_y(i)};
      field[static_cast<std::size_t>(i)] = ex(vals);
    }
  }
  return field;
}

}  // namespace subquad

#endif
