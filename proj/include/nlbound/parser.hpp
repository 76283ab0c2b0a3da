#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nlbound/errors.hpp"
#include "nlbound/expr.hpp"

namespace nlbound {

namespace detail {

// Recursive-descent parser. Precedence, tightest first: ^, unary -, * /, + -.
class Parser {
 public:
  Parser(std::string_view text, const std::map<std::string, double>* constants)
      : s_(text), constants_(constants) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ < s_.size()) fail({"operator", "end of input"}, "unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail = {}) const {
    throw ParseError(pos_, std::move(expected), detail);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail({std::string(1, c)});
  }

  Expr expression() {
    Expr acc = term();
    for (;;) {
      if (accept('+'))
        acc = acc + term();
      else if (accept('-'))
        acc = acc - term();
      else
        return acc;
    }
  }

  Expr term() {
    Expr acc = unary();
    for (;;) {
      if (accept('*'))
        acc = acc * unary();
      else if (accept('/'))
        acc = acc / unary();
      else
        return acc;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == start) fail({"integer exponent"});
    int k = 0;
    auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, k);
    if (ec != std::errc() || k < 1) {
      pos_ = start;
      fail({"integer exponent"}, "exponent must be an integer >= 1");
    }
    return pow_int(base, k);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail({"number", "identifier", "("}, "unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail({"number", "identifier", "("}, "unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
      if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
        pos_ = q;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || p != s_.data() + pos_ || !std::isfinite(v)) {
      pos_ = start;
      fail({"number"}, "malformed number");
    }
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));

    static const std::vector<std::string> unary_fns = {"sin", "cos", "abs", "sqrt", "exp", "sqr"};
    const bool is_fn = name == "max" || std::find(unary_fns.begin(), unary_fns.end(), name) != unary_fns.end();
    if (is_fn) {
      expect('(');
      Expr a = expression();
      if (name == "max") {
        expect(',');
        Expr b = expression();
        expect(')');
        return max(a, b);
      }
      expect(')');
      if (name == "sin") return sin(a);
      if (name == "cos") return cos(a);
      if (name == "abs") return abs(a);
      if (name == "sqrt") return sqrt(a);
      if (name == "exp") return exp(a);
      return sqr(a);
    }
    if (constants_ != nullptr) {
      auto it = constants_->find(name);
      if (it != constants_->end()) return Expr::constant(it->second);
    }
    return Expr::variable(name);
  }

  std::string_view s_;
  const std::map<std::string, double>* constants_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse an expression. Identifiers found in `constants` are replaced by their values.
inline Expr parse(std::string_view text, const std::map<std::string, double>& constants = {}) {
  return detail::Parser(text, &constants).parse();
}

inline bool is_reserved_name(const std::string& name) {
  static const char* const kReserved[] = {"sin", "cos", "abs", "sqrt", "exp", "sqr", "max"};
  for (const char* r : kReserved)
    if (name == r) return true;
  return false;
}

}  // namespace nlbound
