#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exactpen/errors.hpp"

namespace exactpen {

/// Arithmetic expressions over x1..xn.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?          right associative
///   primary := number | 'x' digits | func '(' expr (',' expr)* ')' | '(' expr ')'
///   func    := abs | exp (one argument), max | min (two or more)
///
/// Numbers use C syntax (1, 2.5, 1e-3). So -x1^2 is -(x1^2).
class Expression {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  Expression(std::string text, std::size_t dim) : text_(std::move(text)), dim_(dim) {
    pos_ = 0;
    fn_ = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
  }

  double operator()(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionError("expression evaluated at a point of the wrong dimension");
    return fn_(x);
  }

  [[nodiscard]] const std::string& text() const { return text_; }
  [[nodiscard]] Fn function() const { return fn_; }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigurationError("expression '" + text_ + "' at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Fn parse_expr() {
    Fn lhs = parse_term();
    while (true) {
      if (eat('+')) {
        Fn rhs = parse_term();
        lhs = [lhs, rhs](std::span<const double> x) { return lhs(x) + rhs(x); };
      } else if (eat('-')) {
        Fn rhs = parse_term();
        lhs = [lhs, rhs](std::span<const double> x) { return lhs(x) - rhs(x); };
      } else {
        return lhs;
      }
    }
  }

  Fn parse_term() {
    Fn lhs = parse_unary();
    while (true) {
      if (eat('*')) {
        Fn rhs = parse_unary();
        lhs = [lhs, rhs](std::span<const double> x) { return lhs(x) * rhs(x); };
      } else if (eat('/')) {
        Fn rhs = parse_unary();
        lhs = [lhs, rhs](std::span<const double> x) { return lhs(x) / rhs(x); };
      } else {
        return lhs;
      }
    }
  }

  Fn parse_unary() {
    if (eat('-')) {
      Fn arg = parse_unary();
      return [arg](std::span<const double> x) { return -arg(x); };
    }
    if (eat('+')) return parse_unary();
    return parse_power();
  }

  Fn parse_power() {
    Fn base = parse_primary();
    if (!eat('^')) return base;
    Fn expo = parse_unary();
    return [base, expo](std::span<const double> x) { return std::pow(base(x), expo(x)); };
  }

  Fn parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (eat('(')) {
      Fn inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return [v](std::span<const double>) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) ++end;
      const std::string word = text_.substr(pos_, end - pos_);
      if (word.size() > 1 && word[0] == 'x' &&
          std::all_of(word.begin() + 1, word.end(), [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
        const std::size_t index = std::stoul(word.substr(1));
        if (index < 1 || index > dim_) fail("variable " + word + " outside x1..x" + std::to_string(dim_));
        pos_ = end;
        return [i = index - 1](std::span<const double> x) { return x[i]; };
      }
      pos_ = end;
      return parse_call(word);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Fn parse_call(const std::string& name) {
    if (name != "abs" && name != "exp" && name != "max" && name != "min") fail("unknown function '" + name + "'");
    if (!eat('(')) fail("expected '(' after " + name);
    std::vector<Fn> args{parse_expr()};
    while (eat(',')) args.push_back(parse_expr());
    if (!eat(')')) fail("expected ')'");
    const bool unary = name == "abs" || name == "exp";
    if (unary && args.size() != 1) fail(name + " takes one argument");
    if (!unary && args.size() < 2) fail(name + " takes at least two arguments");
    if (name == "abs") return [a = args[0]](std::span<const double> x) { return std::abs(a(x)); };
    if (name == "exp") return [a = args[0]](std::span<const double> x) { return std::exp(a(x)); };
    const bool is_max = name == "max";
    return [args, is_max](std::span<const double> x) {
      double v = args[0](x);
      for (std::size_t i = 1; i < args.size(); ++i) v = is_max ? std::max(v, args[i](x)) : std::min(v, args[i](x));
      return v;
    };
  }

  std::string text_;
  std::size_t dim_;
  std::size_t pos_ = 0;
  Fn fn_;
};

}  // namespace exactpen
