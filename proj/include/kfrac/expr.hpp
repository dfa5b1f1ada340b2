#pragma once

/// \file expr.hpp
/// A closed expression language for real functions of tau on [0, t].
///
/// Text syntax (prefix s-expressions, `x` denotes tau):
///
///     3.5                 constant
///     x                   identity
///     (+ e1 e2 ...)       sum
///     (* e1 e2 ...)       product
///     (scale c e)         c * e
///     (pow e c)           e^c  (e >= 0; e > 0 when c < 0)
///     (exp e)
///     (log1p e)           ln(1 + e), e > -1
///     (min e c) (max e c)
///     (affine a b e)      e evaluated at a*x + b, a, b >= 0
///
/// Numbers are printed in shortest round-trip form, so parse(to_string(e))
/// evaluates bit-identically to e.

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "kfrac/error.hpp"

namespace kfrac {

class Expr {
 public:
  enum class Kind { constant, identity, power, sum, product, scale, exp, log1p, min, max, affine };

  /// The identity expression `x`.
  Expr() : Expr(identity()) {}

  static Expr constant(double c) {
    if (!std::isfinite(c)) throw DomainError("Expr: constant must be finite");
    return Expr(make(Kind::constant, c, 0.0, {}, c >= 0.0));
  }

  static Expr identity() { return Expr(make(Kind::identity, 0.0, 0.0, {}, true)); }

  static Expr power(Expr base, double exponent) {
    if (!std::isfinite(exponent)) throw DomainError("Expr: exponent must be finite");
    return Expr(make(Kind::power, exponent, 0.0, {std::move(base)}, true));
  }

  static Expr sum(std::vector<Expr> terms) {
    if (terms.empty()) throw DomainError("Expr: empty sum");
    return Expr(make(Kind::sum, 0.0, 0.0, std::move(terms), std::nullopt));
  }

  static Expr product(std::vector<Expr> factors) {
    if (factors.empty()) throw DomainError("Expr: empty product");
    return Expr(make(Kind::product, 0.0, 0.0, std::move(factors), std::nullopt));
  }

  static Expr scale(double factor, Expr e) {
    if (!std::isfinite(factor)) throw DomainError("Expr: scale factor must be finite");
    const bool nonneg = factor >= 0.0 && e.certified_nonnegative();
    return Expr(make(Kind::scale, factor, 0.0, {std::move(e)}, nonneg));
  }

  static Expr exp(Expr e) { return Expr(make(Kind::exp, 0.0, 0.0, {std::move(e)}, true)); }

  static Expr log1p(Expr e) {
    const bool nonneg = e.certified_nonnegative();
    return Expr(make(Kind::log1p, 0.0, 0.0, {std::move(e)}, nonneg));
  }

  static Expr min(Expr e, double c) {
    if (!std::isfinite(c)) throw DomainError("Expr: min bound must be finite");
    const bool nonneg = c >= 0.0 && e.certified_nonnegative();
    return Expr(make(Kind::min, c, 0.0, {std::move(e)}, nonneg));
  }

  static Expr max(Expr e, double c) {
    if (!std::isfinite(c)) throw DomainError("Expr: max bound must be finite");
    const bool nonneg = c >= 0.0 || e.certified_nonnegative();
    return Expr(make(Kind::max, c, 0.0, {std::move(e)}, nonneg));
  }

  /// e composed with tau -> a*tau + b.
  static Expr affine(double a, double b, Expr e) {
    if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw DomainError("Expr: affine map needs finite a >= 0 and b >= 0");
    }
    const bool nonneg = e.certified_nonnegative();
    return Expr(make(Kind::affine, a, b, {std::move(e)}, nonneg));
  }

  Kind kind() const { return node_->kind; }

  /// True when the construction rules guarantee a value >= 0 for every tau >= 0.
  bool certified_nonnegative() const { return node_->nonnegative; }

  /// Evaluate at tau. Throws DomainError rather than returning NaN or infinity.
  double operator()(double tau) const {
    const double value = evaluate(*node_, tau);
    if (!std::isfinite(value)) {
      throw DomainError("Expr: non-finite value " + std::to_string(value) + " at tau = " +
                        std::to_string(tau));
    }
    return value;
  }

  double eval(double tau) const { return (*this)(tau); }

  std::string to_string() const {
    std::string out;
    write(*node_, out);
    return out;
  }

  static Expr parse(std::string_view text);

  friend Expr operator*(const Expr& lhs, const Expr& rhs) { return product({lhs, rhs}); }
  friend Expr operator+(const Expr& lhs, const Expr& rhs) { return sum({lhs, rhs}); }

 private:
  struct Node {
    Kind kind;
    double first;   // constant value, exponent, factor, bound, or affine slope
    double second;  // affine offset
    std::vector<Expr> children;
    bool nonnegative;
  };

  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static std::shared_ptr<const Node> make(Kind kind, double first, double second,
                                          std::vector<Expr> children,
                                          std::optional<bool> nonnegative) {
    bool nonneg = true;
    if (nonnegative) {
      nonneg = *nonnegative;
    } else {
      for (const auto& child : children) nonneg = nonneg && child.certified_nonnegative();
    }
    return std::make_shared<const Node>(Node{kind, first, second, std::move(children), nonneg});
  }

  static double evaluate(const Node& node, double tau) {
    switch (node.kind) {
      case Kind::constant:
        return node.first;
      case Kind::identity:
        return tau;
      case Kind::power: {
        const double base = evaluate(*node.children[0].node_, tau);
        if (base < 0.0 || (base == 0.0 && node.first < 0.0)) {
          throw DomainError("Expr: pow of base " + std::to_string(base) + " with exponent " +
                            std::to_string(node.first));
        }
        return std::pow(base, node.first);
      }
      case Kind::sum: {
        double total = 0.0;
        for (const auto& child : node.children) total += evaluate(*child.node_, tau);
        return total;
      }
      case Kind::product: {
        double total = 1.0;
        for (const auto& child : node.children) total *= evaluate(*child.node_, tau);
        return total;
      }
      case Kind::scale:
        return node.first * evaluate(*node.children[0].node_, tau);
      case Kind::exp:
        return std::exp(evaluate(*node.children[0].node_, tau));
      case Kind::log1p: {
        const double arg = evaluate(*node.children[0].node_, tau);
        if (!(arg > -1.0)) {
          throw DomainError("Expr: log1p of " + std::to_string(arg) + " <= -1");
        }
        return std::log1p(arg);
      }
      case Kind::min:
        return std::fmin(evaluate(*node.children[0].node_, tau), node.first);
      case Kind::max:
        return std::fmax(evaluate(*node.children[0].node_, tau), node.first);
      case Kind::affine:
        return evaluate(*node.children[0].node_, node.first * tau + node.second);
    }
    return std::nan("");
  }

  static void write_number(double value, std::string& out) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    out.append(buffer, result.ptr);
  }

  static void write(const Node& node, std::string& out) {
    auto children = [&](const char* head) {
      out += '(';
      out += head;
      for (const auto& child : node.children) {
        out += ' ';
        write(*child.node_, out);
      }
      out += ')';
    };
    switch (node.kind) {
      case Kind::constant:
        write_number(node.first, out);
        return;
      case Kind::identity:
        out += 'x';
        return;
      case Kind::power:
        out += "(pow ";
        write(*node.children[0].node_, out);
        out += ' ';
        write_number(node.first, out);
        out += ')';
        return;
      case Kind::sum:
        children("+");
        return;
      case Kind::product:
        children("*");
        return;
      case Kind::scale:
        out += "(scale ";
        write_number(node.first, out);
        out += ' ';
        write(*node.children[0].node_, out);
        out += ')';
        return;
      case Kind::exp:
        children("exp");
        return;
      case Kind::log1p:
        children("log1p");
        return;
      case Kind::min:
      case Kind::max:
        out += node.kind == Kind::min ? "(min " : "(max ";
        write(*node.children[0].node_, out);
        out += ' ';
        write_number(node.first, out);
        out += ')';
        return;
      case Kind::affine:
        out += "(affine ";
        write_number(node.first, out);
        out += ' ';
        write_number(node.second, out);
        out += ' ';
        write(*node.children[0].node_, out);
        out += ')';
        return;
    }
  }

  friend class ExprParser;

  std::shared_ptr<const Node> node_;
};

/// Recursive-descent reader for the s-expression syntax.
class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("Expr parse error: " + message, pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) fail("expected a token");
    return text_.substr(start, pos_ - start);
  }

  double number() {
    skip_space();
    const std::size_t start = pos_;
    const std::string_view tok = token();
    const char* first = tok.data();
    if (*first == '+') ++first;  // from_chars rejects a leading plus
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(value)) {
      pos_ = start;
      fail("expected a number, got '" + std::string(tok) + "'");
    }
    return value;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  Expr parse_expr() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (text_[pos_] == ')') fail("unexpected ')'");
    if (text_[pos_] != '(') {
      const std::size_t start = pos_;
      const std::string_view tok = token();
      if (tok == "x") return Expr::identity();
      pos_ = start;
      return Expr::constant(number());
    }
    ++pos_;
    const std::size_t head_pos = pos_;
    const std::string head(token());
    Expr result;
    try {
      result = parse_form(head, head_pos);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(std::string("Expr parse error: ") + e.what(), head_pos);
    }
    expect(')');
    return result;
  }

  std::vector<Expr> operands() {
    std::vector<Expr> out;
    while (!peek(')')) {
      if (pos_ >= text_.size()) fail("unexpected end of input");
      out.push_back(parse_expr());
    }
    return out;
  }

  Expr parse_form(const std::string& head, std::size_t head_pos) {
    if (head == "+" || head == "*") {
      auto args = operands();
      if (args.empty()) fail("'" + head + "' needs at least one operand");
      return head == "+" ? Expr::sum(std::move(args)) : Expr::product(std::move(args));
    }
    if (head == "scale") {
      const double c = number();
      return Expr::scale(c, parse_expr());
    }
    if (head == "pow") {
      Expr base = parse_expr();
      return Expr::power(std::move(base), number());
    }
    if (head == "exp") return Expr::exp(parse_expr());
    if (head == "log1p") return Expr::log1p(parse_expr());
    if (head == "min" || head == "max") {
      Expr e = parse_expr();
      const double c = number();
      return head == "min" ? Expr::min(std::move(e), c) : Expr::max(std::move(e), c);
    }
    if (head == "affine") {
      const double a = number();
      const double b = number();
      return Expr::affine(a, b, parse_expr());
    }
    pos_ = head_pos;
    fail("unknown operator '" + head + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expr Expr::parse(std::string_view text) { return ExprParser(text).parse_all(); }

}  // namespace kfrac
