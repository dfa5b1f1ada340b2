#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kfrac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument at a pole of Gamma or of a hypergeometric denominator.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// Hypergeometric evaluation requested where the series or its limit diverges.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure exhausted its work budget.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function (including NaN results).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operator parameters outside the admissible region. The message names the
/// violated constraint, e.g. "alpha > max{0,-beta-mu} violated".
class ParameterDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Integrand returned NaN or infinity at a quadrature node.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Adaptive bisection reached its maximum depth.
class MaxDepthError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A checked case does not satisfy the hypotheses of its theorem.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// A reversal case matches none of the sign conditions that reverse the inequality.
class ConditionClassificationError : public Error {
 public:
  using Error::Error;
};

/// Malformed inequality case or trial configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kfrac
