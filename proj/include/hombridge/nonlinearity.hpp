#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hombridge/error.hpp"

namespace hombridge {

/// Node of an expression tree in the single free variable `u`.
struct Expr {
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Exp, Abs, Max, Min };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::vector<std::shared_ptr<const Expr>> args;
};

using ExprPtr = std::shared_ptr<const Expr>;

/// Value and derivative with respect to u, carried together through the tree.
template <class T>
struct Dual {
  T value;
  T deriv;
};

enum class NonlinearityKind { BuiltinPiecewise, BuiltinExponential, Custom };

/// Parses the expression grammar (numbers, u, + - * / ^, exp abs max min,
/// parentheses). Throws ParseError with a character position.
ExprPtr parse_expression(std::string_view text);

/// Fully parenthesized rendering that re-parses to an equivalent tree.
std::string to_string(const Expr& e);

/// Forward-mode evaluation. At ties of max/min the first argument's
/// derivative is taken, and abs'(0) = 1. `max_smoothing` > 0 replaces max/min
/// by a log-sum-exp with that temperature. Throws DomainError on non-finite
/// intermediate values.
template <class T>
Dual<T> evaluate(const Expr& e, T u, double max_smoothing = 0.0);

/// A validated nonlinear term f with f(0) = 0. Immutable after construction.
class NonlinearitySpec {
 public:
  static NonlinearitySpec parse(std::string_view text);
  static NonlinearitySpec piecewise();    // max(u,-1)
  static NonlinearitySpec exponential();  // exp(u)-1
  /// Accepts "piecewise" / "exponential".
  static NonlinearitySpec builtin(std::string_view name);

  /// Copy whose max/min are smoothed with the given temperature (0 = off).
  /// The smoothed term is shifted so that f(0) = 0 still holds.
  NonlinearitySpec with_max_smoothing(double temperature) const;

  const std::string& source() const { return source_; }
  const Expr& ast() const { return *ast_; }
  NonlinearityKind kind() const { return kind_; }
  double fprime_at_zero() const { return fprime0_; }
  double max_smoothing() const { return smoothing_; }

  template <class T>
  T value(T u) const {
    return evaluate<T>(*ast_, u, smoothing_).value - static_cast<T>(offset_);
  }
  template <class T>
  T derivative(T u) const {
    const T d = evaluate<T>(*ast_, u, smoothing_).deriv;
    if (!std::isfinite(d)) throw DomainError("derivative of f is not finite");
    return d;
  }
  template <class T>
  Dual<T> dual(T u) const {
    auto d = evaluate<T>(*ast_, u, smoothing_);
    d.value -= static_cast<T>(offset_);
    return d;
  }

 private:
  NonlinearitySpec(std::string source, ExprPtr ast, NonlinearityKind kind, double smoothing);

  std::string source_;
  ExprPtr ast_;
  NonlinearityKind kind_ = NonlinearityKind::Custom;
  double smoothing_ = 0.0;
  double offset_ = 0.0;
  double fprime0_ = 0.0;
};

inline NonlinearitySpec parse_nonlinearity(std::string_view text) {
  return NonlinearitySpec::parse(text);
}
inline double eval_f(const NonlinearitySpec& spec, double u) { return spec.value(u); }
inline double eval_fprime(const NonlinearitySpec& spec, double u) { return spec.derivative(u); }

/// Sampled check of u f(u) > 0 (A1) and f'(0) > 0 (A2). Heuristic: it only
/// looks at a finite log-spaced sample and cannot detect non-Lipschitz terms.
struct AssumptionReport {
  bool a1_pass = true;
  std::optional<double> first_violation;  // smallest |u| where u f(u) <= 0
  bool a2_pass = false;
  double fprime_at_zero = 0.0;
  double u_max = 0.0;
  std::size_t samples = 0;
  bool heuristic = true;
};

/// `samples` points per sign on a log grid over [1e-8, u_max].
AssumptionReport check_assumptions(const NonlinearitySpec& spec, double u_max,
                                   std::size_t samples = 4096);

}  // namespace hombridge
