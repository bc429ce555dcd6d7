#include "hombridge/nonlinearity.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

#include "hombridge/error.hpp"

namespace hombridge {

namespace {

ExprPtr make_node(Expr::Kind kind, std::vector<ExprPtr> args = {}, double number = 0.0) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->number = number;
  e->args = std::move(args);
  return e;
}

// Recursive-descent parser over the grammar
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := unary ("^" factor)?
//   unary  := "-" unary | atom
//   atom   := number | "u" | ident "(" expr ("," expr)* ")" | "(" expr ")"
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    ExprPtr e = expr();
    skip_ws();
    if (pos_ < text_.size()) {
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char ch) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char ch) {
    if (!accept(ch)) {
      if (pos_ >= text_.size()) {
        throw ParseError(std::string("expected '") + ch + "' but input ended", pos_);
      }
      throw ParseError(std::string("expected '") + ch + "'", pos_);
    }
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Expr::Kind::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make_node(Expr::Kind::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  ExprPtr term() {
    ExprPtr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Expr::Kind::Mul, {lhs, factor()});
      } else if (accept('/')) {
        lhs = make_node(Expr::Kind::Div, {lhs, factor()});
      } else {
        return lhs;
      }
    }
  }

  ExprPtr factor() {
    ExprPtr base = unary();
    if (accept('^')) return make_node(Expr::Kind::Pow, {base, factor()});
    return base;
  }

  ExprPtr unary() {
    if (accept('-')) return make_node(Expr::Kind::Neg, {unary()});
    return atom();
  }

  ExprPtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char ch = text_[pos_];
    if (ch == '(') {
      ++pos_;
      ExprPtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') return identifier();
    throw ParseError(std::string("unexpected '") + ch + "'", pos_);
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || end != text_.data() + pos_) {
      throw ParseError("malformed number", start);
    }
    return make_node(Expr::Kind::Number, {}, value);
  }

  ExprPtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "u") return make_node(Expr::Kind::Variable);

    Expr::Kind kind;
    std::size_t min_args = 1, max_args = 1;
    if (name == "exp") {
      kind = Expr::Kind::Exp;
    } else if (name == "abs") {
      kind = Expr::Kind::Abs;
    } else if (name == "max") {
      kind = Expr::Kind::Max;
      min_args = 2;
      max_args = 64;
    } else if (name == "min") {
      kind = Expr::Kind::Min;
      min_args = 2;
      max_args = 64;
    } else {
      throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }

    expect('(');
    std::vector<ExprPtr> args{expr()};
    while (accept(',')) args.push_back(expr());
    skip_ws();
    const std::size_t close = pos_;
    expect(')');
    if (args.size() < min_args || args.size() > max_args) {
      throw ParseError("wrong number of arguments to '" + std::string(name) + "'", close);
    }
    // max/min with more than two arguments fold left so ties still favour the first.
    while (args.size() > 2) {
      auto folded = make_node(kind, {args[0], args[1]});
      args.erase(args.begin(), args.begin() + 2);
      args.insert(args.begin(), folded);
    }
    return make_node(kind, std::move(args));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

template <class T>
Dual<T> checked(Dual<T> d) {
  using std::isfinite;
  if (!isfinite(d.value)) throw DomainError("expression evaluated to a non-finite value");
  return d;
}

template <class T>
Dual<T> soft_extremum(Dual<T> a, Dual<T> b, double temperature, bool is_max) {
  using std::exp;
  using std::log1p;
  const T tau = static_cast<T>(temperature);
  const T sign = is_max ? T(1) : T(-1);
  // max(a,b) + tau log(1 + exp(-|a-b|/tau)), weights are logistic in (a-b)/tau.
  const T gap = sign * (a.value - b.value);
  const T big = gap >= 0 ? a.value : b.value;
  const T value = big + sign * tau * log1p(exp(-std::abs(gap) / tau));
  const T wa = T(1) / (T(1) + exp(-gap / tau));
  return {value, wa * a.deriv + (T(1) - wa) * b.deriv};
}

}  // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Expr& e) {
  auto bin = [&](const char* op) {
    return "(" + to_string(*e.args[0]) + " " + op + " " + to_string(*e.args[1]) + ")";
  };
  auto call = [&](const char* name) {
    std::string out = std::string(name) + "(";
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      if (i) out += ", ";
      out += to_string(*e.args[i]);
    }
    return out + ")";
  };
  switch (e.kind) {
    case Expr::Kind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e.number);
      return buf;
    }
    case Expr::Kind::Variable: return "u";
    case Expr::Kind::Neg: return "(-" + to_string(*e.args[0]) + ")";
    case Expr::Kind::Add: return bin("+");
    case Expr::Kind::Sub: return bin("-");
    case Expr::Kind::Mul: return bin("*");
    case Expr::Kind::Div: return bin("/");
    case Expr::Kind::Pow: return bin("^");
    case Expr::Kind::Exp: return call("exp");
    case Expr::Kind::Abs: return call("abs");
    case Expr::Kind::Max: return call("max");
    case Expr::Kind::Min: return call("min");
  }
  return {};
}

template <class T>
Dual<T> evaluate(const Expr& e, T u, double max_smoothing) {
  using std::exp;
  using std::log;
  using std::pow;
  switch (e.kind) {
    case Expr::Kind::Number: return {static_cast<T>(e.number), T(0)};
    case Expr::Kind::Variable: return {u, T(1)};
    case Expr::Kind::Neg: {
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      return {-a.value, -a.deriv};
    }
    case Expr::Kind::Add: {
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      const auto b = evaluate<T>(*e.args[1], u, max_smoothing);
      return checked<T>({a.value + b.value, a.deriv + b.deriv});
    }
    case Expr::Kind::Sub: {
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      const auto b = evaluate<T>(*e.args[1], u, max_smoothing);
      return checked<T>({a.value - b.value, a.deriv - b.deriv});
    }
    case Expr::Kind::Mul: {
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      const auto b = evaluate<T>(*e.args[1], u, max_smoothing);
      return checked<T>({a.value * b.value, a.deriv * b.value + a.value * b.deriv});
    }
    case Expr::Kind::Div: {
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      const auto b = evaluate<T>(*e.args[1], u, max_smoothing);
      if (b.value == T(0)) throw DomainError("division by zero");
      return checked<T>(
          {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)});
    }
    case Expr::Kind::Pow: {
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      const auto b = evaluate<T>(*e.args[1], u, max_smoothing);
      const T value = pow(a.value, b.value);  // pow(0, 0) == 1
      T deriv = 0;
      if (a.deriv != T(0)) deriv += b.value * pow(a.value, b.value - T(1)) * a.deriv;
      if (b.deriv != T(0)) deriv += value * log(a.value) * b.deriv;
      return checked<T>({value, deriv});
    }
    case Expr::Kind::Exp: {
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      const T value = exp(a.value);
      return checked<T>({value, value * a.deriv});
    }
    case Expr::Kind::Abs: {
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      return {std::abs(a.value), a.value >= T(0) ? a.deriv : -a.deriv};
    }
    case Expr::Kind::Max:
    case Expr::Kind::Min: {
      const bool is_max = e.kind == Expr::Kind::Max;
      const auto a = evaluate<T>(*e.args[0], u, max_smoothing);
      const auto b = evaluate<T>(*e.args[1], u, max_smoothing);
      if (max_smoothing > 0) return checked<T>(soft_extremum(a, b, max_smoothing, is_max));
      const bool first = is_max ? a.value >= b.value : a.value <= b.value;
      return first ? a : b;
    }
  }
  throw DomainError("corrupt expression node");
}

template Dual<double> evaluate<double>(const Expr&, double, double);
template Dual<long double> evaluate<long double>(const Expr&, long double, double);

NonlinearitySpec::NonlinearitySpec(std::string source, ExprPtr ast, NonlinearityKind kind,
                                   double smoothing)
    : source_(std::move(source)), ast_(std::move(ast)), kind_(kind), smoothing_(smoothing) {
  Dual<double> at_zero{};
  try {
    at_zero = evaluate<double>(*ast_, 0.0, smoothing_);
  } catch (const DomainError& e) {
    throw ValidationError(std::string("f cannot be evaluated at u = 0: ") + e.what());
  }
  if (smoothing_ > 0) {
    offset_ = at_zero.value;
  } else if (std::abs(at_zero.value) > 1e-14) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", at_zero.value);
    throw ValidationError(std::string("f(0) must be 0, got ") + buf);
  }
  if (!std::isfinite(at_zero.deriv)) throw ValidationError("f'(0) is not finite");
  fprime0_ = at_zero.deriv;
}

NonlinearitySpec NonlinearitySpec::parse(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ParseError("empty expression", 0);
  }
  return NonlinearitySpec(std::string(text), parse_expression(text), NonlinearityKind::Custom, 0.0);
}

NonlinearitySpec NonlinearitySpec::piecewise() {
  return NonlinearitySpec("max(u,-1)", parse_expression("max(u,-1)"),
                          NonlinearityKind::BuiltinPiecewise, 0.0);
}

NonlinearitySpec NonlinearitySpec::exponential() {
  return NonlinearitySpec("exp(u)-1", parse_expression("exp(u)-1"),
                          NonlinearityKind::BuiltinExponential, 0.0);
}

NonlinearitySpec NonlinearitySpec::builtin(std::string_view name) {
  if (name == "piecewise") return piecewise();
  if (name == "exponential") return exponential();
  throw InvalidArgument("unknown builtin nonlinearity '" + std::string(name) +
                        "' (expected piecewise or exponential)");
}

NonlinearitySpec NonlinearitySpec::with_max_smoothing(double temperature) const {
  if (!(temperature >= 0)) throw InvalidArgument("smoothing temperature must be >= 0");
  return NonlinearitySpec(source_, ast_, kind_, temperature);
}

AssumptionReport check_assumptions(const NonlinearitySpec& spec, double u_max,
                                   std::size_t samples) {
  if (!(u_max > 0)) throw InvalidArgument("u_max must be positive");
  if (samples < 16) throw InvalidArgument("at least 16 samples are required");

  AssumptionReport report;
  report.u_max = u_max;
  report.samples = samples;
  report.fprime_at_zero = spec.fprime_at_zero();
  report.a2_pass = spec.fprime_at_zero() > 0;

  const double lo = std::log(1e-8);
  const double hi = std::log(std::max(u_max, 1e-8));
  for (std::size_t i = 0; i < samples && report.a1_pass; ++i) {
    const double t = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
    const double mag = std::exp(lo + t * (hi - lo));
    for (double u : {mag, -mag}) {
      bool ok = false;
      try {
        ok = u * spec.value(u) > 0;
      } catch (const DomainError&) {
        ok = false;
      }
      if (!ok) {
        report.a1_pass = false;
        report.first_violation = u;
        break;
      }
    }
  }
  return report;
}

}  // namespace hombridge
