#pragma once

// Exact and high-precision scalars used for tableau coefficients.
//
// Rational is an exact, always-normalized fraction (GMP mpq underneath).
// HighFloat is a 50-decimal-digit binary float used where coefficients are
// irrational (Chebyshev nodes) or were supplied as decimal literals.
// Coefficient is the tagged union of the two; any arithmetic that touches an
// inexact operand yields an inexact result.

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <ios>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace rkx {

// Expression templates off: values get stored in variants and passed to
// generic lambdas, where lazy expressions only cause ambiguity.
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;
using HighFloat = boost::multiprecision::number<boost::multiprecision::gmp_float<50>, boost::multiprecision::et_off>;

/// Values of magnitude below this are treated as structural zeros when a
/// coefficient is inexact.
inline const HighFloat& negligible_magnitude() {
  static const HighFloat eps("1e-40");
  return eps;
}

/// Exact conversion of a binary float to the dyadic rational it represents.
inline Rational to_rational(const HighFloat& x) {
  Rational r;
  mpq_set_f(r.backend().data(), x.backend().data());
  return r;
}

inline HighFloat to_high(const Rational& r) {
  HighFloat x;
  mpf_set_q(x.backend().data(), r.backend().data());
  return x;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

class Coefficient {
 public:
  Coefficient() : value_(Rational(0)) {}
  Coefficient(Rational r) : value_(std::move(r)) {}  // NOLINT(implicit)
  Coefficient(long n) : value_(Rational(n)) {}       // NOLINT(implicit)
  Coefficient(int n) : value_(Rational(n)) {}        // NOLINT(implicit)

  static Coefficient inexact(HighFloat x) {
    Coefficient c;
    c.value_ = std::move(x);
    return c;
  }

  [[nodiscard]] bool is_exact() const noexcept {
    return std::holds_alternative<Rational>(value_);
  }

  /// Throws std::logic_error when the coefficient is inexact.
  [[nodiscard]] const Rational& rational() const {
    if (!is_exact()) throw std::logic_error("coefficient is not exact");
    return std::get<Rational>(value_);
  }

  [[nodiscard]] HighFloat high() const {
    if (is_exact()) return to_high(std::get<Rational>(value_));
    return std::get<HighFloat>(value_);
  }

  [[nodiscard]] double to_double() const {
    if (is_exact()) return rkx::to_double(std::get<Rational>(value_));
    return std::get<HighFloat>(value_).convert_to<double>();
  }

  [[nodiscard]] int sign() const {
    if (is_exact()) return std::get<Rational>(value_).sign();
    const auto& x = std::get<HighFloat>(value_);
    if (abs(x) <= negligible_magnitude()) return 0;
    return x.sign();
  }

  [[nodiscard]] bool is_zero() const { return sign() == 0; }

  /// Same representation and same value. Exact 1/2 and inexact 0.5 differ.
  friend bool operator==(const Coefficient& a, const Coefficient& b) {
    return a.value_ == b.value_;
  }

  Coefficient operator-() const {
    return std::visit([](const auto& v) { return make(-v); }, value_);
  }

  Coefficient& operator+=(const Coefficient& o) { return *this = *this + o; }
  Coefficient& operator-=(const Coefficient& o) { return *this = *this - o; }
  Coefficient& operator*=(const Coefficient& o) { return *this = *this * o; }
  Coefficient& operator/=(const Coefficient& o) { return *this = *this / o; }

  friend Coefficient operator+(const Coefficient& a, const Coefficient& b) {
    if (a.is_exact() && b.is_exact()) return Coefficient(Rational(a.rational() + b.rational()));
    return inexact(a.high() + b.high());
  }
  friend Coefficient operator-(const Coefficient& a, const Coefficient& b) {
    if (a.is_exact() && b.is_exact()) return Coefficient(Rational(a.rational() - b.rational()));
    return inexact(a.high() - b.high());
  }
  friend Coefficient operator*(const Coefficient& a, const Coefficient& b) {
    if (a.is_exact() && b.is_exact()) return Coefficient(Rational(a.rational() * b.rational()));
    return inexact(a.high() * b.high());
  }
  friend Coefficient operator/(const Coefficient& a, const Coefficient& b) {
    if (b.is_exact() && b.rational() == 0) throw std::domain_error("division by zero coefficient");
    if (a.is_exact() && b.is_exact()) return Coefficient(Rational(a.rational() / b.rational()));
    return inexact(a.high() / b.high());
  }

  /// `num/den` (or `num` when den = 1) for exact values, 50 significant
  /// digits in scientific notation otherwise.
  [[nodiscard]] std::string str() const {
    if (is_exact()) return std::get<Rational>(value_).str();
    return std::get<HighFloat>(value_).str(50, std::ios_base::scientific);
  }

 private:
  static Coefficient make(const Rational& r) { return Coefficient(r); }
  static Coefficient make(const HighFloat& x) { return inexact(x); }

  std::variant<Rational, HighFloat> value_;
};

/// Parses `num/den`, an integer, or a decimal literal. Decimal literals
/// (anything with '.', 'e' or 'E') become inexact coefficients.
/// Throws std::invalid_argument on malformed input or a zero denominator.
inline Coefficient parse_coefficient(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty coefficient");
  auto is_int = [](std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char ch : s)
      if (ch < '0' || ch > '9') return false;
    return true;
  };
  auto to_integer = [](std::string_view s) {
    if (s.front() == '+') s.remove_prefix(1);
    return Integer(std::string(s));
  };

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (!is_int(num) || !is_int(den) || den.front() == '-' || den.front() == '+')
      throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    Integer d = to_integer(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Coefficient(Rational(to_integer(num), d));
  }
  if (is_int(text)) return Coefficient(Rational(to_integer(text)));

  // Decimal literal: validate the shape before handing it to GMP.
  std::size_t i = 0;
  if (text[i] == '-' || text[i] == '+') ++i;
  std::size_t digits = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  }
  if (digits == 0) throw std::invalid_argument("malformed coefficient '" + std::string(text) + "'");
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
    std::size_t exp_digits = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++exp_digits;
    if (exp_digits == 0)
      throw std::invalid_argument("malformed exponent in '" + std::string(text) + "'");
  }
  if (i != text.size()) throw std::invalid_argument("malformed coefficient '" + std::string(text) + "'");
  std::string s(text);
  if (s.front() == '+') s.erase(0, 1);
  return Coefficient::inexact(HighFloat(s));
}

/// Scalar-generic helpers so algorithms can be written once for Rational and
/// HighFloat.
template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static Rational from(const Coefficient& c) { return c.rational(); }
  static Coefficient wrap(const Rational& r) { return Coefficient(r); }
  static bool is_zero(const Rational& r) { return r == 0; }
};

template <>
struct ScalarTraits<HighFloat> {
  static HighFloat from(const Coefficient& c) { return c.high(); }
  static Coefficient wrap(const HighFloat& x) { return Coefficient::inexact(x); }
  static bool is_zero(const HighFloat& x) { return abs(x) <= negligible_magnitude(); }
};

}  // namespace rkx
