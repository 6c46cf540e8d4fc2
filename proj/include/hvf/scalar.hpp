#pragma once

// Scalar kernels.
//
// Every algebraic routine in hvf is a template over the scalar type. Two
// kernels are supported:
//
//   Rational  exact arithmetic, comparisons are exact equality
//   double    floating point, comparisons go through an explicit Tolerance
//
// kernel_traits<T> is the only place that knows the difference.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hvf {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

/// Raised when the exact kernel is asked for a square root that is not rational.
/// Callers that can live with rounding catch this and rerun on the float kernel.
class InexactOperation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Absolute/relative tolerance carried explicitly by callers of the float kernel.
/// The exact kernel ignores it.
struct Tolerance {
  double absolute = 1e-10;
  double relative = 1e-12;

  /// Effective bound for a quantity whose natural magnitude is `scale`.
  double bound(double scale = 1.0) const { return std::max(absolute, relative * std::abs(scale)); }
};

template <class T>
struct kernel_traits;

template <>
struct kernel_traits<double> {
  static constexpr bool exact = false;
  static constexpr std::string_view name = "float";

  static double abs(double x) { return std::abs(x); }
  static double sqrt(double x) {
    if (x < 0.0) {
      if (x > -1e-12) return 0.0;
      throw std::domain_error("sqrt of negative value");
    }
    return std::sqrt(x);
  }
  static double to_double(double x) { return x; }
  static double from_double(double x) { return x; }
  static bool is_zero(double x, const Tolerance& tol, double scale = 1.0) {
    return std::abs(x) <= tol.bound(scale);
  }
  static std::string to_string(double x) {
    if (x == 0.0) return "0";  // also folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
};

namespace detail {

inline bool exact_isqrt(const BigInt& n, BigInt& root) {
  if (n < 0) return false;
  root = boost::multiprecision::sqrt(n);
  return root * root == n;
}

}  // namespace detail

template <>
struct kernel_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr std::string_view name = "exact";

  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

  /// Exact square root; throws InexactOperation when the result is irrational.
  static Rational sqrt(const Rational& x) {
    if (x < 0) throw std::domain_error("sqrt of negative value");
    BigInt p = boost::multiprecision::numerator(x);
    BigInt q = boost::multiprecision::denominator(x);
    BigInt rp, rq;
    if (!detail::exact_isqrt(p, rp) || !detail::exact_isqrt(q, rq))
      throw InexactOperation("square root of " + x.str() + " is not rational");
    return Rational(rp, rq);
  }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational from_double(double x) { return Rational(x); }
  static bool is_zero(const Rational& x, const Tolerance& /*tol*/, double /*scale*/ = 1.0) {
    return x == 0;
  }
  static std::string to_string(const Rational& x) { return x.str(); }
};

template <class T>
inline T abs_of(const T& x) {
  return kernel_traits<T>::abs(x);
}

template <class T>
inline double to_double(const T& x) {
  return kernel_traits<T>::to_double(x);
}

template <class T>
inline bool is_zero(const T& x, const Tolerance& tol, double scale = 1.0) {
  return kernel_traits<T>::is_zero(x, tol, scale);
}

template <class T>
inline std::string format_scalar(const T& x) {
  return kernel_traits<T>::to_string(x);
}

/// Decimal integer with optional sign; rejects anything else.
inline BigInt parse_integer(std::string s, std::string_view text) {
  bool negative = !s.empty() && s[0] == '-';
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) s = s.substr(1);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("malformed number '" + std::string(text) + "'");
  s.erase(0, std::min(s.find_first_not_of('0'), s.size() - 1));
  BigInt v(s);
  return negative ? BigInt(-v) : v;
}

/// Parses "p/q", an integer, or a terminating decimal ("0.25", "-1.5e-2") exactly.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }),
          s.end());
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  if (s.find('/') != std::string::npos) {
    auto slash = s.find('/');
    BigInt p = parse_integer(s.substr(0, slash), text);
    BigInt q = parse_integer(s.substr(slash + 1), text);
    if (q == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    if (q < 0) {
      p = -p;
      q = -q;
    }
    return Rational(p, q);
  }
  int exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    exponent = std::stoi(s.substr(e + 1));
    s = s.substr(0, e);
  }
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s = s.substr(1);
  }
  std::string digits;
  int fractional = 0;
  bool seen_point = false;
  for (char ch : s) {
    if (ch == '.') {
      if (seen_point) throw std::invalid_argument("malformed number '" + std::string(text) + "'");
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      if (seen_point) ++fractional;
    } else {
      throw std::invalid_argument("malformed number '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) throw std::invalid_argument("malformed number '" + std::string(text) + "'");
  // a leading zero would make BigInt read the digits as octal
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  BigInt mantissa(digits);
  exponent -= fractional;
  BigInt ten_power = boost::multiprecision::pow(BigInt(10), std::abs(exponent));
  Rational value = exponent >= 0 ? Rational(mantissa * ten_power) : Rational(mantissa, ten_power);
  return negative ? Rational(-value) : value;
}

}  // namespace hvf
