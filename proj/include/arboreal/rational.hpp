#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <stdexcept>
#include <string>

namespace arboreal {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Float50 = boost::multiprecision::cpp_bin_float_50;

inline double log_bigint(const BigInt& v) {
  if (v <= 0) throw std::domain_error("log of non-positive integer");
  Float50 f(v);
  return boost::multiprecision::log(f).convert_to<double>();
}

inline double log_rational(const Rational& r) {
  if (r <= 0) throw std::domain_error("log of non-positive rational");
  Float50 num(boost::multiprecision::numerator(r));
  Float50 den(boost::multiprecision::denominator(r));
  using boost::multiprecision::log;
  return (log(num) - log(den)).convert_to<double>();
}

// cpp_int's string constructor treats leading zeros as octal; force base 10.
inline BigInt bigint_from_decimal(const std::string& digits) {
  std::string s = digits;
  bool negative = false;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    negative = (s[i] == '-');
    ++i;
  }
  while (i + 1 < s.size() && s[i] == '0') ++i;
  std::string body = s.substr(i);
  if (body.empty() || body.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("malformed integer: " + digits);
  BigInt v(body);
  return negative ? BigInt(-v) : v;
}

// Accepts "p/q", integers, and plain decimals with optional exponent ("0.25", "-3", "1e-3").
inline Rational parse_rational(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) throw std::invalid_argument("empty rational literal");

  auto slash = s.find('/');
  if (slash != std::string::npos) {
    if (slash == 0 || slash + 1 >= s.size()) throw std::invalid_argument("malformed rational: " + text);
    BigInt p = bigint_from_decimal(s.substr(0, slash));
    BigInt q = bigint_from_decimal(s.substr(slash + 1));
    if (q == 0) throw std::invalid_argument("zero denominator: " + text);
    return Rational(p, q);
  }

  bool negative = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    negative = (s[i] == '-');
    ++i;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  long exponent = 0;
  for (; i < s.size(); ++i) {
    char ch = s[i];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (ch == '.') {
      if (seen_dot) throw std::invalid_argument("malformed number: " + text);
      seen_dot = true;
    } else if (ch == 'e' || ch == 'E') {
      if (!seen_digit || i + 1 >= s.size()) throw std::invalid_argument("malformed number: " + text);
      std::size_t used = 0;
      exponent = std::stol(s.substr(i + 1), &used);
      if (used != s.size() - i - 1) throw std::invalid_argument("malformed number: " + text);
      break;
    } else {
      throw std::invalid_argument("malformed number: " + text);
    }
  }
  if (!seen_digit) throw std::invalid_argument("malformed number: " + text);

  BigInt mantissa = bigint_from_decimal(digits.empty() ? "0" : digits);
  if (negative) mantissa = -mantissa;
  long pow10 = exponent - frac_digits;
  BigInt scale = 1;
  for (long k = 0; k < (pow10 < 0 ? -pow10 : pow10); ++k) scale *= 10;
  return pow10 >= 0 ? Rational(mantissa * scale, 1) : Rational(mantissa, scale);
}

inline std::string rational_to_string(const Rational& r) {
  BigInt num = boost::multiprecision::numerator(r);
  BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace arboreal
