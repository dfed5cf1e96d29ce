#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace eqd {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using BigFloat = boost::multiprecision::cpp_bin_float_100;

inline BigInt rat_num(const Rational& r) { return numerator(r); }
inline BigInt rat_den(const Rational& r) { return denominator(r); }

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

// Reduces r into [0, 1).
inline Rational mod1(const Rational& r) {
  BigInt n = numerator(r), d = denominator(r);  // d > 0 by invariant
  BigInt m = n % d;
  if (m < 0) m += d;
  return Rational(m, d);
}

// Exact value of a finite double (every finite double is a dyadic rational).
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [0.5, 1)
  auto mant = static_cast<long long>(std::ldexp(m, 53));
  exp -= 53;
  Rational r(mant);
  if (exp >= 0) {
    r *= Rational(BigInt(1) << exp);
  } else {
    r /= Rational(BigInt(1) << (-exp));
  }
  return r;
}

inline std::string to_string(const Rational& r) {
  if (is_integer(r)) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

// Parses "p" or "p/q" with optional sign; q > 0 after normalization.
inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(BigInt(s));
  BigInt n(s.substr(0, slash));
  BigInt d(s.substr(slash + 1));
  if (d == 0) throw std::invalid_argument("parse_rational: zero denominator");
  return Rational(n, d);
}

}  // namespace eqd
