#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "petrigame/errors.hpp"

namespace petrigame {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Renders a rational as "p/q", or just "p" for integers.
inline std::string to_fraction_string(const Rational& r) {
  const BigInt num = numerator(r);
  const BigInt den = denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Decimal rendering rounded to six places, for the "approx" side of reports.
inline double approx6(const Rational& r) {
  return std::round(to_double(r) * 1e6) / 1e6;
}

/// Parses "p/q", an integer, or a plain decimal string ("-0.25").
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw ParseError("empty rational literal");
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const BigInt num(text.substr(0, slash));
      const BigInt den(text.substr(slash + 1));
      if (den == 0) throw ParseError("zero denominator in '" + text + "'");
      return Rational(num, den);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(BigInt(text));
    std::string intpart = text.substr(0, dot);
    const std::string fracpart = text.substr(dot + 1);
    if (fracpart.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("bad decimal '" + text + "'");
    bool negative = false;
    if (!intpart.empty() && (intpart[0] == '-' || intpart[0] == '+')) {
      negative = intpart[0] == '-';
      intpart = intpart.substr(1);
    }
    BigInt scale = 1;
    for (std::size_t k = 0; k < fracpart.size(); ++k) scale *= 10;
    BigInt whole = intpart.empty() ? BigInt(0) : BigInt(intpart);
    BigInt frac = fracpart.empty() ? BigInt(0) : BigInt(fracpart);
    Rational value = Rational(whole * scale + frac, scale);
    return negative ? -value : value;
  } catch (const std::exception& e) {
    throw ParseError("cannot parse rational '" + text + "': " + e.what());
  }
}

using RatVec = std::vector<Rational>;

}  // namespace petrigame
