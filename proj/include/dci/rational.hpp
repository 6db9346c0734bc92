#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <stdexcept>
#include <string>

namespace dci {

/// Arbitrary-precision rational scalar. Denominators stay positive and
/// fractions stay reduced (GMP canonicalizes after every operation).
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    return Rational(num, den);
}

/// Serializes as "p/q" with q > 0 reduced, or just "p" when q == 1.
inline std::string to_string(const Rational& r) {
    BigInt num = numerator(r), den = denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline Rational rational_from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt(s));
    BigInt num(s.substr(0, slash)), den(s.substr(slash + 1));
    if (den <= 0) throw std::invalid_argument("rational denominator must be positive: " + s);
    return Rational(num) / Rational(den);
}

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }
inline double to_double(double x) { return x; }

inline Rational rat_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

} // namespace dci
