#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace kdyn {

using Rational = mpq_class;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accepts "p", "p/q", "-p/q" and plain decimals such as "0.25".
// Canonical a/b; mpq_class(a, b) alone leaves common factors in place.
inline Rational frac(long a, long b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);

double to_double(const Rational& q);
// log|q| without overflow for huge numerators/denominators.
double log_abs(const Rational& q);

Rational abs(const Rational& q);
Rational pow(const Rational& base, long exponent);

// Simplest (smallest denominator, then smallest |numerator|) rational in the
// open interval (lo, hi).
Rational simplest_between(const Rational& lo, const Rational& hi);

// Exact rational q with |q - exp(x)| small relative to exp(x), rounded down to
// a power-of-two grid.
Rational rational_below_exp(double x);

}  // namespace kdyn
