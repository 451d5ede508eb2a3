#pragma once

// Exact rationals on top of GMP. Everything that touches orbits, valencies
// or measure weights goes through this type.

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace circlekms {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p/q", "p" or "-p/q". The result is canonicalized. Returns nullopt
/// on anything else, including a zero denominator.
std::optional<Rational> parse_rational(std::string_view token);

/// num/den in canonical form (mpq_class(num, den) does not reduce).
inline Rational ratio(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Reduced "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& r);

Integer floor(const Rational& r);
Integer ceil(const Rational& r);

/// r - floor(r), always in [0,1).
Rational frac(const Rational& r);

/// base^exp for any integer exponent (base must be nonzero when exp < 0).
Rational pow(const Rational& base, long exp);

/// Bit length of the denominator, used by the growth guards.
std::size_t denominator_bits(const Rational& r);

int sign(const Rational& r);

struct RationalHash {
  std::size_t operator()(const Rational& r) const noexcept;
};

}  // namespace circlekms
