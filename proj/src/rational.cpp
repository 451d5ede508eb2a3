#include "circlekms/rational.hpp"

#include <cctype>

namespace circlekms {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::size_t hash_mpz(mpz_srcptr z) {
  std::size_t h = static_cast<std::size_t>(mpz_sgn(z) + 2);
  const std::size_t limbs = mpz_size(z);
  for (std::size_t i = 0; i < limbs; ++i) {
    const auto limb = static_cast<std::size_t>(mpz_getlimbn(z, i));
    h ^= limb + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view token) {
  std::string_view body = token;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  const auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : body.substr(slash + 1);
  if (!all_digits(num) || !all_digits(den)) return std::nullopt;

  Integer n(std::string(num), 10);
  Integer d(std::string(den), 10);
  if (d == 0) return std::nullopt;
  if (negative) n = -n;
  Rational r(n, d);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Integer floor(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

Integer ceil(const Rational& r) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

Rational frac(const Rational& r) {
  Rational out = r - Rational(floor(r));
  return out;
}

Rational pow(const Rational& base, long exp) {
  Rational result(1);
  Rational b = exp < 0 ? Rational(1) / base : base;
  unsigned long e = exp < 0 ? static_cast<unsigned long>(-exp) : static_cast<unsigned long>(exp);
  while (e != 0) {
    if (e & 1UL) result *= b;
    b *= b;
    e >>= 1U;
  }
  return result;
}

std::size_t denominator_bits(const Rational& r) {
  return mpz_sizeinbase(r.get_den_mpz_t(), 2);
}

int sign(const Rational& r) { return sgn(r); }

std::size_t RationalHash::operator()(const Rational& r) const noexcept {
  const std::size_t a = hash_mpz(r.get_num_mpz_t());
  const std::size_t b = hash_mpz(r.get_den_mpz_t());
  return a ^ (b * 0x100000001b3ULL + (a << 7));
}

}  // namespace circlekms
