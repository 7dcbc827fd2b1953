#include "markoff/padic.hpp"

#include <set>

namespace markoff {

int valuation(const Int& n, const Int& p) {
  if (n == 0) throw InvalidInput("valuation: n must be nonzero");
  if (p < 2 || !is_prime(p)) throw InvalidInput("valuation: p must be prime");
  Int rest = abs(n);
  int v = 0;
  while (mpz_divisible_p(rest.get_mpz_t(), p.get_mpz_t())) {
    rest /= p;
    ++v;
  }
  return v;
}

int valuation(const Rat& x, const Int& p) {
  if (x == 0) throw InvalidInput("valuation: x must be nonzero");
  Int num(x.get_num()), den(x.get_den());
  int v = 0;
  if (mpz_divisible_p(num.get_mpz_t(), p.get_mpz_t())) v = valuation(num, p);
  else if (mpz_divisible_p(den.get_mpz_t(), p.get_mpz_t())) v = -valuation(den, p);
  return v;
}

int jacobi(Int a, Int n) {
  if (n <= 0 || n % 2 == 0) throw InvalidInput("jacobi: n must be odd positive");
  a = mod_nonneg(a, n);
  int j = 1;
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      unsigned long r = mpz_fdiv_ui(n.get_mpz_t(), 8);
      if (r == 3 || r == 5) j = -j;
    }
    std::swap(a, n);
    if (mpz_fdiv_ui(a.get_mpz_t(), 4) == 3 && mpz_fdiv_ui(n.get_mpz_t(), 4) == 3) j = -j;
    a = mod_nonneg(a, n);
  }
  return n == 1 ? j : 0;
}

int legendre(const Int& a, const Int& p) {
  if (p == 2 || !is_prime(p)) throw InvalidInput("legendre: p must be an odd prime");
  return jacobi(a, p);
}

int legendre_euler(const Int& a, const Int& p) {
  if (p == 2 || !is_prime(p)) throw InvalidInput("legendre_euler: p must be an odd prime");
  Int r;
  Int e = (p - 1) / 2;
  mpz_powm(r.get_mpz_t(), mod_nonneg(a, p).get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
  if (r == 0) return 0;
  return r == 1 ? 1 : -1;
}

namespace {

// a = p^v * u with u a p-adic unit; returns v and u.
std::pair<int, Int> split_valuation(Int a, const Int& p) {
  int v = 0;
  while (mpz_divisible_p(a.get_mpz_t(), p.get_mpz_t())) {
    a /= p;
    ++v;
  }
  return {v, a};
}

inline int eps2(const Int& u) {  // (u-1)/2 mod 2 for odd u
  unsigned long r = mpz_fdiv_ui(u.get_mpz_t(), 4);
  return r == 3 ? 1 : 0;
}

inline int omega2(const Int& u) {  // (u^2-1)/8 mod 2 for odd u
  unsigned long r = mpz_fdiv_ui(u.get_mpz_t(), 8);
  return (r == 3 || r == 5) ? 1 : 0;
}

}  // namespace

SquareClass square_class(const Int& a, const Place& v) {
  if (a == 0) throw InvalidInput("square_class: a must be nonzero");
  SquareClass out;
  if (v.is_real()) {
    out.unit_class = a > 0 ? 1 : -1;
    out.parity = ValParity::even;
    out.is_square = a > 0;
    return out;
  }
  auto [e, u] = split_valuation(a, v.p);
  out.parity = (e % 2 == 0) ? ValParity::even : ValParity::odd;
  if (v.p == 2) {
    out.unit_class = static_cast<int>(mpz_fdiv_ui(u.get_mpz_t(), 8));
    out.is_square = (e % 2 == 0) && out.unit_class == 1;
  } else {
    out.unit_class = legendre(u, v.p);
    out.is_square = (e % 2 == 0) && out.unit_class == 1;
  }
  return out;
}

SquareClass square_class(const Rat& a, const Place& v) {
  if (a == 0) throw InvalidInput("square_class: a must be nonzero");
  // a and num*den differ by den^2, so they share a square class everywhere.
  Int scaled = Int(a.get_num()) * Int(a.get_den());
  return square_class(scaled, v);
}

int hilbert_symbol(const Int& a, const Int& b, const Place& v) {
  if (a == 0 || b == 0) throw InvalidInput("hilbert_symbol: arguments must be nonzero");
  if (v.is_real()) return (a < 0 && b < 0) ? -1 : 1;
  const Int& p = v.p;
  auto [alpha, u] = split_valuation(a, p);
  auto [beta, w] = split_valuation(b, p);
  if (p == 2) {
    int expo = eps2(u) * eps2(w) + alpha * omega2(w) + beta * omega2(u);
    return expo % 2 == 0 ? 1 : -1;
  }
  int expo = alpha * beta * ((mpz_fdiv_ui(p.get_mpz_t(), 4) == 3) ? 1 : 0);
  int s = expo % 2 == 0 ? 1 : -1;
  if (beta % 2 != 0) s *= legendre(u, p);
  if (alpha % 2 != 0) s *= legendre(w, p);
  return s;
}

int hilbert_symbol(const Rat& a, const Rat& b, const Place& v) {
  if (a == 0 || b == 0) throw InvalidInput("hilbert_symbol: arguments must be nonzero");
  Int sa = Int(a.get_num()) * Int(a.get_den());
  Int sb = Int(b.get_num()) * Int(b.get_den());
  return hilbert_symbol(sa, sb, v);
}

int sum_of_local_invariants(const Rat& a, const Int& b) {
  if (a == 0 || b == 0) throw InvalidInput("sum_of_local_invariants: zero argument");
  Int sa = Int(a.get_num()) * Int(a.get_den());
  // relevant places: inf, 2, odd primes dividing either entry
  std::set<Int> primes;
  primes.insert(2);
  for (const auto& [p, e] : factorize(sa).factors) primes.insert(p);
  for (const auto& [p, e] : factorize(b).factors) primes.insert(p);
  int total = 0;
  if (hilbert_symbol(sa, b, Place::infinity()) == -1) total ^= 1;
  for (const Int& p : primes)
    if (hilbert_symbol(sa, b, Place::prime(p)) == -1) total ^= 1;
  return total;
}

}  // namespace markoff
