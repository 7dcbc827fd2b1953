#include "markoff/factor.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "markoff/arith64.hpp"

namespace markoff {

namespace {

constexpr u64 kSieveBound = 1'000'000;

std::vector<u64> build_sieve() {
  std::vector<bool> composite(kSieveBound + 1, false);
  std::vector<u64> primes;
  for (u64 i = 2; i <= kSieveBound; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (u64 j = i * i; j <= kSieveBound; j += i) composite[j] = true;
  }
  return primes;
}

}  // namespace

const std::vector<u64>& small_primes() {
  static const std::vector<u64> primes = build_sieve();
  return primes;
}

bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  if (n < 41 * 41) return true;
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // witness set deterministic for the full 64-bit range
  for (u64 a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
    u64 x = powmod(a % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

bool is_prime(const Int& n, bool* certified) {
  if (certified) *certified = true;
  if (n < 2) return false;
  if (n.fits_ulong_p()) return is_prime_u64(n.get_ui());
  // 64 Miller-Rabin rounds above 2^64; flagged probabilistic
  if (certified) *certified = false;
  return mpz_probab_prime_p(n.get_mpz_t(), 64) != 0;
}

namespace {

u64 pollard_rho_u64(u64 n, u64 seed) {
  // Brent's cycle detection with batched gcds.
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull}) {
    if (n % p == 0) return p;
  }
  std::mt19937_64 gen(seed ^ n);
  while (true) {
    u64 c = gen() % (n - 2) + 1;
    u64 y = gen() % n;
    u64 m = 128, g = 1, r = 1, q = 1, x = 0, ys = 0;
    auto f = [&](u64 v) { return addmod(mulmod(v, v, n), c, n); };
    while (g == 1) {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      u64 k = 0;
      while (k < r && g == 1) {
        ys = y;
        for (u64 i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mulmod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      }
      r <<= 1;
    }
    if (g == n) {
      g = 1;
      while (g == 1) {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      }
    }
    if (g != n) return g;
  }
}

Int pollard_rho_mpz(const Int& n, long long iter_cap) {
  gmp_randclass rng(gmp_randinit_default);
  rng.seed(0xC0FFEEul);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Int c = rng.get_z_range(n - 2) + 1;
    Int y = rng.get_z_range(n);
    Int x = y, d = 1;
    long long it = 0;
    while (d == 1) {
      if (++it > iter_cap) throw BoundExceeded("rho iteration cap hit on " + n.get_str());
      x = (x * x + c) % n;
      y = (y * y + c) % n;
      y = (y * y + c) % n;
      Int diff = abs(x - y);
      if (diff == 0) break;
      mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
    }
    if (d != 1 && d != n && d != 0) return d;
  }
  throw BoundExceeded("rho failed to split " + n.get_str());
}

void factor_into(const Int& n, std::map<Int, int>& out, bool& certified, const FactorConfig& cfg) {
  if (n == 1) return;
  bool cert = true;
  if (is_prime(n, &cert)) {
    certified = certified && cert;
    out[n] += 1;
    return;
  }
  Int d;
  if (n.fits_ulong_p()) {
    d = Int(static_cast<unsigned long>(pollard_rho_u64(n.get_ui(), 1)));
  } else {
    if (n > cfg.bound * cfg.bound)  // far beyond desk scale, refuse early
      throw BoundExceeded("factorization input beyond configured bound: " + n.get_str());
    d = pollard_rho_mpz(n, cfg.rho_iter_cap);
  }
  factor_into(d, out, certified, cfg);
  factor_into(n / d, out, certified, cfg);
}

}  // namespace

Factorization factorize(const Int& n, const FactorConfig& cfg) {
  if (n == 0) throw InvalidInput("factorize: n must be nonzero");
  Factorization result;
  result.sign = n < 0 ? -1 : 1;
  Int rest = abs(n);
  std::map<Int, int> acc;
  for (u64 p : small_primes()) {
    if (rest == 1) break;
    if (Int(static_cast<unsigned long>(p)) * static_cast<unsigned long>(p) > rest) break;
    while (mpz_divisible_ui_p(rest.get_mpz_t(), static_cast<unsigned long>(p))) {
      rest /= static_cast<unsigned long>(p);
      acc[Int(static_cast<unsigned long>(p))] += 1;
    }
  }
  if (rest > 1) factor_into(rest, acc, result.primality_certified, cfg);
  for (auto& [p, e] : acc) result.factors.emplace_back(p, e);
  return result;
}

Int squarefree_kernel(const Int& n, const FactorConfig& cfg) {
  Factorization f = factorize(n, cfg);
  Int k = f.sign;
  for (const auto& [p, e] : f.factors)
    if (e % 2 == 1) k *= p;
  return k;
}

}  // namespace markoff
