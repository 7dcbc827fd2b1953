#pragma once

// Integer factorization at desk scale: trial division through a prime sieve,
// then Brent's variant of Pollard rho with Miller-Rabin primality testing.
// Primality is deterministic below 2^64 (fixed witness set); above that it is
// probabilistic with >= 64 rounds and the result carries a flag.

#include <cstdint>
#include <utility>
#include <vector>

#include "markoff/common.hpp"

namespace markoff {

struct FactorConfig {
  Int bound = (Int(1) << 63);          // desk-scale limit, soft (see rho_iter_cap)
  long long rho_iter_cap = 80'000'000; // per-factor cap once |n| exceeds bound
};

struct Factorization {
  int sign = 1;                                // +1 or -1
  std::vector<std::pair<Int, int>> factors;    // (prime, exponent), primes increasing
  bool primality_certified = true;             // false if any factor relied on probabilistic MR

  Int value() const {
    Int v = sign;
    for (const auto& [p, e] : factors)
      for (int i = 0; i < e; ++i) v *= p;
    return v;
  }
  int exponent_of(const Int& p) const {
    for (const auto& [q, e] : factors)
      if (q == p) return e;
    return 0;
  }
};

// Primes below 10^6, built once.
const std::vector<u64>& small_primes();

// Deterministic for n < 2^64.
bool is_prime_u64(u64 n);

// Deterministic below 2^64; probabilistic (64 rounds) above, in which case
// *certified is set to false when provided.
bool is_prime(const Int& n, bool* certified = nullptr);

Factorization factorize(const Int& n, const FactorConfig& cfg = {});

// Unique squarefree d with n/d a positive square; sign preserved.
Int squarefree_kernel(const Int& n, const FactorConfig& cfg = {});

}  // namespace markoff
