#pragma once

// Fixed-width modular arithmetic used by the residue-class layer.
// Moduli are prime powers p^k kept below 2^62, so products fit in 128 bits.
// This fast path never sees values derived from unreduced big integers;
// callers reduce with mod_u64 first (see the design note in padic.hpp).

#include <cstdint>
#include <optional>

#include "markoff/common.hpp"

namespace markoff {

inline u64 addmod(u64 a, u64 b, u64 m) {
  u64 s = a + b;
  if (s >= m || s < a) s -= m;
  return s;
}

inline u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + (m - b); }

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>((u128)a * b % m); }

inline u64 powmod(u64 base, u64 exp, u64 m) {
  u64 r = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

// p^k with an overflow guard; the residue layer requires p^k < 2^62.
inline u64 pow_u64_checked(u64 p, int k) {
  u64 r = 1;
  for (int i = 0; i < k; ++i) {
    if (r > (u64(1) << 62) / p) throw BoundExceeded("prime power exceeds 62-bit residue arithmetic range");
    r *= p;
  }
  return r;
}

// Exact p-adic valuation of a nonzero residue.
inline int val_u64(u64 x, u64 p) {
  int v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

inline u64 inv_mod_u64(u64 a, u64 m) {
  // extended Euclid; gcd(a, m) must be 1
  i64 t = 0, newt = 1;
  i64 r = static_cast<i64>(m), newr = static_cast<i64>(a % m);
  while (newr != 0) {
    i64 q = r / newr;
    i64 tmp = t - q * newt;
    t = newt;
    newt = tmp;
    tmp = r - q * newr;
    r = newr;
    newr = tmp;
  }
  if (r != 1) throw InvalidInput("inv_mod_u64: not invertible");
  if (t < 0) t += static_cast<i64>(m);
  return static_cast<u64>(t);
}

// Legendre symbol over F_p for u64 inputs via Euler's criterion (p odd prime).
inline int legendre_u64(u64 a, u64 p) {
  a %= p;
  if (a == 0) return 0;
  u64 e = powmod(a, (p - 1) / 2, p);
  return e == 1 ? 1 : -1;
}

// Tonelli-Shanks square root mod an odd prime. Returns the smaller root.
inline std::optional<u64> sqrt_mod_u64(u64 a, u64 p) {
  a %= p;
  if (a == 0) return u64(0);
  if (legendre_u64(a, p) != 1) return std::nullopt;
  if (p % 4 == 3) {
    u64 r = powmod(a, (p + 1) / 4, p);
    return std::min(r, p - r);
  }
  // write p-1 = q * 2^s with q odd
  u64 q = p - 1;
  int s = 0;
  while ((q & 1) == 0) {
    q >>= 1;
    ++s;
  }
  u64 z = 2;
  while (legendre_u64(z, p) != -1) ++z;
  u64 cc = powmod(z, q, p);
  u64 r = powmod(a, (q + 1) / 2, p);
  u64 t = powmod(a, q, p);
  int m = s;
  while (t != 1) {
    u64 t2 = t;
    int i = 0;
    while (t2 != 1) {
      t2 = mulmod(t2, t2, p);
      ++i;
      if (i == m) return std::nullopt;  // unreachable for valid inputs
    }
    u64 b = cc;
    for (int j = 0; j < m - i - 1; ++j) b = mulmod(b, b, p);
    r = mulmod(r, b, p);
    cc = mulmod(b, b, p);
    t = mulmod(t, cc, p);
    m = i;
  }
  return std::min(r, p - r);
}

}  // namespace markoff
