#pragma once

// Shared integer types, error taxonomy and small numeric helpers.

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace markoff {

using Int = mpz_class;
using Rat = mpq_class;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Enumeration / search work limit hit.
struct BudgetExceeded : Error {
  using Error::Error;
};
// Input outside the configured desk-scale bound (factorization, census).
struct BoundExceeded : Error {
  using Error::Error;
};
// A residue datum does not pin down the square class needed for a symbol.
struct PrecisionInsufficient : Error {
  using Error::Error;
};
struct InvalidInput : Error {
  using Error::Error;
};

// Default node budget for residue enumerations; MARKOFF_BUDGET overrides.
inline long long default_budget() {
  static const long long v = [] {
    if (const char* e = std::getenv("MARKOFF_BUDGET")) {
      long long n = std::atoll(e);
      if (n > 0) return n;
    }
    return 20'000'000LL;
  }();
  return v;
}

struct Budget {
  long long left;
  explicit Budget(long long n = default_budget()) : left(n) {}
  void charge(long long n) {
    left -= n;
    if (left < 0) throw BudgetExceeded("enumeration budget exhausted");
  }
};

inline bool fits_i64(const Int& n) { return n.fits_slong_p(); }

inline i64 to_i64(const Int& n) {
  if (!n.fits_slong_p()) throw BoundExceeded("value exceeds 64-bit range: " + n.get_str());
  return n.get_si();
}

inline Int isqrt(const Int& n) {
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline bool is_perfect_square(const Int& n, Int* root = nullptr) {
  if (n < 0) return false;
  if (mpz_perfect_square_p(n.get_mpz_t()) == 0) return false;
  if (root) *root = isqrt(n);
  return true;
}

// Nonnegative representative of n mod m (m > 0).
inline Int mod_nonneg(const Int& n, const Int& m) {
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), n.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline u64 mod_u64(const Int& n, u64 m) {
  Int r = mod_nonneg(n, Int(static_cast<unsigned long>(m)));
  return static_cast<u64>(r.get_ui());
}

template <class T>
using Point3 = std::array<T, 3>;

}  // namespace markoff
