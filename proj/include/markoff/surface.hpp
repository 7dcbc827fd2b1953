#pragma once

// The Markoff surface u1^2 + u2^2 + u3^2 - u1*u2*u3 = m as a computational
// object: equation forms, Vieta moves, residue classes mod p^k with Hensel
// certification, and enumeration of local points.

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "markoff/common.hpp"
#include "markoff/factor.hpp"

namespace markoff {

template <class T>
T evaluate_markoff(const Point3<T>& u) {
  return u[0] * u[0] + u[1] * u[1] + u[2] * u[2] - u[0] * u[1] * u[2];
}

// (2*u_i - u_j*u_k)^2 - 4(m-4) = (u_j^2-4)(u_k^2-4) on the surface.
// Fails identically off the surface, which makes it a cheap cross-check.
template <class T>
bool product_form_identity(const Point3<T>& u, const T& m, int i) {
  int j = (i + 1) % 3, k = (i + 2) % 3;
  T lhs = (T(2) * u[i] - u[j] * u[k]) * (T(2) * u[i] - u[j] * u[k]) - T(4) * (m - T(4));
  T rhs = (u[j] * u[j] - T(4)) * (u[k] * u[k] - T(4));
  return lhs == rhs;
}

// Vieta involution in coordinate i: the two roots of the surface equation as
// a quadratic in u_i sum to u_j*u_k.
template <class T>
Point3<T> vieta_move(Point3<T> u, int i) {
  int j = (i + 1) % 3, k = (i + 2) % 3;
  u[i] = u[j] * u[k] - u[i];
  return u;
}

struct MarkoffParam {
  Int m;
  std::optional<Factorization> d_factorization;  // of m - 4; absent only for m = 4
  bool is_smooth;

  explicit MarkoffParam(Int m_) : m(std::move(m_)) {
    is_smooth = (m != 0 && m != 4);
    if (m != 4) d_factorization = factorize(m - 4);
  }
  Int d() const { return m - 4; }
};

// --- residue classes -------------------------------------------------------

struct ResidueClassPoint {
  u64 p = 0;
  int k = 0;
  u64 modulus = 0;  // p^k
  std::array<u64, 3> u{0, 0, 0};

  enum class Status { certified, dead, undetermined };
  Status status = Status::undetermined;
  int slack = -1;  // valuation of the best partial derivative when certified
};

struct ClassInfo {
  bool on_surface = false;
  int cert_slack = -1;  // min exact partial valuation; -1 if all partials vanish mod p^k
  bool certified = false;
  std::array<int, 3> val_u_minus2{-1, -1, -1};  // exact valuation of u_i - 2, or -1 (>= k)
};

ClassInfo inspect_class(const Int& m, u64 p, int k, const std::array<u64, 3>& u);

// All classes mod p on the surface, lexicographically sorted.
std::vector<std::array<u64, 3>> surface_classes_level1(const Int& m, u64 p, Budget& budget);

// Children mod p^{k+1} of a class mod p^k that satisfy the congruence.
void children_on_surface(const Int& m, u64 p, int k, const std::array<u64, 3>& u,
                         std::vector<std::array<u64, 3>>& out, Budget& budget);

// All residue triples mod p^k on the surface, each annotated. The status is
// certified (with slack), dead (no child mod p^{k+1} satisfies the
// congruence), or undetermined.
std::vector<ResidueClassPoint> enumerate_points_mod(const Int& m, u64 p, int k, Budget& budget);

// Children of an undetermined class, filtered and re-annotated.
std::vector<ResidueClassPoint> hensel_refine(const Int& m, const ResidueClassPoint& c, int target_k,
                                             Budget& budget);

// The four singular points of the reduction mod an odd prime p | (m-4),
// in the fixed order (2,2,2), (-2,-2,2), (2,-2,-2), (-2,2,-2).
std::array<std::array<u64, 3>, 4> singular_points_mod(const Int& m, u64 p);

// Newton refinement of a certified class to precision p^target_k. The
// coordinates other than the certified one keep their canonical lift plus
// the supplied offsets (offsets are multiples of the class modulus in
// disguise: they are added times p^k).
struct LiftedPoint {
  Int modulus;             // p^target_k
  Point3<Int> u;           // residues mod modulus, f(u) = m mod modulus
  int newton_coordinate;   // which coordinate Newton adjusted
};
LiftedPoint lift_point(const Int& m, const ResidueClassPoint& c, int target_k,
                       const Point3<Int>& free_offsets = {0, 0, 0});

// Random certified local points at odd p (or p = 2), to precision p^K.
// Used by the relation test-suites; sampling is deterministic in the seed.
std::vector<LiftedPoint> sample_zp_points(const Int& m, u64 p, int count, int K, u64 seed);

}  // namespace markoff
