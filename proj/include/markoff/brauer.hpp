#pragma once

// Brauer classes of the Markoff surface: the quaternion symbols
// alpha_{i,-} = (u_i - 2, m-4), alpha_{i,+} = (u_i + 2, m-4) and
// alpha = (u_i^2 - 4, m-4), their local invariants, classification of the
// parameter m, and certified computation of the local invariant image at
// each place.
//
// Invariants live in (1/2)Z/Z and are stored in half-units: 0 means 0,
// 1 means 1/2.

#include <map>
#include <string>

#include "json.hpp"
#include "markoff/padic.hpp"
#include "markoff/surface.hpp"

namespace markoff {

enum class MTag { Singular, RationalBrauer, ObviousPoint, TranscendentalException, Generic };

struct MClass {
  MTag tag;
  Int detail = 0;  // sqrt(m), sqrt(m-4), or the n with d = 2(n^2 +- 1)
  std::string str() const;
};

MClass classify_m(const Int& m);

// Invariant vector for (alpha_{1,-}, alpha_{2,-}, alpha_{3,-}) at one place.
// bit 2 = entry 1, bit 1 = entry 2, bit 0 = entry 3.
using InvVec = std::uint8_t;
inline int inv_entry(InvVec v, int i) { return (v >> (2 - i)) & 1; }
inline InvVec inv_make(int e1, int e2, int e3) {
  return static_cast<InvVec>((e1 << 2) | (e2 << 1) | e3);
}
nlohmann::ordered_json inv_vec_json(InvVec v);

// Sets of invariant vectors as 8-bit masks: bit v set <=> vector v realized.
using VecSet = std::uint8_t;
inline bool vecset_has(VecSet s, InvVec v) { return (s >> v) & 1; }
VecSet vecset_minkowski(VecSet a, VecSet b);

// --- invariants at exact points ---------------------------------------------

int inv_alpha_minus(const Int& m, const Point3<Rat>& u, int i, const Place& v);
int inv_alpha_plus(const Int& m, const Point3<Rat>& u, int i, const Place& v);
// Any non-degenerate representation (u_i^2-4, m-4); all available ones must
// agree. Throws InvalidInput when every representation degenerates.
int inv_alpha(const Int& m, const Point3<Rat>& u, const Place& v);

// --- invariants from residue data -------------------------------------------

// Square-class data of m-4 at one finite place, precomputed once.
struct LocalSquareData {
  Int p;
  int w = 0;        // v_p(m-4)
  Int z;            // unit part (m-4)/p^w
  bool square = false;
  int leg_z = 0;    // odd p
  int z_mod8 = 0;   // p = 2
  int eps_p = 0;    // (p-1)/2 mod 2, odd p
};
LocalSquareData local_square_data(const Int& m, const Int& p);

// Hilbert symbol (x, m-4)_p for x = p^val * unit, from pinned residue data.
// For odd p `unit_residue` is the unit mod p; for p = 2 it is the unit mod 8.
int symbol_from_residue(const LocalSquareData& sq, int val, u64 unit_residue);

// Invariant of alpha_{i,-} on a residue class; requires the square class of
// u_i - 2 to be pinned by the class precision, else PrecisionInsufficient.
int inv_alpha_minus(const Int& m, const ResidueClassPoint& c, int i);

// --- local invariant images --------------------------------------------------

enum class Completeness { proven_by_enumeration, from_paper_rule, depth_capped_partial };

struct ImageWitness {
  enum class Kind { residue_class, real_point, by_rule } kind = Kind::by_rule;
  ResidueClassPoint rc;  // kind == residue_class
  // kind == real_point: coordinates q_i + c_i*sqrt(disc)
  Int disc = 0;
  std::array<Rat, 3> q{};
  std::array<Rat, 3> c{};
};

struct LocalImage {
  Place place;
  Int m;
  VecSet vectors = 0;
  Completeness completeness = Completeness::proven_by_enumeration;
  std::string rule;  // which statement decided it, when rule-based
  std::vector<std::string> flags;
  std::map<InvVec, ImageWitness> witnesses;

  bool has(InvVec v) const { return vecset_has(vectors, v); }
  int count() const;
  nlohmann::ordered_json to_json() const;
};

struct ImageOptions {
  int depth_cap = -1;            // -1: v_p(m-4) + 6
  bool force_enumeration = false;
  bool want_witnesses = true;
  bool prefer_rules = false;     // census fast path
  long long budget = -1;         // -1: default_budget()
};

LocalImage local_invariant_image(const Int& m, const Place& v, const ImageOptions& opts = {});

enum class PaperCheck { consistent, mismatch, no_rule };
struct VerifyResult {
  PaperCheck verdict;
  std::string rule;
  std::string detail;
};
// Enumerates the image independently and compares it against the statement
// whose hypotheses hold at (m, v), when there is one.
VerifyResult verify_image_against_rules(const Int& m, const Place& v, const ImageOptions& opts = {});

}  // namespace markoff
