#include "markoff/brauer.hpp"

#include <algorithm>

#include "markoff/arith64.hpp"

namespace markoff {

// --- parameter classification -----------------------------------------------

std::string MClass::str() const {
  switch (tag) {
    case MTag::Singular: return "singular";
    case MTag::RationalBrauer: return "rational_brauer";
    case MTag::ObviousPoint: return "obvious_point";
    case MTag::TranscendentalException: return "transcendental_exception";
    case MTag::Generic: return "generic";
  }
  return "?";
}

MClass classify_m(const Int& m) {
  if (m == 0 || m == 4) return {MTag::Singular, m};
  Int root;
  if (m > 0 && is_perfect_square(m, &root)) return {MTag::ObviousPoint, root};
  Int D = m - 4;
  if (D > 0 && is_perfect_square(D, &root)) return {MTag::RationalBrauer, root};
  if (D < 0 && is_perfect_square(-D, &root)) {
    // exception exactly when d = 2(n^2 +- 1) for a positive n
    Int d = root;
    if (d % 2 == 0) {
      Int t = d / 2, n;
      if (t - 1 >= 1 && is_perfect_square(t - 1, &n)) return {MTag::TranscendentalException, n};
      if (is_perfect_square(t + 1, &n) && n >= 1) return {MTag::TranscendentalException, n};
    }
  }
  // m(m-4) a square forces m = 0 or 4, already handled
  if (is_perfect_square(m * D)) throw Error("classify_m: m(m-4) square for smooth m " + m.get_str());
  return {MTag::Generic, 0};
}

// --- invariant vectors --------------------------------------------------------

nlohmann::ordered_json inv_vec_json(InvVec v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (int i = 0; i < 3; ++i) a.push_back(inv_entry(v, i) ? "1/2" : "0");
  return a;
}

VecSet vecset_minkowski(VecSet a, VecSet b) {
  VecSet out = 0;
  for (int x = 0; x < 8; ++x) {
    if (!((a >> x) & 1)) continue;
    for (int y = 0; y < 8; ++y)
      if ((b >> y) & 1) out |= VecSet(1) << (x ^ y);
  }
  return out;
}

int LocalImage::count() const {
  int n = 0;
  for (int v = 0; v < 8; ++v) n += (vectors >> v) & 1;
  return n;
}

// --- invariants at exact points ----------------------------------------------

int inv_alpha_minus(const Int& m, const Point3<Rat>& u, int i, const Place& v) {
  Rat a = u[i] - 2;
  if (a == 0) throw InvalidInput("inv_alpha_minus: u_i = 2, symbol degenerates");
  return hilbert_symbol(a, Rat(m - 4), v) == 1 ? 0 : 1;
}

int inv_alpha_plus(const Int& m, const Point3<Rat>& u, int i, const Place& v) {
  Rat a = u[i] + 2;
  if (a == 0) throw InvalidInput("inv_alpha_plus: u_i = -2, symbol degenerates");
  return hilbert_symbol(a, Rat(m - 4), v) == 1 ? 0 : 1;
}

int inv_alpha(const Int& m, const Point3<Rat>& u, const Place& v) {
  int found = -1;
  for (int i = 0; i < 3; ++i) {
    Rat a = u[i] * u[i] - 4;
    if (a == 0) continue;
    int inv = hilbert_symbol(a, Rat(m - 4), v) == 1 ? 0 : 1;
    if (found >= 0 && found != inv)
      throw Error("inv_alpha: representations disagree (point off the surface?)");
    found = inv;
  }
  if (found < 0) throw InvalidInput("inv_alpha: all representations degenerate (u_i^2 = 4 for all i)");
  return found;
}

// --- residue-data invariants ---------------------------------------------------

LocalSquareData local_square_data(const Int& m, const Int& p) {
  LocalSquareData sq;
  sq.p = p;
  Int D = m - 4;
  if (D == 0) throw InvalidInput("local_square_data: m = 4");
  auto cls = square_class(D, Place::prime(p));
  sq.w = valuation(D, p);
  sq.z = D;
  for (int i = 0; i < sq.w; ++i) sq.z /= p;
  sq.square = cls.is_square;
  if (p == 2) {
    sq.z_mod8 = static_cast<int>(mpz_fdiv_ui(sq.z.get_mpz_t(), 8));
  } else {
    sq.leg_z = legendre(sq.z, p);
    sq.eps_p = (mpz_fdiv_ui(p.get_mpz_t(), 4) == 3) ? 1 : 0;
  }
  return sq;
}

int symbol_from_residue(const LocalSquareData& sq, int val, u64 unit_residue) {
  if (sq.p == 2) {
    int u8 = static_cast<int>(unit_residue & 7);
    int eps_u = (u8 == 3 || u8 == 7) ? 1 : 0;
    int om_u = (u8 == 3 || u8 == 5) ? 1 : 0;
    int eps_z = (sq.z_mod8 == 3 || sq.z_mod8 == 7) ? 1 : 0;
    int om_z = (sq.z_mod8 == 3 || sq.z_mod8 == 5) ? 1 : 0;
    int expo = eps_u * eps_z + val * om_z + sq.w * om_u;
    return expo % 2 == 0 ? 1 : -1;
  }
  if (!sq.p.fits_ulong_p()) throw BoundExceeded("place beyond 64-bit fast path");
  u64 p = sq.p.get_ui();
  int s = 1;
  if ((val % 2) && (sq.w % 2) && sq.eps_p) s = -s;
  if (sq.w % 2) s *= legendre_u64(unit_residue % p, p);
  if (val % 2) s *= sq.leg_z;
  return s;
}

int inv_alpha_minus(const Int& m, const ResidueClassPoint& c, int i) {
  LocalSquareData sq = local_square_data(m, Int(static_cast<unsigned long>(c.p)));
  if (sq.square) return 0;  // symbol is +1 for every entry
  u64 M = c.modulus;
  u64 t = submod(c.u[i] % M, 2 % M, M);
  if (t == 0) throw PrecisionInsufficient("u_i - 2 vanishes to the class precision");
  int val = val_u64(t, c.p);
  int need = (c.p == 2) ? 3 : 1;
  if (c.k - val < need) throw PrecisionInsufficient("unit part of u_i - 2 not pinned");
  u64 unit = t;
  for (int e = 0; e < val; ++e) unit /= c.p;
  unit %= (c.p == 2) ? 8 : c.p;
  return symbol_from_residue(sq, val, unit) == 1 ? 0 : 1;
}

// --- image enumeration ----------------------------------------------------------

namespace {

struct EnumOut {
  VecSet vectors = 0;
  std::map<InvVec, ResidueClassPoint> witnesses;
  bool complete = true;
  int levels = 0;
};

EnumOut image_enumerate(const Int& m, u64 p, int depth_cap, Budget& budget, bool want_witnesses) {
  LocalSquareData sq = local_square_data(m, Int(static_cast<unsigned long>(p)));
  const int pin_need = (p == 2) ? 3 : 1;
  EnumOut out;
  auto level = surface_classes_level1(m, p, budget);
  int k = 1;
  while (true) {
    std::vector<std::array<u64, 3>> next;
    u64 M = pow_u64_checked(p, k);
    u64 two = 2 % M;
    for (const auto& u : level) {
      ClassInfo info = inspect_class(m, p, k, u);
      bool pinned = true;
      std::array<int, 3> vals{};
      std::array<u64, 3> units{};
      if (!sq.square) {
        for (int i = 0; i < 3 && pinned; ++i) {
          u64 t = submod(u[i], two, M);
          if (t == 0) {
            pinned = false;
            break;
          }
          int vv = val_u64(t, p);
          if (k - vv < pin_need) {
            pinned = false;
            break;
          }
          vals[i] = vv;
          u64 unit = t;
          for (int e = 0; e < vv; ++e) unit /= p;
          units[i] = unit % ((p == 2) ? 8 : p);
        }
      }
      if (info.certified && (sq.square || pinned)) {
        InvVec vec = 0;
        if (!sq.square) {
          int e1 = symbol_from_residue(sq, vals[0], units[0]) == 1 ? 0 : 1;
          int e2 = symbol_from_residue(sq, vals[1], units[1]) == 1 ? 0 : 1;
          int e3 = symbol_from_residue(sq, vals[2], units[2]) == 1 ? 0 : 1;
          vec = inv_make(e1, e2, e3);
        }
        if (!vecset_has(out.vectors, vec)) {
          out.vectors |= VecSet(1) << vec;
          if (want_witnesses) {
            ResidueClassPoint rc;
            rc.p = p;
            rc.k = k;
            rc.modulus = M;
            rc.u = u;
            rc.status = ResidueClassPoint::Status::certified;
            rc.slack = info.cert_slack;
            out.witnesses.emplace(vec, rc);
          }
        }
        continue;
      }
      children_on_surface(m, p, k, u, next, budget);
    }
    out.levels = k;
    if (next.empty()) {
      out.complete = true;
      break;
    }
    if (k >= depth_cap) {
      out.complete = false;
      break;
    }
    std::sort(next.begin(), next.end());
    level = std::move(next);
    ++k;
  }
  return out;
}

// --- witness sampling for rule-based images (p > 5) -----------------------------

// First smooth F_p point, lexicographic, with u_i != 2 for all i and, where
// target[i] != 0, legendre(u_i - 2) equal to target[i].
std::optional<ResidueClassPoint> find_unit_point(const Int& m, u64 p, std::array<int, 3> target) {
  u64 mm = mod_u64(m, p);
  u64 inv2 = inv_mod_u64(2, p);
  auto leg_ok = [&](u64 x, int want) {
    u64 t = submod(x, 2 % p, p);
    if (t == 0) return false;
    return want == 0 || legendre_u64(t, p) == want;
  };
  for (u64 a = 0; a < p; ++a) {
    if (!leg_ok(a, target[0])) continue;
    for (u64 b = 0; b < p; ++b) {
      if (!leg_ok(b, target[1])) continue;
      u64 ab = mulmod(a, b, p);
      u64 cst = submod(addmod(mulmod(a, a, p), mulmod(b, b, p), p), mm, p);
      u64 disc = submod(mulmod(ab, ab, p), mulmod(4 % p, cst, p), p);
      auto r = sqrt_mod_u64(disc, p);
      if (!r) continue;
      for (u64 root : {mulmod(addmod(ab, *r, p), inv2, p), mulmod(submod(ab, *r, p), inv2, p)}) {
        if (!leg_ok(root, target[2])) continue;
        std::array<u64, 3> u{a, b, root};
        ClassInfo info = inspect_class(m, p, 1, u);
        if (!info.on_surface || !info.certified || info.cert_slack != 0) continue;
        ResidueClassPoint rc;
        rc.p = p;
        rc.k = 1;
        rc.modulus = p;
        rc.u = u;
        rc.status = ResidueClassPoint::Status::certified;
        rc.slack = 0;
        return rc;
      }
    }
  }
  return std::nullopt;
}

// Deep witnesses for even valuation w >= 2 at odd p: classes mod p^{w+1}
// built from the two standard local solutions, then re-verified through the
// generic certification machinery.
//  kind A: v_p(u_i - 2) = (1, w-1, 1)       -> invariant vector (1/2,1/2,1/2)
//  kind B: v_p(u_1 - 2) = 1, others units    -> invariant vector (1/2,0,0)
std::optional<ResidueClassPoint> construct_even_val_witness(const Int& m, u64 p, char kind) {
  LocalSquareData sq = local_square_data(m, Int(static_cast<unsigned long>(p)));
  int w = sq.w;
  if (w < 2 || w % 2 != 0 || sq.square) return std::nullopt;
  u64 M;
  try {
    M = pow_u64_checked(p, w + 1);
  } catch (const BoundExceeded&) {
    return std::nullopt;
  }
  u64 z = mod_u64(sq.z, M);
  u64 inv4 = inv_mod_u64(4 % M, M);
  u64 inv2 = inv_mod_u64(2 % M, M);
  u64 pw1 = M / p / p;  // p^{w-1}
  std::array<u64, 3> u;
  if (kind == 'A') {
    u64 v2 = mulmod(submod(0, z, M), inv4, M) % p;  // -z/4 mod p
    u[0] = (2 + p) % M;
    u[1] = addmod(2 % M, mulmod(pw1 % M, v2, M), M);
    u[2] = mulmod(mulmod(u[0], u[1], M), inv2, M);
  } else {
    u64 v2 = mulmod(z, inv4, M) % p;  // z/4 mod p
    u[0] = (2 + p) % M;
    u[1] = addmod(submod(0, 2 % M, M), mulmod(pw1 % M, v2, M), M);
    u[2] = mulmod(mulmod(u[0], u[1], M), inv2, M);
  }
  ClassInfo info = inspect_class(m, p, w + 1, u);
  if (!info.on_surface || !info.certified) return std::nullopt;
  ResidueClassPoint rc;
  rc.p = p;
  rc.k = w + 1;
  rc.modulus = M;
  rc.u = u;
  rc.status = ResidueClassPoint::Status::certified;
  rc.slack = info.cert_slack;
  return rc;
}

ResidueClassPoint permute_class(const ResidueClassPoint& c, const std::array<int, 3>& perm) {
  ResidueClassPoint out = c;
  for (int i = 0; i < 3; ++i) out.u[i] = c.u[perm[i]];
  return out;
}

InvVec class_vector(const Int& m, const ResidueClassPoint& c) {
  int e1 = inv_alpha_minus(m, c, 0);
  int e2 = inv_alpha_minus(m, c, 1);
  int e3 = inv_alpha_minus(m, c, 2);
  return inv_make(e1, e2, e3);
}

void add_witness(LocalImage& img, const Int& m, const ResidueClassPoint& rc, InvVec expect) {
  InvVec got = class_vector(m, rc);
  if (got != expect) throw Error("witness sampling produced the wrong invariant vector");
  ImageWitness w;
  w.kind = ImageWitness::Kind::residue_class;
  w.rc = rc;
  img.witnesses.emplace(expect, w);
}

void sample_rule_witnesses(LocalImage& img, const Int& m, u64 p, const LocalSquareData& sq) {
  if (sq.square || sq.w == 0) {
    // all symbols are +1; any smooth point away from u_i = 2 certifies (0,0,0)
    if (auto rc = find_unit_point(m, p, {0, 0, 0})) {
      if (sq.square) {
        ImageWitness w;
        w.kind = ImageWitness::Kind::residue_class;
        w.rc = *rc;
        img.witnesses.emplace(0, w);
      } else {
        add_witness(img, m, *rc, 0);
      }
    }
    return;
  }
  if (sq.w % 2 == 1) {
    for (int e1 = 0; e1 < 2; ++e1)
      for (int e2 = 0; e2 < 2; ++e2)
        for (int e3 = 0; e3 < 2; ++e3) {
          std::array<int, 3> t{1 - 2 * e1, 1 - 2 * e2, 1 - 2 * e3};
          if (auto rc = find_unit_point(m, p, t)) add_witness(img, m, *rc, inv_make(e1, e2, e3));
        }
    return;
  }
  // even valuation, non-square unit
  if (auto rc = find_unit_point(m, p, {0, 0, 0})) add_witness(img, m, *rc, 0);
  if (auto a = construct_even_val_witness(m, p, 'A')) add_witness(img, m, *a, inv_make(1, 1, 1));
  if (auto b = construct_even_val_witness(m, p, 'B')) {
    add_witness(img, m, *b, inv_make(1, 0, 0));
    add_witness(img, m, permute_class(*b, {2, 0, 1}), inv_make(0, 1, 0));
    add_witness(img, m, permute_class(*b, {1, 2, 0}), inv_make(0, 0, 1));
  }
}

// --- the real place ---------------------------------------------------------------

// Exact arithmetic in Q[sqrt(disc)] for slice witnesses.
struct Quad {
  Rat x, y;  // x + y*sqrt(d)
};
Quad qmul(const Quad& a, const Quad& b, const Int& d) {
  return {a.x * b.x + a.y * b.y * Rat(d), a.x * b.y + a.y * b.x};
}
Quad qadd(const Quad& a, const Quad& b) { return {a.x + b.x, a.y + b.y}; }
Quad qsub(const Quad& a, const Quad& b) { return {a.x - b.x, a.y - b.y}; }

// sign of x + y*sqrt(d), d >= 0
int qsign(const Quad& a, const Int& d) {
  if (a.y == 0) return sgn(a.x);
  if (a.x == 0) return sgn(a.y);
  int sx = sgn(a.x), sy = sgn(a.y);
  if (sx == sy) return sx;
  // compare |x| vs |y|sqrt(d): sign decided by x^2 - y^2 d with the sign of x
  Rat t = a.x * a.x - a.y * a.y * Rat(d);
  if (t == 0) return 0;
  return sgn(t) == 1 ? sx : sy;
}

bool real_witness_on_surface(const Int& m, const ImageWitness& w) {
  Quad u[3];
  for (int i = 0; i < 3; ++i) u[i] = {w.q[i], w.c[i]};
  Quad f = {Rat(0), Rat(0)};
  for (int i = 0; i < 3; ++i) f = qadd(f, qmul(u[i], u[i], w.disc));
  Quad prod = qmul(qmul(u[0], u[1], w.disc), u[2], w.disc);
  f = qsub(f, prod);
  return f.x == Rat(m) && f.y == 0;
}

InvVec real_witness_vector(const Int& m, const ImageWitness& w) {
  if (m > 4) return 0;  // m-4 is a real square, all symbols trivial
  int e[3];
  for (int i = 0; i < 3; ++i) {
    Quad t{w.q[i] - 2, w.c[i]};
    int s = qsign(t, w.disc);
    if (s == 0) throw Error("real witness touches u_i = 2");
    e[i] = s < 0 ? 1 : 0;
  }
  return inv_make(e[0], e[1], e[2]);
}

ImageWitness real_slice_witness(const Int& m, int flip_a, int flip_b) {
  // coordinates (s1*3, s2*b0, s3*(3 b0 + sqrt(disc))/2) with two sign flips;
  // disc = 5 b0^2 - 36 + 4m >= 0 picks the smallest admissible b0 >= 3
  Int b0 = 3;
  while (5 * b0 * b0 - 36 + 4 * m < 0) ++b0;
  Int disc = 5 * b0 * b0 - 36 + 4 * m;
  int s1 = flip_a ? -1 : 1;
  int s2 = flip_b ? -1 : 1;
  int s3 = s1 * s2;  // flipping exactly two coordinates preserves the surface
  ImageWitness w;
  w.kind = ImageWitness::Kind::real_point;
  w.disc = disc;
  w.q = {Rat(3 * s1), Rat(b0 * s2), Rat(3 * b0 * s3) / 2};
  w.c = {Rat(0), Rat(0), Rat(s3) / 2};
  return w;
}

LocalImage real_image(const Int& m, bool want_witnesses) {
  LocalImage img;
  img.place = Place::infinity();
  img.m = m;
  if (m > 4) {
    img.vectors = VecSet(1) << 0;
    img.completeness = Completeness::from_paper_rule;
    img.rule = "real square class (m > 4)";
    if (want_witnesses) {
      ImageWitness w;
      w.kind = ImageWitness::Kind::real_point;
      w.disc = 4 * m;
      w.q = {Rat(0), Rat(0), Rat(0)};
      w.c = {Rat(0), Rat(0), Rat(1) / 2};
      img.witnesses.emplace(0, w);
    }
    return img;
  }
  // m < 4: every real point has all |u_i| > 2 (even number negative) or all
  // |u_i| < 2; the compact branch exists only for 0 < m < 4.
  img.vectors = (VecSet(1) << 0) | (VecSet(1) << inv_make(0, 1, 1)) | (VecSet(1) << inv_make(1, 0, 1)) |
                (VecSet(1) << inv_make(1, 1, 0));
  bool compact_branch = (m > 0);
  if (compact_branch) img.vectors |= VecSet(1) << inv_make(1, 1, 1);
  if (m < -8) {
    img.completeness = Completeness::from_paper_rule;
    img.rule = "real components (m < -8)";
  } else {
    img.completeness = Completeness::proven_by_enumeration;
    img.flags.push_back("beyond_paper");
  }
  if (want_witnesses) {
    struct Case {
      InvVec vec;
      int fa, fb;
    } cases[] = {{0, 0, 0},
                 {inv_make(0, 1, 1), 0, 1},
                 {inv_make(1, 0, 1), 1, 0},
                 {inv_make(1, 1, 0), 1, 1}};
    for (const auto& cse : cases) {
      ImageWitness w = real_slice_witness(m, cse.fa, cse.fb);
      if (!real_witness_on_surface(m, w) || real_witness_vector(m, w) != cse.vec)
        throw Error("real slice witness failed verification");
      img.witnesses.emplace(cse.vec, w);
    }
    if (compact_branch) {
      ImageWitness w;
      w.kind = ImageWitness::Kind::real_point;
      w.disc = 4 * m;
      w.q = {Rat(0), Rat(0), Rat(0)};
      w.c = {Rat(0), Rat(0), Rat(1) / 2};
      if (!real_witness_on_surface(m, w) || real_witness_vector(m, w) != inv_make(1, 1, 1))
        throw Error("real compact witness failed verification");
      img.witnesses.emplace(inv_make(1, 1, 1), w);
    }
  }
  return img;
}

// --- paper rules -------------------------------------------------------------------

constexpr VecSet kSetTrivial = VecSet(1) << 0;
constexpr VecSet kSetAll = 0xFF;
constexpr VecSet kSetNonzero = 0xFE;
// multisets {0,0,1/2}: vectors 001, 010, 100
const VecSet kSetOneHalf = (VecSet(1) << 1) | (VecSet(1) << 2) | (VecSet(1) << 4);
// multisets {0,1/2,1/2}: vectors 011, 101, 110
const VecSet kSetTwoHalves = (VecSet(1) << 3) | (VecSet(1) << 5) | (VecSet(1) << 6);
// even-valuation multisets: {0,0,0}, {0,0,1/2}, {1/2,1/2,1/2}
const VecSet kSetEvenVal = kSetTrivial | kSetOneHalf | (VecSet(1) << 7);
const VecSet kSetRealNeg = kSetTrivial | kSetTwoHalves;

struct Rule {
  VecSet set = 0;
  bool exact = true;      // exact set, else "contains `required`"
  InvVec required = 0;
  std::string name;
};

bool insoluble_at(const Int& m, const Int& p) {
  if (p == 2) return mpz_fdiv_ui(m.get_mpz_t(), 4) == 3;
  if (p == 3) {
    unsigned long r = mpz_fdiv_ui(m.get_mpz_t(), 9);
    return r == 3 || r == 6;
  }
  return false;
}

std::optional<Rule> applicable_rule(const Int& m, const Place& v) {
  if (v.is_real()) {
    if (m > 4) return Rule{kSetTrivial, true, 0, "trivial invariants at the real place (m > 4)"};
    if (m < -8) return Rule{kSetRealNeg, true, 0, "real components (m < -8)"};
    return std::nullopt;
  }
  const Int& p = v.p;
  Int D = m - 4;
  if (insoluble_at(m, p))
    return Rule{0, true, 0, p == 2 ? "no 2-adic points (m = 3 mod 4)" : "no 3-adic points (m = +-3 mod 9)"};
  auto sq = square_class(D, v);
  if (sq.is_square) return Rule{kSetTrivial, true, 0, "trivial invariants (m-4 a local square)"};
  if (p != 2 && !mpz_divisible_p(D.get_mpz_t(), p.get_mpz_t()))
    return Rule{kSetTrivial, true, 0, "trivial invariants (p does not divide 2(m-4))"};
  int w = valuation(D, p);
  if (p == 2) {
    if (mpz_fdiv_ui(m.get_mpz_t(), 8) == 1)
      return Rule{kSetTwoHalves, true, 0, "two-adic multisets (m = 1 mod 8)"};
    return Rule{0, false, w % 2 == 0 ? InvVec(0) : inv_make(0, 0, 1), "two-adic existence"};
  }
  if (p == 3) {
    if (w == 1) return Rule{kSetOneHalf, true, 0, "three-adic multisets (v_3(m-4) = 1)"};
    return std::nullopt;
  }
  if (p == 5) {
    if (w == 1) return Rule{kSetNonzero, true, 0, "five-adic image (v_5(m-4) = 1)"};
    return std::nullopt;
  }
  if (w % 2 == 1) return Rule{kSetAll, true, 0, "surjectivity (p > 5, odd valuation)"};
  return Rule{kSetEvenVal, true, 0, "even-valuation multisets (p > 5)"};
}

}  // namespace

// --- public image computation ---------------------------------------------------

LocalImage local_invariant_image(const Int& m, const Place& v, const ImageOptions& opts) {
  MClass cls = classify_m(m);
  if (cls.tag != MTag::Generic)
    throw InvalidInput("local_invariant_image: requires the generic Brauer group, m is " + cls.str());
  if (v.is_real()) return real_image(m, opts.want_witnesses);

  const Int& p = v.p;
  LocalImage img;
  img.place = v;
  img.m = m;

  if (insoluble_at(m, p)) {
    img.vectors = 0;
    img.completeness = Completeness::from_paper_rule;
    img.rule = applicable_rule(m, v)->name;
    return img;
  }

  auto rule = applicable_rule(m, v);
  bool enumerate;
  if (opts.force_enumeration) {
    enumerate = true;
  } else if (opts.prefer_rules) {
    enumerate = !(rule && rule->exact);
  } else {
    enumerate = (p <= 5);
  }

  if (!enumerate) {
    if (!rule || !rule->exact) throw Error("no exact rule available for this place");
    img.vectors = rule->set;
    img.completeness = Completeness::from_paper_rule;
    img.rule = rule->name;
    if (opts.want_witnesses && p.fits_ulong_p()) {
      LocalSquareData sq = local_square_data(m, p);
      sample_rule_witnesses(img, m, p.get_ui(), sq);
    } else if (!opts.want_witnesses) {
      img.flags.push_back("witnesses_elided_fast_path");
    }
    return img;
  }

  if (!p.fits_ulong_p()) throw BoundExceeded("enumeration beyond 64-bit places");
  u64 pp = p.get_ui();
  Int D = m - 4;
  int w = mpz_divisible_p(D.get_mpz_t(), p.get_mpz_t()) ? valuation(D, p) : 0;
  int cap = opts.depth_cap > 0 ? opts.depth_cap : w + 6;
  if (cap < 4) cap = 4;
  Budget budget(opts.budget > 0 ? opts.budget : default_budget());
  EnumOut e = image_enumerate(m, pp, cap, budget, opts.want_witnesses);
  img.vectors = e.vectors;
  img.completeness = e.complete ? Completeness::proven_by_enumeration : Completeness::depth_capped_partial;
  for (auto& [vec, rc] : e.witnesses) {
    ImageWitness wt;
    wt.kind = ImageWitness::Kind::residue_class;
    wt.rc = rc;
    img.witnesses.emplace(vec, wt);
  }
  if (!rule || !rule->exact) img.flags.push_back("beyond_paper");
  if (!e.complete) img.flags.push_back("depth_cap_exceeded");
  return img;
}

VerifyResult verify_image_against_rules(const Int& m, const Place& v, const ImageOptions& opts) {
  ImageOptions forced = opts;
  forced.force_enumeration = true;
  LocalImage enumerated = (v.is_real()) ? real_image(m, opts.want_witnesses)
                                        : local_invariant_image(m, v, forced);
  auto rule = applicable_rule(m, v);
  if (!rule) return {PaperCheck::no_rule, "", "enumeration-only: no statement covers this place"};
  if (!v.is_real() && enumerated.completeness == Completeness::depth_capped_partial)
    return {PaperCheck::mismatch, rule->name, "enumeration hit the depth cap"};
  if (rule->exact) {
    if (enumerated.vectors == rule->set) return {PaperCheck::consistent, rule->name, ""};
    char buf[64];
    std::snprintf(buf, sizeof buf, "expected mask 0x%02x, enumerated 0x%02x", rule->set,
                  enumerated.vectors);
    return {PaperCheck::mismatch, rule->name, buf};
  }
  if (enumerated.has(rule->required)) return {PaperCheck::consistent, rule->name, ""};
  return {PaperCheck::mismatch, rule->name, "required vector not realized"};
}

nlohmann::ordered_json LocalImage::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "local-image/1";
  j["m"] = m.get_str();
  j["place"] = place.str();
  nlohmann::ordered_json vecs = nlohmann::ordered_json::array();
  for (int v = 0; v < 8; ++v)
    if (vecset_has(vectors, static_cast<InvVec>(v))) vecs.push_back(inv_vec_json(static_cast<InvVec>(v)));
  j["vectors"] = vecs;
  switch (completeness) {
    case Completeness::proven_by_enumeration: j["completeness"] = "proven_by_enumeration"; break;
    case Completeness::from_paper_rule: j["completeness"] = "from_paper_rule"; break;
    case Completeness::depth_capped_partial: j["completeness"] = "depth_capped_partial"; break;
  }
  if (!rule.empty()) j["rule"] = rule;
  j["flags"] = flags;
  nlohmann::ordered_json wits = nlohmann::ordered_json::object();
  for (const auto& [vec, w] : witnesses) {
    std::string key;
    for (int i = 0; i < 3; ++i) {
      key += inv_entry(vec, i) ? "1/2" : "0";
      if (i < 2) key += ",";
    }
    nlohmann::ordered_json cur;
    if (w.kind == ImageWitness::Kind::residue_class) {
      cur["type"] = "residue_class";
      cur["p"] = w.rc.p;
      cur["k"] = w.rc.k;
      cur["residues"] = {w.rc.u[0], w.rc.u[1], w.rc.u[2]};
      cur["hensel_slack"] = w.rc.slack;
    } else if (w.kind == ImageWitness::Kind::real_point) {
      cur["type"] = "real_point";
      cur["disc"] = w.disc.get_str();
      nlohmann::ordered_json coords = nlohmann::ordered_json::array();
      for (int i = 0; i < 3; ++i) {
        nlohmann::ordered_json cj;
        cj["q"] = w.q[i].get_str();
        cj["c"] = w.c[i].get_str();
        coords.push_back(cj);
      }
      cur["coords"] = coords;
    } else {
      cur["type"] = "by_rule";
    }
    wits[key] = cur;
  }
  j["witnesses"] = wits;
  return j;
}

}  // namespace markoff
