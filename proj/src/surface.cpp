#include "markoff/surface.hpp"

#include <algorithm>

#include "markoff/arith64.hpp"

namespace markoff {

namespace {

u64 f_mod(const std::array<u64, 3>& u, u64 M) {
  u64 s = addmod(addmod(mulmod(u[0], u[0], M), mulmod(u[1], u[1], M), M), mulmod(u[2], u[2], M), M);
  u64 prod = mulmod(mulmod(u[0], u[1], M), u[2], M);
  return submod(s, prod, M);
}

std::array<u64, 3> partials_mod(const std::array<u64, 3>& u, u64 M) {
  // d/du_i = 2*u_i - u_j*u_k
  std::array<u64, 3> d;
  d[0] = submod(addmod(u[0], u[0], M), mulmod(u[1], u[2], M), M);
  d[1] = submod(addmod(u[1], u[1], M), mulmod(u[0], u[2], M), M);
  d[2] = submod(addmod(u[2], u[2], M), mulmod(u[0], u[1], M), M);
  return d;
}

}  // namespace

ClassInfo inspect_class(const Int& m, u64 p, int k, const std::array<u64, 3>& u) {
  ClassInfo info;
  u64 M = pow_u64_checked(p, k);
  u64 mm = mod_u64(m, M);
  info.on_surface = (f_mod(u, M) == mm);
  auto d = partials_mod(u, M);
  int best = -1;
  for (int j = 0; j < 3; ++j) {
    if (d[j] != 0) {
      int e = val_u64(d[j], p);
      if (best < 0 || e < best) best = e;
    }
  }
  info.cert_slack = best;
  info.certified = best >= 0 && k >= 2 * best + 1;
  for (int i = 0; i < 3; ++i) {
    u64 t = submod(u[i], 2 % M, M);
    info.val_u_minus2[i] = (t == 0) ? -1 : val_u64(t, p);
  }
  return info;
}

std::vector<std::array<u64, 3>> surface_classes_level1(const Int& m, u64 p, Budget& budget) {
  std::vector<std::array<u64, 3>> out;
  u64 mm = mod_u64(m, p);
  if (p == 2) {
    budget.charge(8);
    for (u64 a = 0; a < 2; ++a)
      for (u64 b = 0; b < 2; ++b)
        for (u64 c = 0; c < 2; ++c)
          if (f_mod({a, b, c}, 2) == mm) out.push_back({a, b, c});
    return out;
  }
  // solve the quadratic in the third coordinate for each (a, b)
  budget.charge(static_cast<long long>(p) * static_cast<long long>(p));
  u64 inv2 = inv_mod_u64(2, p);
  for (u64 a = 0; a < p; ++a) {
    for (u64 b = 0; b < p; ++b) {
      // c^2 - ab c + (a^2+b^2-m) = 0 mod p
      u64 ab = mulmod(a, b, p);
      u64 cst = submod(addmod(mulmod(a, a, p), mulmod(b, b, p), p), mm, p);
      u64 disc = submod(mulmod(ab, ab, p), mulmod(4 % p, cst, p), p);
      auto r = sqrt_mod_u64(disc, p);
      if (!r) continue;
      u64 c1 = mulmod(addmod(ab, *r, p), inv2, p);
      u64 c2 = mulmod(submod(ab, *r, p), inv2, p);
      out.push_back({a, b, c1});
      if (c2 != c1) out.push_back({a, b, c2});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void children_on_surface(const Int& m, u64 p, int k, const std::array<u64, 3>& u,
                         std::vector<std::array<u64, 3>>& out, Budget& budget) {
  u64 M = pow_u64_checked(p, k);
  u64 M1 = pow_u64_checked(p, k + 1);
  u64 mm1 = mod_u64(m, M1);
  u64 fm = submod(f_mod(u, M1), mm1, M1);
  // the class satisfies the congruence mod p^k, so fm is a multiple of M
  u64 g = (fm / M) % p;
  std::array<u64, 3> dp;
  {
    auto d = partials_mod(u, p);
    dp = d;
  }
  auto emit = [&](u64 d0, u64 d1, u64 d2) {
    out.push_back({u[0] + M * d0, u[1] + M * d1, u[2] + M * d2});
  };
  if (dp[0] == 0 && dp[1] == 0 && dp[2] == 0) {
    if (g != 0) return;  // dead: no child satisfies the congruence
    budget.charge(static_cast<long long>(p) * p * p);
    for (u64 a = 0; a < p; ++a)
      for (u64 b = 0; b < p; ++b)
        for (u64 c = 0; c < p; ++c) emit(a, b, c);
    return;
  }
  // linear condition dp . delta = -g mod p; solve for a pivot coordinate
  int piv = dp[0] != 0 ? 0 : (dp[1] != 0 ? 1 : 2);
  u64 inv = inv_mod_u64(dp[piv], p);
  budget.charge(static_cast<long long>(p) * p);
  int f1 = (piv + 1) % 3, f2 = (piv + 2) % 3;
  for (u64 x = 0; x < p; ++x) {
    for (u64 y = 0; y < p; ++y) {
      u64 rhs = submod(0, addmod(g, addmod(mulmod(dp[f1], x, p), mulmod(dp[f2], y, p), p), p), p);
      u64 z = mulmod(inv, rhs, p);
      std::array<u64, 3> d{};
      d[piv] = z;
      d[f1] = x;
      d[f2] = y;
      emit(d[0], d[1], d[2]);
    }
  }
}

namespace {

ResidueClassPoint annotate(const Int& m, u64 p, int k, const std::array<u64, 3>& u, Budget& budget) {
  ResidueClassPoint c;
  c.p = p;
  c.k = k;
  c.modulus = pow_u64_checked(p, k);
  c.u = u;
  ClassInfo info = inspect_class(m, p, k, u);
  if (info.certified) {
    c.status = ResidueClassPoint::Status::certified;
    c.slack = info.cert_slack;
    return c;
  }
  std::vector<std::array<u64, 3>> kids;
  children_on_surface(m, p, k, u, kids, budget);
  c.status = kids.empty() ? ResidueClassPoint::Status::dead : ResidueClassPoint::Status::undetermined;
  return c;
}

}  // namespace

std::vector<ResidueClassPoint> enumerate_points_mod(const Int& m, u64 p, int k, Budget& budget) {
  if (k < 1) throw InvalidInput("enumerate_points_mod: k must be >= 1");
  std::vector<std::array<u64, 3>> level = surface_classes_level1(m, p, budget);
  for (int cur = 1; cur < k; ++cur) {
    std::vector<std::array<u64, 3>> next;
    for (const auto& u : level) children_on_surface(m, p, cur, u, next, budget);
    std::sort(next.begin(), next.end());
    level = std::move(next);
  }
  std::vector<ResidueClassPoint> out;
  out.reserve(level.size());
  for (const auto& u : level) out.push_back(annotate(m, p, k, u, budget));
  return out;
}

std::vector<ResidueClassPoint> hensel_refine(const Int& m, const ResidueClassPoint& c, int target_k,
                                             Budget& budget) {
  if (target_k <= c.k) throw InvalidInput("hensel_refine: target_k must exceed current level");
  std::vector<std::array<u64, 3>> level{c.u};
  for (int cur = c.k; cur < target_k; ++cur) {
    std::vector<std::array<u64, 3>> next;
    for (const auto& u : level) children_on_surface(m, c.p, cur, u, next, budget);
    std::sort(next.begin(), next.end());
    level = std::move(next);
  }
  std::vector<ResidueClassPoint> out;
  out.reserve(level.size());
  for (const auto& u : level) out.push_back(annotate(m, c.p, target_k, u, budget));
  return out;
}

std::array<std::array<u64, 3>, 4> singular_points_mod(const Int& m, u64 p) {
  if (p == 2) throw InvalidInput("singular_points_mod: p must be odd");
  if (mod_u64(m - 4, p) != 0) throw InvalidInput("singular_points_mod: p must divide m-4");
  u64 two = 2 % p, mtwo = p - two;
  return {{{two, two, two}, {mtwo, mtwo, two}, {two, mtwo, mtwo}, {mtwo, two, mtwo}}};
}

LiftedPoint lift_point(const Int& m, const ResidueClassPoint& c, int target_k,
                       const Point3<Int>& free_offsets) {
  if (c.status != ResidueClassPoint::Status::certified)
    throw InvalidInput("lift_point: class is not certified");
  ClassInfo info = inspect_class(m, c.p, c.k, c.u);
  // pick the coordinate realizing the certification slack
  Int M = 1;
  for (int i = 0; i < c.k; ++i) M *= static_cast<unsigned long>(c.p);
  int j = -1;
  {
    Point3<Int> uu{Int(static_cast<unsigned long>(c.u[0])), Int(static_cast<unsigned long>(c.u[1])),
                   Int(static_cast<unsigned long>(c.u[2]))};
    for (int coord = 0; coord < 3; ++coord) {
      int jj = coord, kk1 = (coord + 1) % 3, kk2 = (coord + 2) % 3;
      Int d = 2 * uu[jj] - uu[kk1] * uu[kk2];
      if (d != 0 || true) {
        Int dm = mod_nonneg(d, M);
        if (dm != 0 && valuation(dm, Int(static_cast<unsigned long>(c.p))) == info.cert_slack) {
          j = coord;
          break;
        }
      }
    }
  }
  if (j < 0) throw Error("lift_point: certified coordinate not found");
  const Int p(static_cast<unsigned long>(c.p));
  Int target = 1;
  for (int i = 0; i < target_k; ++i) target *= p;
  Int work = target;
  for (int i = 0; i < 2 * info.cert_slack + 2; ++i) work *= p;

  Point3<Int> u{Int(static_cast<unsigned long>(c.u[0])), Int(static_cast<unsigned long>(c.u[1])),
                Int(static_cast<unsigned long>(c.u[2]))};
  for (int i = 0; i < 3; ++i)
    if (i != j) u[i] = mod_nonneg(u[i] + M * free_offsets[i], work);

  auto g = [&](const Int& x) {
    Point3<Int> v = u;
    v[j] = x;
    return mod_nonneg(evaluate_markoff(v) - m, work);
  };
  auto gprime = [&](const Int& x) {
    int k1 = (j + 1) % 3, k2 = (j + 2) % 3;
    return mod_nonneg(2 * x - u[k1] * u[k2], work);
  };
  Int x = u[j];
  for (int iter = 0; iter < 4 * target_k + 16; ++iter) {
    Int gx = g(x);
    if (mod_nonneg(gx, target) == 0) break;
    Int dx = gprime(x);
    int e = valuation(dx, p);
    Int w = dx;
    for (int i = 0; i < e; ++i) w /= p;
    Int winv;
    if (mpz_invert(winv.get_mpz_t(), w.get_mpz_t(), work.get_mpz_t()) == 0)
      throw Error("lift_point: unit inversion failed");
    Int step = gx;
    for (int i = 0; i < e; ++i) {
      if (!mpz_divisible_p(step.get_mpz_t(), p.get_mpz_t()))
        throw Error("lift_point: Newton step not divisible, class not liftable");
      step /= p;
    }
    x = mod_nonneg(x - step * winv, work);
  }
  if (mod_nonneg(g(x), target) != 0) throw Error("lift_point: Newton failed to reach target precision");
  u[j] = x;
  LiftedPoint out;
  out.modulus = target;
  for (int i = 0; i < 3; ++i) out.u[i] = mod_nonneg(u[i], target);
  out.newton_coordinate = j;
  return out;
}

std::vector<LiftedPoint> sample_zp_points(const Int& m, u64 p, int count, int K, u64 seed) {
  std::mt19937_64 rng(seed);
  Budget budget(default_budget());
  // collect certified classes at a shallow level
  std::vector<ResidueClassPoint> pool;
  for (int k = 1; k <= 8 && pool.size() < 64; ++k) {
    auto classes = enumerate_points_mod(m, p, k, budget);
    for (auto& c : classes)
      if (c.status == ResidueClassPoint::Status::certified) pool.push_back(c);
    if (!pool.empty() && k >= (p == 2 ? 3 : 1)) break;
  }
  if (pool.empty()) return {};
  std::vector<LiftedPoint> out;
  for (int i = 0; i < count; ++i) {
    const auto& c = pool[rng() % pool.size()];
    Point3<Int> offs;
    for (int t = 0; t < 3; ++t) offs[t] = Int(static_cast<unsigned long>(rng() % 1'000'000));
    out.push_back(lift_point(m, c, K, offs));
  }
  return out;
}

}  // namespace markoff
