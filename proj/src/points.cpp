#include "markoff/points.hpp"

#include <algorithm>
#include <set>

namespace markoff {

std::vector<Point3<Int>> box_search(const Int& m, const SearchConfig& cfg) {
  if (cfg.height < 2) throw InvalidInput("box_search: height must be >= 2");
  Budget budget(cfg.budget > 0 ? cfg.budget : default_budget());
  const i64 H = cfg.height;
  budget.charge((2 * H + 1) * (2 * H + 1));
  std::vector<Point3<Int>> out;
  for (i64 a = -H; a <= H; ++a) {
    for (i64 b = -H; b <= H; ++b) {
      // u3^2 - ab u3 + (a^2 + b^2 - m) = 0
      Int ab = Int(a) * b;
      Int disc = ab * ab - 4 * (Int(a) * a + Int(b) * b - m);
      Int r;
      if (disc < 0 || !is_perfect_square(disc, &r)) continue;
      for (const Int& c2 : {ab + r, ab - r}) {
        if (mpz_odd_p(c2.get_mpz_t())) continue;
        Int c = c2 / 2;
        if (abs(c) > H) continue;
        out.push_back({Int(a), Int(b), c});
        if (r == 0) break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool is_reduced(const Point3<Int>& u) {
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    if (abs(u[j] * u[k] - u[i]) < abs(u[i])) return false;
  }
  return true;
}

ReducedPoint descend(Point3<Int> u) {
  while (true) {
    // norm gain of move i is u_i^2 - (u_j u_k - u_i)^2; take the largest,
    // ties to the smallest index
    int best = -1;
    Int best_gain = 0;
    for (int i = 0; i < 3; ++i) {
      int j = (i + 1) % 3, k = (i + 2) % 3;
      Int alt = u[j] * u[k] - u[i];
      Int gain = u[i] * u[i] - alt * alt;
      if (gain > best_gain) {
        best = i;
        best_gain = gain;
      }
    }
    if (best < 0) break;
    u = vieta_move(u, best);
  }
  Int norm = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  return {u, norm};
}

EmptinessCertificate certify_empty(const Int& m, long long budget_n) {
  EmptinessCertificate cert;
  if (m <= 4 || is_perfect_square(m)) {
    cert.status = EmptinessStatus::not_applicable;
    return cert;
  }
  if (m > 1'000'000) throw BudgetExceeded("certify_empty: m beyond desk scale");
  Budget budget(budget_n > 0 ? budget_n : default_budget());
  Int ball = 3 * m;
  cert.ball_bound = ball;
  i64 mB = to_i64(ball);
  std::vector<Point3<Int>> found;
  i64 amax = static_cast<i64>(std::sqrt(static_cast<double>(mB))) + 1;
  for (i64 a = -amax; a <= amax; ++a) {
    for (i64 b = -amax; b <= amax; ++b) {
      if (Int(a) * a + Int(b) * b > ball) continue;
      budget.charge(1);
      Int ab = Int(a) * b;
      Int disc = ab * ab - 4 * (Int(a) * a + Int(b) * b - m);
      Int r;
      if (disc < 0 || !is_perfect_square(disc, &r)) continue;
      for (const Int& c2 : {ab + r, ab - r}) {
        if (mpz_odd_p(c2.get_mpz_t())) continue;
        Int c = c2 / 2;
        Int norm = Int(a) * a + Int(b) * b + c * c;
        if (norm <= ball) found.push_back({Int(a), Int(b), c});
        if (r == 0) break;
      }
    }
  }
  if (!found.empty()) {
    auto norm_of = [](const Point3<Int>& u) { return u[0] * u[0] + u[1] * u[1] + u[2] * u[2]; };
    std::sort(found.begin(), found.end(), [&](const Point3<Int>& x, const Point3<Int>& y) {
      Int nx = norm_of(x), ny = norm_of(y);
      if (nx != ny) return nx < ny;
      return x < y;
    });
    cert.status = EmptinessStatus::nonempty;
    cert.witness = found.front();
    // shell sanity: every point outside sum <= m descends into the ball
    cert.shell_checked = true;
    for (const auto& u : found) {
      if (norm_of(u) <= m) continue;
      ReducedPoint r = descend(u);
      if (r.norm > m) cert.shell_checked = false;
    }
    return cert;
  }
  cert.status = EmptinessStatus::empty_certified;
  cert.shell_checked = true;  // vacuous: the shell contains no surface points
  return cert;
}

OrbitResult orbit_sample(const Point3<Int>& u, int n, u64 seed, long long budget_n) {
  OrbitResult out;
  if (n == 0) return out;
  std::mt19937_64 rng(seed);
  long long budget = budget_n > 0 ? budget_n : 200'000;
  std::set<Point3<Int>> seen;
  Point3<Int> cur = u;
  int last = -1;
  long long steps = 0;
  while (static_cast<int>(out.points.size()) < n && steps < budget) {
    ++steps;
    if (seen.insert(cur).second) out.points.push_back(cur);
    int i = static_cast<int>(rng() % 3);
    if (i == last) i = (i + 1) % 3;  // avoid immediate backtracking
    cur = vieta_move(cur, i);
    last = i;
    // random restart keeps the walk from drifting to enormous coordinates
    if (rng() % 64 == 0) {
      cur = u;
      last = -1;
    }
  }
  out.stalled = static_cast<int>(out.points.size()) < n;
  return out;
}

}  // namespace markoff
