#include "markoff/census.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <thread>

#include "markoff/arith64.hpp"
#include "markoff/points.hpp"

namespace markoff {

std::string CensusRow::class_name() const {
  switch (cls) {
    case 's': return "singular";
    case 'r': return "rational_brauer";
    case 'o': return "obvious_point";
    case 't': return "transcendental_exception";
    default: return "generic";
  }
}

std::string CensusRow::bm_name() const {
  switch (bm) {
    case 'T': return "true";
    case 'F': return "false";
    case 'S': return "short_circuited";
    case 'X': return "out_of_method";
    case 'I': return "inconclusive";
    default: return "?";
  }
}

std::string census_csv_header() { return "m,class,solvable,bm_empty,sa_prime,kernel_ok,point,flags"; }

std::string CensusRow::csv() const {
  std::string s = std::to_string(m);
  s += ',';
  s += class_name();
  s += ',';
  s += soluble ? "true" : "false";
  s += ',';
  s += bm_name();
  s += ',';
  if (sa_prime > 0) s += std::to_string(sa_prime);
  s += ',';
  s += kernel_ok ? "true" : "false";
  s += ',';
  if (point_found) {
    s += "\"(" + std::to_string(point[0]) + "," + std::to_string(point[1]) + "," +
         std::to_string(point[2]) + ")\"";
  }
  s += ',';
  s += flags;
  return s;
}

nlohmann::ordered_json CensusRow::to_json() const {
  nlohmann::ordered_json j;
  j["m"] = m;
  j["class"] = class_name();
  j["solvable"] = soluble;
  if (bm == 'T' || bm == 'F')
    j["bm_empty"] = (bm == 'T');
  else
    j["bm_empty"] = nullptr;
  j["bm_status"] = bm_name();
  if (sa_prime > 0)
    j["sa_prime"] = sa_prime;
  else
    j["sa_prime"] = nullptr;
  j["kernel_ok"] = kernel_ok;
  if (point_found)
    j["point"] = {point[0], point[1], point[2]};
  else
    j["point"] = nullptr;
  j["flags"] = flags;
  return j;
}

nlohmann::ordered_json CensusSummary::to_json() const {
  auto counts_json = [](const CensusCounts& c) {
    nlohmann::ordered_json j;
    j["total"] = c.total;
    j["insoluble"] = c.insoluble;
    j["generic"] = c.generic;
    j["obstructed"] = c.obstructed;
    j["unobstructed"] = c.unobstructed;
    j["inconclusive"] = c.inconclusive;
    j["sa_certified"] = c.sa_certified;
    j["point_found"] = c.point_found;
    j["kernel_violations"] = c.kernel_violations;
    j["wa_not_certified"] = c.wa_not_certified;
    return j;
  };
  nlohmann::ordered_json j;
  j["schema"] = "census-summary/1";
  j["B"] = B;
  j["counts"] = counts_json(total);
  nlohmann::ordered_json ser = nlohmann::ordered_json::array();
  for (size_t i = 0; i < series.breakpoints.size(); ++i) {
    nlohmann::ordered_json e;
    e["B"] = series.breakpoints[i];
    e["counts"] = counts_json(series.counts[i]);
    ser.push_back(e);
  }
  j["series"] = ser;
  return j;
}

namespace {

// smallest-prime-factor table for |m - 4| <= B + 4
std::vector<int32_t> build_spf(i64 bound) {
  std::vector<int32_t> spf(bound + 1, 0);
  for (i64 i = 2; i <= bound; ++i) {
    if (spf[i] != 0) continue;
    for (i64 j = i; j <= bound; j += i)
      if (spf[j] == 0) spf[j] = static_cast<int32_t>(i);
  }
  return spf;
}

struct SmallFactor {
  i64 p;
  int e;
};

void factor_spf(i64 n, const std::vector<int32_t>& spf, std::vector<SmallFactor>& out) {
  out.clear();
  while (n > 1) {
    i64 p = spf[n];
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.push_back({p, e});
  }
}

bool is_square_i64(i64 n, i64* root = nullptr) {
  if (n < 0) return false;
  i64 r = static_cast<i64>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  if (r * r != n) return false;
  if (root) *root = r;
  return true;
}

char classify_i64(i64 m) {
  if (m == 0 || m == 4) return 's';
  if (m > 0 && is_square_i64(m)) return 'o';
  i64 D = m - 4;
  if (D > 0 && is_square_i64(D)) return 'r';
  i64 d;
  if (D < 0 && is_square_i64(-D, &d)) {
    if (d % 2 == 0) {
      i64 t = d / 2;
      if ((t - 1 >= 1 && is_square_i64(t - 1)) || is_square_i64(t + 1)) return 't';
    }
  }
  return 'g';
}

bool soluble_i64(i64 m) {
  i64 m4 = ((m % 4) + 4) % 4;
  i64 m9 = ((m % 9) + 9) % 9;
  return m4 != 3 && m9 != 3 && m9 != 6;
}

// the fast generic decision; factors = factorization of |m-4|
void decide_generic_fast(i64 m, const std::vector<SmallFactor>& factors, CensusRow& row) {
  row.sa_prime = 0;
  bool kernel_ok = true;
  i64 shortcut_prime = 0;  // p > 5 with m-4 not a local square: no obstruction
  for (const auto& f : factors) {
    if (f.e % 2 == 1) {
      if (f.p > 5) kernel_ok = false;
      if (f.p > 3 && row.sa_prime == 0) row.sa_prime = f.p;
      if (f.p > 5 && shortcut_prime == 0) shortcut_prime = f.p;
    }
  }
  row.kernel_ok = kernel_ok;
  if (shortcut_prime == 0) {
    // all p > 5 divide to even order; check their unit parts
    i64 D = m - 4;
    i64 absD = D < 0 ? -D : D;
    for (const auto& f : factors) {
      if (f.p <= 5 || f.e % 2 == 1) continue;
      i64 unit = absD;
      for (int i = 0; i < f.e; ++i) unit /= f.p;
      if (D < 0) unit = -unit;
      Int u(static_cast<long>(unit));
      if (legendre(u, Int(static_cast<long>(f.p))) == -1) {
        shortcut_prime = f.p;
        break;
      }
    }
  }
  if (shortcut_prime != 0) {
    row.bm = 'F';  // a large prime where m-4 is not a local square kills the obstruction
    return;
  }
  // every prime > 5 sees m-4 as a local square; decide through the images
  // at the places inf, 2, 3, 5
  ImageOptions io;
  io.prefer_rules = true;
  io.want_witnesses = false;
  Int M(static_cast<long>(m));
  VecSet sum = VecSet(1) << 0;
  bool partial = false;
  for (const Place& pl : {Place::infinity(), Place::prime(2), Place::prime(3), Place::prime(5)}) {
    LocalImage img = local_invariant_image(M, pl, io);
    if (img.completeness == Completeness::depth_capped_partial) partial = true;
    sum = vecset_minkowski(sum, img.vectors);
  }
  if (partial) {
    row.bm = 'I';
    row.flags = "depth_cap_exceeded";
    return;
  }
  row.bm = vecset_has(sum, 0) ? 'F' : 'T';
}

CensusRow census_row(i64 m, const std::vector<int32_t>& spf, std::vector<SmallFactor>& scratch) {
  CensusRow row;
  row.m = m;
  row.cls = classify_i64(m);
  row.soluble = soluble_i64(m);
  if (row.cls == 's') {
    row.bm = 'S';
    row.flags = "singular";
    row.kernel_ok = true;
    return row;
  }
  i64 absD = m >= 4 ? m - 4 : 4 - m;
  factor_spf(absD, spf, scratch);
  row.kernel_ok = true;
  for (const auto& f : scratch)
    if (f.e % 2 == 1 && f.p > 5) row.kernel_ok = false;
  if (!row.soluble) {
    row.bm = 'S';
    return row;
  }
  switch (row.cls) {
    case 'r':
    case 'o': row.bm = 'F'; break;
    case 't': row.bm = 'X'; break;
    default: decide_generic_fast(m, scratch, row); break;
  }
  if (row.cls != 'g') row.sa_prime = 0;
  return row;
}

// minimal-norm integral point per m, from one global inverted pass
struct PointTable {
  i64 B;
  std::vector<i64> norm;                 // -1: none found
  std::vector<std::array<i64, 3>> best;

  explicit PointTable(i64 B_) : B(B_), norm(2 * B_ + 1, -1), best(2 * B_ + 1) {}
  void offer(i64 m, i64 a, i64 b, i64 c, i64 n) {
    size_t idx = static_cast<size_t>(m + B);
    std::array<i64, 3> t{a, b, c};
    if (norm[idx] < 0 || n < norm[idx] || (n == norm[idx] && t < best[idx])) {
      norm[idx] = n;
      best[idx] = t;
    }
  }
};

void point_pass(PointTable& tab, i64 box_height) {
  const i64 B = tab.B;
  // small box: all m
  for (i64 a = -box_height; a <= box_height; ++a)
    for (i64 b = -box_height; b <= box_height; ++b)
      for (i64 c = -box_height; c <= box_height; ++c) {
        i64 f = a * a + b * b + c * c - a * b * c;
        if (f < -B || f > B) continue;
        tab.offer(f, a, b, c, a * a + b * b + c * c);
      }
  // certified ball for m > 4: every triple with sum of squares <= 3m
  i64 R = static_cast<i64>(std::sqrt(3.0 * static_cast<double>(B))) + 1;
  for (i64 a = -R; a <= R; ++a) {
    for (i64 b = -R; b <= R; ++b) {
      i64 ab2 = a * a + b * b;
      if (ab2 > 3 * B) continue;
      i64 s = static_cast<i64>(std::sqrt(static_cast<double>(3 * B - ab2))) + 1;
      i64 ab = a * b;
      i64 c = -s;
      i64 f = ab2 + c * c - ab * c;
      for (; c <= s; ++c) {
        // incremental: f(c+1) = f(c) + 2c + 1 - ab
        if (f > 4 && f <= B) {
          i64 n = ab2 + c * c;
          if (n <= 3 * f) tab.offer(f, a, b, c, n);
        }
        f += 2 * c + 1 - ab;
      }
    }
  }
}

u64 splitmix(u64 x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

CensusSummary run_census(i64 B, const CensusConfig& cfg,
                         const std::function<void(const CensusRow&)>& sink) {
  if (B < 1) throw InvalidInput("run_census: B must be positive");
  if (B > 1'000'000) throw BoundExceeded("run_census: B beyond the desk-scale default");
  const auto spf = build_spf(B + 5);

  std::unique_ptr<PointTable> points;
  if (cfg.point_height != 0) {
    points = std::make_unique<PointTable>(B);
    i64 h = cfg.point_height > 0 ? cfg.point_height : 50;
    point_pass(*points, std::min<i64>(h, 2 * B));
  }

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  const i64 total_n = 2 * B + 1;
  std::vector<std::vector<CensusRow>> chunks(threads);
  {
    std::vector<std::thread> pool;
    i64 per = (total_n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        std::vector<SmallFactor> scratch;
        i64 lo = -B + t * per;
        i64 hi = std::min(B, lo + per - 1);
        for (i64 m = lo; m <= hi; ++m) chunks[t].push_back(census_row(m, spf, scratch));
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<i64> bps = cfg.breakpoints;
  std::sort(bps.begin(), bps.end());
  CensusSummary summary;
  summary.B = B;
  summary.series.breakpoints = bps;
  summary.series.counts.assign(bps.size(), CensusCounts{});

  auto tally = [](CensusCounts& c, const CensusRow& r) {
    c.total += 1;
    if (!r.soluble) c.insoluble += 1;
    if (r.cls == 'g') c.generic += 1;
    if (r.bm == 'T') c.obstructed += 1;
    if (r.bm == 'F') c.unobstructed += 1;
    if (r.bm == 'I') c.inconclusive += 1;
    if (r.sa_prime > 0) c.sa_certified += 1;
    if (r.point_found) c.point_found += 1;
    if (r.bm == 'T' && !r.kernel_ok) c.kernel_violations += 1;
    if (r.soluble && r.sa_prime == 0) c.wa_not_certified += 1;
  };

  for (auto& chunk : chunks) {
    for (auto& row : chunk) {
      if (points) {
        size_t idx = static_cast<size_t>(row.m + B);
        if (points->norm[idx] >= 0) {
          row.point_found = true;
          row.point = points->best[idx];
        } else if (row.m > 4 && row.soluble && !is_square_i64(row.m)) {
          if (!row.flags.empty()) row.flags += ";";
          row.flags += "empty_certified";
        }
      }
      tally(summary.total, row);
      for (size_t i = 0; i < bps.size(); ++i)
        if (std::abs(row.m) <= bps[i]) tally(summary.series.counts[i], row);
      if (sink) sink(row);
    }
  }

  if (summary.total.kernel_violations != 0)
    throw Error("census: an obstructed row violates the squarefree-kernel constraint");

  // audit: re-decide a deterministic subsample through the full path
  if (cfg.audit) {
    i64 audited = 0;
    u64 threshold = static_cast<u64>(cfg.audit_fraction * 18446744073709551615.0);
    for (i64 m = -B; m <= B && audited < cfg.audit_cap; ++m) {
      if (splitmix(static_cast<u64>(m + B) ^ cfg.seed) > threshold) continue;
      char cls = classify_i64(m);
      if (cls == 's') continue;
      ++audited;
      DecideOptions d;
      d.with_points = false;
      d.want_witnesses = false;
      ObstructionReport rep = decide_bm(Int(static_cast<long>(m)), d);
      char expect;
      switch (rep.bm) {
        case BmStatus::obstructed: expect = 'T'; break;
        case BmStatus::unobstructed: expect = 'F'; break;
        case BmStatus::short_circuited: expect = 'S'; break;
        case BmStatus::out_of_method: expect = 'X'; break;
        default: expect = 'I'; break;
      }
      std::vector<SmallFactor> scratch;
      CensusRow fast = census_row(m, spf, scratch);
      if (fast.bm != expect)
        throw Error("census audit mismatch at m = " + std::to_string(m) + ": fast " +
                    std::string(1, fast.bm) + " vs full " + std::string(1, expect));
    }
  }

  return summary;
}

i64 count_restricted(i64 x, i64 n, const std::vector<i64>& R) {
  if (x < 1) return 0;
  if (n < 1) throw InvalidInput("count_restricted: modulus must be positive");
  std::vector<bool> in_r(n, false);
  for (i64 r : R) {
    if (r < 0 || r >= n || std::gcd(r, n) != 1)
      throw InvalidInput("count_restricted: R must consist of units mod n");
    in_r[r] = true;
  }
  auto spf = build_spf(x);
  std::vector<bool> ok(x + 1, false);
  ok[1] = true;
  i64 count = 1;
  for (i64 d = 2; d <= x; ++d) {
    i64 p = spf[d];
    ok[d] = in_r[p % n] && ok[d / p];
    if (ok[d]) ++count;
  }
  return count;
}

GrowthFit growth_fit(const std::vector<i64>& breakpoints, const std::vector<i64>& counts, double a,
                     double b) {
  if (breakpoints.size() != counts.size() || breakpoints.size() < 3)
    throw InvalidInput("growth_fit: need at least 3 breakpoints");
  GrowthFit fit;
  double num = 0, den = 0;
  std::vector<double> xs;
  for (size_t i = 0; i < breakpoints.size(); ++i) {
    double Bv = static_cast<double>(breakpoints[i]);
    double x = std::pow(Bv, a) * std::pow(std::log(Bv), b);
    xs.push_back(x);
    num += x * static_cast<double>(counts[i]);
    den += x * x;
  }
  if (den == 0) throw InvalidInput("growth_fit: degenerate series");
  fit.c = num / den;
  for (size_t i = 0; i < breakpoints.size(); ++i) {
    double y = static_cast<double>(counts[i]);
    fit.residuals.push_back(y == 0 ? 0.0 : (y - fit.c * xs[i]) / y);
  }
  return fit;
}

}  // namespace markoff
