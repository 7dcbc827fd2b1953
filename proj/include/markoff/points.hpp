#pragma once

// Integral point search: bounded box search, descent to reduced
// representatives through Vieta moves, certified emptiness for m > 4
// nonsquare, and orbit sampling for test data.

#include "markoff/surface.hpp"

namespace markoff {

struct SearchConfig {
  i64 height = 10;
  long long budget = -1;  // -1: default
  u64 seed = 1;
};

// All on-surface integer triples with max |u_i| <= height, sorted.
std::vector<Point3<Int>> box_search(const Int& m, const SearchConfig& cfg = {});

// No Vieta move decreases the moved coordinate's absolute value.
bool is_reduced(const Point3<Int>& u);

struct ReducedPoint {
  Point3<Int> u;
  Int norm;  // sum of squares
};

// Greedy norm-decreasing Vieta moves; terminates because the norm is a
// strictly decreasing nonnegative integer.
ReducedPoint descend(Point3<Int> u);

enum class EmptinessStatus { empty_certified, nonempty, not_applicable };

struct EmptinessCertificate {
  EmptinessStatus status = EmptinessStatus::not_applicable;
  std::optional<Point3<Int>> witness;  // minimal-norm point when nonempty
  Int ball_bound = 0;                  // points scanned in sum u_i^2 <= ball_bound
  bool shell_checked = false;
};

// For m > 4 nonsquare: scans the ball sum u_i^2 <= 3m. Every integral point
// descends to a reduced one, and reduced points satisfy sum <= m; the shell
// m < sum <= 3m is re-checked point by point as defense in depth.
EmptinessCertificate certify_empty(const Int& m, long long budget = -1);

struct OrbitResult {
  std::vector<Point3<Int>> points;
  bool stalled = false;  // fewer than n distinct points reachable within budget
};
OrbitResult orbit_sample(const Point3<Int>& u, int n, u64 seed, long long budget = -1);

}  // namespace markoff
