#pragma once

// Batch classification of all |m| <= B, the counting series behind the
// desk-scale growth checks, and the restricted-prime-divisor counting sieve.

#include <functional>

#include "markoff/obstruction.hpp"

namespace markoff {

struct CensusConfig {
  i64 point_height = -1;  // -1: policy (ball 3m for m > 4 plus box 50); 0: skip point search
  int threads = 0;        // 0: hardware concurrency
  std::vector<i64> breakpoints;  // |m| bounds at which counts are sampled
  bool audit = true;
  double audit_fraction = 0.01;
  int audit_cap = 400;
  u64 seed = 1;
};

struct CensusRow {
  i64 m = 0;
  char cls = 'g';  // s/r/o/t/g per MClass
  bool soluble = false;
  char bm = 'F';  // T obstructed, F unobstructed, S short-circuited, X out-of-method, I inconclusive
  i64 sa_prime = 0;
  bool kernel_ok = false;
  bool point_found = false;
  std::array<i64, 3> point{0, 0, 0};
  std::string flags;

  std::string class_name() const;
  std::string bm_name() const;
  std::string csv() const;
  nlohmann::ordered_json to_json() const;
};

struct CensusCounts {
  i64 total = 0;
  i64 insoluble = 0;
  i64 generic = 0;
  i64 obstructed = 0;
  i64 unobstructed = 0;
  i64 inconclusive = 0;
  i64 sa_certified = 0;
  i64 point_found = 0;
  i64 kernel_violations = 0;  // obstructed rows failing the kernel constraint (must stay 0)
  i64 wa_not_certified = 0;   // soluble rows with no approximation-failure certificate
};

struct CountSeries {
  std::vector<i64> breakpoints;
  std::vector<CensusCounts> counts;
};

struct CensusSummary {
  i64 B = 0;
  CensusCounts total;
  CountSeries series;
  nlohmann::ordered_json to_json() const;
};

std::string census_csv_header();

CensusSummary run_census(i64 B, const CensusConfig& cfg = {},
                         const std::function<void(const CensusRow&)>& sink = nullptr);

// Exact count of d <= x all of whose prime divisors are congruent mod n to a
// unit in R; d = 1 always counts.
i64 count_restricted(i64 x, i64 n, const std::vector<i64>& R);

struct GrowthFit {
  double c = 0;
  std::vector<double> residuals;  // relative, per breakpoint
};
// Least-squares fit count ~ c * B^a * (log B)^b through the origin.
GrowthFit growth_fit(const std::vector<i64>& breakpoints, const std::vector<i64>& counts, double a,
                     double b);

}  // namespace markoff
