#pragma once

// Top-level deciders: local and adelic solvability, the Brauer-Manin
// decision as zero-vector membership in the sum of local invariant images,
// weak/strong approximation failure certificates, family analyzers, and the
// squarefree-kernel constraint on obstructed parameters.

#include "markoff/brauer.hpp"

namespace markoff {

enum class Solubility { soluble, insoluble };

Solubility local_solvable(const Int& m, const Place& v);

struct SolvabilityReport {
  bool adelically_soluble = false;
  // verdicts at inf, 2 and 3; every other place is soluble unconditionally
  std::vector<std::pair<Place, Solubility>> verdicts;
};
SolvabilityReport solvability(const Int& m);

// squarefree kernel of m-4 lies in <+-1, 2, 3, 5> mod squares
bool kernel_constraint_check(const Int& m);

struct FamilyMatch {
  std::string family;
  Int d;
  bool predicts_obstruction = false;
  bool predicts_hasse_failure_without_obstruction = false;
  std::vector<std::string> hypotheses;
};
std::optional<FamilyMatch> analyze_family(const Int& m);

struct ApproxCertificates {
  std::optional<Int> prime;  // least p > 3 with v_p(m-4) odd
  // smooth residue point mod p with u_i^2 - 4 a nonzero nonresidue
  std::array<u64, 3> wa_class{};
  int wa_index = -1;
  // smooth residue point mod p with u_i - 2 a nonzero nonresidue
  std::array<u64, 3> sa_class{};
  int sa_index = -1;
};
ApproxCertificates sa_wa_certificates(const Int& m);

enum class BmStatus { obstructed, unobstructed, inconclusive, short_circuited, out_of_method };
const char* bm_status_str(BmStatus s);

struct PointsSection {
  std::string status = "skipped";  // nonempty | empty_certified | searched_empty | not_applicable | skipped
  std::optional<Point3<Int>> witness;
  Int ball_bound = 0;
  bool shell_checked = false;
};

struct ObstructionReport {
  Int m;
  MClass cls{MTag::Generic, 0};
  SolvabilityReport solv;
  std::vector<Place> relevant_places;
  std::map<Place, LocalImage> images;
  BmStatus bm = BmStatus::inconclusive;
  std::optional<Int> sa_prime, wa_prime;
  ApproxCertificates certs;
  bool kernel_ok = false;
  std::vector<std::string> flags;
  PointsSection points;

  bool bm_empty() const { return bm == BmStatus::obstructed; }
  nlohmann::ordered_json to_json() const;
};

struct DecideOptions {
  bool with_points = true;
  i64 height = -1;  // -1: policy (certified ball for m > 4, box of side 50 otherwise)
  bool want_witnesses = true;
  bool prefer_rules_small_p = false;  // census fast path
  long long budget = -1;
};

ObstructionReport decide_bm(const Int& m, const DecideOptions& opts = {});

}  // namespace markoff
