#include "markoff/obstruction.hpp"

#include <algorithm>

#include "markoff/arith64.hpp"
#include "markoff/points.hpp"

namespace markoff {

Solubility local_solvable(const Int& m, const Place& v) {
  if (v.is_real()) return Solubility::soluble;  // (sqrt(m),0,0) or (t,t,3), t^2 = 9-m
  if (v.p == 2) return mpz_fdiv_ui(m.get_mpz_t(), 4) == 3 ? Solubility::insoluble : Solubility::soluble;
  if (v.p == 3) {
    unsigned long r = mpz_fdiv_ui(m.get_mpz_t(), 9);
    return (r == 3 || r == 6) ? Solubility::insoluble : Solubility::soluble;
  }
  return Solubility::soluble;
}

SolvabilityReport solvability(const Int& m) {
  SolvabilityReport rep;
  rep.verdicts = {{Place::infinity(), local_solvable(m, Place::infinity())},
                  {Place::prime(2), local_solvable(m, Place::prime(2))},
                  {Place::prime(3), local_solvable(m, Place::prime(3))}};
  rep.adelically_soluble = true;
  for (auto& [pl, s] : rep.verdicts)
    if (s == Solubility::insoluble) rep.adelically_soluble = false;
  return rep;
}

bool kernel_constraint_check(const Int& m) {
  Int k = abs(squarefree_kernel(m - 4));
  return k == 1 || k == 2 || k == 3 || k == 5 || k == 6 || k == 10 || k == 15 || k == 30;
}

namespace {

bool all_prime_divisors(const Int& d, const std::function<bool(const Int&)>& pred) {
  if (d == 1) return true;
  for (const auto& [p, e] : factorize(d).factors)
    if (!pred(p)) return false;
  return true;
}

}  // namespace

std::optional<FamilyMatch> analyze_family(const Int& m) {
  Int D = m - 4, root;

  // m = 4 - 2 d^2, prime divisors of d = 1 or 3 mod 8; d >= 3 (the argument
  // at the real place needs m <= -14)
  if (D < 0 && mpz_even_p(D.get_mpz_t()) && is_perfect_square(-D / 2, &root)) {
    Int d = root;
    if (d >= 3 && all_prime_divisors(d, [](const Int& p) {
          unsigned long r = mpz_fdiv_ui(p.get_mpz_t(), 8);
          return r == 1 || r == 3;
        })) {
      FamilyMatch fm;
      fm.family = "4-2d^2";
      fm.d = d;
      fm.predicts_obstruction = true;
      fm.hypotheses = {"d >= 3", "prime divisors of d = 1 or 3 mod 8"};
      return fm;
    }
    return std::nullopt;
  }

  if (D > 0 && mpz_even_p(D.get_mpz_t()) && D % 2 == 0 && is_perfect_square(D / 2, &root)) {
    Int d = root;
    unsigned long d9 = mpz_fdiv_ui(d.get_mpz_t(), 9);
    unsigned long d8 = mpz_fdiv_ui(d.get_mpz_t(), 8);
    // Hasse failure family: m = 4 + 2 l^2 with l >= 13 prime, l = +-4 mod 9,
    // l != +-1 mod 8 (adelically soluble, no obstruction, still no points)
    if (d >= 13 && is_prime(d) && (d9 == 4 || d9 == 5) && d8 != 1 && d8 != 7) {
      FamilyMatch fm;
      fm.family = "4+2l^2-hasse";
      fm.d = d;
      fm.predicts_hasse_failure_without_obstruction = true;
      fm.hypotheses = {"l prime >= 13", "l = +-4 mod 9", "l != +-1 mod 8"};
      return fm;
    }
    // obstruction family: prime divisors of d = +-1 mod 8 and the mod-9
    // condition that keeps m adelically soluble
    bool d9ok = (d9 == 0 || d9 == 3 || d9 == 4 || d9 == 5 || d9 == 6);
    if (d9ok && all_prime_divisors(d, [](const Int& p) {
          unsigned long r = mpz_fdiv_ui(p.get_mpz_t(), 8);
          return r == 1 || r == 7;
        })) {
      FamilyMatch fm;
      fm.family = "4+2d^2";
      fm.d = d;
      fm.predicts_obstruction = true;
      fm.hypotheses = {"prime divisors of d = +-1 mod 8", "d mod 9 in {0,+-3,+-4}"};
      return fm;
    }
  }

  if (D > 0 && D % 12 == 0 && is_perfect_square(D / 12, &root)) {
    Int d = root;
    if (mpz_odd_p(d.get_mpz_t()) && mpz_fdiv_ui((d * d).get_mpz_t(), 32) == 25 &&
        all_prime_divisors(d, [](const Int& p) {
          unsigned long r = mpz_fdiv_ui(p.get_mpz_t(), 12);
          return r == 1 || r == 11;
        })) {
      FamilyMatch fm;
      fm.family = "4+12d^2";
      fm.d = d;
      fm.predicts_obstruction = true;
      fm.hypotheses = {"d odd", "d^2 = 25 mod 32", "prime divisors of d = +-1 mod 12"};
      return fm;
    }
  }

  if (D > 0 && D % 20 == 0 && is_perfect_square(D / 20, &root)) {
    Int d = root;
    unsigned long d9 = mpz_fdiv_ui(d.get_mpz_t(), 9);
    if (mpz_odd_p(d.get_mpz_t()) && (d9 == 4 || d9 == 5) &&
        all_prime_divisors(d, [](const Int& p) {
          unsigned long r = mpz_fdiv_ui(p.get_mpz_t(), 5);
          return r == 1 || r == 4;
        })) {
      FamilyMatch fm;
      fm.family = "4+20d^2";
      fm.d = d;
      fm.predicts_obstruction = true;
      fm.hypotheses = {"d odd", "d = +-4 mod 9", "prime divisors of d = +-1 mod 5"};
      return fm;
    }
  }

  return std::nullopt;
}

namespace {

// Sorted on-surface triples mod p in lexicographic order; the first smooth
// one whose component passes `qualify` wins. Returns (class, index).
std::optional<std::pair<std::array<u64, 3>, int>> first_sorted_witness(
    const Int& m, u64 p, const std::function<int(const std::array<u64, 3>&)>& qualify) {
  u64 mm = mod_u64(m, p);
  u64 inv2 = inv_mod_u64(2, p);
  for (u64 a = 0; a < p; ++a) {
    for (u64 b = a; b < p; ++b) {
      u64 ab = mulmod(a, b, p);
      u64 cst = submod(addmod(mulmod(a, a, p), mulmod(b, b, p), p), mm, p);
      u64 disc = submod(mulmod(ab, ab, p), mulmod(4 % p, cst, p), p);
      auto r = sqrt_mod_u64(disc, p);
      if (!r) continue;
      u64 c1 = mulmod(addmod(ab, *r, p), inv2, p);
      u64 c2 = mulmod(submod(ab, *r, p), inv2, p);
      std::array<u64, 2> roots{std::min(c1, c2), std::max(c1, c2)};
      for (int t = 0; t < 2; ++t) {
        if (t == 1 && roots[1] == roots[0]) break;
        u64 c = roots[t];
        if (c < b) continue;  // keep triples sorted
        std::array<u64, 3> u{a, b, c};
        ClassInfo info = inspect_class(m, p, 1, u);
        if (!info.on_surface || info.cert_slack != 0) continue;  // need a smooth point
        int idx = qualify(u);
        if (idx >= 0) return std::make_pair(u, idx);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

ApproxCertificates sa_wa_certificates(const Int& m) {
  if (classify_m(m).tag != MTag::Generic)
    throw InvalidInput("sa_wa_certificates: m must be of generic class");
  ApproxCertificates out;
  Factorization f = factorize(m - 4);
  for (const auto& [p, e] : f.factors) {
    if (p > 3 && e % 2 == 1) {
      out.prime = p;
      break;
    }
  }
  if (!out.prime) return out;
  if (!out.prime->fits_ulong_p()) return out;
  u64 p = out.prime->get_ui();
  // weak approximation: a lift of this point pairs nontrivially with the
  // symbol built from u_i^2 - 4
  auto wa = first_sorted_witness(m, p, [&](const std::array<u64, 3>& u) {
    for (int i = 0; i < 3; ++i) {
      u64 t = submod(mulmod(u[i], u[i], p), 4 % p, p);
      if (t != 0 && legendre_u64(t, p) == -1) return i;
    }
    return -1;
  });
  if (wa) {
    out.wa_class = wa->first;
    out.wa_index = wa->second;
  }
  // strong-approximation-beyond-weak: nonresidue in u_i - 2 itself
  auto sa = first_sorted_witness(m, p, [&](const std::array<u64, 3>& u) {
    for (int i = 0; i < 3; ++i) {
      u64 t = submod(u[i], 2 % p, p);
      if (t != 0 && legendre_u64(t, p) == -1) return i;
    }
    return -1;
  });
  if (sa) {
    out.sa_class = sa->first;
    out.sa_index = sa->second;
  }
  return out;
}

const char* bm_status_str(BmStatus s) {
  switch (s) {
    case BmStatus::obstructed: return "obstructed";
    case BmStatus::unobstructed: return "unobstructed";
    case BmStatus::inconclusive: return "inconclusive";
    case BmStatus::short_circuited: return "short_circuited";
    case BmStatus::out_of_method: return "out_of_method";
  }
  return "?";
}

ObstructionReport decide_bm(const Int& m, const DecideOptions& opts) {
  if (m == 0 || m == 4) throw InvalidInput("decide_bm: the surface is singular for m = " + m.get_str());
  ObstructionReport rep;
  rep.m = m;
  rep.cls = classify_m(m);
  rep.solv = solvability(m);
  rep.kernel_ok = kernel_constraint_check(m);

  if (opts.with_points) {
    if (m > 4 && rep.cls.tag != MTag::ObviousPoint) {
      EmptinessCertificate c = certify_empty(m);
      rep.points.ball_bound = c.ball_bound;
      rep.points.shell_checked = c.shell_checked;
      rep.points.witness = c.witness;
      rep.points.status = c.status == EmptinessStatus::empty_certified ? "empty_certified" : "nonempty";
    } else {
      SearchConfig cfg;
      cfg.height = opts.height > 0 ? opts.height : 50;
      auto pts = box_search(m, cfg);
      if (rep.cls.tag == MTag::ObviousPoint) {
        Int r = rep.cls.detail;
        Point3<Int> obvious{r, 0, 0};
        if (std::find(pts.begin(), pts.end(), obvious) == pts.end()) pts.push_back(obvious);
      }
      if (!pts.empty()) {
        rep.points.status = "nonempty";
        rep.points.witness = pts.front();
      } else {
        rep.points.status = "searched_empty";
        rep.flags.push_back("emptiness_not_certified");
      }
    }
  }

  if (!rep.solv.adelically_soluble) {
    rep.bm = BmStatus::short_circuited;
    rep.flags.push_back("adelically_insoluble");
  } else {
    switch (rep.cls.tag) {
      case MTag::RationalBrauer:
        rep.bm = BmStatus::unobstructed;
        rep.flags.push_back("constant_brauer_group");
        break;
      case MTag::ObviousPoint:
        rep.bm = BmStatus::unobstructed;
        rep.flags.push_back("square_m_integral_point");
        break;
      case MTag::TranscendentalException:
        rep.bm = BmStatus::out_of_method;
        rep.flags.push_back("transcendental_class_possibly_nontrivial");
        break;
      case MTag::Singular:
        throw InvalidInput("decide_bm: singular");
      case MTag::Generic: {
        rep.relevant_places.push_back(Place::infinity());
        std::vector<Int> ps{2, 3, 5};
        for (const auto& [p, e] : factorize(m - 4).factors)
          if (p > 5) ps.push_back(p);
        std::sort(ps.begin(), ps.end());
        for (const Int& p : ps) rep.relevant_places.push_back(Place::prime(p));

        ImageOptions io;
        io.want_witnesses = opts.want_witnesses;
        io.prefer_rules = opts.prefer_rules_small_p;
        io.budget = opts.budget;
        bool partial = false;
        VecSet sum = VecSet(1) << 0;
        for (const Place& pl : rep.relevant_places) {
          LocalImage img = local_invariant_image(m, pl, io);
          if (img.completeness == Completeness::depth_capped_partial) partial = true;
          for (const auto& fl : img.flags)
            if (fl == "beyond_paper") {
              std::string tag = "beyond_paper_at_" + pl.str();
              if (std::find(rep.flags.begin(), rep.flags.end(), tag) == rep.flags.end())
                rep.flags.push_back(tag);
            }
          sum = vecset_minkowski(sum, img.vectors);
          rep.images.emplace(pl, std::move(img));
        }
        if (partial) {
          rep.bm = BmStatus::inconclusive;
          rep.flags.push_back("depth_cap_exceeded");
        } else {
          rep.bm = vecset_has(sum, 0) ? BmStatus::unobstructed : BmStatus::obstructed;
        }
        break;
      }
    }
  }

  if (rep.cls.tag == MTag::Generic) {
    rep.certs = sa_wa_certificates(m);
    rep.sa_prime = rep.certs.prime;
    rep.wa_prime = rep.certs.prime;
  }

  // internal consistency: an integral point rules out an obstruction
  if (rep.bm == BmStatus::obstructed && rep.points.witness)
    throw Error("decide_bm: obstruction reported for a surface with an integral point");
  if (rep.bm == BmStatus::obstructed && !rep.kernel_ok)
    throw Error("decide_bm: obstructed parameter violates the squarefree-kernel constraint");
  return rep;
}

nlohmann::ordered_json ObstructionReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "obstruction-report/1";
  j["m"] = m.get_str();
  j["class"] = cls.str();
  {
    nlohmann::ordered_json s;
    s["adelic"] = solv.adelically_soluble;
    nlohmann::ordered_json pl;
    for (const auto& [place, verdict] : solv.verdicts)
      pl[place.str()] = (verdict == Solubility::soluble) ? "soluble" : "insoluble";
    s["places"] = pl;
    j["solvable"] = s;
  }
  nlohmann::ordered_json rp = nlohmann::ordered_json::array();
  for (const auto& pl : relevant_places) rp.push_back(pl.str());
  j["relevant_places"] = rp;
  nlohmann::ordered_json im;
  for (const auto& [pl, img] : images) im[pl.str()] = img.to_json();
  j["images"] = im;
  if (bm == BmStatus::obstructed || bm == BmStatus::unobstructed)
    j["bm_empty"] = (bm == BmStatus::obstructed);
  else
    j["bm_empty"] = nullptr;
  j["bm_status"] = bm_status_str(bm);
  j["sa_prime"] = sa_prime ? nlohmann::ordered_json(sa_prime->get_str()) : nlohmann::ordered_json(nullptr);
  j["wa_prime"] = wa_prime ? nlohmann::ordered_json(wa_prime->get_str()) : nlohmann::ordered_json(nullptr);
  if (certs.prime) {
    nlohmann::ordered_json c;
    if (certs.wa_index >= 0) {
      c["wa_class"] = {certs.wa_class[0], certs.wa_class[1], certs.wa_class[2]};
      c["wa_index"] = certs.wa_index + 1;
    }
    if (certs.sa_index >= 0) {
      c["sa_class"] = {certs.sa_class[0], certs.sa_class[1], certs.sa_class[2]};
      c["sa_index"] = certs.sa_index + 1;
    }
    j["approx_witnesses"] = c;
  }
  j["kernel_ok"] = kernel_ok;
  j["flags"] = flags;
  {
    nlohmann::ordered_json p;
    p["status"] = points.status;
    if (points.witness) {
      const auto& w = *points.witness;
      p["witness"] = {w[0].get_str(), w[1].get_str(), w[2].get_str()};
    } else {
      p["witness"] = nullptr;
    }
    p["ball_bound"] = points.ball_bound.get_str();
    p["shell_checked"] = points.shell_checked;
    j["points"] = p;
  }
  return j;
}

}  // namespace markoff
