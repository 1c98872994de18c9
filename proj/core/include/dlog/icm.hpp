#ifndef DLOG_ICM_HPP
#define DLOG_ICM_HPP

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dlog/common.hpp"
#include "dlog/gf.hpp"
#include "dlog/group.hpp"
#include "dlog/linalg.hpp"
#include "dlog/poly.hpp"

// The index calculus skeleton: indexed factor bases, verified relation
// accumulation, kernel-based log extraction, the Enge-Gaudry row-echelon
// variant, and the two basic concrete instances (prime field and small
// characteristic polynomial field).

namespace dlog::icm {

using gf::Tower;
using poly::Poly;

enum class FbKind { int_primes, poly_irred, qpa_linears };

// Packs the coefficient codes of a polynomial into one u64 (injective for
// every desk-scale base; used for factor-base lookup and file formats).
u64 poly_code(const Tower& tw, const Poly& f);

struct FactorBase {
  FbKind kind = FbKind::int_primes;
  u64 B = 0;                       // int bound
  u32 level = 1, b = 0;            // poly level and degree bound
  std::vector<u64> ints;
  std::vector<Poly> polys;
  u32 core = 0;                    // elements below this index form the smoothness base
  std::unordered_map<u64, u32> index;

  u32 size() const { return kind == FbKind::int_primes ? static_cast<u32>(ints.size())
                                                       : static_cast<u32>(polys.size()); }
  std::optional<u32> lookup_int(u64 v) const;
  std::optional<u32> lookup_poly(const Tower& tw, const Poly& f) const;

  static FactorBase primes_up_to(u64 B);
  // All monic irreducibles of degree <= b at the given level, ordered by
  // degree then packed code.
  static FactorBase poly_irreducibles(const Tower& tw, u32 level, u32 b);
  // All monic linears X + a ordered by code(a); h1 appended with a reserved
  // index when it is not constant.
  static FactorBase qpa_linears(const Tower& tw, const Poly& h1);

  // Appends a special element with a reserved index (e.g. the generator).
  u32 append_special_int(u64 v);
  u32 append_special_poly(const Tower& tw, const Poly& f);

  std::string to_text(const Tower* tw) const;
  static FactorBase from_text(const Tower* tw, const std::string& text);
};

// FNV hash of the factor-base file bytes; recorded in relation files.
u64 fb_hash(const FactorBase& fb, const Tower* tw);

// A relation asserts  prod_i fb[i]^exps_i = g^anchor_e  in the group, up to
// the unit convention of the pipeline that produced it.  rhs holds known-log
// terms for batch systems; it does not appear in relation files.
struct Relation {
  std::vector<std::pair<u32, i64>> exps;
  std::vector<std::pair<u32, i64>> rhs;
  i64 anchor_e = 0;
  std::string tag;

  void normalize();                 // sort, merge, drop zeros
  u64 key() const;                  // dedup key over the normalized content
};

struct RelationSet {
  std::vector<Relation> rels;

  // Verifies then inserts; returns false when the verifier rejects or the
  // relation duplicates an existing one.
  bool insert(Relation r, const std::function<bool(const Relation&)>& verify);
  void sort_canonical();

private:
  std::unordered_map<u64, u32> seen_;
};

struct LogTable {
  u64 mod = 0;
  u32 anchor = 0;
  std::vector<u64> v;

  u64 at(u32 i) const { return v.at(i); }
};

// Kernel-vector log extraction (Lemma-1 style): builds the sparse relation
// matrix mod ell, finds a kernel vector by Wiedemann, rescales the anchor
// entry to 1 and validates every relation against the table.
//   AnchorVanishes: anchor kernel entry 0 after 10 kernel retries.
//   RankTooLow: two independent kernel vectors are not proportional.
LogTable logs_from_relations(const RelationSet& rels, u32 fb_size, u64 ell,
                             u32 anchor, u64 seed);

// --- basic concrete relation generators -------------------------------------

RelationSet relgen_prime_field(u64 p, u64 g, const FactorBase& fb, u32 count, u64 seed);

// F_{p^n} (or F_{q^m}) as level[X]/(I); relations g^e = unit * prod f^e_f with
// scalar units discarded.
RelationSet relgen_small_char(const Tower& tw, const Poly& I, const Poly& g,
                              const FactorBase& fb, u32 count, u64 seed);

// Individual logarithm by randomization h*g^e until the residue is b-smooth.
u64 individual_log_basic(const Tower& tw, const Poly& I, const Poly& g, const Poly& h,
                         const FactorBase& fb, const LogTable& table, u64 ell, u64 seed);
u64 individual_log_prime(u64 p, u64 g, u64 h, const FactorBase& fb,
                         const LogTable& table, u64 ell, u64 seed);

// --- Enge-Gaudry-Diem variant ------------------------------------------------

// express(elem) returns the factor-base exponent vector of elem, or nullopt.
// Collects m+1 expressions of g^a h^b, row-reduces densely, extracts a
// vanishing row and returns the log of h mod ell (prime).  Retries fresh
// randomizations while the vanishing row has b' = 0, then RetriesExhausted.
template <class G>
u64 enge_gaudry_solve(
    const G& grp, const typename G::Elem& g, const typename G::Elem& h, u32 m,
    const std::function<std::optional<std::vector<std::pair<u32, i64>>>(
        const typename G::Elem&)>& express,
    u64 ell, u64 seed) {
  u64 N = grp.order();
  for (u32 attempt = 0; attempt < 10; attempt++) {
    Rng rng(seed, "icm.enge_gaudry", attempt);
    std::vector<std::vector<std::pair<u32, i64>>> rows;
    std::vector<u64> as, bs;
    u64 tries = 0, cap = 4000ULL * (m + 1);
    while (rows.size() < m + 1) {
      DLOG_CHECK(++tries <= cap, errc::budget_exhausted, "enge_gaudry: expression yield stalled");
      u64 a = rng.below(N), b = rng.below(N);
      auto elem = grp.op(gpow(grp, g, a), gpow(grp, h, b));
      auto ex = express(elem);
      if (!ex) continue;
      rows.push_back(*ex);
      as.push_back(a % ell);
      bs.push_back(b % ell);
    }
    auto M = linalg::DenseMatrix::zeros(static_cast<u32>(rows.size()), m, ell);
    for (u32 i = 0; i < rows.size(); i++)
      for (auto& [j, e] : rows[i]) M.at(i, j) = addmod(M.at(i, j), smod(e, ell), ell);
    auto rr = linalg::dense_rref(M);
    for (u32 i = rr.rank; i < rows.size(); i++) {
      u64 ap = 0, bp = 0;
      for (u32 j = 0; j < rows.size(); j++) {
        ap = addmod(ap, mulmod(rr.transform.at(i, j), as[j], ell), ell);
        bp = addmod(bp, mulmod(rr.transform.at(i, j), bs[j], ell), ell);
      }
      if (bp == 0) continue;
      // g^a' h^b' = 1  =>  x = -a'/b' mod ell
      u64 x = mulmod(submod(0, ap, ell), invmod(bp, ell), ell);
      // verify in the ell-subgroup
      u64 e = static_cast<u64>(static_cast<u128>(x) * (N / ell) % N);
      if (gpow(grp, g, e) == gpow(grp, h, N / ell)) return x;
    }
  }
  fail(errc::retries_exhausted, "enge_gaudry: vanishing rows kept failing");
}

// --- file formats -------------------------------------------------------------

std::string relations_to_text(const RelationSet& rels, u64 fbhash,
                              std::optional<u64> mod_hint);
RelationSet relations_from_text(const std::string& text, u64* fbhash_out = nullptr,
                                std::optional<u64>* mod_hint_out = nullptr);

std::string logtable_to_text(const LogTable& t);
LogTable logtable_from_text(const std::string& text);

}  // namespace dlog::icm

#endif
