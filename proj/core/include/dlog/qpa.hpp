#ifndef DLOG_QPA_HPP
#define DLOG_QPA_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlog/common.hpp"
#include "dlog/gf.hpp"
#include "dlog/group.hpp"
#include "dlog/icm.hpp"
#include "dlog/linalg.hpp"
#include "dlog/poly.hpp"

// The small-characteristic pipeline: field setup (general and Kummer),
// Bluher splitting machinery, polynomial-time relation generation (split
// triples and PGL2 coset substitutions), degree-two elimination, batch and
// BGJT eliminations, GKZ degree-halving descent with norm maps, descent trap
// detection, and the end-to-end solver.
//
// The canonical field form is  I | h1(X) X^q - h0(X),  so x^q = h0(x)/h1(x);
// every relation and elimination reduces to the numerator
//   N_{a,b,c}(X) = X h0 + a h0 + b X h1 + c h1
// of x^{q+1} + a x^q + b x + c.  Logs are taken modulo primes ell dividing
// (Q-1)/(q^k-1), which makes every base-field scalar vanish.

namespace dlog::qpa {

using gf::FF;
using gf::Tower;
using poly::Poly;

struct QpaField {
  Tower tw;          // base F_{q^k}
  u32 n = 0, dh = 1;
  Poly h0, h1, I;    // I irreducible of degree n dividing h1 X^q - h0
  Poly g;            // generator of F_{q^kn}^x, reduced mod I
  bool kummer = false;
  FF c;              // Kummer constant (I = X^(q-1) - c) when kummer
  u64 Q = 0;         // q^(kn)
  grp::FactoredInteger order;  // factorization of Q - 1
  u64 seed = 0;      // namespace for derived deterministic machinery
};

// n = q - 1, I = X^(q-1) - c with c a multiplicative generator, h1 = 1,
// h0 = c X; generator found among the linear polynomials x + a.
QpaField setup_kummer(u32 p, u32 l, u32 k, u64 seed);

// Random h0, h1 of degree <= dh until h1 X^q - h0 has an irreducible factor
// of degree exactly n (requires n <= q + dh); generator among linears.
QpaField setup_general(u32 p, u32 l, u32 k, u32 n, u32 dh, u64 budget, u64 seed);

// File form: qpa p= l= k= n= dh= h0= h1= I= g= [kummer c=] seed=
std::string field_to_text(const QpaField& F);
QpaField field_from_text(const std::string& text);

// --- big-field helpers ---------------------------------------------------------

Poly freduce(const QpaField& F, const Poly& a);
Poly fmul(const QpaField& F, const Poly& a, const Poly& b);
Poly finv(const QpaField& F, const Poly& a);
Poly fpow(const QpaField& F, const Poly& a, i128 e);  // exponent taken mod Q-1
// The residue is a base-field scalar (degree <= 0 after reduction).
bool is_scalar(const QpaField& F, const Poly& a);
grp::FqPolyStar adapter(const QpaField& F);

// --- Bluher machinery ------------------------------------------------------------

// Theorem-3 count of B with X^(q+1) + BX + B split over F_(q^K), K the
// F_q-degree of the coefficient field.
u64 bluher_count(u64 q, u32 K);

// Exhaustive scan of the level field cross-checked against the image of
// z -> (z - z^(q^2))^(q+1) / (z - z^q)^(q^2+1); InternalMismatch if the two
// disagree.  Intended for small levels (the acceptance sweep).
std::vector<FF> bluher_set(const Tower& tw, u32 level, u64 seed);

// Streaming source of Bluher values through the z-map, for levels too large
// to scan; values are deduplicated and deterministic given seed.
class BluherSampler {
public:
  BluherSampler(const Tower& tw, u32 level, u64 seed);
  std::optional<FF> next();  // nullopt when the sample budget is exhausted

private:
  const Tower* tw_;
  u32 level_;
  Rng rng_;
  u64 tried_ = 0, budget_ = 0;
  std::vector<u64> seen_;
};

struct SplitTriple {
  FF a, b, c;  // X^(q+1) + aX^q + bX + c splits completely over its level
};

// k = 2 family {(a, a^q, c) | a in F_(q^2), c in F_q, c != a^(q+1)}; WrongK
// unless the base has F_q-degree 2.
std::vector<SplitTriple> k2_triples(const Tower& tw);

// Completes (a, b) and a Bluher value B to the unique splitting triple via
// c = ab + (b - a^q)^(q+1 root adjustments); DegenerateInput when b = a^q.
SplitTriple ggmz_complete_triple(const Tower& tw, u32 level, const FF& B,
                                 const FF& a, const FF& b, u64 seed);

// --- PGL2 cosets -----------------------------------------------------------------

struct MoebiusRep {
  FF a, b, c, d;  // alpha beta gamma delta, det != 0
};

// Canonical representatives of PGL2(F_(q^k)) modulo the left PGL2(F_q)
// action (the relation-preserving equivalence): first nonzero entry scaled
// to 1, lexicographically least orbit member.  Exact size
// (q^(3k) - q^k)/(q^3 - q).
std::vector<MoebiusRep> pgl2_cosets(const Tower& tw);

// All of PGL2(F_q) embedded at base level (normalized matrices), used for
// the pairwise coset-distinctness acceptance check.
std::vector<MoebiusRep> pgl2_subfield(const Tower& tw);

// --- relation generation -----------------------------------------------------------

enum class RelMethod { ggmz, joux, all };

// Factor base: monic linears plus h1 (when non-constant).
icm::FactorBase qpa_factor_base(const QpaField& F);

// ggmz: split triples (Bluher completion, or the k = 2 family); the right
// side numerator N(X) is tested 1-smooth.  joux: PGL2 coset substitutions
// into X^q - X.  Every relation is verified as a field identity modulo
// base-field scalars before insertion.
icm::RelationSet relgen_qpa(const QpaField& F, const icm::FactorBase& fb,
                            RelMethod method, u32 count, u64 budget, u64 seed,
                            u32 threads = 1);

// --- degree-two elimination ----------------------------------------------------------

struct Degree2System {
  FF u0, u1, v0, v1;  // b = u0 + a u1, c = v0 + a v1 force P | N_{a,b,c}
};

// Solves the 2x2 linear divisibility condition; DegenerateSystem when
// singular.  P must be a monic irreducible quadratic at the given level.
Degree2System deg2_system(const QpaField& F, u32 level, const Poly& P);

// One verified elimination step.  The identity, with every piece at base
// level, reads  value(P) = scalar * prod factors^e * prod lifts^e  in the
// big field; lift entries carry exponents divisible by ell and exist so the
// identity is exact for mod-ell eliminations (their log contribution
// vanishes).
struct Elimination {
  std::vector<std::pair<Poly, i64>> factors;
  std::vector<std::pair<Poly, i64>> lifts;
  FF scalar;
  const char* method = "";
};

bool verify_elimination(const QpaField& F, const Poly& P, const Elimination& e);

// Direct (GGMZ) degree-two elimination at the given level: for each Bluher
// value solve Eq-style  B = (u0+u1 a-a^q)^(q+1) / (v0+(v1-u0)a-u1 a^2)^q
// for a by root extraction, rebuild the split triple, divide P out of the
// numerator.  For F_q-degree 2 the k = 2 family replaces the Bluher set.
// Level-d results are normed down to base-level factors of degree | d.
// NoEliminationFound when every candidate fails.
Elimination deg2_eliminate(const QpaField& F, u32 level, const Poly& P, u64 seed,
                           u64 budget = 4096);

// The base tower augmented with the relative extension of the given level,
// built deterministically from the field seed (level 1: the base itself).
Tower ext_tower(const QpaField& F, u32 level);

// Joux batch relations for the translate family {X^2 + uX + v}: rows are
// coset substitutions of X^2 + uX into X^q - X; exps index the local
// unknowns (irreducible quadratics, by code of v), rhs indexes known linears
// in the qpa factor base.
icm::RelationSet joux_deg2_batch(const QpaField& F, const FF& u, u64 budget, u64 seed);

// Numeric batch solve over the whole Frobenius orbit family of u (Kummer):
// returns log mod ell per irreducible quadratic code, given the linear log
// table.  RankDeficient when the joint system is underdetermined.
std::map<u64, u64> deg2_batch_logs(const QpaField& F, const FF& u,
                                   const icm::LogTable& table, u64 ell, u64 seed,
                                   u64 budget = 4096);

// Kummer-only solidarity elimination: joins the batches of the whole
// Frobenius orbit of u (variables reduced to orbit classes) and extracts a
// certificate for P with exact lift bookkeeping.  RankDeficient when the
// joint system does not determine P.
Elimination deg2_batch_eliminate(const QpaField& F, const Poly& P, u64 ell, u64 seed,
                                 u64 budget = 4096);

// --- higher-degree eliminations ---------------------------------------------------------

// BGJT step: translates P + v over F_(q^k) as unknowns, coset rows with
// (d_h+1)D-degree right sides tested floor(D/2)-smooth, dense solve mod ell,
// integer-lifted certificate.  D = 2 delegates to the batch eliminator.
//   InsufficientRelations: fewer than q^k + 8 smooth rows within budget.
//   RankDeficient: the system does not determine log P.
Elimination bgjt_eliminate(const QpaField& F, const Poly& P, u64 ell,
                           const icm::LogTable* logs_known, u64 budget, u64 seed);

// GKZ step: P irreducible of degree 2d with gcd(d, n) = 1 factors over the
// degree-d extension into conjugate quadratics; one is eliminated there and
// the pieces are normed down to factors of degree dividing d.
// BadDegree when gcd(d, n) != 1; TrapElement from the trap check.
Elimination gkz_eliminate(const QpaField& F, const Poly& P, u64 seed,
                          std::map<u32, Tower>* ext_cache = nullptr);

// True iff gcd(P, h1 X^(q^j) - h0 mod P) != 1 for some 1 <= j <= j_max
// (j_max = 0 selects a bound covering every extension the descent uses).
bool trap_check(const QpaField& F, const Poly& P, u32 j_max = 0);

// Wan-style representative: random e and filler t until
// R = rep(h g^e) + I t is irreducible of degree exactly 2^ceil(log2(n+1))
// and not a descent trap; R = h g^e mod I.
std::pair<u64, Poly> power_of_two_rep(const QpaField& F, const Poly& h, u64 seed);

// Continued-fraction initial split: extended Euclid on (I, rep(h g^e))
// stopped at the balance point, retried until both sides have no irreducible
// factor above degree_cap.  Returns (e, r1, r2) with h g^e = r1/r2 mod I.
struct CfSplit {
  u64 e;
  Poly r1, r2;
};
CfSplit initial_split_cf(const QpaField& F, const Poly& h, u32 degree_cap, u64 seed,
                         u64 budget = 65536);

// --- descent -----------------------------------------------------------------------------

enum class Strategy { gkz, bgjt, auto_pick };

enum class NodeKind { root, gkz, deg2, deg2_batch, bgjt, leaf, lift, scalar };
const char* node_kind_name(NodeKind k);

struct DescentNode {
  Poly pol;            // base-level polynomial (degree 0 for scalar nodes)
  i64 exp = 1;         // exponent on the edge to the parent
  NodeKind kind = NodeKind::leaf;
  std::vector<DescentNode> children;
};

struct DescentTree {
  DescentNode root;
  u64 ell = 0;
  u32 node_count() const;
  u32 depth() const;  // edge depth of the elimination recursion
};

// Per-node identity: value(node) = prod value(child)^exp over all children
// (lift and scalar children included).  Checked for every internal node.
bool verify_tree(const QpaField& F, const DescentTree& t);

std::string tree_to_text(const QpaField& F, const DescentTree& t);
DescentTree tree_from_text(const QpaField& F, const std::string& text);

// Recursive elimination of R down to the factor base; leaves resolved from
// the log table.  Returns log(R) mod ell and the machine-checkable tree.
std::pair<u64, DescentTree> descend(const QpaField& F, const Poly& R,
                                    const icm::LogTable& logs, Strategy strat, u64 ell,
                                    u64 seed, std::map<u32, Tower>* ext_cache = nullptr);

// --- Frobenius orbit reduction (Kummer) ------------------------------------------------------

// Orbit-reduced linear algebra: variables are orbits of linears under
// a -> a^q / c;  log(x + a^q/c) = q log(x + a) mod ell.  Returns the
// expanded table (same indexing as the unreduced one) and reports the
// reduced variable count.
icm::LogTable orbit_reduced_logs(const QpaField& F, const icm::FactorBase& fb,
                                 const icm::RelationSet& rels, u64 ell, u32 anchor,
                                 u64 seed, u32* reduced_vars = nullptr);

// --- end-to-end solver --------------------------------------------------------------------

struct SolverOptions {
  u64 seed = 1;
  u32 threads = 1;
  u64 generic_threshold = 4;  // primes <= threshold go to Pohlig-Hellman
  Strategy strategy = Strategy::auto_pick;
  bool audit = false;
};

// Multi-target solver with cached relations, per-ell log tables and
// extension towers.
class Solver {
public:
  Solver(QpaField F, SolverOptions opt);

  const QpaField& field() const { return F_; }
  const SolverOptions& options() const { return opt_; }

  // Full discrete log of h to the field generator; asserts g^x = h.
  u64 solve(const Poly& h);
  // Retained audit artifacts from the last solve (when opt.audit).
  const std::vector<std::pair<u64, DescentTree>>& last_trees() const { return trees_; }

  // Primes handled by the qpa pipeline (the rest goes to Pohlig-Hellman).
  std::vector<u64> qpa_primes() const;
  const icm::FactorBase& factor_base();
  const icm::RelationSet& relations();
  const icm::LogTable& log_table(u64 ell);

private:
  QpaField F_;
  SolverOptions opt_;
  std::optional<icm::FactorBase> fb_;
  std::optional<icm::RelationSet> rels_;
  std::map<u64, icm::LogTable> logs_;
  std::map<u32, Tower> ext_cache_;
  std::vector<std::pair<u64, DescentTree>> trees_;
};

// One-shot convenience wrapper.
u64 solve_dlp(const QpaField& F, const Poly& h, u64 seed = 1);

}  // namespace dlog::qpa

#endif
