#ifndef DLOG_FFS_HPP
#define DLOG_FFS_HPP

#include <optional>
#include <string>
#include <vector>

#include "dlog/common.hpp"
#include "dlog/icm.hpp"
#include "dlog/poly.hpp"

// Historical small-characteristic relation generators feeding the index
// calculus pipeline: Coppersmith's method (generalized from characteristic 2
// to fixed p via the (u+v)^p identity) and the Joux-Lercier 2006 medium
// function field sieve over a rational function field.

namespace dlog::ffs {

using gf::Tower;
using icm::FactorBase;
using icm::RelationSet;
using poly::Poly;

struct CoppersmithSetup {
  u32 p = 2;
  u32 n = 0;
  Poly J;       // I = X^n + J irreducible, deg J < n^(2/3)
  u32 h = 0;    // h * p^l2 >= n
  u32 l2 = 0;   // the power is p^l2
  u32 d = 0;    // sieve degree bound for u, v
  u32 b = 0;    // smoothness bound
  Poly I;
};

// Finds the code-least low-degree J with X^n + J irreducible, picks p^l2
// nearest to sqrt(n/d) on the log scale and h = ceil(n / p^l2).
CoppersmithSetup coppersmith_setup(const Tower& tw, u32 n, u32 d, u32 b, u64 budget = 1 << 20);

// Enumerates coprime pairs (u, v) of degree <= d; for f = u X^h + v both
// f and f^(p^l2) mod I must be b-smooth.  Every relation is verified by
// modular re-expansion before insertion.
RelationSet coppersmith_relations(const Tower& tw, const CoppersmithSetup& s,
                                  const FactorBase& fb, u32 count, u64 seed,
                                  u64 budget = 1 << 22);

struct JL06Setup {
  u32 level = 1;  // tower level representing F_q
  u32 m = 0;
  Poly f, g;      // y = f(x), x = g(y)
  Poly I;         // irreducible degree-m factor of g(f(X)) - X
};

// Random f, g of degree ceil(sqrt(m)) until g(f(X)) - X has an irreducible
// factor of degree exactly m.
JL06Setup jl06_setup(const Tower& tw, u32 level, u32 m, u64 budget, u64 seed);

// Factor bases are the monic linears in X and in Y; relation indices are
// [0, q) for X + alpha (by code) and [q, 2q) for Y + beta.
struct JlBases {
  u32 q_linears = 0;  // count per side
  u32 size() const { return 2 * q_linears; }
  u32 x_index(u64 alpha_code) const { return static_cast<u32>(alpha_code); }
  u32 y_index(u64 beta_code) const { return q_linears + static_cast<u32>(beta_code); }
};

JlBases jl06_bases(const Tower& tw, const JL06Setup& s);

// Enumerates (a, b, c) in F_q^3 (seeded order, exhaustive when q^3 is within
// budget); a relation links the two sides when both are 1-smooth.  The
// defining identity x f(x) + a f(x) + b x + c = g(y) y + a y + b g(y) + c is
// asserted for every candidate.
RelationSet jl06_relations(const Tower& tw, const JL06Setup& s, const JlBases& bases,
                           u32 count, u64 seed, u64 budget = 1 << 22);

// Individual log for the JL06 field: randomizes h g^e until the x-side
// representative is 1-smooth, then reads the log from the table.
u64 jl06_individual_log(const Tower& tw, const JL06Setup& s, const JlBases& bases,
                        const Poly& g, const Poly& h, const icm::LogTable& table,
                        u64 ell, u64 seed);

// Setup files.
std::string coppersmith_to_text(const Tower& tw, const CoppersmithSetup& s);
CoppersmithSetup coppersmith_from_text(const Tower& tw, const std::string& text);
std::string jl06_to_text(const Tower& tw, const JL06Setup& s);
JL06Setup jl06_from_text(const Tower& tw, const std::string& text);

}  // namespace dlog::ffs

#endif
