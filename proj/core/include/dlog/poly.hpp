#ifndef DLOG_POLY_HPP
#define DLOG_POLY_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dlog/common.hpp"
#include "dlog/gf.hpp"

// Dense univariate polynomial algebra over any tower level: ring arithmetic,
// gcd, irreducibility, full factorization (square-free + distinct-degree +
// equal-degree splitting), smoothness decomposition and root extraction.
// All randomized routines take explicit seeds and are deterministic.

namespace dlog::poly {

using gf::FF;
using gf::Tower;

struct Poly {
  u32 level = 1;
  std::vector<FF> c;  // low-degree first, trimmed; zero polynomial has empty c

  bool operator==(const Poly&) const = default;
  bool is_zero() const { return c.empty(); }
};

inline int deg(const Poly& f) { return static_cast<int>(f.c.size()) - 1; }

Poly zero(u32 level = 1);
Poly one(const Tower& tw, u32 level = 1);
Poly xpoly(const Tower& tw, u32 level = 1);                       // X
Poly from_coeffs(const Tower& tw, u32 level, std::vector<FF> c);  // trims
Poly constant(const Tower& tw, const FF& a);
// monic X + a
Poly linear(const Tower& tw, const FF& a);
void trim(Poly& f);

const FF& lc(const Poly& f);          // leading coefficient (f != 0)
FF eval(const Tower& tw, const Poly& f, const FF& x);
bool is_monic(const Tower& tw, const Poly& f);

Poly add(const Tower& tw, const Poly& a, const Poly& b);
Poly sub(const Tower& tw, const Poly& a, const Poly& b);
Poly neg(const Tower& tw, const Poly& a);
Poly mul(const Tower& tw, const Poly& a, const Poly& b);
Poly muls(const Tower& tw, const Poly& a, const FF& s);           // scalar multiple
Poly shift_up(const Poly& a, u32 t);                              // a * X^t
std::pair<Poly, Poly> divmod(const Tower& tw, const Poly& a, const Poly& b);
Poly rem(const Tower& tw, const Poly& a, const Poly& b);
Poly quot(const Tower& tw, const Poly& a, const Poly& b);         // exact or floor
Poly gcd(const Tower& tw, Poly a, Poly b);                        // monic result
Poly make_monic(const Tower& tw, const Poly& a, FF* lc_out = nullptr);
Poly powmod(const Tower& tw, Poly base, u128 e, const Poly& mod);
Poly derivative(const Tower& tw, const Poly& a);
// a(b) mod m  (Horner)
Poly compose_mod(const Tower& tw, const Poly& a, const Poly& b, const Poly& m);
// coefficient-wise p^e-power (the tilde map when e = l)
Poly coeff_frob(const Tower& tw, const Poly& a, u64 e);

// Extended Euclid: returns (g, s, t) with s*a + t*b = g (g monic).
struct Eea { Poly g, s, t; };
Eea eea(const Tower& tw, const Poly& a, const Poly& b);

// Lift a base-level polynomial's coefficients into extension level d.
Poly lift(const Tower& tw, const Poly& a, u32 level);
// Project a level-d polynomial with base coefficients down (asserts).
Poly project(const Tower& tw, const Poly& a);

struct Factorization {
  FF unit;                                        // nonzero field element
  std::vector<std::pair<Poly, u32>> factors;      // monic irreducible, multiplicity
};

// Multiplies the factorization back out.
Poly expand(const Tower& tw, const Factorization& fa);

bool is_irreducible(const Tower& tw, const Poly& f);
Factorization factor(const Tower& tw, const Poly& f, u64 seed);
// b-smooth part (fully factored) plus unfactored cofactor with all factors of
// degree > b; f is b-smooth iff the cofactor is constant.
std::pair<Factorization, Poly> smooth_part(const Tower& tw, const Poly& f, u32 b, u64 seed);
bool is_smooth(const Tower& tw, const Poly& f, u32 b, u64 seed);
// All roots in the level field, with multiplicity.
std::vector<FF> roots_in_field(const Tower& tw, const Poly& f, u64 seed);

Poly random_poly(const Tower& tw, u32 level, int degree, Rng& rng);
Poly random_monic(const Tower& tw, u32 level, u32 degree, Rng& rng);
Poly random_irreducible(const Tower& tw, u32 level, u32 degree, u64 seed);

// Minimal polynomial over the base field of an extension-level element.
Poly min_poly_over_base(const Tower& tw, const FF& x);

// Text encoding: deg=<d>;<coeff codes comma-separated low-first>
std::string encode(const Tower& tw, const Poly& f);
Poly decode(const Tower& tw, u32 level, const std::string& s);

}  // namespace dlog::poly

#endif
