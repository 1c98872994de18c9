#ifndef DLOG_GF_HPP
#define DLOG_GF_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlog/common.hpp"

// Exact arithmetic in finite-field towers
//
//   F_p  <  F_q = F_{p^l}  <  F_{q^k}          (the "base" level, 1)
//                              F_{q^{kd}}       (relative extensions, level d >= 2)
//
// The base is a single absolute extension F_p[X]/(f) of degree m = l*k; the
// intermediate subfields are located via Frobenius fixed points.  Elements
// are coordinate vectors over F_p (base) or over the base field (extensions,
// stored flattened to F_p coordinates).  A Tower is immutable once built and
// safe to share across threads; elements are plain data.

namespace dlog::gf {

using Coord = u32;

struct FF {
  u32 level = 1;              // 1 = base F_{q^k}; d >= 2 = relative extension of degree d
  std::vector<Coord> c;       // F_p coordinates, low-degree first

  bool operator==(const FF&) const = default;
  bool is_zero() const {
    for (Coord v : c) if (v) return false;
    return true;
  }
};

// Dense F_p[X] helpers on raw coefficient vectors (low-first, trimmed).
// These exist below the generic poly module so the tower can validate and
// precompute without a circular dependency.
namespace fppoly {
using V = std::vector<Coord>;
void trim(V& a);
int deg(const V& a);
V add(const V& a, const V& b, u32 p);
V sub(const V& a, const V& b, u32 p);
V mul(const V& a, const V& b, u32 p);
V rem(V a, const V& b, u32 p);
V gcd(V a, V b, u32 p);
V powmod(const V& base, u128 e, const V& mod, u32 p);
bool is_irreducible(const V& f, u32 p);
V random_monic(u32 deg, u32 p, Rng& rng);
}  // namespace fppoly

class Tower {
public:
  // Builds F_p[X]/(defining_poly); defining_poly monic irreducible of degree
  // l*k.  Checks p prime (trial division, p < 2^32) and irreducibility.
  Tower(u32 p, u32 l, u32 k, std::vector<Coord> defining_poly);

  // Convenience: find a defining polynomial deterministically from seed.
  static Tower make(u32 p, u32 l, u32 k, u64 seed);

  u32 p() const { return p_; }
  u32 l() const { return l_; }
  u32 k() const { return k_; }
  u32 m() const { return m_; }                    // l*k, F_p-degree of the base
  u64 q() const { return q_; }                    // p^l
  u64 qk() const { return qk_; }                  // p^(l*k), base field size
  const std::vector<Coord>& defining_poly() const { return f_; }

  // F_p-degree and field size of a level (level 1 = base, d >= 2 = extension).
  u32 deg_p(u32 level) const;
  u64 size(u32 level) const;                      // fails if > 2^63

  bool has_ext(u32 d) const { return exts_.count(d) != 0; }
  std::vector<u32> ext_degrees() const;
  // Defining polynomial of extension d, as base-level elements (monic, length d+1).
  const std::vector<FF>& ext_poly(u32 d) const;

  // --- element constructors -------------------------------------------------
  FF zero(u32 level = 1) const;
  FF one(u32 level = 1) const;
  FF from_coords(u32 level, std::vector<Coord> c) const;   // canonicalizes mod p
  FF from_u64(u64 v, u32 level = 1) const;                 // v mod p embedded as scalar
  // Embed a base element as a constant of extension level d.
  FF embed(const FF& x, u32 level) const;
  // A base element whose coordinates under the power basis are e_i (i-th basis vector).
  FF gen(u32 level = 1) const;                              // the class of X (resp. Z)

  // --- arithmetic -------------------------------------------------------------
  FF add(const FF& x, const FF& y) const;
  FF sub(const FF& x, const FF& y) const;
  FF neg(const FF& x) const;
  FF mul(const FF& x, const FF& y) const;
  FF inv(const FF& x) const;                                // DivisionByZero on 0
  FF pow(FF x, u128 e) const;
  FF pow_signed(const FF& x, i128 e) const;

  // --- Frobenius and norms ----------------------------------------------------
  // x^(p^e); precomputed basis-image matrices make this a matrix-vector product.
  FF frob_p(const FF& x, u64 e) const;
  FF frob_q(const FF& x, u64 j = 1) const { return frob_p(x, j * l_); }
  FF frob_qk(const FF& x, u64 j = 1) const { return frob_p(x, j * m_); }
  // Unique q-th root (inverse of the q-power map on the element's level).
  FF qth_root(const FF& x) const;

  // Relative norm from level d down to the base: prod_{i<d} x^((q^k)^i).
  // LevelMismatch at base level unless allow_identity.
  FF rel_norm(const FF& x, bool allow_identity = false) const;

  // --- subfield predicates ------------------------------------------------------
  bool in_subfield_q(const FF& x) const { return frob_q(x) == x; }
  bool in_base(const FF& x) const;          // for extension-level x
  // Project an extension-level constant down to a base element (asserts in_base).
  FF to_base(const FF& x) const;

  // --- encoding -------------------------------------------------------------
  // Integer code sum c_i p^i over the flattened F_p coordinates.
  u64 encode(const FF& x) const;
  FF decode(u64 code, u32 level = 1) const;

  // Line format: tower p=<p> l=<l> k=<k> poly=<c0,c1,...>
  std::string to_line() const;
  static Tower from_line(const std::string& line);

private:
  u32 p_, l_, k_, m_;
  u64 q_, qk_;
  std::vector<Coord> f_;
  std::vector<std::vector<Coord>> red_;          // X^(m+i) mod f, i in [0, m)
  std::vector<std::vector<Coord>> frob_;         // frob_[e]: m x m matrix, row-major

  struct Ext {
    u32 d;
    std::vector<FF> g;                           // monic defining poly over base
    std::vector<std::vector<FF>> red;            // Z^(d+i) mod g
    std::vector<std::vector<Coord>> frob;        // (dm x dm) matrices per e
  };
  std::map<u32, Ext> exts_;

  const Ext& ext(u32 d) const;
  void check_level(const FF& x) const;
  FF mul_base(const FF& x, const FF& y) const;
  FF mul_ext(const Ext& E, const FF& x, const FF& y) const;
  FF inv_base(const FF& x) const;
  FF inv_ext(const Ext& E, const FF& x) const;

  friend Tower build_extension(const Tower& tw, u32 d, u64 seed);
};

// Registers a relative extension of degree d >= 2 with a random monic
// irreducible found by rejection sampling (deterministic given seed).
// Returns an augmented copy; SearchExhausted after 100*d failed trials.
Tower build_extension(const Tower& tw, u32 d, u64 seed);

// Returns x with x^(N/r) != 1 for every prime r | N, where N = size(level)-1.
// order_factors must multiply to N (BadFactorization otherwise).
FF find_generator(const Tower& tw, u32 level,
                  const std::vector<std::pair<u64, u32>>& order_factors, u64 seed);

}  // namespace dlog::gf

#endif
