#ifndef DLOG_GROUP_HPP
#define DLOG_GROUP_HPP

#include <functional>
#include <unordered_map>
#include <vector>

#include "dlog/common.hpp"
#include "dlog/gf.hpp"
#include "dlog/poly.hpp"

// Generic cyclic-group DLP algorithms (baby-step giant-step, Pollard rho,
// Pohlig-Hellman) over an abstract group adapter, plus the integer
// factorization utility they require.
//
// An adapter provides:
//   using Elem = ...;                    value type, copyable, ==
//   Elem identity() const;
//   Elem op(const Elem&, const Elem&) const;
//   Elem inv(const Elem&) const;
//   u64 order() const;                   exact group order
//   u64 code(const Elem&) const;         injective encoding (collision tables)

namespace dlog::grp {

struct FactoredInteger {
  u64 n = 1;
  std::vector<std::pair<u64, u32>> factors;  // (prime, exponent), primes increasing
};

bool is_prime_u64(u64 n);
// Complete factorization: trial division to 1e6, then Brent-cycle Pollard rho.
FactoredInteger int_factor(u64 n);

// CRT combination of pairwise coprime residues; returns (value, modulus).
std::pair<u64, u64> crt_combine(const std::vector<std::pair<u64, u64>>& residues);

template <class G>
typename G::Elem gpow(const G& g, typename G::Elem base, u64 e) {
  typename G::Elem r = g.identity();
  while (e) {
    if (e & 1) r = g.op(r, base);
    base = g.op(base, base);
    e >>= 1;
  }
  return r;
}

// Statistics hooks for the empirical iteration-count checks.
struct RhoStats {
  u64 iterations = 0;
  u32 restarts = 0;
};

namespace detail {
constexpr u64 kBsgsOrderCap = 1ULL << 40;
constexpr u32 kRhoMaxRestarts = 20;
}  // namespace detail

// Shanks baby-step giant-step within the subgroup of the given order.
// Throws NotInSubgroup when no collision occurs, InstanceTooLarge above 2^40.
template <class G>
u64 bsgs(const G& g, const typename G::Elem& base, const typename G::Elem& target,
         u64 order) {
  DLOG_CHECK(order >= 1, errc::parse_error, "bsgs: order must be positive");
  DLOG_CHECK(order <= detail::kBsgsOrderCap, errc::instance_too_large,
             "bsgs: order above 2^40, use index calculus");
  if (target == g.identity()) return 0;
  u64 M = 1;
  while (M * M < order) M++;
  std::unordered_map<u64, u32> table;
  table.reserve(static_cast<std::size_t>(M) * 2);
  typename G::Elem cur = g.identity();
  for (u64 j = 0; j < M; j++) {
    table.emplace(g.code(cur), static_cast<u32>(j));
    cur = g.op(cur, base);
  }
  typename G::Elem giant = g.inv(gpow(g, base, M));  // g^(-M)
  cur = target;
  for (u64 i = 0; i <= M; i++) {
    auto it = table.find(g.code(cur));
    if (it != table.end()) {
      u64 x = (i * M + it->second) % order;
      return x;
    }
    cur = g.op(cur, giant);
  }
  fail(errc::not_in_subgroup, "bsgs: no collision");
}

// Pollard rho with the classical 3-way partition walk and Floyd cycle
// detection.  Requires the subgroup order of base to be prime; restarts with
// a fresh seed whenever the collision denominator is not invertible.
template <class G>
u64 pollard_rho_log(const G& g, const typename G::Elem& base,
                    const typename G::Elem& target, u64 prime_order, u64 seed,
                    RhoStats* stats = nullptr) {
  using Elem = typename G::Elem;
  if (target == g.identity()) return 0;
  if (prime_order <= 3) {
    // walk too coarse for tiny groups; direct scan
    Elem cur = g.identity();
    for (u64 x = 0; x < prime_order; x++) {
      if (cur == target) return x;
      cur = g.op(cur, base);
    }
    fail(errc::not_in_subgroup, "rho: tiny-order scan found nothing");
  }
  for (u32 restart = 0; restart < detail::kRhoMaxRestarts; restart++) {
    Rng rng(seed, "grp.rho", restart);
    u64 a0 = rng.below(prime_order), b0 = rng.below(prime_order);
    Elem x0 = g.op(gpow(g, base, a0), gpow(g, target, b0));
    // partition by the low byte of the element encoding
    auto step = [&](Elem& x, u64& a, u64& b) {
      switch ((g.code(x) & 0xff) % 3) {
        case 0: x = g.op(x, target); b = addmod(b, 1, prime_order); break;
        case 1: x = g.op(x, x); a = addmod(a, a, prime_order); b = addmod(b, b, prime_order); break;
        default: x = g.op(x, base); a = addmod(a, 1, prime_order); break;
      }
    };
    Elem xs = x0, xf = x0;
    u64 as = a0, bs = b0, af = a0, bf = b0;
    u64 cap = 64 + 16 * prime_order;  // generous; expected ~sqrt order
    for (u64 it = 0; it < cap; it++) {
      step(xs, as, bs);
      step(xf, af, bf);
      step(xf, af, bf);
      if (stats) stats->iterations++;
      if (xs == xf) break;
    }
    if (!(xs == xf)) continue;
    u64 num = submod(af, as, prime_order);
    u64 den = submod(bs, bf, prime_order);
    if (den == 0) {
      if (stats) stats->restarts++;
      continue;
    }
    u64 x = mulmod(num, invmod(den, prime_order), prime_order);
    if (gpow(g, base, x) == target) return x;
    if (stats) stats->restarts++;
  }
  fail(errc::retries_exhausted, "rho: restarts exhausted (non-prime order or target outside subgroup)");
}

// Pohlig-Hellman reduction: per prime power, digit-by-digit lifting with
// inner DLPs of prime order solved by bsgs (small) or rho (large).
template <class G>
u64 pohlig_hellman(const G& g, const typename G::Elem& base,
                   const typename G::Elem& target, const FactoredInteger& nf,
                   u64 seed = 1) {
  using Elem = typename G::Elem;
  u64 N = nf.n;
  std::vector<std::pair<u64, u64>> residues;
  for (auto& [pi, ei] : nf.factors) {
    u64 pe = 1;
    for (u32 t = 0; t < ei; t++) pe *= pi;
    Elem gi = gpow(g, base, N / pe);        // order pe
    Elem hi = gpow(g, target, N / pe);
    // digits of x_i base pi, least significant first
    Elem g1 = gpow(g, gi, pe / pi);         // order pi
    u64 xi = 0, pj = 1;
    Elem rest = hi;
    for (u32 t = 0; t < ei; t++) {
      Elem d = gpow(g, rest, pe / (pj * pi));
      u64 digit;
      if (pi <= (1ULL << 20))
        digit = bsgs(g, g1, d, pi);
      else
        digit = pollard_rho_log(g, g1, d, pi, seed + t);
      xi += digit * pj;
      rest = g.op(rest, g.inv(gpow(g, gi, digit * pj)));
      pj *= pi;
    }
    residues.emplace_back(xi, pe);
  }
  return crt_combine(residues).first;
}

// --- concrete adapters -------------------------------------------------------

// Multiplicative group of Z/pZ (p prime), or a subgroup of stated order.
struct ZpStar {
  using Elem = u64;
  u64 p;
  u64 N;  // group (or subgroup) order
  ZpStar(u64 prime, u64 order_n) : p(prime), N(order_n) {}
  explicit ZpStar(u64 prime) : p(prime), N(prime - 1) {}
  Elem identity() const { return 1; }
  Elem op(Elem a, Elem b) const { return mulmod(a, b, p); }
  Elem inv(Elem a) const { return invmod(a, p); }
  u64 order() const { return N; }
  u64 code(Elem a) const { return a; }
};

// Multiplicative group of F_{q^k}[X]/(I); elements are reduced polynomials.
struct FqPolyStar {
  using Elem = poly::Poly;
  const gf::Tower* tw;
  poly::Poly I;
  u64 N;
  FqPolyStar(const gf::Tower& t, poly::Poly modulus, u64 order_n)
      : tw(&t), I(std::move(modulus)), N(order_n) {}
  Elem identity() const { return poly::one(*tw, I.level); }
  Elem op(const Elem& a, const Elem& b) const { return poly::rem(*tw, poly::mul(*tw, a, b), I); }
  Elem inv(const Elem& a) const {
    auto e = poly::eea(*tw, a, I);
    DLOG_CHECK(poly::deg(e.g) == 0, errc::division_by_zero, "inv: not invertible mod I");
    return poly::muls(*tw, e.s, tw->inv(e.g.c[0]));
  }
  u64 order() const { return N; }
  // Injective when the field has at most 2^64 elements (all desk-scale
  // instances); larger fields fall back to a hash, and every caller verifies
  // its answer by exponentiation anyway.
  u64 code(const Elem& a) const {
    u64 sz = tw->size(I.level);
    u128 acc = 0, mult = 1;
    bool fits = true;
    for (auto& cf : a.c) {
      u64 cc = tw->encode(cf);
      acc += mult * cc;
      mult *= sz;
      if (mult >> 64) { fits = false; break; }
    }
    if (fits && (acc >> 64) == 0) return static_cast<u64>(acc);
    u64 h = 1469598103934665603ULL;
    for (auto& cf : a.c) {
      u64 cc = tw->encode(cf);
      h = fnv1a(&cc, sizeof cc, h);
    }
    return h;
  }
};

}  // namespace dlog::grp

#endif
