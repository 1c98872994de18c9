#include "dlog/poly.hpp"

#include <algorithm>
#include <sstream>

namespace dlog::poly {

void trim(Poly& f) {
  while (!f.c.empty() && f.c.back().is_zero()) f.c.pop_back();
}

Poly zero(u32 level) { return Poly{level, {}}; }

Poly one(const Tower& tw, u32 level) { return Poly{level, {tw.one(level)}}; }

Poly xpoly(const Tower& tw, u32 level) { return Poly{level, {tw.zero(level), tw.one(level)}}; }

Poly from_coeffs(const Tower& tw, u32 level, std::vector<FF> c) {
  (void)tw;
  Poly f{level, std::move(c)};
  trim(f);
  return f;
}

Poly constant(const Tower& tw, const FF& a) {
  (void)tw;
  if (a.is_zero()) return zero(a.level);
  return Poly{a.level, {a}};
}

Poly linear(const Tower& tw, const FF& a) { return Poly{a.level, {a, tw.one(a.level)}}; }

const FF& lc(const Poly& f) {
  DLOG_ASSERT(!f.is_zero(), "lc of zero polynomial");
  return f.c.back();
}

FF eval(const Tower& tw, const Poly& f, const FF& x) {
  FF acc = tw.zero(x.level);
  for (auto it = f.c.rbegin(); it != f.c.rend(); ++it)
    acc = tw.add(tw.mul(acc, x), *it);
  return acc;
}

bool is_monic(const Tower& tw, const Poly& f) {
  return !f.is_zero() && lc(f) == tw.one(f.level);
}

static void check_levels(const Poly& a, const Poly& b) {
  DLOG_CHECK(a.level == b.level, errc::level_mismatch, "polynomial levels differ");
}

Poly add(const Tower& tw, const Poly& a, const Poly& b) {
  check_levels(a, b);
  Poly r{a.level, std::vector<FF>(std::max(a.c.size(), b.c.size()), tw.zero(a.level))};
  for (std::size_t i = 0; i < r.c.size(); i++) {
    if (i < a.c.size()) r.c[i] = tw.add(r.c[i], a.c[i]);
    if (i < b.c.size()) r.c[i] = tw.add(r.c[i], b.c[i]);
  }
  trim(r);
  return r;
}

Poly sub(const Tower& tw, const Poly& a, const Poly& b) {
  check_levels(a, b);
  Poly r{a.level, std::vector<FF>(std::max(a.c.size(), b.c.size()), tw.zero(a.level))};
  for (std::size_t i = 0; i < r.c.size(); i++) {
    if (i < a.c.size()) r.c[i] = tw.add(r.c[i], a.c[i]);
    if (i < b.c.size()) r.c[i] = tw.sub(r.c[i], b.c[i]);
  }
  trim(r);
  return r;
}

Poly neg(const Tower& tw, const Poly& a) {
  Poly r = a;
  for (auto& v : r.c) v = tw.neg(v);
  return r;
}

Poly mul(const Tower& tw, const Poly& a, const Poly& b) {
  check_levels(a, b);
  if (a.is_zero() || b.is_zero()) return zero(a.level);
  Poly r{a.level, std::vector<FF>(a.c.size() + b.c.size() - 1, tw.zero(a.level))};
  for (std::size_t i = 0; i < a.c.size(); i++) {
    if (a.c[i].is_zero()) continue;
    for (std::size_t j = 0; j < b.c.size(); j++) {
      if (b.c[j].is_zero()) continue;
      r.c[i + j] = tw.add(r.c[i + j], tw.mul(a.c[i], b.c[j]));
    }
  }
  trim(r);
  return r;
}

Poly muls(const Tower& tw, const Poly& a, const FF& s) {
  if (s.is_zero()) return zero(a.level);
  Poly r = a;
  for (auto& v : r.c) v = tw.mul(v, s);
  trim(r);
  return r;
}

Poly shift_up(const Poly& a, u32 t) {
  if (a.is_zero()) return a;
  Poly r = a;
  r.c.insert(r.c.begin(), t, FF{a.level, std::vector<gf::Coord>(a.c[0].c.size(), 0)});
  return r;
}

std::pair<Poly, Poly> divmod(const Tower& tw, const Poly& a, const Poly& b) {
  check_levels(a, b);
  DLOG_CHECK(!b.is_zero(), errc::division_by_zero, "divmod by zero polynomial");
  Poly r = a;
  Poly q{a.level, {}};
  if (deg(a) >= deg(b)) q.c.assign(a.c.size() - b.c.size() + 1, tw.zero(a.level));
  FF lcinv = tw.inv(lc(b));
  while (deg(r) >= deg(b)) {
    FF coef = tw.mul(lc(r), lcinv);
    std::size_t shift = r.c.size() - b.c.size();
    q.c[shift] = coef;
    for (std::size_t i = 0; i < b.c.size(); i++)
      r.c[shift + i] = tw.sub(r.c[shift + i], tw.mul(coef, b.c[i]));
    trim(r);
  }
  trim(q);
  return {std::move(q), std::move(r)};
}

Poly rem(const Tower& tw, const Poly& a, const Poly& b) { return divmod(tw, a, b).second; }
Poly quot(const Tower& tw, const Poly& a, const Poly& b) { return divmod(tw, a, b).first; }

Poly make_monic(const Tower& tw, const Poly& a, FF* lc_out) {
  DLOG_CHECK(!a.is_zero(), errc::division_by_zero, "make_monic of zero");
  FF l = lc(a);
  if (lc_out) *lc_out = l;
  if (l == tw.one(a.level)) return a;
  return muls(tw, a, tw.inv(l));
}

Poly gcd(const Tower& tw, Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly t = rem(tw, a, b);
    a = std::move(b);
    b = std::move(t);
  }
  if (a.is_zero()) return a;
  return make_monic(tw, a);
}

Poly powmod(const Tower& tw, Poly base, u128 e, const Poly& mod) {
  Poly r = one(tw, base.level);
  base = rem(tw, base, mod);
  while (e) {
    if (e & 1) r = rem(tw, mul(tw, r, base), mod);
    base = rem(tw, mul(tw, base, base), mod);
    e >>= 1;
  }
  return r;
}

Poly derivative(const Tower& tw, const Poly& a) {
  if (deg(a) <= 0) return zero(a.level);
  Poly r{a.level, std::vector<FF>(a.c.size() - 1, tw.zero(a.level))};
  for (std::size_t i = 1; i < a.c.size(); i++) {
    FF ci = a.c[i];
    FF imod = tw.from_u64(i % tw.p(), a.level);
    r.c[i - 1] = tw.mul(ci, imod);
  }
  trim(r);
  return r;
}

Poly compose_mod(const Tower& tw, const Poly& a, const Poly& b, const Poly& m) {
  Poly acc = zero(a.level);
  for (auto it = a.c.rbegin(); it != a.c.rend(); ++it) {
    acc = rem(tw, mul(tw, acc, b), m);
    acc = add(tw, acc, constant(tw, *it));
  }
  return acc;
}

Poly coeff_frob(const Tower& tw, const Poly& a, u64 e) {
  Poly r = a;
  for (auto& v : r.c) v = tw.frob_p(v, e);
  return r;
}

Eea eea(const Tower& tw, const Poly& a, const Poly& b) {
  Poly r0 = a, r1 = b;
  Poly s0 = one(tw, a.level), s1 = zero(a.level);
  Poly t0 = zero(a.level), t1 = one(tw, a.level);
  while (!r1.is_zero()) {
    auto [q, r2] = divmod(tw, r0, r1);
    Poly s2 = sub(tw, s0, mul(tw, q, s1));
    Poly t2 = sub(tw, t0, mul(tw, q, t1));
    r0 = std::move(r1); r1 = std::move(r2);
    s0 = std::move(s1); s1 = std::move(s2);
    t0 = std::move(t1); t1 = std::move(t2);
  }
  if (!r0.is_zero()) {
    FF l = lc(r0);
    if (!(l == tw.one(a.level))) {
      FF li = tw.inv(l);
      r0 = muls(tw, r0, li);
      s0 = muls(tw, s0, li);
      t0 = muls(tw, t0, li);
    }
  }
  return Eea{std::move(r0), std::move(s0), std::move(t0)};
}

Poly lift(const Tower& tw, const Poly& a, u32 level) {
  DLOG_CHECK(a.level == 1, errc::level_mismatch, "lift expects a base-level polynomial");
  if (level == 1) return a;
  Poly r{level, {}};
  r.c.reserve(a.c.size());
  for (auto& v : a.c) r.c.push_back(tw.embed(v, level));
  return r;
}

Poly project(const Tower& tw, const Poly& a) {
  if (a.level == 1) return a;
  Poly r{1, {}};
  r.c.reserve(a.c.size());
  for (auto& v : a.c) r.c.push_back(tw.to_base(v));
  return r;
}

Poly expand(const Tower& tw, const Factorization& fa) {
  Poly r = constant(tw, fa.unit);
  for (auto& [f, mult] : fa.factors)
    for (u32 i = 0; i < mult; i++) r = mul(tw, r, f);
  return r;
}

namespace {

// X^(Q^j) mod f for j = 0..count, where Q is the level field size.
// Iterates by plain square-and-multiply when log2(Q) is below deg f, by
// modular composition with X^Q mod f otherwise.
std::vector<Poly> frobenius_powers(const Tower& tw, const Poly& f, u32 count) {
  u64 Q = tw.size(f.level);
  std::vector<Poly> xq(count + 1);
  xq[0] = rem(tw, xpoly(tw, f.level), f);
  if (count == 0) return xq;
  u32 lg = 0;
  for (u64 s = Q; s > 1; s >>= 1) lg++;
  xq[1] = powmod(tw, xpoly(tw, f.level), Q, f);
  bool use_pow = lg <= static_cast<u32>(deg(f));
  for (u32 j = 2; j <= count; j++)
    xq[j] = use_pow ? powmod(tw, xq[j - 1], Q, f)
                    : compose_mod(tw, xq[j - 1], xq[1], f);
  return xq;
}

std::vector<u32> prime_factors_of(u32 n) {
  std::vector<u32> rs;
  for (u32 r = 2; r * r <= n; r++)
    if (n % r == 0) {
      rs.push_back(r);
      while (n % r == 0) n /= r;
    }
  if (n > 1) rs.push_back(n);
  return rs;
}

}  // namespace

bool is_irreducible(const Tower& tw, const Poly& f) {
  int n = deg(f);
  DLOG_CHECK(n >= 1, errc::parse_error, "is_irreducible needs deg >= 1");
  if (n == 1) return true;
  u64 Q = tw.size(f.level);
  u32 lg = 0;
  for (u64 s = Q; s > 1; s >>= 1) lg++;
  Poly x = rem(tw, xpoly(tw, f.level), f);

  // checkpoints n/r ascending, so cheap small-factor rejections come first
  std::vector<u32> checks;
  for (u32 r : prime_factors_of(static_cast<u32>(n))) checks.push_back(static_cast<u32>(n) / r);
  std::sort(checks.begin(), checks.end());

  Poly xq1;  // X^Q mod f, for the composition route
  bool use_pow = lg <= static_cast<u32>(n);
  if (!use_pow) xq1 = powmod(tw, xpoly(tw, f.level), Q, f);
  Poly cur = x;
  u32 j = 0;
  auto advance_to = [&](u32 t) {
    for (; j < t; j++)
      cur = use_pow ? powmod(tw, cur, Q, f) : compose_mod(tw, cur, xq1, f);
  };
  for (u32 t : checks) {
    advance_to(t);
    if (deg(gcd(tw, sub(tw, cur, x), f)) != 0) return false;
  }
  advance_to(static_cast<u32>(n));
  return cur == x;
}

namespace {

// Equal-degree splitting of a monic square-free product of degree-d
// irreducibles.  Char 2 uses the trace map; odd characteristic uses the
// (Q^d-1)/2 power computed through a norm-style Frobenius ladder.
void equal_degree_split(const Tower& tw, const Poly& f, u32 d, Rng& rng,
                        std::vector<Poly>& out) {
  u32 n = static_cast<u32>(deg(f));
  if (n == d) {
    out.push_back(f);
    return;
  }
  u64 Q = tw.size(f.level);
  Poly g = zero(f.level);
  for (u32 attempt = 0; attempt < 200; attempt++) {
    Poly r = random_poly(tw, f.level, static_cast<int>(n) - 1, rng);
    if (r.is_zero()) continue;
    Poly t;
    if (tw.p() == 2) {
      // trace T(r) = sum_{i<w*d} r^(2^i) mod f, w = log2(Q)
      u32 w = 0;
      for (u64 s = Q; s > 1; s >>= 1) w++;
      Poly acc = rem(tw, r, f);
      Poly cur = acc;
      for (u32 i = 1; i < w * d; i++) {
        cur = rem(tw, mul(tw, cur, cur), f);
        acc = add(tw, acc, cur);
      }
      t = acc;
    } else {
      // r^((Q^d-1)/2) - 1: first s = r^(1+Q+...+Q^(d-1)), then s^((Q-1)/2)
      Poly s = rem(tw, r, f);
      Poly rq = s;
      for (u32 i = 1; i < d; i++) {
        rq = powmod(tw, rq, Q, f);
        s = rem(tw, mul(tw, s, rq), f);
      }
      t = powmod(tw, s, (Q - 1) / 2, f);
      t = sub(tw, t, one(tw, f.level));
    }
    g = gcd(tw, t, f);
    if (deg(g) > 0 && deg(g) < static_cast<int>(n)) break;
    g = zero(f.level);
  }
  DLOG_ASSERT(!g.is_zero(), "equal-degree splitting failed to find a factor");
  Poly h = quot(tw, f, g);
  equal_degree_split(tw, g, d, rng, out);
  equal_degree_split(tw, make_monic(tw, h), d, rng, out);
}

// Square-free decomposition; handles the p-th power case (vanishing
// derivative) by taking coefficient-wise p-th roots via inverse Frobenius.
void squarefree_parts(const Tower& tw, const Poly& f, u32 mult,
                      std::vector<std::pair<Poly, u32>>& out) {
  if (deg(f) == 0) return;
  Poly df = derivative(tw, f);
  if (df.is_zero()) {
    // f = g(X^p): p-th root of coefficients, multiplicity times p
    u32 n = tw.deg_p(f.level);
    u64 e = (n == 1) ? 0 : n - 1;  // inverse of one p-power
    Poly g{f.level, {}};
    for (std::size_t i = 0; i < f.c.size(); i += tw.p())
      g.c.push_back(tw.frob_p(f.c[i], e));
    trim(g);
    squarefree_parts(tw, g, mult * tw.p(), out);
    return;
  }
  Poly c = gcd(tw, f, df);
  Poly w = quot(tw, f, c);
  // w is the product of square-free factors of multiplicity not divisible by p
  u32 i = 1;
  while (deg(w) > 0) {
    Poly y = gcd(tw, w, c);
    Poly part = quot(tw, w, y);
    if (deg(part) > 0) out.emplace_back(make_monic(tw, part), mult * i);
    w = std::move(y);
    c = quot(tw, c, w);
    i++;
  }
  if (deg(c) > 0) squarefree_parts(tw, c, mult, out);
}

}  // namespace

Factorization factor(const Tower& tw, const Poly& f, u64 seed) {
  DLOG_CHECK(!f.is_zero(), errc::division_by_zero, "factor of zero polynomial");
  Factorization fa;
  fa.unit = lc(f);
  if (deg(f) == 0) return fa;
  Poly mf = make_monic(tw, f);
  Rng rng(seed, "poly.factor");

  std::vector<std::pair<Poly, u32>> sqf;
  squarefree_parts(tw, mf, 1, sqf);

  for (auto& [part, mult] : sqf) {
    // distinct-degree decomposition of the square-free part
    Poly rest = part;
    u64 Q = tw.size(part.level);
    Poly x = xpoly(tw, part.level);
    Poly h = rem(tw, x, rest);  // X^(Q^d) mod rest, iterated
    u32 d = 0;
    while (deg(rest) > 0) {
      d++;
      if (2 * d > static_cast<u32>(deg(rest))) {
        // remainder is a single irreducible
        fa.factors.emplace_back(rest, mult);
        break;
      }
      h = powmod(tw, h, Q, rest);
      Poly g = gcd(tw, sub(tw, h, rem(tw, x, rest)), rest);
      if (deg(g) > 0) {
        std::vector<Poly> split;
        equal_degree_split(tw, g, d, rng, split);
        for (auto& irr : split) fa.factors.emplace_back(irr, mult);
        rest = quot(tw, rest, g);
        if (!rest.is_zero()) rest = make_monic(tw, rest);
        h = rem(tw, h, rest);
      }
    }
  }
  // canonical order: by degree then by encoded coefficients
  std::sort(fa.factors.begin(), fa.factors.end(), [&](auto& A, auto& B) {
    if (deg(A.first) != deg(B.first)) return deg(A.first) < deg(B.first);
    for (int i = deg(A.first); i >= 0; i--) {
      u64 ca = tw.encode(A.first.c[static_cast<std::size_t>(i)]);
      u64 cb = tw.encode(B.first.c[static_cast<std::size_t>(i)]);
      if (ca != cb) return ca < cb;
    }
    return false;
  });
  // merge duplicates (can arise when square-free parts repeat across p-power lifts)
  std::vector<std::pair<Poly, u32>> merged;
  for (auto& pr : fa.factors) {
    if (!merged.empty() && merged.back().first == pr.first)
      merged.back().second += pr.second;
    else
      merged.push_back(pr);
  }
  fa.factors = std::move(merged);
  return fa;
}

std::pair<Factorization, Poly> smooth_part(const Tower& tw, const Poly& f, u32 b, u64 seed) {
  DLOG_CHECK(!f.is_zero(), errc::division_by_zero, "smooth_part of zero polynomial");
  DLOG_CHECK(b >= 1, errc::parse_error, "smooth_part needs b >= 1");
  Factorization fa;
  fa.unit = lc(f);
  if (deg(f) == 0) return {fa, one(tw, f.level)};
  Poly mf = make_monic(tw, f);
  Rng rng(seed, "poly.smooth");

  std::vector<std::pair<Poly, u32>> sqf;
  squarefree_parts(tw, mf, 1, sqf);

  Poly cof = one(tw, f.level);
  u64 Q = tw.size(f.level);
  Poly x = xpoly(tw, f.level);
  for (auto& [part, mult] : sqf) {
    Poly rest = part;
    Poly h = rem(tw, x, rest);
    for (u32 d = 1; d <= b && deg(rest) > 0; d++) {
      if (static_cast<int>(d) > deg(rest)) break;
      if (2 * d > static_cast<u32>(deg(rest))) {
        // single irreducible remains
        if (static_cast<u32>(deg(rest)) <= b) {
          fa.factors.emplace_back(rest, mult);
          rest = one(tw, f.level);
        }
        break;
      }
      h = powmod(tw, h, Q, rest);
      Poly g = gcd(tw, sub(tw, h, rem(tw, x, rest)), rest);
      if (deg(g) > 0) {
        std::vector<Poly> split;
        equal_degree_split(tw, g, d, rng, split);
        for (auto& irr : split) fa.factors.emplace_back(irr, mult);
        rest = quot(tw, rest, g);
        if (!rest.is_zero()) rest = make_monic(tw, rest);
        h = rem(tw, h, rest);
      }
    }
    if (deg(rest) > 0)
      for (u32 i = 0; i < mult; i++) cof = mul(tw, cof, rest);
  }
  std::sort(fa.factors.begin(), fa.factors.end(), [&](auto& A, auto& B) {
    if (deg(A.first) != deg(B.first)) return deg(A.first) < deg(B.first);
    for (int i = deg(A.first); i >= 0; i--) {
      u64 ca = tw.encode(A.first.c[static_cast<std::size_t>(i)]);
      u64 cb = tw.encode(B.first.c[static_cast<std::size_t>(i)]);
      if (ca != cb) return ca < cb;
    }
    return false;
  });
  std::vector<std::pair<Poly, u32>> merged;
  for (auto& pr : fa.factors) {
    if (!merged.empty() && merged.back().first == pr.first)
      merged.back().second += pr.second;
    else
      merged.push_back(pr);
  }
  fa.factors = std::move(merged);
  return {fa, cof};
}

bool is_smooth(const Tower& tw, const Poly& f, u32 b, u64 seed) {
  return deg(smooth_part(tw, f, b, seed).second) == 0;
}

std::vector<FF> roots_in_field(const Tower& tw, const Poly& f, u64 seed) {
  DLOG_CHECK(!f.is_zero(), errc::division_by_zero, "roots of zero polynomial");
  std::vector<FF> roots;
  if (deg(f) == 0) return roots;
  auto [fa, cof] = smooth_part(tw, f, 1, seed);
  for (auto& [lin, mult] : fa.factors) {
    if (deg(lin) != 1) continue;
    FF root = tw.neg(lin.c[0]);  // monic X + a has root -a
    for (u32 i = 0; i < mult; i++) roots.push_back(root);
  }
  return roots;
}

Poly random_poly(const Tower& tw, u32 level, int degree, Rng& rng) {
  if (degree < 0) return zero(level);
  u64 sz = tw.size(level);
  Poly f{level, {}};
  f.c.reserve(static_cast<std::size_t>(degree) + 1);
  for (int i = 0; i <= degree; i++) f.c.push_back(tw.decode(rng.below(sz), level));
  trim(f);
  return f;
}

Poly random_monic(const Tower& tw, u32 level, u32 degree, Rng& rng) {
  u64 sz = tw.size(level);
  Poly f{level, {}};
  f.c.reserve(degree + 1);
  for (u32 i = 0; i < degree; i++) f.c.push_back(tw.decode(rng.below(sz), level));
  f.c.push_back(tw.one(level));
  return f;
}

Poly random_irreducible(const Tower& tw, u32 level, u32 degree, u64 seed) {
  DLOG_CHECK(degree >= 1, errc::parse_error, "random_irreducible needs degree >= 1");
  Rng rng(seed, "poly.random_irreducible", level);
  for (u32 trial = 0; trial < 100 * degree; trial++) {
    Poly f = random_monic(tw, level, degree, rng);
    if (is_irreducible(tw, f)) return f;
  }
  fail(errc::search_exhausted, "random_irreducible exhausted trials");
}

Poly min_poly_over_base(const Tower& tw, const FF& x) {
  DLOG_CHECK(x.level >= 2, errc::level_mismatch, "min_poly_over_base expects an extension element");
  u32 d = x.level;
  // Frobenius orbit under the q^k power map
  std::vector<FF> orbit{x};
  FF cur = x;
  for (u32 i = 1; i < d; i++) {
    cur = tw.frob_qk(cur);
    if (cur == x) break;
    orbit.push_back(cur);
  }
  Poly mp = one(tw, d);
  for (auto& r : orbit) mp = mul(tw, mp, Poly{d, {tw.neg(r), tw.one(d)}});
  return project(tw, mp);
}

std::string encode(const Tower& tw, const Poly& f) {
  std::ostringstream out;
  out << "deg=" << deg(f) << ';';
  for (std::size_t i = 0; i < f.c.size(); i++) {
    if (i) out << ',';
    out << tw.encode(f.c[i]);
  }
  return out.str();
}

Poly decode(const Tower& tw, u32 level, const std::string& s) {
  auto semi = s.find(';');
  DLOG_CHECK(semi != std::string::npos, errc::parse_error, "poly encoding missing ';'");
  std::string head = s.substr(0, semi);
  DLOG_CHECK(head.rfind("deg=", 0) == 0, errc::parse_error, "poly encoding missing deg=");
  long long d = std::stoll(head.substr(4));
  Poly f{level, {}};
  if (d < 0) return f;
  auto parts = fmtio::split(s.substr(semi + 1), ',');
  DLOG_CHECK(parts.size() == static_cast<std::size_t>(d) + 1, errc::parse_error,
             "poly encoding coefficient count mismatch");
  for (auto& ps : parts) f.c.push_back(tw.decode(fmtio::to_u64(ps), level));
  trim(f);
  DLOG_CHECK(deg(f) == static_cast<int>(d), errc::parse_error, "poly encoding not trimmed");
  return f;
}

}  // namespace dlog::poly
