#include "dlog/ffs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dlog::ffs {

CoppersmithSetup coppersmith_setup(const Tower& tw, u32 n, u32 d, u32 b, u64 budget) {
  DLOG_CHECK(tw.m() == 1, errc::parse_error, "coppersmith runs over a prime base field");
  DLOG_CHECK(n >= 7, errc::parse_error, "coppersmith_setup needs n >= 7");
  u32 p = tw.p();
  double max_degJ = std::pow(static_cast<double>(n), 2.0 / 3.0);

  CoppersmithSetup s;
  s.p = p;
  s.n = n;
  s.d = d;
  s.b = b;

  // code-least J of lowest degree with X^n + J irreducible
  bool found = false;
  for (u64 code = 1; code < budget && !found; code++) {
    Poly J{1, {}};
    for (u64 cc = code; cc; cc /= p) J.c.push_back(tw.from_u64(cc % p));
    poly::trim(J);
    if (static_cast<double>(poly::deg(J)) >= max_degJ) break;
    Poly I = poly::add(tw, poly::shift_up(poly::one(tw, 1), n), J);
    if (poly::is_irreducible(tw, I)) {
      s.J = J;
      s.I = I;
      found = true;
    }
  }
  DLOG_CHECK(found, errc::search_exhausted, "no low-degree J with X^n + J irreducible");

  // p^l2 nearest to sqrt(n/d) on the log scale, at least 1
  double target = 0.5 * std::log(static_cast<double>(n) / std::max(1u, d));
  u32 best = 1;
  double bestdist = 1e300;
  for (u32 l2 = 1; l2 < 30; l2++) {
    double dist = std::abs(l2 * std::log(static_cast<double>(p)) - target);
    if (dist < bestdist) { bestdist = dist; best = l2; }
  }
  s.l2 = best;
  u64 pl2 = 1;
  for (u32 i = 0; i < s.l2; i++) pl2 *= p;
  s.h = static_cast<u32>((n + pl2 - 1) / pl2);
  DLOG_ASSERT(static_cast<u64>(s.h) * pl2 >= n, "coppersmith invariant h*p^l2 >= n violated");
  return s;
}

RelationSet coppersmith_relations(const Tower& tw, const CoppersmithSetup& s,
                                  const FactorBase& fb, u32 count, u64 seed,
                                  u64 budget) {
  u32 p = s.p;
  u64 pl2 = 1;
  for (u32 i = 0; i < s.l2; i++) pl2 *= p;
  u64 shift = static_cast<u64>(s.h) * pl2 - s.n;

  u64 N = 1;
  for (u32 i = 0; i < s.n; i++) N *= p;
  N -= 1;

  // X^(h p^l2 - n) * (-J), the reduction image of X^(h p^l2)
  Poly xs = poly::shift_up(poly::neg(tw, s.J), static_cast<u32>(shift));

  auto verify = [&](const icm::Relation& r) {
    Poly acc = poly::one(tw, 1);
    for (auto& [i, e] : r.exps) {
      u64 ee = smod(e, N);
      acc = poly::rem(tw, poly::mul(tw, acc, poly::powmod(tw, fb.polys[i], ee, s.I)), s.I);
    }
    return poly::deg(acc) == 0;  // a unit in F_p^x
  };

  RelationSet out;
  u64 codes = 1;
  for (u32 i = 0; i <= s.d; i++) codes *= p;
  u64 total = codes * codes;
  for (u64 cand = 0; cand < std::min(total, budget); cand++) {
    if (count > 0 && out.rels.size() >= count) break;
    u64 uc = cand / codes, vc = cand % codes;
    Poly u{1, {}}, v{1, {}};
    for (u64 cc = uc; cc; cc /= p) u.c.push_back(tw.from_u64(cc % p));
    for (u64 cc = vc; cc; cc /= p) v.c.push_back(tw.from_u64(cc % p));
    poly::trim(u);
    poly::trim(v);
    if (u.is_zero() || v.is_zero()) continue;
    if (poly::deg(poly::gcd(tw, u, v)) != 0) continue;  // gcd guard

    Poly f = poly::add(tw, poly::shift_up(u, s.h), v);
    if (poly::deg(f) < 1) continue;
    // a(X)^(p^l2) = a(X^(p^l2)) over F_p: spread the coefficients
    auto spread = [&](const Poly& a) {
      Poly r{1, {}};
      if (a.is_zero()) return r;
      r.c.assign(static_cast<std::size_t>(poly::deg(a)) * pl2 + 1, tw.zero(1));
      for (std::size_t i = 0; i < a.c.size(); i++) r.c[i * pl2] = a.c[i];
      return r;
    };
    // g = u^(p^l2) * X^(h p^l2 - n) * (-J) + v^(p^l2), kept unreduced:
    // smoothness is a property of the polynomial, not its residue
    Poly gp = poly::add(tw, poly::mul(tw, spread(u), xs), spread(v));
    if (gp.is_zero()) continue;
    // invariant: f^(p^l2) == gp mod I
    DLOG_ASSERT(poly::rem(tw, poly::sub(tw, poly::powmod(tw, f, pl2, s.I), gp), s.I).is_zero(),
                "coppersmith identity violated");

    auto [fa_f, cof_f] = poly::smooth_part(tw, f, s.b, seed ^ cand);
    if (poly::deg(cof_f) != 0) continue;
    auto [fa_g, cof_g] = poly::smooth_part(tw, gp, s.b, seed ^ (cand + 0x9e37));
    if (poly::deg(cof_g) != 0) continue;

    icm::Relation r;
    bool ok = true;
    for (auto& [f_i, mult] : fa_f.factors) {
      auto id = fb.lookup_poly(tw, f_i);
      if (!id) { ok = false; break; }
      r.exps.emplace_back(*id, static_cast<i64>(mult) * static_cast<i64>(pl2));
    }
    if (!ok) continue;
    for (auto& [g_i, mult] : fa_g.factors) {
      auto id = fb.lookup_poly(tw, g_i);
      if (!id) { ok = false; break; }
      r.exps.emplace_back(*id, -static_cast<i64>(mult));
    }
    if (!ok) continue;
    r.tag = "coppersmith uv " + std::to_string(cand);
    out.insert(std::move(r), verify);
  }
  DLOG_CHECK(count == 0 || out.rels.size() >= count, errc::budget_exhausted,
             "coppersmith relation yield stalled");
  return out;
}

JL06Setup jl06_setup(const Tower& tw, u32 level, u32 m, u64 budget, u64 seed) {
  DLOG_CHECK(tw.size(level) >= 3, errc::parse_error, "jl06 needs q >= 3");
  u32 df = static_cast<u32>(std::ceil(std::sqrt(static_cast<double>(m))));
  Rng rng(seed, "ffs.jl06_setup");
  for (u64 trial = 0; trial < budget; trial++) {
    Poly f = poly::random_monic(tw, level, df, rng);
    Poly g = poly::random_monic(tw, level, df, rng);
    // comp = g(f(X)) - X
    Poly comp = poly::zero(level);
    for (auto it = g.c.rbegin(); it != g.c.rend(); ++it) {
      comp = poly::mul(tw, comp, f);
      comp = poly::add(tw, comp, poly::constant(tw, *it));
    }
    comp = poly::sub(tw, comp, poly::xpoly(tw, level));
    if (poly::deg(comp) < static_cast<int>(m)) continue;
    auto fa = poly::factor(tw, comp, seed ^ trial);
    for (auto& [fac, mult] : fa.factors) {
      if (poly::deg(fac) == static_cast<int>(m)) {
        JL06Setup s;
        s.level = level;
        s.m = m;
        s.f = f;
        s.g = g;
        s.I = fac;
        return s;
      }
    }
  }
  fail(errc::search_exhausted, "jl06_setup found no degree-m irreducible factor");
}

JlBases jl06_bases(const Tower& tw, const JL06Setup& s) {
  JlBases b;
  b.q_linears = static_cast<u32>(tw.size(s.level));
  return b;
}

RelationSet jl06_relations(const Tower& tw, const JL06Setup& s, const JlBases& bases,
                           u32 count, u64 seed, u64 budget) {
  u32 level = s.level;
  u64 q = tw.size(level);
  u64 N = 1;
  for (u32 i = 0; i < s.m; i++) N *= q;
  N -= 1;

  // evaluation of a Y-side linear in the field: y + beta = f(x) + beta mod I
  auto yrep = [&](const gf::FF& beta) {
    return poly::rem(tw, poly::add(tw, s.f, poly::constant(tw, beta)), s.I);
  };

  auto verify = [&](const icm::Relation& r) {
    Poly acc = poly::one(tw, level);
    for (auto& [i, e] : r.exps) {
      Poly lin = (i < bases.q_linears)
                     ? poly::linear(tw, tw.decode(i, level))
                     : yrep(tw.decode(i - bases.q_linears, level));
      acc = poly::rem(tw, poly::mul(tw, acc, poly::powmod(tw, lin, smod(e, N), s.I)), s.I);
    }
    return poly::deg(acc) == 0;
  };

  RelationSet out;
  u64 total = q * q * q;
  Rng shuffle_rng(seed, "ffs.jl06_rel_order");
  std::vector<u64> order;
  if (total <= budget) {
    order.resize(total);
    for (u64 i = 0; i < total; i++) order[i] = i;
  } else {
    order.resize(budget);
    for (u64 i = 0; i < budget; i++) order[i] = shuffle_rng.below(total);
  }

  for (u64 cand : order) {
    if (out.rels.size() >= count && count > 0) break;
    gf::FF a = tw.decode(cand % q, level);
    gf::FF b = tw.decode(cand / q % q, level);
    gf::FF c = tw.decode(cand / (q * q), level);

    // side_x = X f(X) + a f(X) + b X + c
    Poly side_x = poly::add(
        tw, poly::add(tw, poly::mul(tw, poly::linear(tw, a), s.f),
                      poly::muls(tw, poly::xpoly(tw, level), b)),
        poly::constant(tw, c));
    // side_y = g(Y) Y + a Y + b g(Y) + c
    Poly side_y = poly::add(
        tw, poly::add(tw, poly::mul(tw, s.g, poly::xpoly(tw, level)),
                      poly::muls(tw, poly::xpoly(tw, level), a)),
        poly::add(tw, poly::muls(tw, s.g, b), poly::constant(tw, c)));

    if (poly::deg(side_x) < 1 || poly::deg(side_y) < 1) continue;  // degenerate

    // the defining identity: ev_x(side_x) == ev_y(side_y)
    Poly ev_x = poly::rem(tw, side_x, s.I);
    Poly ev_y = poly::zero(level);
    for (auto it = side_y.c.rbegin(); it != side_y.c.rend(); ++it) {
      ev_y = poly::rem(tw, poly::mul(tw, ev_y, poly::rem(tw, s.f, s.I)), s.I);
      ev_y = poly::add(tw, ev_y, poly::constant(tw, *it));
    }
    DLOG_ASSERT(poly::sub(tw, ev_x, ev_y).is_zero(), "jl06 defining identity violated");

    auto [fa_x, cof_x] = poly::smooth_part(tw, side_x, 1, seed ^ cand);
    if (poly::deg(cof_x) != 0) continue;
    auto [fa_y, cof_y] = poly::smooth_part(tw, side_y, 1, seed ^ (cand + 0x517c));
    if (poly::deg(cof_y) != 0) continue;

    icm::Relation r;
    for (auto& [lin, mult] : fa_x.factors)
      r.exps.emplace_back(bases.x_index(tw.encode(lin.c[0])), static_cast<i64>(mult));
    for (auto& [lin, mult] : fa_y.factors)
      r.exps.emplace_back(bases.y_index(tw.encode(lin.c[0])), -static_cast<i64>(mult));
    r.tag = "jl06 abc " + std::to_string(cand);
    out.insert(std::move(r), verify);
  }
  DLOG_CHECK(count == 0 || out.rels.size() >= count, errc::budget_exhausted,
             "jl06 relation yield stalled");
  return out;
}

u64 jl06_individual_log(const Tower& tw, const JL06Setup& s, const JlBases& bases,
                        const Poly& g, const Poly& h, const icm::LogTable& table,
                        u64 ell, u64 seed) {
  u64 q = tw.size(s.level);
  u64 N = 1;
  for (u32 i = 0; i < s.m; i++) N *= q;
  N -= 1;
  Rng rng(seed, "ffs.jl06_indlog");
  for (u64 trial = 0; trial < 200000; trial++) {
    u64 e = trial == 0 ? 0 : rng.below(N);
    Poly v = poly::rem(tw, poly::mul(tw, h, poly::powmod(tw, g, e, s.I)), s.I);
    if (v.is_zero()) continue;
    auto [fa, cof] = poly::smooth_part(tw, v, 1, seed ^ trial);
    if (poly::deg(cof) != 0) continue;
    u64 acc = 0;
    for (auto& [lin, mult] : fa.factors)
      acc = addmod(acc, mulmod(mult % ell, table.at(bases.x_index(tw.encode(lin.c[0]))), ell), ell);
    return submod(acc, e % ell, ell);
  }
  fail(errc::budget_exhausted, "jl06 individual log stalled");
}

std::string coppersmith_to_text(const Tower& tw, const CoppersmithSetup& s) {
  std::ostringstream out;
  out << "coppersmith p=" << s.p << " n=" << s.n << " J=" << poly::encode(tw, s.J)
      << " h=" << s.h << " l2=" << s.l2 << " d=" << s.d << " b=" << s.b;
  return out.str();
}

CoppersmithSetup coppersmith_from_text(const Tower& tw, const std::string& text) {
  CoppersmithSetup s;
  s.p = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "p")));
  s.n = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "n")));
  s.J = poly::decode(tw, 1, fmtio::kv(text, "J"));
  s.h = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "h")));
  s.l2 = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "l2")));
  s.d = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "d")));
  s.b = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "b")));
  s.I = poly::add(tw, poly::shift_up(poly::one(tw, 1), s.n), s.J);
  DLOG_CHECK(poly::is_irreducible(tw, s.I), errc::parse_error, "coppersmith I not irreducible");
  return s;
}

std::string jl06_to_text(const Tower& tw, const JL06Setup& s) {
  std::ostringstream out;
  out << "jl06 q=" << tw.size(s.level) << " m=" << s.m << " f=" << poly::encode(tw, s.f)
      << " g=" << poly::encode(tw, s.g) << " I=" << poly::encode(tw, s.I);
  return out.str();
}

JL06Setup jl06_from_text(const Tower& tw, const std::string& text) {
  JL06Setup s;
  s.level = 1;
  u64 q = fmtio::to_u64(fmtio::kv(text, "q"));
  DLOG_CHECK(q == tw.size(1), errc::parse_error, "jl06 setup tower size mismatch");
  s.m = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "m")));
  s.f = poly::decode(tw, 1, fmtio::kv(text, "f"));
  s.g = poly::decode(tw, 1, fmtio::kv(text, "g"));
  s.I = poly::decode(tw, 1, fmtio::kv(text, "I"));
  DLOG_CHECK(poly::is_irreducible(tw, s.I) && poly::deg(s.I) == static_cast<int>(s.m),
             errc::parse_error, "jl06 I invalid");
  return s;
}

}  // namespace dlog::ffs
