#include "dlog/qpa.hpp"

#include <algorithm>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace dlog::qpa {

namespace {

u64 checked_pow(u64 b, u32 e) {
  u128 r = 1;
  for (u32 i = 0; i < e; i++) {
    r *= b;
    DLOG_CHECK(r < (static_cast<u128>(1) << 63), errc::instance_too_large,
               "field size exceeds 2^63");
  }
  return static_cast<u64>(r);
}

// h1 X^q - h0 as a polynomial
Poly field_poly(const Tower& tw, const Poly& h0, const Poly& h1) {
  return poly::sub(tw, poly::shift_up(h1, static_cast<u32>(tw.q())), h0);
}

void validate_field(const QpaField& F) {
  DLOG_CHECK(F.dh >= 1 && F.dh <= 2, errc::parse_error, "dh must be 1 or 2");
  DLOG_CHECK(poly::deg(F.h0) <= static_cast<int>(F.dh) &&
                 poly::deg(F.h1) <= static_cast<int>(F.dh),
             errc::parse_error, "h0/h1 degree above dh");
  DLOG_CHECK(poly::deg(poly::gcd(F.tw, F.h0, F.h1)) == 0, errc::parse_error,
             "h0, h1 not coprime");
  DLOG_CHECK(poly::deg(F.I) == static_cast<int>(F.n) && poly::is_monic(F.tw, F.I),
             errc::parse_error, "I must be monic of degree n");
  DLOG_CHECK(poly::is_irreducible(F.tw, F.I), errc::parse_error, "I not irreducible");
  Poly t = poly::rem(F.tw, field_poly(F.tw, F.h0, F.h1), F.I);
  DLOG_CHECK(t.is_zero(), errc::parse_error, "I does not divide h1 X^q - h0");
}

Poly find_linear_generator(const QpaField& F, u64 seed) {
  (void)seed;
  u64 S = F.tw.qk();
  for (u64 code = 0; code < S; code++) {
    Poly g = poly::linear(F.tw, F.tw.decode(code, 1));
    bool ok = true;
    for (auto& [r, e] : F.order.factors) {
      if (fpow(F, g, static_cast<i128>((F.Q - 1) / r)) == poly::one(F.tw, 1)) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  fail(errc::search_exhausted, "no linear generator of the big field");
}

}  // namespace

QpaField setup_kummer(u32 p, u32 l, u32 k, u64 seed) {
  QpaField F{Tower::make(p, l, k, seed)};
  const Tower& tw = F.tw;
  u64 q = tw.q();
  DLOG_CHECK(q >= 3, errc::parse_error, "kummer setup needs q >= 3 (n = q - 1 >= 2)");
  F.n = static_cast<u32>(q - 1);
  F.dh = 1;
  F.kummer = true;
  F.seed = seed;
  F.Q = checked_pow(tw.qk(), F.n);
  F.order = grp::int_factor(F.Q - 1);

  // c: multiplicative generator of F_{q^k}^x with X^(q-1) - c irreducible
  auto qk_factors = grp::int_factor(tw.qk() - 1);
  u64 S = tw.qk();
  bool found = false;
  for (u64 code = 2; code < S && !found; code++) {
    gf::FF c = tw.decode(code, 1);
    bool gen = true;
    for (auto& [r, e] : qk_factors.factors)
      if (tw.pow(c, (S - 1) / r) == tw.one(1)) { gen = false; break; }
    if (!gen) continue;
    Poly I = poly::sub(F.tw, poly::shift_up(poly::one(tw, 1), F.n), poly::constant(tw, c));
    if (!poly::is_irreducible(tw, I)) continue;
    F.c = c;
    F.I = I;
    found = true;
  }
  DLOG_CHECK(found, errc::search_exhausted, "no Kummer constant found");
  F.h1 = poly::one(tw, 1);
  F.h0 = poly::muls(tw, poly::xpoly(tw, 1), F.c);
  validate_field(F);
  F.g = find_linear_generator(F, seed);
  return F;
}

QpaField setup_general(u32 p, u32 l, u32 k, u32 n, u32 dh, u64 budget, u64 seed) {
  QpaField F{Tower::make(p, l, k, seed)};
  const Tower& tw = F.tw;
  u64 q = tw.q();
  DLOG_CHECK(n >= 2, errc::parse_error, "n must be >= 2");
  DLOG_CHECK(n <= q + dh, errc::parse_error, "n exceeds the degree q + dh of h1 X^q - h0");
  F.n = n;
  F.dh = dh;
  F.kummer = false;
  F.c = tw.zero(1);
  F.seed = seed;
  F.Q = checked_pow(tw.qk(), n);
  F.order = grp::int_factor(F.Q - 1);

  Rng rng(seed, "qpa.setup_general");
  bool found = false;
  for (u64 trial = 0; trial < budget && !found; trial++) {
    Poly h0 = poly::random_poly(tw, 1, static_cast<int>(dh), rng);
    Poly h1 = poly::random_poly(tw, 1, static_cast<int>(dh), rng);
    if (h0.is_zero() || h1.is_zero()) continue;
    if (poly::deg(poly::gcd(tw, h0, h1)) != 0) continue;
    Poly T = field_poly(tw, h0, h1);
    if (poly::deg(T) < static_cast<int>(n)) continue;
    auto fa = poly::factor(tw, T, seed ^ trial);
    for (auto& [fac, mult] : fa.factors) {
      if (poly::deg(fac) == static_cast<int>(n)) {
        F.h0 = h0;
        F.h1 = h1;
        F.I = fac;
        found = true;
        break;
      }
    }
  }
  DLOG_CHECK(found, errc::search_exhausted,
             "no (h0, h1) with a degree-n irreducible factor found within budget");
  validate_field(F);
  F.g = find_linear_generator(F, seed);
  return F;
}

std::string field_to_text(const QpaField& F) {
  std::ostringstream out;
  out << "qpa p=" << F.tw.p() << " l=" << F.tw.l() << " k=" << F.tw.k() << " n=" << F.n
      << " dh=" << F.dh << " poly=";
  const auto& fp = F.tw.defining_poly();
  for (std::size_t i = 0; i < fp.size(); i++) {
    if (i) out << ',';
    out << fp[i];
  }
  out << " h0=" << poly::encode(F.tw, F.h0) << " h1=" << poly::encode(F.tw, F.h1)
      << " I=" << poly::encode(F.tw, F.I) << " g=" << poly::encode(F.tw, F.g);
  if (F.kummer) out << " kummer c=" << F.tw.encode(F.c);
  out << " seed=" << F.seed;
  return out.str();
}

QpaField field_from_text(const std::string& text) {
  u32 p = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "p")));
  u32 l = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "l")));
  u32 k = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "k")));
  std::vector<gf::Coord> fp;
  for (auto& s : fmtio::split(fmtio::kv(text, "poly"), ','))
    fp.push_back(static_cast<gf::Coord>(fmtio::to_u64(s)));
  QpaField F{Tower(p, l, k, std::move(fp))};
  F.n = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "n")));
  F.dh = static_cast<u32>(fmtio::to_u64(fmtio::kv(text, "dh")));
  F.h0 = poly::decode(F.tw, 1, fmtio::kv(text, "h0"));
  F.h1 = poly::decode(F.tw, 1, fmtio::kv(text, "h1"));
  F.I = poly::decode(F.tw, 1, fmtio::kv(text, "I"));
  F.g = poly::decode(F.tw, 1, fmtio::kv(text, "g"));
  F.kummer = text.find(" kummer ") != std::string::npos;
  F.c = F.kummer ? F.tw.decode(fmtio::to_u64(fmtio::kv(text, "c")), 1) : F.tw.zero(1);
  F.seed = fmtio::to_u64(fmtio::kv(text, "seed"));
  F.Q = checked_pow(F.tw.qk(), F.n);
  F.order = grp::int_factor(F.Q - 1);
  validate_field(F);
  return F;
}

// --- big-field helpers ---------------------------------------------------------

Poly freduce(const QpaField& F, const Poly& a) { return poly::rem(F.tw, a, F.I); }

Poly fmul(const QpaField& F, const Poly& a, const Poly& b) {
  return poly::rem(F.tw, poly::mul(F.tw, a, b), F.I);
}

Poly finv(const QpaField& F, const Poly& a) {
  auto e = poly::eea(F.tw, freduce(F, a), F.I);
  DLOG_CHECK(poly::deg(e.g) == 0, errc::division_by_zero, "finv: zero or non-unit");
  return poly::muls(F.tw, e.s, F.tw.inv(e.g.c[0]));
}

Poly fpow(const QpaField& F, const Poly& a, i128 e) {
  u64 ee = smod128(e, F.Q - 1);
  return poly::powmod(F.tw, freduce(F, a), ee, F.I);
}

bool is_scalar(const QpaField& F, const Poly& a) {
  Poly r = freduce(F, a);
  return !r.is_zero() && poly::deg(r) == 0;
}

grp::FqPolyStar adapter(const QpaField& F) { return grp::FqPolyStar(F.tw, F.I, F.Q - 1); }

// --- Bluher machinery ------------------------------------------------------------

u64 bluher_count(u64 q, u32 K) {
  if (K % 2 == 1) return (checked_pow(q, K - 1) - 1) / (q * q - 1);
  return (checked_pow(q, K - 1) - q) / (q * q - 1);
}

namespace {

// X^(q+1) + B X + B at the given level
Poly fb_poly(const Tower& tw, u32 level, const FF& B) {
  u64 q = tw.q();
  Poly f{level, std::vector<FF>(static_cast<std::size_t>(q) + 2, tw.zero(level))};
  f.c[0] = B;
  f.c[1] = B;
  f.c[static_cast<std::size_t>(q) + 1] = tw.one(level);
  return f;
}

bool splits_completely(const Tower& tw, const Poly& f, u64 seed) {
  return poly::roots_in_field(tw, f, seed).size() == static_cast<std::size_t>(poly::deg(f));
}

FF zmap(const Tower& tw, const FF& z) {
  u64 q = tw.q();
  FF zq = tw.frob_q(z);
  FF zq2 = tw.frob_q(zq);
  FF num = tw.pow(tw.sub(z, zq2), q + 1);
  FF den = tw.pow(tw.sub(z, zq), q * q + 1);
  return tw.mul(num, tw.inv(den));
}

}  // namespace

std::vector<FF> bluher_set(const Tower& tw, u32 level, u64 seed) {
  u64 S = tw.size(level);
  DLOG_CHECK(S <= (1u << 16), errc::instance_too_large,
             "exhaustive Bluher scan limited to small levels");
  u64 q = tw.q();
  u32 K = tw.k() * level;
  DLOG_CHECK(K >= 3, errc::parse_error, "Bluher set is empty for K = 2; use k2_triples");

  std::vector<u64> scan;
  for (u64 code = 1; code < S; code++) {
    FF B = tw.decode(code, level);
    if (splits_completely(tw, fb_poly(tw, level, B), seed ^ code)) scan.push_back(code);
  }

  // z-map image over the level minus the fixed points of the q^2 Frobenius
  std::vector<u64> image;
  for (u64 code = 0; code < S; code++) {
    FF z = tw.decode(code, level);
    if (tw.frob_q(z) == z) continue;
    FF zq2 = tw.frob_q(tw.frob_q(z));
    if (zq2 == z) continue;
    image.push_back(tw.encode(zmap(tw, z)));
  }
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());

  DLOG_CHECK(scan == image, errc::internal_mismatch,
             "Bluher scan and z-map image disagree");
  DLOG_CHECK(scan.size() == bluher_count(q, K), errc::internal_mismatch,
             "Bluher set size does not match the count formula");

  std::vector<FF> out;
  out.reserve(scan.size());
  for (u64 code : scan) out.push_back(tw.decode(code, level));
  return out;
}

BluherSampler::BluherSampler(const Tower& tw, u32 level, u64 seed)
    : tw_(&tw), level_(level), rng_(seed, "qpa.bluher_sampler", level) {
  budget_ = 1u << 20;
}

std::optional<FF> BluherSampler::next() {
  const Tower& tw = *tw_;
  u64 S = tw.size(level_);
  while (tried_ < budget_) {
    tried_++;
    FF z = tw.decode(rng_.below(S), level_);
    if (tw.frob_q(z) == z) continue;
    if (tw.frob_q(tw.frob_q(z)) == z) continue;
    FF B = zmap(tw, z);
    u64 code = tw.encode(B);
    if (std::find(seen_.begin(), seen_.end(), code) != seen_.end()) continue;
    seen_.push_back(code);
    return B;
  }
  return std::nullopt;
}

// --- split triples -----------------------------------------------------------------

std::vector<SplitTriple> k2_triples(const Tower& tw) {
  DLOG_CHECK(tw.k() == 2, errc::wrong_k, "k2_triples requires k = 2");
  u64 q = tw.q();
  u64 S = tw.qk();
  // the subfield F_q inside the base
  std::vector<FF> fq;
  for (u64 code = 0; code < S; code++) {
    FF x = tw.decode(code, 1);
    if (tw.frob_q(x) == x) fq.push_back(x);
  }
  DLOG_ASSERT(fq.size() == q, "F_q subfield enumeration size mismatch");

  std::vector<SplitTriple> out;
  out.reserve(S * (q - 1));
  for (u64 ac = 0; ac < S; ac++) {
    FF a = tw.decode(ac, 1);
    FF aq = tw.frob_q(a);
    FF norm_a = tw.mul(a, aq);  // a^(q+1)
    for (auto& c : fq) {
      if (c == norm_a) continue;
      out.push_back(SplitTriple{a, aq, c});
    }
  }
  return out;
}

SplitTriple ggmz_complete_triple(const Tower& tw, u32 level, const FF& B,
                                 const FF& a, const FF& b, u64 seed) {
  u64 q = tw.q();
  FF aq = tw.frob_p(a, tw.l());
  DLOG_CHECK(!(b == aq), errc::degenerate_input, "ggmz_complete_triple: b = a^q");
  // (c - ab)^q = (b - a^q)^(q+1) / B
  FF t = tw.mul(tw.pow(tw.sub(b, aq), q + 1), tw.inv(B));
  FF rho = tw.qth_root(t);
  FF c = tw.add(tw.mul(a, b), rho);
  SplitTriple tr{a, b, c};
  // split by construction; asserted
  Poly lhs{level, std::vector<FF>(static_cast<std::size_t>(q) + 2, tw.zero(level))};
  lhs.c[0] = c;
  lhs.c[1] = b;
  lhs.c[static_cast<std::size_t>(q)] = a;
  lhs.c[static_cast<std::size_t>(q) + 1] = tw.one(level);
  DLOG_ASSERT(splits_completely(tw, lhs, seed),
              "completed triple does not split (arithmetic bug)");
  return tr;
}

// --- PGL2 cosets -----------------------------------------------------------------

namespace {

u64 mat_key(const Tower& tw, const FF& a, const FF& b, const FF& c, const FF& d) {
  u64 S = tw.qk();
  return ((tw.encode(a) * S + tw.encode(b)) * S + tw.encode(c)) * S + tw.encode(d);
}

// scale so the first nonzero entry in row-major order is 1
void normalize_mat(const Tower& tw, FF& a, FF& b, FF& c, FF& d) {
  const FF* first = nullptr;
  if (!a.is_zero()) first = &a;
  else if (!b.is_zero()) first = &b;
  else if (!c.is_zero()) first = &c;
  else first = &d;
  FF inv = tw.inv(*first);
  a = tw.mul(a, inv);
  b = tw.mul(b, inv);
  c = tw.mul(c, inv);
  d = tw.mul(d, inv);
}

FF mat_det(const Tower& tw, const MoebiusRep& M) {
  return tw.sub(tw.mul(M.a, M.d), tw.mul(M.b, M.c));
}

}  // namespace

std::vector<MoebiusRep> pgl2_subfield(const Tower& tw) {
  u64 S = tw.qk();
  std::vector<FF> fq;
  for (u64 code = 0; code < S; code++) {
    FF x = tw.decode(code, 1);
    if (tw.frob_q(x) == x) fq.push_back(x);
  }
  std::vector<MoebiusRep> out;
  FF one = tw.one(1), zero = tw.zero(1);
  // alpha = 0 block first (lexicographic), then alpha = 1
  for (auto& c : fq)
    for (auto& d : fq) {
      MoebiusRep M{zero, one, c, d};
      if (!mat_det(tw, M).is_zero()) out.push_back(M);
    }
  for (auto& b : fq)
    for (auto& c : fq)
      for (auto& d : fq) {
        MoebiusRep M{one, b, c, d};
        if (!mat_det(tw, M).is_zero()) out.push_back(M);
      }
  u64 q = tw.q();
  DLOG_ASSERT(out.size() == q * q * q - q, "PGL2(F_q) enumeration size mismatch");
  return out;
}

std::vector<MoebiusRep> pgl2_cosets(const Tower& tw) {
  u64 S = tw.qk();
  u64 q = tw.q();
  auto sub = pgl2_subfield(tw);
  std::unordered_set<u64> visited;
  std::vector<MoebiusRep> out;
  FF one = tw.one(1), zero = tw.zero(1);

  auto consider = [&](MoebiusRep M) {
    if (mat_det(tw, M).is_zero()) return;
    u64 key = mat_key(tw, M.a, M.b, M.c, M.d);
    if (visited.count(key)) return;
    out.push_back(M);
    // mark the whole left coset PGL2(F_q) * M
    for (auto& Smat : sub) {
      FF a = tw.add(tw.mul(Smat.a, M.a), tw.mul(Smat.b, M.c));
      FF b = tw.add(tw.mul(Smat.a, M.b), tw.mul(Smat.b, M.d));
      FF c = tw.add(tw.mul(Smat.c, M.a), tw.mul(Smat.d, M.c));
      FF d = tw.add(tw.mul(Smat.c, M.b), tw.mul(Smat.d, M.d));
      normalize_mat(tw, a, b, c, d);
      visited.insert(mat_key(tw, a, b, c, d));
    }
  };

  // lexicographic enumeration of normalized matrices
  for (u64 cc = 0; cc < S; cc++)
    for (u64 dc = 0; dc < S; dc++)
      consider(MoebiusRep{zero, one, tw.decode(cc, 1), tw.decode(dc, 1)});
  for (u64 bc = 0; bc < S; bc++)
    for (u64 cc = 0; cc < S; cc++)
      for (u64 dc = 0; dc < S; dc++)
        consider(MoebiusRep{one, tw.decode(bc, 1), tw.decode(cc, 1), tw.decode(dc, 1)});

  u64 expect = (checked_pow(S, 3) - S) / (q * q * q - q);
  DLOG_ASSERT(out.size() == expect, "PGL2 coset count mismatch");
  return out;
}

// --- relation generation -----------------------------------------------------------

icm::FactorBase qpa_factor_base(const QpaField& F) {
  return icm::FactorBase::qpa_linears(F.tw, F.h1);
}

namespace {

// N_{a,b,c}(X) = (X + a) h0 + (b X + c) h1
Poly numerator(const QpaField& F, u32 level, const FF& a, const FF& b, const FF& c) {
  const Tower& tw = F.tw;
  Poly h0 = poly::lift(tw, F.h0, level);
  Poly h1 = poly::lift(tw, F.h1, level);
  Poly bx{level, {c, b}};
  poly::trim(bx);
  return poly::add(tw, poly::mul(tw, poly::linear(tw, a), h0), poly::mul(tw, bx, h1));
}

// Collects a relation from a split triple: LHS linears against N's linears.
std::optional<icm::Relation> triple_relation(const QpaField& F, const icm::FactorBase& fb,
                                             const SplitTriple& t, u64 seed,
                                             const std::string& tag) {
  const Tower& tw = F.tw;
  u64 q = tw.q();
  Poly lhs{1, std::vector<FF>(static_cast<std::size_t>(q) + 2, tw.zero(1))};
  lhs.c[0] = t.c;
  lhs.c[1] = t.b;
  lhs.c[static_cast<std::size_t>(q)] = t.a;
  lhs.c[static_cast<std::size_t>(q) + 1] = tw.one(1);
  auto lhs_roots = poly::roots_in_field(tw, lhs, seed);
  DLOG_ASSERT(lhs_roots.size() == q + 1, "split triple left side does not split");

  Poly N = numerator(F, 1, t.a, t.b, t.c);
  if (N.is_zero()) return std::nullopt;
  auto n_roots = poly::roots_in_field(tw, N, seed ^ 0x9e37);
  if (n_roots.size() != static_cast<std::size_t>(poly::deg(N))) return std::nullopt;

  icm::Relation r;
  for (auto& root : lhs_roots) {
    auto id = fb.lookup_poly(tw, poly::linear(tw, tw.neg(root)));
    DLOG_ASSERT(id.has_value(), "linear missing from factor base");
    r.exps.emplace_back(*id, 1);
  }
  if (poly::deg(F.h1) >= 1) {
    auto id = fb.lookup_poly(tw, F.h1);
    DLOG_ASSERT(id.has_value(), "h1 missing from factor base");
    r.exps.emplace_back(*id, 1);
  }
  for (auto& root : n_roots) {
    auto id = fb.lookup_poly(tw, poly::linear(tw, tw.neg(root)));
    DLOG_ASSERT(id.has_value(), "linear missing from factor base");
    r.exps.emplace_back(*id, -1);
  }
  r.tag = tag;
  return r;
}

std::optional<icm::Relation> coset_relation(const QpaField& F, const icm::FactorBase& fb,
                                            const MoebiusRep& M, u64 seed,
                                            const std::string& tag) {
  const Tower& tw = F.tw;
  u64 q = tw.q();
  icm::Relation r;
  // left side: (gamma X + delta) prod_mu ((alpha X + beta) - mu (gamma X + delta))
  // collect the monic linear parts; constants vanish modulo scalars
  auto add_linear_factor = [&](const FF& coefx, const FF& coef0, i64 e) -> bool {
    if (coefx.is_zero()) return !coef0.is_zero();  // constant factor, scalar only
    FF w = tw.mul(coef0, tw.inv(coefx));
    auto id = fb.lookup_poly(tw, poly::linear(tw, w));
    DLOG_ASSERT(id.has_value(), "linear missing from factor base");
    r.exps.emplace_back(*id, e);
    return true;
  };
  if (!add_linear_factor(M.c, M.d, 1)) return std::nullopt;
  // mu runs over the subfield F_q
  for (u64 code = 0, found = 0; code < tw.qk() && found < q; code++) {
    FF mu = tw.decode(code, 1);
    if (!(tw.frob_q(mu) == mu)) continue;
    found++;
    FF coefx = tw.sub(M.a, tw.mul(mu, M.c));
    FF coef0 = tw.sub(M.b, tw.mul(mu, M.d));
    if (!add_linear_factor(coefx, coef0, 1)) return std::nullopt;
  }
  if (poly::deg(F.h1) >= 1) {
    auto id = fb.lookup_poly(tw, F.h1);
    r.exps.emplace_back(*id, 1);
  }
  // right side (x^q replaced by h0/h1):
  //   (alpha~ h0 + beta~ h1)(gamma X + delta) - (alpha X + beta)(gamma~ h0 + delta~ h1)
  Poly left = poly::add(tw, poly::muls(tw, F.h0, tw.frob_q(M.a)),
                        poly::muls(tw, F.h1, tw.frob_q(M.b)));
  Poly right = poly::add(tw, poly::muls(tw, F.h0, tw.frob_q(M.c)),
                         poly::muls(tw, F.h1, tw.frob_q(M.d)));
  Poly gd{1, {M.d, M.c}};
  poly::trim(gd);
  Poly ab{1, {M.b, M.a}};
  poly::trim(ab);
  Poly R = poly::sub(tw, poly::mul(tw, left, gd), poly::mul(tw, ab, right));
  if (R.is_zero()) return std::nullopt;
  auto roots = poly::roots_in_field(tw, R, seed);
  if (roots.size() != static_cast<std::size_t>(poly::deg(R))) return std::nullopt;
  for (auto& root : roots) {
    auto id = fb.lookup_poly(tw, poly::linear(tw, tw.neg(root)));
    r.exps.emplace_back(*id, -1);
  }
  r.tag = tag;
  return r;
}

}  // namespace

icm::RelationSet relgen_qpa(const QpaField& F, const icm::FactorBase& fb,
                            RelMethod method, u32 count, u64 budget, u64 seed,
                            u32 threads) {
  const Tower& tw = F.tw;

  auto verify = [&](const icm::Relation& r) {
    Poly acc = poly::one(tw, 1);
    for (auto& [i, e] : r.exps)
      acc = fmul(F, acc, fpow(F, fb.polys[i], e));
    return is_scalar(F, acc);
  };

  // candidate relations, in deterministic candidate order
  std::vector<std::optional<icm::Relation>> produced;
  auto run_blocks = [&](u64 total, auto&& worker) {
    std::size_t base = produced.size();
    produced.resize(base + total);
    u32 T = std::max(1u, threads);
    std::vector<std::thread> pool;
    for (u32 t = 0; t < T; t++) {
      pool.emplace_back([&, t]() {
        for (u64 i = t; i < total; i += T) produced[base + i] = worker(i);
      });
    }
    for (auto& th : pool) th.join();
  };

  if (method == RelMethod::ggmz || method == RelMethod::all) {
    if (tw.k() == 2) {
      auto triples = k2_triples(tw);
      u64 total = std::min<u64>(triples.size(), budget);
      run_blocks(total, [&](u64 i) {
        return triple_relation(F, fb, triples[i], seed ^ i, "ggmz-k2 " + std::to_string(i));
      });
    } else {
      auto bset = bluher_set(tw, 1, seed);
      u64 S = tw.qk();
      u64 total = std::min<u64>(bset.size() * S * S, budget);
      run_blocks(total, [&](u64 i) -> std::optional<icm::Relation> {
        u64 bi = i / (S * S);
        FF a = tw.decode(i / S % S, 1);
        FF b = tw.decode(i % S, 1);
        if (b == tw.frob_q(a)) return std::nullopt;
        auto t = ggmz_complete_triple(tw, 1, bset[bi], a, b, seed ^ i);
        return triple_relation(F, fb, t, seed ^ i, "ggmz-bluher " + std::to_string(i));
      });
    }
  }
  if (method == RelMethod::joux || method == RelMethod::all) {
    auto cosets = pgl2_cosets(tw);
    u64 total = std::min<u64>(cosets.size(), budget);
    run_blocks(total, [&](u64 i) {
      return coset_relation(F, fb, cosets[i], seed ^ (i << 20), "joux " + std::to_string(i));
    });
  }

  icm::RelationSet out;
  for (auto& c : produced) {
    if (count > 0 && out.rels.size() >= count) break;
    if (c) out.insert(std::move(*c), verify);
  }
  DLOG_CHECK(count == 0 || out.rels.size() >= count, errc::budget_exhausted,
             "qpa relation yield below the requested count");
  return out;
}

// --- degree-two machinery ------------------------------------------------------------

Tower ext_tower(const QpaField& F, u32 level) {
  if (level == 1) return F.tw;
  return gf::build_extension(F.tw, level, F.seed);
}

namespace detail {

Degree2System deg2_system_t(const Tower& tw, const QpaField& F, u32 level, const Poly& P) {
  DLOG_CHECK(poly::deg(P) == 2 && P.level == level, errc::parse_error,
             "deg2_system expects a quadratic at the stated level");
  Poly h0 = poly::lift(tw, F.h0, level);
  Poly h1 = poly::lift(tw, F.h1, level);
  Poly x = poly::xpoly(tw, level);
  auto coef = [&](const Poly& f, u32 i) {
    return i < f.c.size() ? f.c[i] : tw.zero(level);
  };
  Poly r0 = poly::rem(tw, poly::mul(tw, x, h0), P);
  Poly r1 = poly::rem(tw, h0, P);
  Poly r2 = poly::rem(tw, poly::mul(tw, x, h1), P);
  Poly r3 = poly::rem(tw, h1, P);
  // [r2c1 r3c1; r2c0 r3c0] (b, c)^T = -(r0 + a r1) coefficient-wise
  FF det = tw.sub(tw.mul(coef(r2, 1), coef(r3, 0)), tw.mul(coef(r3, 1), coef(r2, 0)));
  DLOG_CHECK(!det.is_zero(), errc::degenerate_system, "deg2 divisibility system singular");
  FF dinv = tw.inv(det);
  // inverse of [[A,B],[C,D]] is 1/det [[D,-B],[-C,A]] with A=r2c1 B=r3c1 C=r2c0 D=r3c0
  auto solve = [&](const FF& rhs1, const FF& rhs0, FF& b, FF& c) {
    b = tw.mul(dinv, tw.sub(tw.mul(coef(r3, 0), rhs1), tw.mul(coef(r3, 1), rhs0)));
    c = tw.mul(dinv, tw.sub(tw.mul(coef(r2, 1), rhs0), tw.mul(coef(r2, 0), rhs1)));
  };
  Degree2System sys;
  solve(tw.neg(coef(r0, 1)), tw.neg(coef(r0, 0)), sys.u0, sys.v0);
  solve(tw.neg(coef(r1, 1)), tw.neg(coef(r1, 0)), sys.u1, sys.v1);
  return sys;
}

// (sum c_i X^i)^q = sum c_i^q X^(iq): exact coefficient spread in char p.
Poly qpow_spread(const Tower& tw, const Poly& a) {
  if (a.is_zero()) return a;
  u64 q = tw.q();
  Poly r{a.level, std::vector<FF>(static_cast<std::size_t>(poly::deg(a)) * q + 1,
                                  tw.zero(a.level))};
  for (std::size_t i = 0; i < a.c.size(); i++)
    r.c[i * q] = tw.frob_q(a.c[i]);
  return r;
}

static bool deg2_try_triple(const Tower& tw, const QpaField& F, u32 level, const Poly& P,
                            const FF& a, const FF& b, const FF& c, u64 seed,
                            Deg2Core& out) {
  u64 q = tw.q();
  Poly lhs{level, std::vector<FF>(static_cast<std::size_t>(q) + 2, tw.zero(level))};
  lhs.c[0] = c;
  lhs.c[1] = b;
  lhs.c[static_cast<std::size_t>(q)] = a;
  lhs.c[static_cast<std::size_t>(q) + 1] = tw.one(level);
  auto roots = poly::roots_in_field(tw, lhs, seed);
  if (roots.size() != q + 1) return false;

  Poly h0L = poly::lift(tw, F.h0, level);
  Poly h1L = poly::lift(tw, F.h1, level);
  Poly bx{level, {c, b}};
  poly::trim(bx);
  Poly N = poly::add(tw, poly::mul(tw, poly::linear(tw, a), h0L), poly::mul(tw, bx, h1L));
  if (N.is_zero()) return false;
  auto [quo, rem] = poly::divmod(tw, N, P);
  if (!rem.is_zero()) return false;

  out.ws.clear();
  for (auto& r : roots) out.ws.push_back(tw.neg(r));
  out.h1exp = poly::deg(F.h1) >= 1 ? 1 : 0;
  FF lcC = tw.one(level);
  if (poly::deg(quo) >= 1) {
    out.cof_monic = poly::make_monic(tw, quo, &lcC);
    out.cofexp = 1;
  } else {
    out.cof_monic = poly::one(tw, level);
    out.cofexp = 0;
    lcC = quo.c.empty() ? tw.zero(level) : quo.c[0];
    if (lcC.is_zero()) return false;
  }
  // account for constant h1 (scalar) when h1 is a nonunit constant
  FF h1scal = poly::deg(F.h1) == 0 ? tw.embed(F.h1.c[0], level) : tw.one(level);
  // prod (x+w) * h1^h1exp = P * C =>  scalar = lc(C) adjusted by constant h1
  out.scalar = tw.mul(lcC, tw.inv(h1scal));
  out.triple = SplitTriple{a, b, c};
  return true;
}

Deg2Core deg2_core_t(const Tower& tw, const QpaField& F, u32 level, const Poly& P,
                     u64 seed, u64 budget) {
  u64 q = tw.q();
  u32 K = tw.k() * level;
  DLOG_CHECK(poly::deg(P) == 2 && poly::is_monic(tw, P), errc::parse_error,
             "deg2 elimination expects a monic quadratic");
  Degree2System sys = deg2_system_t(tw, F, level, P);
  Deg2Core core;

  if (K == 2) {
    // the k = 2 split family: a^q = u0 + u1 a, c = v0 + v1 a in F_q, c != a^(q+1)
    Poly E{level, std::vector<FF>(static_cast<std::size_t>(q) + 1, tw.zero(level))};
    E.c[0] = tw.neg(sys.u0);
    E.c[1] = tw.sub(E.c[1], sys.u1);
    E.c[static_cast<std::size_t>(q)] = tw.add(E.c[static_cast<std::size_t>(q)], tw.one(level));
    poly::trim(E);
    if (E.is_zero()) fail(errc::no_elimination_found, "degenerate k2 root equation");
    for (auto& a : poly::roots_in_field(tw, E, seed)) {
      FF b = tw.add(sys.u0, tw.mul(a, sys.u1));
      FF c = tw.add(sys.v0, tw.mul(a, sys.v1));
      if (!(tw.frob_q(c) == c)) continue;
      if (c == tw.pow(a, q + 1)) continue;
      if (deg2_try_triple(F, level, P, a, b, c, seed, core)) return core;
    }
    fail(errc::no_elimination_found, "k2 family produced no usable root");
  }

  // Bluher route: solve  (u0 + u1 a - a^q)^(q+1) = B (v0 + (v1-u0) a - u1 a^2)^q
  Poly A1{level, std::vector<FF>(static_cast<std::size_t>(q) + 1, tw.zero(level))};
  A1.c[0] = sys.u0;
  A1.c[1] = sys.u1;
  A1.c[static_cast<std::size_t>(q)] = tw.sub(A1.c[static_cast<std::size_t>(q)], tw.one(level));
  poly::trim(A1);
  Poly A2{level, {sys.v0, tw.sub(sys.v1, sys.u0), tw.neg(sys.u1)}};
  poly::trim(A2);
  if (A2.is_zero()) fail(errc::no_elimination_found, "deg2 denominator identically zero");
  Poly A1q1 = poly::mul(tw, qpow_spread(tw, A1), A1);
  Poly A2q = qpow_spread(tw, A2);

  u64 S = tw.size(level);
  auto try_B = [&](const FF& B) -> bool {
    Poly E = poly::sub(tw, A1q1, poly::muls(tw, A2q, B));
    if (E.is_zero()) return false;
    for (auto& a : poly::roots_in_field(tw, E, seed ^ tw.encode(B))) {
      if (poly::eval(tw, A2, a).is_zero()) continue;  // invalid a, Eq. denominator zero
      FF b = tw.add(sys.u0, tw.mul(a, sys.u1));
      FF c = tw.add(sys.v0, tw.mul(a, sys.v1));
      if (deg2_try_triple(F, level, P, a, b, c, seed, core)) return true;
    }
    return false;
  };

  if (S <= (1u << 12)) {
    auto bset = bluher_set(tw, level, F.seed);
    u64 tried = 0;
    for (auto& B : bset) {
      if (tried++ >= budget) break;
      if (try_B(B)) return core;
    }
  } else {
    BluherSampler sampler(tw, level, F.seed);
    for (u64 tried = 0; tried < budget; tried++) {
      auto B = sampler.next();
      if (!B) break;
      if (try_B(*B)) return core;
    }
  }
  fail(errc::no_elimination_found, "every Bluher value failed for this quadratic");
}

Elimination deg2_eliminate(const QpaField& F, u32 level, const Poly& P, u64 seed,
                           u64 budget) {
  const Tower& tw = F.tw;
  Deg2Core core = deg2_core(F, level, P, seed, budget);
  Elimination e;
  e.level = level;
  e.method = "deg2";
  std::map<u64, std::pair<Poly, i64>> agg;
  auto add = [&](const Poly& f, i64 exp) {
    u64 key = icm::poly_code(tw, f);
    auto it = agg.find(key);
    if (it == agg.end()) agg.emplace(key, std::make_pair(f, exp));
    else it->second.second += exp;
  };
  for (auto& w : core.ws) add(poly::linear(tw, w), 1);
  if (core.h1exp) add(poly::lift(tw, F.h1, level), core.h1exp);
  if (core.cofexp) add(core.cof_monic, -core.cofexp);
  for (auto& [k, pe] : agg)
    if (pe.second != 0) e.factors.push_back(pe);
  // identity: P = prod(x+w) h1^h1e cof^-1 scalar^-1
  e.scalar = tw.inv(core.scalar);
  DLOG_ASSERT(verify_elimination(F, P, e), "deg2 elimination failed verification");
  return e;
}

bool verify_elimination(const QpaField& F, const Poly& P, const Elimination& e) {
  const Tower& tw = F.tw;
  u32 level = e.level;
  Poly I = poly::lift(tw, F.I, level);
  auto mulI = [&](const Poly& a, const Poly& b) {
    return poly::rem(tw, poly::mul(tw, a, b), I);
  };
  // signed exponents evaluated directly (the level big field can exceed u64,
  // so no order reduction; exponents here are at most ~2^62)
  auto powI = [&](const Poly& a, i64 exp) {
    Poly base = poly::rem(tw, a, I);
    if (exp < 0) {
      auto eg = poly::eea(tw, base, I);
      DLOG_ASSERT(poly::deg(eg.g) == 0, "verify: non-invertible factor");
      base = poly::muls(tw, eg.s, tw.inv(eg.g.c[0]));
      exp = -exp;
    }
    return poly::powmod(tw, base, static_cast<u128>(exp), I);
  };
  Poly acc = poly::constant(tw, e.scalar);
  if (acc.is_zero()) return false;
  for (auto& [f, exp] : e.factors) acc = mulI(acc, powI(f, exp));
  for (auto& [f, exp] : e.lifts) acc = mulI(acc, powI(f, exp));
  return poly::sub(tw, acc, poly::rem(tw, P, I)).is_zero();
}

// --- traps, representatives, continued fractions ------------------------------------

bool trap_check(const QpaField& F, const Poly& P, u32 j_max) {
  const Tower& tw = F.tw;
  DLOG_CHECK(poly::deg(P) >= 1, errc::parse_error, "trap_check needs deg >= 1");
  if (j_max == 0) {
    u32 s2 = 1;
    while (s2 < F.n + 1) s2 <<= 1;
    j_max = tw.k() * (s2 / 2) + 1;
  }
  u64 q = tw.q();
  Poly xq = poly::rem(tw, poly::xpoly(tw, 1), P);
  for (u32 j = 1; j <= j_max; j++) {
    xq = poly::powmod(tw, xq, q, P);
    Poly fj = poly::rem(tw, poly::sub(tw, poly::mul(tw, F.h1, xq), F.h0), P);
    if (fj.is_zero()) return true;
    if (poly::deg(poly::gcd(tw, P, fj)) >= 1) return true;
  }
  return false;
}

std::pair<u64, Poly> power_of_two_rep(const QpaField& F, const Poly& h, u64 seed) {
  const Tower& tw = F.tw;
  u32 s2 = 1;
  while (s2 < F.n + 1) s2 <<= 1;
  u32 filler_deg = s2 - F.n;
  Rng rng(seed, "qpa.pow2rep");
  Poly hred = freduce(F, h);
  DLOG_CHECK(!hred.is_zero(), errc::parse_error, "target is zero");
  u64 budget = 4096ULL * s2;
  for (u64 trial = 0; trial < budget; trial++) {
    u64 e = rng.below(F.Q - 1);
    Poly rep = fmul(F, hred, fpow(F, F.g, e));
    Poly t = poly::random_monic(tw, 1, filler_deg, rng);
    Poly R = poly::add(tw, rep, poly::mul(tw, F.I, t));
    DLOG_ASSERT(poly::deg(R) == static_cast<int>(s2), "representative degree mismatch");
    if (!poly::is_irreducible(tw, R)) continue;
    if (trap_check(F, R)) continue;
    return {e, R};
  }
  fail(errc::budget_exhausted, "power-of-two representative search stalled");
}

CfSplit initial_split_cf(const QpaField& F, const Poly& h, u32 degree_cap, u64 seed,
                         u64 budget) {
  const Tower& tw = F.tw;
  u32 half = (F.n + 1) / 2;
  Rng rng(seed, "qpa.cfsplit");
  Poly hred = freduce(F, h);
  for (u64 trial = 0; trial < budget; trial++) {
    u64 e = rng.below(F.Q - 1);
    Poly A = fmul(F, hred, fpow(F, F.g, e));
    if (poly::deg(A) < 1) continue;
    // extended Euclid rows (r, t) with r = s I + t A, stop at the balance point
    Poly r0 = F.I, r1 = A;
    Poly t0 = poly::zero(1), t1 = poly::one(tw, 1);
    while (poly::deg(r1) > static_cast<int>(half)) {
      auto [quo, r2] = poly::divmod(tw, r0, r1);
      Poly t2 = poly::sub(tw, t0, poly::mul(tw, quo, t1));
      r0 = std::move(r1);
      r1 = std::move(r2);
      t0 = std::move(t1);
      t1 = std::move(t2);
    }
    if (r1.is_zero() || t1.is_zero()) continue;
    DLOG_ASSERT(poly::deg(r1) + poly::deg(t1) <= static_cast<int>(F.n),
                "EEA degree invariant violated");
    if (!poly::is_smooth(tw, r1, degree_cap, seed ^ trial)) continue;
    if (!poly::is_smooth(tw, t1, degree_cap, seed ^ (trial + 1))) continue;
    return CfSplit{e, r1, t1};
  }
  fail(errc::budget_exhausted, "continued fraction split stalled");
}

}  // namespace dlog::qpa
