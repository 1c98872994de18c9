#include "dlog/icm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dlog::icm {

u64 poly_code(const Tower& tw, const Poly& f) {
  u64 S = tw.size(f.level);
  u128 acc = 0, mult = 1;
  for (auto& cf : f.c) {
    acc += mult * tw.encode(cf);
    mult *= S;
    DLOG_CHECK(acc < (static_cast<u128>(1) << 63), errc::instance_too_large,
               "poly code exceeds 2^63");
  }
  return static_cast<u64>(acc);
}

std::optional<u32> FactorBase::lookup_int(u64 v) const {
  auto it = index.find(v);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::optional<u32> FactorBase::lookup_poly(const Tower& tw, const Poly& f) const {
  auto it = index.find(poly_code(tw, f));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

FactorBase FactorBase::primes_up_to(u64 B) {
  FactorBase fb;
  fb.kind = FbKind::int_primes;
  fb.B = B;
  std::vector<bool> sieve(B + 1, true);
  for (u64 i = 2; i <= B; i++) {
    if (!sieve[i]) continue;
    fb.index.emplace(i, static_cast<u32>(fb.ints.size()));
    fb.ints.push_back(i);
    for (u64 j = i * i; j <= B; j += i) sieve[j] = false;
  }
  fb.core = static_cast<u32>(fb.ints.size());
  return fb;
}

FactorBase FactorBase::poly_irreducibles(const Tower& tw, u32 level, u32 b) {
  FactorBase fb;
  fb.kind = FbKind::poly_irred;
  fb.level = level;
  fb.b = b;
  u64 S = tw.size(level);
  for (u32 d = 1; d <= b; d++) {
    // monic degree d: enumerate the S^d lower coefficient vectors by code
    u128 total = 1;
    for (u32 i = 0; i < d; i++) total *= S;
    DLOG_CHECK(total <= (1u << 22), errc::instance_too_large, "factor base too large");
    for (u64 c = 0; c < static_cast<u64>(total); c++) {
      Poly f{level, {}};
      u64 cc = c;
      for (u32 i = 0; i < d; i++) {
        f.c.push_back(tw.decode(cc % S, level));
        cc /= S;
      }
      f.c.push_back(tw.one(level));
      if (poly::is_irreducible(tw, f)) {
        fb.index.emplace(poly_code(tw, f), static_cast<u32>(fb.polys.size()));
        fb.polys.push_back(std::move(f));
      }
    }
  }
  fb.core = static_cast<u32>(fb.polys.size());
  return fb;
}

FactorBase FactorBase::qpa_linears(const Tower& tw, const Poly& h1) {
  FactorBase fb;
  fb.kind = FbKind::qpa_linears;
  fb.level = 1;
  fb.b = 1;
  u64 S = tw.qk();
  for (u64 c = 0; c < S; c++) {
    Poly f = poly::linear(tw, tw.decode(c, 1));
    fb.index.emplace(poly_code(tw, f), static_cast<u32>(fb.polys.size()));
    fb.polys.push_back(std::move(f));
  }
  fb.core = static_cast<u32>(fb.polys.size());
  if (poly::deg(h1) >= 1) fb.append_special_poly(tw, h1);
  return fb;
}

u32 FactorBase::append_special_int(u64 v) {
  auto it = index.find(v);
  if (it != index.end()) return it->second;
  u32 id = static_cast<u32>(ints.size());
  index.emplace(v, id);
  ints.push_back(v);
  return id;
}

u32 FactorBase::append_special_poly(const Tower& tw, const Poly& f) {
  u64 code = poly_code(tw, f);
  auto it = index.find(code);
  if (it != index.end()) return it->second;
  u32 id = static_cast<u32>(polys.size());
  index.emplace(code, id);
  polys.push_back(f);
  return id;
}

std::string FactorBase::to_text(const Tower* tw) const {
  std::ostringstream out;
  out << "factorbase kind=";
  switch (kind) {
    case FbKind::int_primes: out << "int"; break;
    case FbKind::poly_irred: out << "poly"; break;
    case FbKind::qpa_linears: out << "qpa"; break;
  }
  out << " count=" << size() << " core=" << core;
  if (kind == FbKind::int_primes) out << " B=" << B;
  else out << " level=" << level << " b=" << b;
  out << '\n';
  if (kind == FbKind::int_primes) {
    for (u64 v : ints) out << v << '\n';
  } else {
    DLOG_ASSERT(tw != nullptr, "factor base serialization needs the tower");
    for (auto& f : polys) out << poly::encode(*tw, f) << '\n';
  }
  return out.str();
}

FactorBase FactorBase::from_text(const Tower* tw, const std::string& text) {
  std::istringstream in(text);
  std::string header;
  DLOG_CHECK(static_cast<bool>(std::getline(in, header)), errc::parse_error, "empty factor base");
  FactorBase fb;
  std::string kind = fmtio::kv(header, "kind");
  u32 count = static_cast<u32>(fmtio::to_u64(fmtio::kv(header, "count")));
  fb.core = static_cast<u32>(fmtio::to_u64(fmtio::kv(header, "core")));
  std::string line;
  if (kind == "int") {
    fb.kind = FbKind::int_primes;
    fb.B = fmtio::to_u64(fmtio::kv(header, "B"));
    for (u32 i = 0; i < count; i++) {
      DLOG_CHECK(static_cast<bool>(std::getline(in, line)), errc::parse_error, "factor base truncated");
      fb.append_special_int(fmtio::to_u64(line));
    }
  } else {
    fb.kind = kind == "qpa" ? FbKind::qpa_linears : FbKind::poly_irred;
    fb.level = static_cast<u32>(fmtio::to_u64(fmtio::kv(header, "level")));
    fb.b = static_cast<u32>(fmtio::to_u64(fmtio::kv(header, "b")));
    DLOG_ASSERT(tw != nullptr, "factor base parsing needs the tower");
    for (u32 i = 0; i < count; i++) {
      DLOG_CHECK(static_cast<bool>(std::getline(in, line)), errc::parse_error, "factor base truncated");
      fb.append_special_poly(*tw, poly::decode(*tw, fb.level, line));
    }
  }
  return fb;
}

u64 fb_hash(const FactorBase& fb, const Tower* tw) {
  std::string t = fb.to_text(tw);
  return fnv1a(t.data(), t.size());
}

void Relation::normalize() {
  auto norm = [](std::vector<std::pair<u32, i64>>& v) {
    std::sort(v.begin(), v.end());
    std::vector<std::pair<u32, i64>> out;
    for (auto& [i, e] : v) {
      if (!out.empty() && out.back().first == i) out.back().second += e;
      else out.emplace_back(i, e);
    }
    std::erase_if(out, [](auto& p) { return p.second == 0; });
    v = std::move(out);
  };
  norm(exps);
  norm(rhs);
}

u64 Relation::key() const {
  u64 h = 1469598103934665603ULL;
  for (auto& [i, e] : exps) {
    h = fnv1a(&i, sizeof i, h);
    h = fnv1a(&e, sizeof e, h);
  }
  for (auto& [i, e] : rhs) {
    h = fnv1a(&i, sizeof i, h);
    h = fnv1a(&e, sizeof e, h);
  }
  h = fnv1a(&anchor_e, sizeof anchor_e, h);
  return h;
}

bool RelationSet::insert(Relation r, const std::function<bool(const Relation&)>& verify) {
  r.normalize();
  if (r.exps.empty() && r.rhs.empty() && r.anchor_e == 0) return false;
  u64 k = r.key();
  if (seen_.count(k)) return false;
  if (verify && !verify(r)) return false;
  seen_.emplace(k, static_cast<u32>(rels.size()));
  rels.push_back(std::move(r));
  return true;
}

void RelationSet::sort_canonical() {
  std::sort(rels.begin(), rels.end(), [](const Relation& a, const Relation& b) {
    if (a.exps != b.exps) return a.exps < b.exps;
    if (a.anchor_e != b.anchor_e) return a.anchor_e < b.anchor_e;
    return a.rhs < b.rhs;
  });
}

LogTable logs_from_relations(const RelationSet& rels, u32 fb_size, u64 ell,
                             u32 anchor, u64 seed) {
  u32 m = fb_size;
  DLOG_CHECK(rels.rels.size() > m, errc::insufficient_relations,
             "need more relations than factor base elements");
  DLOG_CHECK(anchor < m, errc::parse_error, "anchor outside factor base");

  auto build_row = [&](const Relation& r) {
    std::vector<std::pair<u32, u64>> row;
    for (auto& [i, e] : r.exps) row.emplace_back(i, smod(e, ell));
    if (r.anchor_e != 0) row.emplace_back(anchor, smod(-r.anchor_e, ell));
    return row;
  };

  auto validate = [&](const std::vector<u64>& logs) {
    for (auto& r : rels.rels) {
      u64 acc = 0;
      for (auto& [i, e] : r.exps) acc = addmod(acc, mulmod(smod(e, ell), logs[i], ell), ell);
      if (acc != mulmod(smod(r.anchor_e, ell), logs[anchor], ell)) return false;
    }
    return true;
  };

  u32 total = static_cast<u32>(rels.rels.size());
  for (u32 attempt = 0; attempt < 10; attempt++) {
    linalg::SparseMatrix M;
    M.m = m;
    M.mod = ell;
    // square truncation: a rotating window of m rows
    for (u32 i = 0; i < m; i++)
      M.add_row(build_row(rels.rels[(i + attempt * 7) % total]));

    std::vector<u64> x;
    try {
      x = linalg::wiedemann_kernel(M, seed + attempt);
    } catch (const error& e) {
      if (e.code == errc::probably_nonsingular) continue;
      throw;
    }
    if (x[anchor] == 0) {
      // retry with a fresh kernel vector; after the loop this surfaces as
      // AnchorVanishes if nothing else worked
      bool fixed = false;
      for (u32 t = 1; t <= 10 && !fixed; t++) {
        try {
          auto y = linalg::wiedemann_kernel(M, seed + attempt + 1000 * t);
          if (y[anchor] != 0) { x = y; fixed = true; }
        } catch (const error&) { break; }
      }
      if (!fixed) {
        if (attempt == 9) fail(errc::anchor_vanishes, "kernel vanishes at the anchor");
        continue;
      }
    }
    // rank probe: a second kernel vector must be proportional
    try {
      auto y = linalg::wiedemann_kernel(M, seed + attempt + 777);
      // compare y * x[j0] == x * y[j0] at the first nonzero coordinate of x
      u32 j0 = 0;
      while (j0 < m && x[j0] == 0) j0++;
      bool prop = true;
      for (u32 j = 0; j < m && prop; j++)
        if (mulmod(y[j], x[j0], ell) != mulmod(x[j], y[j0], ell)) prop = false;
      if (!prop) fail(errc::rank_too_low, "kernel dimension exceeds 1: request more relations");
    } catch (const error& e) {
      if (e.code != errc::probably_nonsingular) throw;
    }

    u64 scale = invmod(x[anchor], ell);
    LogTable t;
    t.mod = ell;
    t.anchor = anchor;
    t.v.resize(m);
    for (u32 j = 0; j < m; j++) t.v[j] = mulmod(x[j], scale, ell);
    if (validate(t.v)) return t;
  }
  fail(errc::rank_too_low, "no kernel vector consistent with all relations");
}

RelationSet relgen_prime_field(u64 p, u64 g, const FactorBase& fb, u32 count, u64 seed) {
  DLOG_CHECK(fb.kind == FbKind::int_primes, errc::parse_error, "integer factor base required");
  u64 N = p - 1;
  double u = std::log(static_cast<double>(p)) / std::log(static_cast<double>(fb.B));
  u64 budget = 100ULL * count * static_cast<u64>(std::max(1.0, std::pow(u, u)));

  auto verify = [&](const Relation& r) {
    u64 lhs = 1;
    for (auto& [i, e] : r.exps) {
      DLOG_ASSERT(e >= 0, "prime-field relation with negative exponent");
      lhs = mulmod(lhs, powmod(fb.ints[i], static_cast<u64>(e), p), p);
    }
    return lhs == powmod(g, smod(r.anchor_e, N), p);
  };

  RelationSet out;
  Rng rng(seed, "icm.relgen_prime");
  for (u64 trial = 0; trial < budget && out.rels.size() < count; trial++) {
    u64 e = rng.below(N);
    u64 v = powmod(g, e, p);
    if (v == 0) continue;
    Relation r;
    r.anchor_e = static_cast<i64>(e);
    u64 rest = v;
    for (u32 i = 0; i < fb.core && rest > 1; i++) {
      u64 f = fb.ints[i];
      i64 cnt = 0;
      while (rest % f == 0) { rest /= f; cnt++; }
      if (cnt) r.exps.emplace_back(i, cnt);
    }
    if (rest != 1) continue;
    r.tag = "prime-field seed-trial " + std::to_string(trial);
    out.insert(std::move(r), verify);
  }
  DLOG_CHECK(out.rels.size() >= count, errc::budget_exhausted,
             "prime-field relation yield stalled");
  return out;
}

RelationSet relgen_small_char(const Tower& tw, const Poly& I, const Poly& g,
                              const FactorBase& fb, u32 count, u64 seed) {
  DLOG_CHECK(fb.kind != FbKind::int_primes, errc::parse_error, "polynomial factor base required");
  u32 n = static_cast<u32>(poly::deg(I));
  u64 N = 1;
  for (u32 i = 0; i < n; i++) N *= tw.size(I.level);
  N -= 1;
  double u = static_cast<double>(n) / fb.b;
  u64 budget = 100ULL * count * static_cast<u64>(std::max(1.0, std::pow(u, u)));

  auto verify = [&](const Relation& r) {
    // prod fb[i]^e == unit * g^anchor_e with unit a base-field scalar
    Poly acc = poly::one(tw, I.level);
    for (auto& [i, e] : r.exps) {
      Poly f = poly::powmod(tw, fb.polys[i], static_cast<u128>(smod(e, N)), I);
      acc = poly::rem(tw, poly::mul(tw, acc, f), I);
    }
    Poly target = poly::powmod(tw, g, static_cast<u128>(smod(r.anchor_e, N)), I);
    // acc must equal unit*target: compare after normalizing by leading coeff
    if (acc.is_zero() || target.is_zero()) return false;
    if (poly::deg(acc) != poly::deg(target)) return false;
    Poly diff = poly::sub(tw, poly::muls(tw, acc, tw.inv(poly::lc(acc))),
                          poly::muls(tw, target, tw.inv(poly::lc(target))));
    return diff.is_zero();
  };

  RelationSet out;
  Rng rng(seed, "icm.relgen_smallchar");
  for (u64 trial = 0; trial < budget && out.rels.size() < count; trial++) {
    u64 e = rng.below(N);
    Poly v = poly::powmod(tw, g, e, I);
    if (v.is_zero()) continue;
    auto [fa, cof] = poly::smooth_part(tw, v, fb.b, seed ^ trial);
    if (poly::deg(cof) != 0) continue;
    Relation r;
    r.anchor_e = static_cast<i64>(e);
    bool ok = true;
    for (auto& [f, mult] : fa.factors) {
      auto id = fb.lookup_poly(tw, f);
      if (!id) { ok = false; break; }
      r.exps.emplace_back(*id, static_cast<i64>(mult));
    }
    if (!ok) continue;
    r.tag = "small-char seed-trial " + std::to_string(trial);
    out.insert(std::move(r), verify);
  }
  DLOG_CHECK(out.rels.size() >= count, errc::budget_exhausted,
             "small-char relation yield stalled");
  return out;
}

u64 individual_log_basic(const Tower& tw, const Poly& I, const Poly& g, const Poly& h,
                         const FactorBase& fb, const LogTable& table, u64 ell, u64 seed) {
  u32 n = static_cast<u32>(poly::deg(I));
  u64 N = 1;
  for (u32 i = 0; i < n; i++) N *= tw.size(I.level);
  N -= 1;
  Rng rng(seed, "icm.indlog");
  u64 budget = 200000;
  for (u64 trial = 0; trial < budget; trial++) {
    u64 e = trial == 0 ? 0 : rng.below(N);
    Poly v = poly::rem(tw, poly::mul(tw, h, poly::powmod(tw, g, e, I)), I);
    if (v.is_zero()) continue;
    auto [fa, cof] = poly::smooth_part(tw, v, fb.b, seed ^ trial);
    if (poly::deg(cof) != 0) continue;
    u64 acc = 0;
    bool ok = true;
    for (auto& [f, mult] : fa.factors) {
      auto id = fb.lookup_poly(tw, f);
      if (!id) { ok = false; break; }
      acc = addmod(acc, mulmod(mult % ell, table.at(*id), ell), ell);
    }
    if (!ok) continue;
    return submod(acc, e % ell, ell);
  }
  fail(errc::budget_exhausted, "individual log randomization stalled");
}

u64 individual_log_prime(u64 p, u64 g, u64 h, const FactorBase& fb,
                         const LogTable& table, u64 ell, u64 seed) {
  u64 N = p - 1;
  Rng rng(seed, "icm.indlog_prime");
  u64 budget = 200000;
  for (u64 trial = 0; trial < budget; trial++) {
    u64 e = trial == 0 ? 0 : rng.below(N);
    u64 v = mulmod(h, powmod(g, e, p), p);
    u64 acc = 0;
    u64 rest = v;
    for (u32 i = 0; i < fb.core && rest > 1; i++) {
      u64 f = fb.ints[i];
      u64 cnt = 0;
      while (rest % f == 0) { rest /= f; cnt++; }
      if (cnt) acc = addmod(acc, mulmod(cnt % ell, table.at(i), ell), ell);
    }
    if (rest != 1) continue;
    return submod(acc, e % ell, ell);
  }
  fail(errc::budget_exhausted, "individual log randomization stalled");
}

std::string relations_to_text(const RelationSet& rels, u64 fbhash,
                              std::optional<u64> mod_hint) {
  std::ostringstream out;
  out << "relations fb=" << std::hex << fbhash << std::dec << " mod-hint=";
  if (mod_hint) out << *mod_hint;
  else out << "none";
  out << '\n';
  RelationSet sorted = rels;
  sorted.sort_canonical();
  for (auto& r : sorted.rels) {
    out << "REL";
    for (auto& [i, e] : r.exps) out << ' ' << i << ':' << e;
    out << " | " << r.anchor_e << '\n';
  }
  return out.str();
}

RelationSet relations_from_text(const std::string& text, u64* fbhash_out,
                                std::optional<u64>* mod_hint_out) {
  std::istringstream in(text);
  std::string header;
  DLOG_CHECK(static_cast<bool>(std::getline(in, header)), errc::parse_error, "empty relation file");
  if (fbhash_out) *fbhash_out = std::stoull(fmtio::kv(header, "fb"), nullptr, 16);
  if (mod_hint_out) {
    std::string mh = fmtio::kv(header, "mod-hint");
    *mod_hint_out = (mh == "none") ? std::nullopt : std::optional<u64>(fmtio::to_u64(mh));
  }
  RelationSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    DLOG_CHECK(tok == "REL", errc::parse_error, "bad relation line: " + line);
    Relation r;
    bool after_bar = false;
    while (ls >> tok) {
      if (tok == "|") { after_bar = true; continue; }
      if (after_bar) {
        r.anchor_e = std::stoll(tok);
      } else {
        auto pos = tok.find(':');
        DLOG_CHECK(pos != std::string::npos, errc::parse_error, "bad relation entry: " + tok);
        r.exps.emplace_back(static_cast<u32>(fmtio::to_u64(tok.substr(0, pos))),
                            std::stoll(tok.substr(pos + 1)));
      }
    }
    out.insert(std::move(r), nullptr);
  }
  return out;
}

std::string logtable_to_text(const LogTable& t) {
  std::ostringstream out;
  out << "logtable mod=" << t.mod << " anchor=" << t.anchor << " count=" << t.v.size() << '\n';
  for (std::size_t i = 0; i < t.v.size(); i++) out << i << ' ' << t.v[i] << '\n';
  return out.str();
}

LogTable logtable_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  DLOG_CHECK(static_cast<bool>(std::getline(in, header)), errc::parse_error, "empty log table");
  LogTable t;
  t.mod = fmtio::to_u64(fmtio::kv(header, "mod"));
  t.anchor = static_cast<u32>(fmtio::to_u64(fmtio::kv(header, "anchor")));
  u32 count = static_cast<u32>(fmtio::to_u64(fmtio::kv(header, "count")));
  t.v.assign(count, 0);
  std::string line;
  for (u32 i = 0; i < count; i++) {
    DLOG_CHECK(static_cast<bool>(std::getline(in, line)), errc::parse_error, "log table truncated");
    std::istringstream ls(line);
    u64 idx, val;
    ls >> idx >> val;
    t.v.at(idx) = val;
  }
  return t;
}

}  // namespace dlog::icm
