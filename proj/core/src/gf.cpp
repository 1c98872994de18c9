#include "dlog/gf.hpp"

#include <algorithm>
#include <sstream>

namespace dlog::gf {

namespace fppoly {

void trim(V& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

int deg(const V& a) { return static_cast<int>(a.size()) - 1; }

V add(const V& a, const V& b, u32 p) {
  V r(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < r.size(); i++) {
    u64 s = (i < a.size() ? a[i] : 0) + (i < b.size() ? b[i] : 0);
    r[i] = static_cast<Coord>(s % p);
  }
  trim(r);
  return r;
}

V sub(const V& a, const V& b, u32 p) {
  V r(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < r.size(); i++) {
    u64 s = (i < a.size() ? a[i] : 0) + p - (i < b.size() ? b[i] : 0) % p;
    r[i] = static_cast<Coord>(s % p);
  }
  trim(r);
  return r;
}

V mul(const V& a, const V& b, u32 p) {
  if (a.empty() || b.empty()) return {};
  V r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); i++) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < b.size(); j++)
      r[i + j] = static_cast<Coord>((r[i + j] + static_cast<u64>(a[i]) * b[j]) % p);
  }
  trim(r);
  return r;
}

V rem(V a, const V& b, u32 p) {
  DLOG_CHECK(!b.empty(), errc::division_by_zero, "fppoly::rem by zero");
  u64 lcinv = invmod(b.back(), p);
  while (deg(a) >= deg(b)) {
    u64 coef = mulmod(a.back(), lcinv, p);
    std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); i++) {
      u64 s = a[shift + i] + p - mulmod(coef, b[i], p);
      a[shift + i] = static_cast<Coord>(s % p);
    }
    trim(a);
  }
  return a;
}

V gcd(V a, V b, u32 p) {
  while (!b.empty()) {
    V t = rem(a, b, p);
    a = std::move(b);
    b = std::move(t);
  }
  if (!a.empty() && a.back() != 1) {
    u64 lcinv = invmod(a.back(), p);
    for (auto& v : a) v = static_cast<Coord>(mulmod(v, lcinv, p));
  }
  return a;
}

V powmod(const V& base, u128 e, const V& mod, u32 p) {
  V r{1};
  V b = rem(base, mod, p);
  while (e) {
    if (e & 1) r = rem(mul(r, b, p), mod, p);
    b = rem(mul(b, b, p), mod, p);
    e >>= 1;
  }
  return r;
}

// Rabin test over F_p: X^(p^n) = X mod f and gcd(X^(p^(n/r)) - X, f) = 1
// for every prime r | n.
bool is_irreducible(const V& f, u32 p) {
  int n = deg(f);
  if (n <= 0) return false;
  if (n == 1) return true;
  V x{0, 1};
  // prime factors of n
  std::vector<u32> rs;
  u32 nn = static_cast<u32>(n);
  for (u32 r = 2; r * r <= nn; r++)
    if (nn % r == 0) {
      rs.push_back(r);
      while (nn % r == 0) nn /= r;
    }
  if (nn > 1) rs.push_back(nn);

  // iterate the p-power map: xp[j] = X^(p^j) mod f
  V cur = x;
  std::vector<V> xp(static_cast<std::size_t>(n) + 1);
  xp[0] = x;
  for (int j = 1; j <= n; j++) {
    cur = powmod(cur, p, f, p);
    xp[static_cast<std::size_t>(j)] = cur;
  }
  if (xp[static_cast<std::size_t>(n)] != x) return false;
  for (u32 r : rs) {
    V d = sub(xp[static_cast<std::size_t>(n) / r], x, p);
    V g = gcd(d, f, p);
    if (deg(g) != 0) return false;
  }
  return true;
}

V random_monic(u32 d, u32 p, Rng& rng) {
  V f(d + 1);
  for (u32 i = 0; i < d; i++) f[i] = static_cast<Coord>(rng.below(p));
  f[d] = 1;
  return f;
}

}  // namespace fppoly

namespace {

bool is_prime_u32(u32 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; d++)
    if (n % d == 0) return false;
  return true;
}

u64 checked_pow_u64(u64 b, u32 e) {
  u128 r = 1;
  for (u32 i = 0; i < e; i++) {
    r *= b;
    DLOG_CHECK(r < (static_cast<u128>(1) << 63), errc::instance_too_large,
               "field size exceeds 2^63");
  }
  return static_cast<u64>(r);
}

}  // namespace

Tower::Tower(u32 p, u32 l, u32 k, std::vector<Coord> defining_poly)
    : p_(p), l_(l), k_(k), m_(l * k), f_(std::move(defining_poly)) {
  DLOG_CHECK(is_prime_u32(p_), errc::parse_error, "tower characteristic not prime");
  DLOG_CHECK(l_ >= 1 && k_ >= 1, errc::parse_error, "tower degrees must be positive");
  for (auto& v : f_) v %= p_;
  fppoly::trim(f_);
  DLOG_CHECK(fppoly::deg(f_) == static_cast<int>(m_) && f_.back() == 1,
             errc::parse_error, "defining polynomial must be monic of degree l*k");
  DLOG_CHECK(fppoly::is_irreducible(f_, p_), errc::parse_error,
             "defining polynomial not irreducible over F_p");
  q_ = checked_pow_u64(p_, l_);
  qk_ = checked_pow_u64(p_, m_);

  // reduction rows X^(m+i) mod f
  red_.resize(m_);
  fppoly::V cur(m_, 0);  // X^m mod f = -f mod X^m
  for (u32 i = 0; i < m_; i++) cur[i] = static_cast<Coord>((p_ - f_[i]) % p_);
  for (u32 i = 0; i < m_; i++) {
    cur.resize(m_);
    red_[i] = cur;
    // multiply by X and reduce
    fppoly::V nxt(m_, 0);
    Coord top = cur[m_ - 1];
    for (u32 j = m_ - 1; j > 0; j--) nxt[j] = cur[j - 1];
    nxt[0] = 0;
    if (top)
      for (u32 j = 0; j < m_; j++)
        nxt[j] = static_cast<Coord>((nxt[j] + static_cast<u64>(top) * red_[0][j]) % p_);
    cur = std::move(nxt);
  }

  // Frobenius basis images: frob_[e] row j holds coords of (X^j)^(p^e).
  frob_.resize(m_);
  frob_[0].assign(static_cast<std::size_t>(m_) * m_, 0);
  for (u32 j = 0; j < m_; j++) frob_[0][static_cast<std::size_t>(j) * m_ + j] = 1;
  if (m_ >= 2) {
    fppoly::V xp = fppoly::powmod({0, 1}, p_, f_, p_);
    // frob_[1] rows: (X^j)^p = (X^p)^j
    frob_[1].assign(static_cast<std::size_t>(m_) * m_, 0);
    fppoly::V pw{1};
    for (u32 j = 0; j < m_; j++) {
      pw.resize(m_);
      for (u32 t = 0; t < m_; t++) frob_[1][static_cast<std::size_t>(j) * m_ + t] = pw[t];
      fppoly::trim(pw);
      pw = fppoly::rem(fppoly::mul(pw, xp, p_), f_, p_);
    }
    for (u32 e = 2; e < m_; e++) {
      frob_[e].assign(static_cast<std::size_t>(m_) * m_, 0);
      // frob_[e] = frob_[e-1] composed with one more p-power
      for (u32 j = 0; j < m_; j++)
        for (u32 t = 0; t < m_; t++) {
          Coord v = frob_[e - 1][static_cast<std::size_t>(j) * m_ + t];
          if (!v) continue;
          for (u32 s = 0; s < m_; s++)
            frob_[e][static_cast<std::size_t>(j) * m_ + s] = static_cast<Coord>(
                (frob_[e][static_cast<std::size_t>(j) * m_ + s] +
                 static_cast<u64>(v) * frob_[1][static_cast<std::size_t>(t) * m_ + s]) % p_);
        }
    }
  }
}

Tower Tower::make(u32 p, u32 l, u32 k, u64 seed) {
  u32 m = l * k;
  if (m == 1) return Tower(p, l, k, {0, 1});  // base is F_p itself
  Rng rng(seed, "gf.tower.defpoly");
  for (u32 trial = 0; trial < 100 * m; trial++) {
    auto f = fppoly::random_monic(m, p, rng);
    if (fppoly::is_irreducible(f, p)) return Tower(p, l, k, std::move(f));
  }
  fail(errc::search_exhausted, "no irreducible defining polynomial found");
}

u32 Tower::deg_p(u32 level) const {
  if (level == 1) return m_;
  return ext(level).d * m_;
}

u64 Tower::size(u32 level) const { return checked_pow_u64(p_, deg_p(level)); }

std::vector<u32> Tower::ext_degrees() const {
  std::vector<u32> out;
  for (auto& [d, e] : exts_) out.push_back(d);
  return out;
}

const std::vector<FF>& Tower::ext_poly(u32 d) const { return ext(d).g; }

const Tower::Ext& Tower::ext(u32 d) const {
  auto it = exts_.find(d);
  DLOG_CHECK(it != exts_.end(), errc::level_mismatch,
             "extension level " + std::to_string(d) + " not registered");
  return it->second;
}

void Tower::check_level(const FF& x) const {
  u32 want = deg_p(x.level);
  DLOG_ASSERT(x.c.size() == want, "element coordinate length mismatch");
}

FF Tower::zero(u32 level) const { return FF{level, std::vector<Coord>(deg_p(level), 0)}; }

FF Tower::one(u32 level) const {
  FF r = zero(level);
  r.c[0] = 1;
  return r;
}

FF Tower::from_coords(u32 level, std::vector<Coord> c) const {
  c.resize(deg_p(level), 0);
  for (auto& v : c) v %= p_;
  return FF{level, std::move(c)};
}

FF Tower::from_u64(u64 v, u32 level) const {
  FF r = zero(level);
  r.c[0] = static_cast<Coord>(v % p_);
  return r;
}

FF Tower::embed(const FF& x, u32 level) const {
  DLOG_CHECK(x.level == 1, errc::level_mismatch, "embed expects a base element");
  if (level == 1) return x;
  FF r = zero(level);
  std::copy(x.c.begin(), x.c.end(), r.c.begin());
  return r;
}

FF Tower::gen(u32 level) const {
  FF r = zero(level);
  if (level == 1) {
    if (m_ == 1) return r;  // base is F_p; no nontrivial generator of the power basis
    r.c[1] = 1;
  } else {
    r.c[m_] = 1;  // the class of Z: coordinate block 1, constant term
  }
  return r;
}

FF Tower::add(const FF& x, const FF& y) const {
  DLOG_CHECK(x.level == y.level, errc::level_mismatch, "add: levels differ");
  check_level(x);
  FF r = x;
  for (std::size_t i = 0; i < r.c.size(); i++)
    r.c[i] = static_cast<Coord>((static_cast<u64>(r.c[i]) + y.c[i]) % p_);
  return r;
}

FF Tower::sub(const FF& x, const FF& y) const {
  DLOG_CHECK(x.level == y.level, errc::level_mismatch, "sub: levels differ");
  check_level(x);
  FF r = x;
  for (std::size_t i = 0; i < r.c.size(); i++)
    r.c[i] = static_cast<Coord>((static_cast<u64>(r.c[i]) + p_ - y.c[i]) % p_);
  return r;
}

FF Tower::neg(const FF& x) const {
  FF r = x;
  for (auto& v : r.c) v = static_cast<Coord>((p_ - v) % p_);
  return r;
}

FF Tower::mul_base(const FF& x, const FF& y) const {
  std::vector<u64> t(2 * m_ - 1, 0);
  for (u32 i = 0; i < m_; i++) {
    if (!x.c[i]) continue;
    u64 xi = x.c[i];
    for (u32 j = 0; j < m_; j++) t[i + j] += xi * y.c[j] % p_;
  }
  FF r = zero(1);
  for (u32 j = 0; j < m_; j++) {
    u64 acc = t[j] % p_;
    for (u32 i = m_; i < 2 * m_ - 1; i++) {
      u64 hi = t[i] % p_;
      if (hi) acc += hi * red_[i - m_][j] % p_;
    }
    r.c[j] = static_cast<Coord>(acc % p_);
  }
  return r;
}

FF Tower::mul_ext(const Ext& E, const FF& x, const FF& y) const {
  u32 d = E.d;
  // convolution of base-coefficient blocks
  std::vector<FF> xa(d), ya(d), t(2 * d - 1, zero(1));
  for (u32 i = 0; i < d; i++) {
    xa[i] = FF{1, std::vector<Coord>(x.c.begin() + i * m_, x.c.begin() + (i + 1) * m_)};
    ya[i] = FF{1, std::vector<Coord>(y.c.begin() + i * m_, y.c.begin() + (i + 1) * m_)};
  }
  for (u32 i = 0; i < d; i++) {
    if (xa[i].is_zero()) continue;
    for (u32 j = 0; j < d; j++) {
      if (ya[j].is_zero()) continue;
      t[i + j] = add(t[i + j], mul_base(xa[i], ya[j]));
    }
  }
  // reduce blocks d..2d-2 via red rows
  for (u32 i = d; i < 2 * d - 1; i++) {
    if (t[i].is_zero()) continue;
    for (u32 j = 0; j < d; j++) {
      const FF& rr = E.red[i - d][j];
      if (!rr.is_zero()) t[j] = add(t[j], mul_base(t[i], rr));
    }
  }
  FF r{d, std::vector<Coord>(static_cast<std::size_t>(d) * m_, 0)};
  for (u32 i = 0; i < d; i++)
    std::copy(t[i].c.begin(), t[i].c.end(), r.c.begin() + i * m_);
  return r;
}

FF Tower::mul(const FF& x, const FF& y) const {
  DLOG_CHECK(x.level == y.level, errc::level_mismatch, "mul: levels differ");
  check_level(x);
  if (x.level == 1) return mul_base(x, y);
  return mul_ext(ext(x.level), x, y);
}

// Extended Euclid over F_p[X] against the defining polynomial.
FF Tower::inv_base(const FF& x) const {
  DLOG_CHECK(!x.is_zero(), errc::division_by_zero, "inv(0)");
  fppoly::V a(x.c.begin(), x.c.end());
  fppoly::trim(a);
  fppoly::V r0 = f_, r1 = a;
  fppoly::V t0{}, t1{1};
  while (!r1.empty()) {
    // r0 = q*r1 + r2
    fppoly::V q;
    fppoly::V rr = r0;
    u64 lcinv = invmod(r1.back(), p_);
    q.assign(rr.size() >= r1.size() ? rr.size() - r1.size() + 1 : 0, 0);
    while (fppoly::deg(rr) >= fppoly::deg(r1)) {
      u64 coef = mulmod(rr.back(), lcinv, p_);
      std::size_t shift = rr.size() - r1.size();
      q[shift] = static_cast<Coord>(coef);
      for (std::size_t i = 0; i < r1.size(); i++)
        rr[shift + i] = static_cast<Coord>((rr[shift + i] + p_ - mulmod(coef, r1[i], p_)) % p_);
      fppoly::trim(rr);
    }
    fppoly::trim(q);
    fppoly::V t2 = fppoly::sub(t0, fppoly::mul(q, t1, p_), p_);
    r0 = std::move(r1); r1 = std::move(rr);
    t0 = std::move(t1); t1 = std::move(t2);
  }
  DLOG_ASSERT(fppoly::deg(r0) == 0, "inv: gcd with defining polynomial not constant");
  u64 c = invmod(r0[0], p_);
  FF r = zero(1);
  for (std::size_t i = 0; i < t0.size(); i++)
    r.c[i] = static_cast<Coord>(mulmod(t0[i], c, p_));
  return r;
}

FF Tower::inv_ext(const Ext& E, const FF& x) const {
  DLOG_CHECK(!x.is_zero(), errc::division_by_zero, "inv(0)");
  u32 d = E.d;
  auto block = [&](const FF& v, u32 i) {
    return FF{1, std::vector<Coord>(v.c.begin() + i * m_, v.c.begin() + (i + 1) * m_)};
  };
  // polynomials over the base, low-first
  using P = std::vector<FF>;
  auto trimp = [&](P& a) { while (!a.empty() && a.back().is_zero()) a.pop_back(); };
  auto degp = [&](const P& a) { return static_cast<int>(a.size()) - 1; };
  P r0(E.g), r1;
  for (u32 i = 0; i < d; i++) r1.push_back(block(x, i));
  trimp(r1);
  P t0, t1{one(1)};
  while (!r1.empty()) {
    P rr = r0, q;
    FF lcinv = inv_base(r1.back());
    q.assign(rr.size() >= r1.size() ? rr.size() - r1.size() + 1 : 0, zero(1));
    while (degp(rr) >= degp(r1)) {
      FF coef = mul_base(rr.back(), lcinv);
      std::size_t shift = rr.size() - r1.size();
      q[shift] = coef;
      for (std::size_t i = 0; i < r1.size(); i++)
        rr[shift + i] = sub(rr[shift + i], mul_base(coef, r1[i]));
      trimp(rr);
    }
    trimp(q);
    // t2 = t0 - q*t1
    P qt;
    if (!q.empty() && !t1.empty()) {
      qt.assign(q.size() + t1.size() - 1, zero(1));
      for (std::size_t i = 0; i < q.size(); i++)
        for (std::size_t j = 0; j < t1.size(); j++)
          qt[i + j] = add(qt[i + j], mul_base(q[i], t1[j]));
    }
    P t2(std::max(t0.size(), qt.size()), zero(1));
    for (std::size_t i = 0; i < t2.size(); i++) {
      FF a = i < t0.size() ? t0[i] : zero(1);
      FF b = i < qt.size() ? qt[i] : zero(1);
      t2[i] = sub(a, b);
    }
    trimp(t2);
    r0 = std::move(r1); r1 = std::move(rr);
    t0 = std::move(t1); t1 = std::move(t2);
  }
  DLOG_ASSERT(degp(r0) == 0, "inv_ext: gcd with defining polynomial not constant");
  FF c = inv_base(r0[0]);
  FF r = zero(d);
  for (std::size_t i = 0; i < t0.size(); i++) {
    FF v = mul_base(t0[i], c);
    std::copy(v.c.begin(), v.c.end(), r.c.begin() + i * m_);
  }
  return r;
}

FF Tower::inv(const FF& x) const {
  check_level(x);
  if (x.level == 1) return inv_base(x);
  return inv_ext(ext(x.level), x);
}

FF Tower::pow(FF x, u128 e) const {
  FF r = one(x.level);
  while (e) {
    if (e & 1) r = mul(r, x);
    x = mul(x, x);
    e >>= 1;
  }
  return r;
}

FF Tower::pow_signed(const FF& x, i128 e) const {
  if (e >= 0) return pow(x, static_cast<u128>(e));
  return pow(inv(x), static_cast<u128>(-e));
}

FF Tower::frob_p(const FF& x, u64 e) const {
  check_level(x);
  u32 n = deg_p(x.level);
  e %= n;
  if (e == 0) return x;
  const std::vector<Coord>* M;
  if (x.level == 1) {
    M = &frob_[static_cast<std::size_t>(e)];
  } else {
    M = &ext(x.level).frob[static_cast<std::size_t>(e)];
  }
  FF r = zero(x.level);
  for (u32 j = 0; j < n; j++) {
    if (!x.c[j]) continue;
    u64 xj = x.c[j];
    const Coord* row = M->data() + static_cast<std::size_t>(j) * n;
    for (u32 t = 0; t < n; t++)
      r.c[t] = static_cast<Coord>((r.c[t] + xj * row[t]) % p_);
  }
  return r;
}

FF Tower::qth_root(const FF& x) const {
  u32 n = deg_p(x.level);
  u64 e = (static_cast<u64>(n) - (l_ % n)) % n;  // inverse of the q-power map
  return frob_p(x, e);
}

FF Tower::rel_norm(const FF& x, bool allow_identity) const {
  if (x.level == 1) {
    DLOG_CHECK(allow_identity, errc::level_mismatch,
               "rel_norm of a base element (pass allow_identity for d = 1)");
    return x;
  }
  u32 d = x.level;
  FF acc = x, y = x;
  for (u32 i = 1; i < d; i++) {
    y = frob_p(y, m_);
    acc = mul(acc, y);
  }
  return to_base(acc);
}

bool Tower::in_base(const FF& x) const {
  if (x.level == 1) return true;
  for (std::size_t i = m_; i < x.c.size(); i++)
    if (x.c[i]) return false;
  return true;
}

FF Tower::to_base(const FF& x) const {
  if (x.level == 1) return x;
  DLOG_ASSERT(in_base(x), "to_base: element not in the base subfield");
  return FF{1, std::vector<Coord>(x.c.begin(), x.c.begin() + m_)};
}

u64 Tower::encode(const FF& x) const {
  u128 code = 0, mult = 1;
  for (Coord v : x.c) {
    code += mult * v;
    mult *= p_;
    DLOG_CHECK(code < (static_cast<u128>(1) << 63), errc::instance_too_large,
               "element code exceeds 2^63");
  }
  return static_cast<u64>(code);
}

FF Tower::decode(u64 code, u32 level) const {
  FF r = zero(level);
  for (auto& v : r.c) {
    v = static_cast<Coord>(code % p_);
    code /= p_;
  }
  DLOG_CHECK(code == 0, errc::parse_error, "element code out of range for level");
  return r;
}

std::string Tower::to_line() const {
  std::ostringstream out;
  out << "tower p=" << p_ << " l=" << l_ << " k=" << k_ << " poly=";
  for (std::size_t i = 0; i < f_.size(); i++) {
    if (i) out << ',';
    out << f_[i];
  }
  return out.str();
}

Tower Tower::from_line(const std::string& line) {
  u32 p = static_cast<u32>(fmtio::to_u64(fmtio::kv(line, "p")));
  u32 l = static_cast<u32>(fmtio::to_u64(fmtio::kv(line, "l")));
  u32 k = static_cast<u32>(fmtio::to_u64(fmtio::kv(line, "k")));
  std::vector<Coord> f;
  for (auto& s : fmtio::split(fmtio::kv(line, "poly"), ','))
    f.push_back(static_cast<Coord>(fmtio::to_u64(s)));
  return Tower(p, l, k, std::move(f));
}

Tower build_extension(const Tower& tw, u32 d, u64 seed) {
  DLOG_CHECK(d >= 2, errc::parse_error, "build_extension requires d >= 2");
  Tower out = tw;
  if (out.exts_.count(d)) return out;

  Rng rng(seed, "gf.ext.defpoly", d);
  u32 m = tw.m();

  // Polynomial helpers over base-level elements, enough for an
  // irreducibility test of the candidate extension polynomial.
  using P = std::vector<FF>;
  auto trimp = [&](P& a) { while (!a.empty() && a.back().is_zero()) a.pop_back(); };
  auto degp = [](const P& a) { return static_cast<int>(a.size()) - 1; };
  auto pmul = [&](const P& a, const P& b) {
    if (a.empty() || b.empty()) return P{};
    P r(a.size() + b.size() - 1, tw.zero(1));
    for (std::size_t i = 0; i < a.size(); i++) {
      if (a[i].is_zero()) continue;
      for (std::size_t j = 0; j < b.size(); j++)
        r[i + j] = tw.add(r[i + j], tw.mul(a[i], b[j]));
    }
    trimp(r);
    return r;
  };
  auto prem = [&](P a, const P& b) {
    FF lcinv = tw.inv(b.back());
    while (degp(a) >= degp(b)) {
      FF coef = tw.mul(a.back(), lcinv);
      std::size_t shift = a.size() - b.size();
      for (std::size_t i = 0; i < b.size(); i++)
        a[shift + i] = tw.sub(a[shift + i], tw.mul(coef, b[i]));
      trimp(a);
    }
    return a;
  };
  auto pgcd = [&](P a, P b) {
    while (!b.empty()) {
      P t = prem(a, b);
      a = std::move(b);
      b = std::move(t);
    }
    return a;
  };
  auto ppowmod = [&](P base, u128 e, const P& mod) {
    P r{tw.one(1)};
    base = prem(std::move(base), mod);
    while (e) {
      if (e & 1) r = prem(pmul(r, base), mod);
      base = prem(pmul(base, base), mod);
      e >>= 1;
    }
    return r;
  };
  auto irred = [&](const P& f) {
    int n = degp(f);
    if (n == 1) return true;
    u64 Q = tw.qk();
    P x{tw.zero(1), tw.one(1)};
    std::vector<u32> rs;
    u32 nn = static_cast<u32>(n);
    for (u32 r = 2; r * r <= nn; r++)
      if (nn % r == 0) { rs.push_back(r); while (nn % r == 0) nn /= r; }
    if (nn > 1) rs.push_back(nn);
    // X^(Q^j) via iterated powmod
    std::vector<P> xq(static_cast<std::size_t>(n) + 1);
    xq[0] = x;
    for (int j = 1; j <= n; j++) xq[static_cast<std::size_t>(j)] = ppowmod(xq[static_cast<std::size_t>(j - 1)], Q, f);
    P diff = xq[static_cast<std::size_t>(n)];
    // diff - x
    if (diff.size() < 2) diff.resize(2, tw.zero(1));
    diff[1] = tw.sub(diff[1], tw.one(1));
    trimp(diff);
    if (!diff.empty()) return false;
    for (u32 r : rs) {
      P dd = xq[static_cast<std::size_t>(n) / r];
      if (dd.size() < 2) dd.resize(2, tw.zero(1));
      dd[1] = tw.sub(dd[1], tw.one(1));
      trimp(dd);
      if (degp(pgcd(dd, f)) != 0) return false;
    }
    return true;
  };

  P g;
  bool found = false;
  for (u32 trial = 0; trial < 100 * d && !found; trial++) {
    g.assign(d + 1, tw.zero(1));
    for (u32 i = 0; i < d; i++) {
      std::vector<Coord> c(m);
      for (auto& v : c) v = static_cast<Coord>(rng.below(tw.p()));
      g[i] = tw.from_coords(1, std::move(c));
    }
    g[d] = tw.one(1);
    found = irred(g);
  }
  DLOG_CHECK(found, errc::search_exhausted, "no irreducible extension polynomial found");

  Tower::Ext E;
  E.d = d;
  E.g = g;
  // reduction rows Z^(d+i) mod g
  E.red.resize(d);
  {
    std::vector<FF> cur(d);
    for (u32 i = 0; i < d; i++) cur[i] = tw.neg(g[i]);
    for (u32 i = 0; i < d; i++) {
      E.red[i] = cur;
      std::vector<FF> nxt(d, tw.zero(1));
      FF top = cur[d - 1];
      for (u32 j = d - 1; j > 0; j--) nxt[j] = cur[j - 1];
      nxt[0] = tw.zero(1);
      if (!top.is_zero())
        for (u32 j = 0; j < d; j++)
          nxt[j] = tw.add(nxt[j], tw.mul(top, E.red[0][j]));
      cur = std::move(nxt);
    }
  }
  out.exts_.emplace(d, std::move(E));

  // Frobenius matrices at the extension level: images of the F_p power basis
  // X^i Z^j under the p-power map, then matrix powers for higher e.
  {
    auto& EE = out.exts_.at(d);
    u32 n = d * m;
    EE.frob.resize(n);
    EE.frob[0].assign(static_cast<std::size_t>(n) * n, 0);
    for (u32 j = 0; j < n; j++) EE.frob[0][static_cast<std::size_t>(j) * n + j] = 1;
    // basis vector (block j2 = Z^j2, inner X^j1): image = (X^j1)^p * (Z^p)^j2
    FF zp = out.pow(out.gen(d), tw.p());
    EE.frob[1].assign(static_cast<std::size_t>(n) * n, 0);
    FF zpj = out.one(d);
    for (u32 j2 = 0; j2 < d; j2++) {
      for (u32 j1 = 0; j1 < m; j1++) {
        // base image of X^j1 under p-power, embedded, times zpj
        FF bimg = tw.zero(1);
        for (u32 t = 0; t < m; t++)
          bimg.c[t] = (m == 1 && j1 == 0)
                          ? (t == 0 ? 1 : 0)
                          : tw.frob_[1][static_cast<std::size_t>(j1) * m + t];
        FF img = out.mul(out.embed(bimg, d), zpj);
        u32 row = j2 * m + j1;
        for (u32 t = 0; t < n; t++)
          EE.frob[1][static_cast<std::size_t>(row) * n + t] = img.c[t];
      }
      zpj = out.mul(zpj, zp);
    }
    for (u32 e = 2; e < n; e++) {
      EE.frob[e].assign(static_cast<std::size_t>(n) * n, 0);
      for (u32 j = 0; j < n; j++)
        for (u32 t = 0; t < n; t++) {
          Coord v = EE.frob[e - 1][static_cast<std::size_t>(j) * n + t];
          if (!v) continue;
          for (u32 s = 0; s < n; s++)
            EE.frob[e][static_cast<std::size_t>(j) * n + s] = static_cast<Coord>(
                (EE.frob[e][static_cast<std::size_t>(j) * n + s] +
                 static_cast<u64>(v) * EE.frob[1][static_cast<std::size_t>(t) * n + s]) % tw.p());
        }
    }
    if (n == 1) EE.frob.resize(1);
  }
  return out;
}

FF find_generator(const Tower& tw, u32 level,
                  const std::vector<std::pair<u64, u32>>& order_factors, u64 seed) {
  u64 N = tw.size(level) - 1;
  u128 prod = 1;
  for (auto& [r, e] : order_factors)
    for (u32 i = 0; i < e; i++) prod *= r;
  DLOG_CHECK(prod == N, errc::bad_factorization,
             "order factorization does not multiply to the group order");
  Rng rng(seed, "gf.find_generator", level);
  for (u32 trial = 0; trial < 4096; trial++) {
    FF x = tw.decode(1 + rng.below(N), level);
    if (x.is_zero()) continue;
    bool ok = true;
    for (auto& [r, e] : order_factors)
      if (tw.pow(x, N / r) == tw.one(level)) { ok = false; break; }
    if (ok) return x;
  }
  fail(errc::search_exhausted, "no generator found");
}

}  // namespace dlog::gf
