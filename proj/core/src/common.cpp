#include "dlog/common.hpp"

#include <sstream>

namespace dlog {

const char* errc_name(errc c) {
  switch (c) {
    case errc::division_by_zero: return "DivisionByZero";
    case errc::level_mismatch: return "LevelMismatch";
    case errc::search_exhausted: return "SearchExhausted";
    case errc::budget_exhausted: return "BudgetExhausted";
    case errc::bad_factorization: return "BadFactorization";
    case errc::not_in_subgroup: return "NotInSubgroup";
    case errc::retries_exhausted: return "RetriesExhausted";
    case errc::non_coprime_moduli: return "NonCoprimeModuli";
    case errc::probably_nonsingular: return "ProbablyNonsingular";
    case errc::anchor_vanishes: return "AnchorVanishes";
    case errc::rank_too_low: return "RankTooLow";
    case errc::instance_too_large: return "InstanceTooLarge";
    case errc::wrong_k: return "WrongK";
    case errc::degenerate_input: return "DegenerateInput";
    case errc::degenerate_system: return "DegenerateSystem";
    case errc::insufficient_relations: return "InsufficientRelations";
    case errc::rank_deficient: return "RankDeficient";
    case errc::no_elimination_found: return "NoEliminationFound";
    case errc::trap_element: return "TrapElement";
    case errc::bad_degree: return "BadDegree";
    case errc::internal_mismatch: return "InternalMismatch";
    case errc::parse_error: return "ParseError";
    case errc::internal_error: return "InternalError";
  }
  return "UnknownError";
}

namespace {
inline u64 splitmix64(u64& s) {
  u64 z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

Rng::Rng(u64 seed, std::string_view purpose, u64 worker) {
  u64 h = fnv1a(purpose.data(), purpose.size());
  state_ = seed ^ (h * 0x9e3779b97f4a7c15ULL) ^ (worker + 1) * 0xda942042e4dd58b5ULL;
  // Warm up so nearby seeds decorrelate.
  splitmix64(state_);
  splitmix64(state_);
}

u64 Rng::next() { return splitmix64(state_); }

u64 Rng::below(u64 n) {
  DLOG_ASSERT(n >= 1, "Rng::below(0)");
  if (n == 1) return 0;
  // Rejection sampling to avoid modulo bias.
  u64 lim = ~u64{0} - (~u64{0} % n);
  u64 v;
  do { v = next(); } while (v >= lim);
  return v % n;
}

u64 powmod(u64 base, u64 exp, u64 m) {
  DLOG_CHECK(m != 0, errc::division_by_zero, "powmod modulus 0");
  u64 r = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

u64 gcd_u64(u64 a, u64 b) {
  while (b) { u64 t = a % b; a = b; b = t; }
  return a;
}

u64 invmod(u64 a, u64 m) {
  a %= m;
  i64 t = 0, newt = 1;
  i64 r = static_cast<i64>(m), newr = static_cast<i64>(a);
  while (newr != 0) {
    i64 q = r / newr;
    t -= q * newt; std::swap(t, newt);
    r -= q * newr; std::swap(r, newr);
  }
  DLOG_CHECK(r == 1, errc::non_coprime_moduli, "invmod: not invertible");
  if (t < 0) t += static_cast<i64>(m);
  return static_cast<u64>(t);
}

u64 fnv1a(const void* data, std::size_t n, u64 h) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; i++) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

namespace fmtio {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string kv(const std::string& line, const std::string& key) {
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    auto pos = tok.find('=');
    if (pos != std::string::npos && tok.substr(0, pos) == key)
      return tok.substr(pos + 1);
  }
  fail(errc::parse_error, "missing key '" + key + "' in: " + line);
}

u64 to_u64(const std::string& s) {
  try {
    std::size_t used = 0;
    u64 v = std::stoull(s, &used);
    DLOG_CHECK(used == s.size(), errc::parse_error, "trailing junk in number: " + s);
    return v;
  } catch (const std::logic_error&) {
    fail(errc::parse_error, "bad number: " + s);
  }
}

}  // namespace fmtio
}  // namespace dlog
