#ifndef DLOG_COMMON_HPP
#define DLOG_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dlog {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// Failure kinds shared across the library.  Every throwing operation names
// its kind so callers can route around recoverable failures (budget
// exhaustion, rank problems) without string matching.
enum class errc {
  division_by_zero,
  level_mismatch,
  search_exhausted,
  budget_exhausted,
  bad_factorization,
  not_in_subgroup,
  retries_exhausted,
  non_coprime_moduli,
  probably_nonsingular,
  anchor_vanishes,
  rank_too_low,
  instance_too_large,
  wrong_k,
  degenerate_input,
  degenerate_system,
  insufficient_relations,
  rank_deficient,
  no_elimination_found,
  trap_element,
  bad_degree,
  internal_mismatch,
  parse_error,
  internal_error,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
public:
  errc code;
  error(errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code(c) {}
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw error(c, msg); }

#define DLOG_CHECK(cond, code, msg) \
  do { if (!(cond)) ::dlog::fail((code), (msg)); } while (0)

// Internal invariants; firing one means an arithmetic bug, not bad input.
#define DLOG_ASSERT(cond, msg) \
  do { if (!(cond)) ::dlog::fail(::dlog::errc::internal_error, (msg)); } while (0)

// ---------------------------------------------------------------------------
// Deterministic namespaced randomness.
//
// Every randomized routine takes a seed and derives a private stream from
// (seed, purpose string, worker index).  Streams are splitmix64 walks, so a
// run is reproducible for any thread count: workers own disjoint streams.
class Rng {
public:
  Rng(u64 seed, std::string_view purpose, u64 worker = 0);
  u64 next();
  // Uniform in [0, n), n >= 1.
  u64 below(u64 n);
  // Uniform in [lo, hi].
  u64 range(u64 lo, u64 hi) { return lo + below(hi - lo + 1); }

private:
  u64 state_;
};

// ---------------------------------------------------------------------------
// Modular arithmetic on u64 (moduli < 2^63).

inline u64 addmod(u64 a, u64 b, u64 m) {
  a %= m; b %= m;
  u64 s = a + b;
  if (s >= m || s < a) s -= m;
  return s;
}
inline u64 submod(u64 a, u64 b, u64 m) {
  a %= m; b %= m;
  return a >= b ? a - b : a + (m - b);
}
inline u64 mulmod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a % m) * (b % m) % m);
}
u64 powmod(u64 base, u64 exp, u64 m);
// Inverse of a mod m; fails with non_coprime_moduli if gcd(a, m) != 1.
u64 invmod(u64 a, u64 m);
u64 gcd_u64(u64 a, u64 b);
// Reduce a signed (possibly negative) exponent into [0, m).
inline u64 smod(i64 a, u64 m) {
  i64 r = a % static_cast<i64>(m);
  if (r < 0) r += static_cast<i64>(m);
  return static_cast<u64>(r);
}
inline u64 smod128(i128 a, u64 m) {
  i128 r = a % static_cast<i128>(m);
  if (r < 0) r += static_cast<i128>(m);
  return static_cast<u64>(r);
}

// FNV-1a over bytes; used for factor-base file hashes and hash-table keys.
u64 fnv1a(const void* data, std::size_t n, u64 h = 1469598103934665603ULL);
inline u64 fnv1a_str(std::string_view s) { return fnv1a(s.data(), s.size()); }

// ---------------------------------------------------------------------------
// Small parsing helpers for the line-oriented file formats.

namespace fmtio {
std::vector<std::string> split(std::string_view s, char sep);
// Extracts "key=value" from a whitespace-separated line; fails on absence.
std::string kv(const std::string& line, const std::string& key);
u64 to_u64(const std::string& s);
}  // namespace fmtio

}  // namespace dlog

#endif
