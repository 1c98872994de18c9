#include "dlog/group.hpp"

#include <algorithm>

namespace dlog::grp {

bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 d : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % d == 0) return n == d;
  }
  // deterministic Miller-Rabin for 64-bit with the standard base set
  u64 d = n - 1;
  u32 r = 0;
  while ((d & 1) == 0) { d >>= 1; r++; }
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a % n, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (u32 i = 1; i < r; i++) {
      x = mulmod(x, x, n);
      if (x == n - 1) { witness = false; break; }
    }
    if (witness) return false;
  }
  return true;
}

namespace {

// Brent-cycle Pollard rho factor finder; n must be composite and odd.
u64 brent_rho(u64 n, u64 seed) {
  Rng rng(seed, "grp.brent");
  while (true) {
    u64 y = 1 + rng.below(n - 1);
    u64 c = 1 + rng.below(n - 1);
    u64 m = 128, g = 1, r = 1, q = 1, x = 0, ys = 0;
    auto f = [&](u64 v) { return addmod(mulmod(v, v, n), c, n); };
    while (g == 1) {
      x = y;
      for (u64 i = 0; i < r; i++) y = f(y);
      u64 k = 0;
      while (k < r && g == 1) {
        ys = y;
        u64 lim = std::min(m, r - k);
        for (u64 i = 0; i < lim; i++) {
          y = f(y);
          q = mulmod(q, x > y ? x - y : y - x, n);
        }
        g = gcd_u64(q, n);
        k += m;
      }
      r <<= 1;
    }
    if (g == n) {
      g = 1;
      do {
        ys = f(ys);
        g = gcd_u64(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void factor_rec(u64 n, std::vector<u64>& primes, u64 seed) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    primes.push_back(n);
    return;
  }
  u64 d = brent_rho(n, seed);
  factor_rec(d, primes, seed + 1);
  factor_rec(n / d, primes, seed + 1);
}

}  // namespace

FactoredInteger int_factor(u64 n) {
  DLOG_CHECK(n >= 1, errc::parse_error, "int_factor needs n >= 1");
  FactoredInteger out;
  out.n = n;
  std::vector<u64> primes;
  for (u64 d = 2; d <= 1000000 && d * d <= n; d++) {
    while (n % d == 0) {
      primes.push_back(d);
      n /= d;
    }
  }
  if (n > 1) factor_rec(n, primes, 0x5eedULL);
  std::sort(primes.begin(), primes.end());
  for (u64 p : primes) {
    if (!out.factors.empty() && out.factors.back().first == p)
      out.factors.back().second++;
    else
      out.factors.emplace_back(p, 1);
  }
  return out;
}

std::pair<u64, u64> crt_combine(const std::vector<std::pair<u64, u64>>& residues) {
  DLOG_CHECK(!residues.empty(), errc::parse_error, "crt_combine: empty input");
  u64 x = residues[0].first % residues[0].second;
  u64 M = residues[0].second;
  for (std::size_t i = 1; i < residues.size(); i++) {
    auto [r, m] = residues[i];
    DLOG_CHECK(gcd_u64(M, m) == 1, errc::non_coprime_moduli, "crt_combine: moduli share a factor");
    u128 prod = static_cast<u128>(M) * m;
    DLOG_CHECK(prod < (static_cast<u128>(1) << 63), errc::instance_too_large,
               "crt_combine: modulus product exceeds 2^63");
    // x' = x + M * ((r - x) / M mod m)
    u64 diff = submod(r % m, x % m, m);
    u64 t = mulmod(diff, invmod(M % m, m), m);
    x = x + M * t;
    M = static_cast<u64>(prod);
  }
  return {x % M, M};
}

}  // namespace dlog::grp
