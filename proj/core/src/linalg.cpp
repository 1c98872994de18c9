#include "dlog/linalg.hpp"

#include <algorithm>
#include <sstream>

namespace dlog::linalg {

void SparseMatrix::add_row(std::vector<std::pair<u32, u64>> entries) {
  std::sort(entries.begin(), entries.end());
  std::vector<std::pair<u32, u64>> out;
  for (auto& [c, v] : entries) {
    DLOG_CHECK(c < m, errc::parse_error, "sparse row column out of range");
    u64 vv = v % mod;
    if (!out.empty() && out.back().first == c) {
      out.back().second = addmod(out.back().second, vv, mod);
    } else {
      out.emplace_back(c, vv);
    }
  }
  std::erase_if(out, [](auto& e) { return e.second == 0; });
  rows.push_back(std::move(out));
  r = static_cast<u32>(rows.size());
}

void SparseMatrix::apply(const std::vector<u64>& x, std::vector<u64>& y) const {
  y.assign(r, 0);
  for (u32 i = 0; i < r; i++) {
    u128 acc = 0;
    for (auto& [c, v] : rows[i]) {
      acc += static_cast<u128>(v) * x[c];
      if (acc >> 120) acc %= mod;
    }
    y[i] = static_cast<u64>(acc % mod);
  }
}

u64 SparseMatrix::nnz() const {
  u64 n = 0;
  for (auto& row : rows) n += row.size();
  return n;
}

DenseMatrix DenseMatrix::zeros(u32 r, u32 m, u64 mod) {
  DenseMatrix M;
  M.r = r; M.m = m; M.mod = mod;
  M.a.assign(static_cast<std::size_t>(r) * m, 0);
  return M;
}

DenseMatrix DenseMatrix::identity(u32 n, u64 mod) {
  DenseMatrix M = zeros(n, n, mod);
  for (u32 i = 0; i < n; i++) M.at(i, i) = 1;
  return M;
}

std::vector<u64> berlekamp_massey(const std::vector<u64>& seq, u64 mod) {
  // Returns rec with s_n = rec[0] s_{n-1} + ... + rec[L-1] s_{n-L}.
  std::vector<u64> cur, last;
  std::size_t last_fail = 0;
  u64 last_delta = 0;
  for (std::size_t i = 0; i < seq.size(); i++) {
    u128 pred = 0;
    for (std::size_t j = 0; j < cur.size(); j++) {
      pred += static_cast<u128>(cur[j]) * seq[i - 1 - j];
      if (pred >> 120) pred %= mod;
    }
    u64 delta = submod(seq[i], static_cast<u64>(pred % mod), mod);
    if (delta == 0) continue;
    if (cur.empty()) {
      cur.assign(i + 1, 0);
      last_fail = i;
      last_delta = delta;
      continue;
    }
    u64 k = mulmod(delta, invmod(last_delta, mod), mod);
    std::vector<u64> fix(i - last_fail - 1, 0);
    fix.push_back(k);
    for (u64 v : last) fix.push_back(submod(0, mulmod(v, k, mod), mod));
    bool update_last = fix.size() >= cur.size();
    std::vector<u64> saved = cur;
    if (fix.size() < cur.size()) fix.resize(cur.size(), 0);
    for (std::size_t j = 0; j < cur.size(); j++) fix[j] = addmod(fix[j], cur[j], mod);
    if (update_last) {
      last = std::move(saved);
      last_fail = i;
      last_delta = delta;
    }
    cur = std::move(fix);
  }
  return cur;
}

std::vector<u64> wiedemann_kernel(const SparseMatrix& M, u64 seed, WiedemannStats* stats) {
  DLOG_CHECK(M.r == M.m, errc::parse_error, "wiedemann_kernel expects a square matrix");
  u32 n = M.m;
  DLOG_CHECK(n >= 1, errc::parse_error, "empty matrix");
  u64 ell = M.mod;
  u64 nnz = M.nnz();

  for (u32 attempt = 0; attempt < 10; attempt++) {
    Rng rng(seed, "linalg.wiedemann", attempt);
    std::vector<u64> u(n), v(n);
    for (auto& x : u) x = rng.below(ell);
    for (auto& x : v) x = rng.below(ell);

    // Krylov sequence s_i = u^T M^i v, i < 2n+2
    std::vector<u64> seq;
    seq.reserve(2 * n + 2);
    std::vector<u64> cur = v, tmp;
    for (u32 i = 0; i < 2 * n + 2; i++) {
      u128 dot = 0;
      for (u32 j = 0; j < n; j++) {
        dot += static_cast<u128>(u[j]) * cur[j];
        if (dot >> 120) dot %= ell;
      }
      seq.push_back(static_cast<u64>(dot % ell));
      if (i + 1 < 2 * n + 2) {
        M.apply(cur, tmp);
        std::swap(cur, tmp);
        if (stats) { stats->matvecs++; stats->entry_ops += nnz; }
      }
    }

    std::vector<u64> rec = berlekamp_massey(seq, ell);
    // minimal polynomial f(x) = x^L - rec[0] x^(L-1) - ... - rec[L-1]
    u32 L = static_cast<u32>(rec.size());
    std::vector<u64> f(L + 1);
    f[L] = 1;
    for (u32 i = 0; i < L; i++) f[L - 1 - i] = submod(0, rec[i], ell);
    // strip trailing zero roots: f = x^t * h with h(0) != 0
    u32 t = 0;
    while (t <= L && f[t] == 0) t++;
    if (t > L) continue;  // impossible in principle
    if (t == 0) {
      // f(0) != 0: M looks nonsingular for this (u, v); try again
      continue;
    }
    // w = h(M) v; then the last nonzero of w, Mw, M^2 w, ... before zero is a kernel vector
    std::vector<u64> w(n, 0);
    // Horner on h coefficients f[t..L]
    for (u32 idx = L + 1; idx-- > t;) {
      M.apply(w, tmp);
      if (stats) { stats->matvecs++; stats->entry_ops += nnz; }
      for (u32 j = 0; j < n; j++) tmp[j] = addmod(tmp[j], mulmod(f[idx], v[j], ell), ell);
      w = tmp;
    }
    bool wzero = std::all_of(w.begin(), w.end(), [](u64 x) { return x == 0; });
    if (wzero) continue;
    for (u32 step = 0; step < t; step++) {
      M.apply(w, tmp);
      if (stats) { stats->matvecs++; stats->entry_ops += nnz; }
      bool tzero = std::all_of(tmp.begin(), tmp.end(), [](u64 x) { return x == 0; });
      if (tzero) return w;
      w = tmp;
    }
    // minimal polynomial was not exact for v; retry
  }
  fail(errc::probably_nonsingular, "wiedemann: no kernel vector after retries");
}

RrefResult dense_rref(const DenseMatrix& M) {
  DLOG_CHECK(M.mod >= 2, errc::parse_error, "dense_rref needs a modulus");
  RrefResult res{M, DenseMatrix::identity(M.r, M.mod), 0, {}};
  DenseMatrix& A = res.rref;
  DenseMatrix& T = res.transform;
  u64 ell = M.mod;
  u32 row = 0;
  for (u32 col = 0; col < M.m && row < M.r; col++) {
    u32 piv = row;
    while (piv < M.r && A.at(piv, col) == 0) piv++;
    if (piv == M.r) continue;
    if (piv != row) {
      for (u32 j = 0; j < M.m; j++) std::swap(A.at(piv, j), A.at(row, j));
      for (u32 j = 0; j < M.r; j++) std::swap(T.at(piv, j), T.at(row, j));
    }
    u64 inv = invmod(A.at(row, col), ell);
    for (u32 j = 0; j < M.m; j++) A.at(row, j) = mulmod(A.at(row, j), inv, ell);
    for (u32 j = 0; j < M.r; j++) T.at(row, j) = mulmod(T.at(row, j), inv, ell);
    for (u32 i = 0; i < M.r; i++) {
      if (i == row) continue;
      u64 f = A.at(i, col);
      if (!f) continue;
      for (u32 j = 0; j < M.m; j++)
        A.at(i, j) = submod(A.at(i, j), mulmod(f, A.at(row, j), ell), ell);
      for (u32 j = 0; j < M.r; j++)
        T.at(i, j) = submod(T.at(i, j), mulmod(f, T.at(row, j), ell), ell);
    }
    res.pivot_cols.push_back(col);
    row++;
  }
  res.rank = row;
  return res;
}

std::vector<u64> dense_solve(const DenseMatrix& M, const std::vector<u64>& b) {
  DLOG_CHECK(b.size() == M.r, errc::parse_error, "dense_solve shape mismatch");
  auto res = dense_rref(M);
  u64 ell = M.mod;
  // transformed rhs
  std::vector<u64> tb(M.r, 0);
  for (u32 i = 0; i < M.r; i++) {
    u128 acc = 0;
    for (u32 j = 0; j < M.r; j++) {
      acc += static_cast<u128>(res.transform.at(i, j)) * b[j];
      if (acc >> 120) acc %= ell;
    }
    tb[i] = static_cast<u64>(acc % ell);
  }
  for (u32 i = res.rank; i < M.r; i++)
    if (tb[i] != 0) return {};  // inconsistent
  std::vector<u64> x(M.m, 0);
  for (u32 i = 0; i < res.rank; i++) x[res.pivot_cols[i]] = tb[i];
  return x;
}

std::string to_text(const SparseMatrix& M) {
  std::ostringstream out;
  out << "matrix r=" << M.r << " m=" << M.m << " mod=" << M.mod << '\n';
  for (auto& row : M.rows) {
    bool first = true;
    for (auto& [c, v] : row) {
      if (!first) out << ' ';
      out << c << ':' << v;
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

SparseMatrix sparse_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  DLOG_CHECK(static_cast<bool>(std::getline(in, header)), errc::parse_error, "empty matrix file");
  SparseMatrix M;
  u32 r = static_cast<u32>(fmtio::to_u64(fmtio::kv(header, "r")));
  M.m = static_cast<u32>(fmtio::to_u64(fmtio::kv(header, "m")));
  M.mod = fmtio::to_u64(fmtio::kv(header, "mod"));
  std::string line;
  for (u32 i = 0; i < r; i++) {
    DLOG_CHECK(static_cast<bool>(std::getline(in, line)), errc::parse_error, "matrix file truncated");
    std::vector<std::pair<u32, u64>> entries;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      auto pos = tok.find(':');
      DLOG_CHECK(pos != std::string::npos, errc::parse_error, "bad matrix entry: " + tok);
      entries.emplace_back(static_cast<u32>(fmtio::to_u64(tok.substr(0, pos))),
                           fmtio::to_u64(tok.substr(pos + 1)));
    }
    M.add_row(std::move(entries));
  }
  DLOG_CHECK(M.r == r, errc::parse_error, "matrix row count mismatch");
  return M;
}

}  // namespace dlog::linalg
