#ifndef DLOG_LINALG_HPP
#define DLOG_LINALG_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "dlog/common.hpp"

// Linear algebra modulo a prime: sparse kernel vectors via Wiedemann with a
// Berlekamp-Massey inner step, and dense row-echelon elimination with the
// transform matrix exposed (needed to extract vanishing-row coefficients).

namespace dlog::linalg {

struct SparseMatrix {
  u32 r = 0, m = 0;
  u64 mod = 0;
  // per-row (column, value) with strictly increasing columns, values in [1, mod)
  std::vector<std::vector<std::pair<u32, u64>>> rows;

  void add_row(std::vector<std::pair<u32, u64>> entries);
  // y = M x
  void apply(const std::vector<u64>& x, std::vector<u64>& y) const;
  u64 nnz() const;
};

struct DenseMatrix {
  u32 r = 0, m = 0;
  u64 mod = 0;
  std::vector<u64> a;  // row-major

  static DenseMatrix zeros(u32 r, u32 m, u64 mod);
  static DenseMatrix identity(u32 n, u64 mod);
  u64& at(u32 i, u32 j) { return a[static_cast<std::size_t>(i) * m + j]; }
  u64 at(u32 i, u32 j) const { return a[static_cast<std::size_t>(i) * m + j]; }
};

// Shortest linear recurrence generating seq (mod prime): returns c_1..c_L with
// s_n = c_1 s_{n-1} + ... + c_L s_{n-L}.
std::vector<u64> berlekamp_massey(const std::vector<u64>& seq, u64 mod);

struct WiedemannStats {
  u64 matvecs = 0;       // number of M*v products
  u64 entry_ops = 0;     // total nonzero-entry multiply-adds across them
};

// Nonzero kernel vector of a square singular sparse matrix.  Krylov sequence
// u^T M^i v with random u, v; minimal polynomial via Berlekamp-Massey; retries
// with fresh (u, v) up to 10 times, then ProbablyNonsingular.
std::vector<u64> wiedemann_kernel(const SparseMatrix& M, u64 seed,
                                  WiedemannStats* stats = nullptr);

struct RrefResult {
  DenseMatrix rref;       // reduced row echelon form
  DenseMatrix transform;  // invertible T with T * M = rref
  u32 rank = 0;
  std::vector<u32> pivot_cols;
};

RrefResult dense_rref(const DenseMatrix& M);

// Solve M x = b (dense, mod prime).  Returns empty when inconsistent;
// free variables are set to zero.
std::vector<u64> dense_solve(const DenseMatrix& M, const std::vector<u64>& b);

// Matrix file: header `matrix r=<r> m=<m> mod=<l>`, then one line per row of
// space-separated `<col>:<val>` pairs.
std::string to_text(const SparseMatrix& M);
SparseMatrix sparse_from_text(const std::string& text);

}  // namespace dlog::linalg

#endif
