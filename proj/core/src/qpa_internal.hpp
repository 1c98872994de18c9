#ifndef DLOG_QPA_INTERNAL_HPP
#define DLOG_QPA_INTERNAL_HPP

#include "dlog/qpa.hpp"

// Shared internals between the qpa setup/relations unit and the descent unit.

namespace dlog::qpa::detail {

using gf::FF;
using gf::Tower;
using poly::Poly;

// Level-local degree-two elimination core.  The identity, at the given
// level, reads  prod (x + w_i) * h1^h1exp = P * cof_monic^cofexp * scalar.
struct Deg2Core {
  std::vector<FF> ws;
  i64 h1exp = 0;
  Poly cof_monic;
  i64 cofexp = 0;
  FF scalar;
  SplitTriple triple;
};

// tw must contain the requested level (the base tower possibly augmented).
Degree2System deg2_system_t(const Tower& tw, const QpaField& F, u32 level, const Poly& P);
Deg2Core deg2_core_t(const Tower& tw, const QpaField& F, u32 level, const Poly& P,
                     u64 seed, u64 budget);
bool verify_elimination_t(const Tower& tw, const QpaField& F, const Poly& P,
                          const Elimination& e);

// (sum c_i X^i)^q as an exact coefficient spread.
Poly qpow_spread(const Tower& tw, const Poly& a);

// One exact row for the certificate systems:
//   prod_u value(column u)^exp = scalar * prod knowns^exp.
struct CertRow {
  std::vector<std::pair<u32, i64>> unknowns;
  std::vector<std::pair<Poly, i64>> knowns;
  FF scalar;
};

// Solves sum_r c_r row_r = mu e_tau (mod ell), integer-lifts the combination
// and assembles the exact elimination  value(P) = sigma_target * ... .
// col_value(u) names the field element behind column u.
Elimination certificate_eliminate(const QpaField& F, const std::vector<CertRow>& rows,
                                  u32 ncols,
                                  const std::function<Poly(u32)>& col_value, u32 tau,
                                  i64 mu, const FF& sigma_target, u64 ell,
                                  const Poly& P, const char* method);

}  // namespace dlog::qpa::detail

#endif
