#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace latdisc {

using Int = mpz_class;
using Rat = mpq_class;
using IntVec = std::vector<Int>;
using IntMat = std::vector<IntVec>;  // row-major, mat[row][col]
using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;

inline double to_double(const Rat& q) { return q.get_d(); }

inline Rat parse_rational(const std::string& s) {
  Rat q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
  q.canonicalize();
  return q;
}

inline std::string rational_string(const Rat& q) { return q.get_str(); }

inline IntMat int_identity(int n) {
  IntMat I(n, IntVec(n, 0));
  for (int i = 0; i < n; ++i) I[i][i] = 1;
  return I;
}

inline RatMat rat_from_int(const IntMat& A) {
  RatMat R(A.size());
  for (size_t i = 0; i < A.size(); ++i) R[i].assign(A[i].begin(), A[i].end());
  return R;
}

inline int row_count(const IntMat& A) { return static_cast<int>(A.size()); }
inline int col_count(const IntMat& A) { return A.empty() ? 0 : static_cast<int>(A[0].size()); }
inline int row_count(const RatMat& A) { return static_cast<int>(A.size()); }
inline int col_count(const RatMat& A) { return A.empty() ? 0 : static_cast<int>(A[0].size()); }

}  // namespace latdisc
