#pragma once

#include <optional>

#include "latdisc/rational.hpp"

namespace latdisc {

// Exact integer/rational linear algebra used for lattice bases and kernels.
// Everything here is deterministic and allocation-simple; matrices are tiny.

// Canonical column-style Hermite normal form of the integer span of the
// columns of A.  Returns an m x r matrix (r = rank) whose columns are the
// canonical basis: pivot entries positive, entries left of a pivot reduced
// into [0, pivot), entries right of a pivot zero.  Two inputs with equal
// column spans produce identical outputs.
IntMat hnf_column_basis(const IntMat& A);

// Basis of ker(A) over Q consisting of integer vectors: the transform columns
// that reduce A to column echelon form and hit zero.  Count = #cols - rank.
IntMat integer_kernel_basis_mat(const IntMat& A);

// Rank of a rational matrix by fraction-free-ish Gaussian elimination.
int rational_rank(RatMat A);

// Exact determinant of a square rational matrix.
Rat rational_det(RatMat A);

// Inverse of a square nonsingular rational matrix; throws on singular.
RatMat rational_inverse(RatMat A);

// Solve A x = b exactly over Q.  A must have full column rank; returns
// nullopt when the system is inconsistent (b outside the column span).
std::optional<RatVec> solve_full_column_rank(const RatMat& A, const RatVec& b);

// One integer solution of A x = b, if any (b in the integer column span).
std::optional<IntVec> integer_solve(const IntMat& A, const IntVec& b);

RatMat rat_transpose(const RatMat& A);
RatMat rat_mul(const RatMat& A, const RatMat& B);
RatVec rat_mul_vec(const RatMat& A, const RatVec& x);

}  // namespace latdisc
