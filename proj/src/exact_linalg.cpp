#include "latdisc/exact_linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace latdisc {

RatMat rat_transpose(const RatMat& A) {
  RatMat T(col_count(A), RatVec(row_count(A)));
  for (int i = 0; i < row_count(A); ++i)
    for (int j = 0; j < col_count(A); ++j) T[j][i] = A[i][j];
  return T;
}

RatMat rat_mul(const RatMat& A, const RatMat& B) {
  const int m = row_count(A), k = col_count(A), n = col_count(B);
  if (k != row_count(B)) throw std::invalid_argument("rat_mul: shape mismatch");
  RatMat C(m, RatVec(n, Rat(0)));
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < k; ++l) {
      if (A[i][l] == 0) continue;
      for (int j = 0; j < n; ++j) C[i][j] += A[i][l] * B[l][j];
    }
  return C;
}

RatVec rat_mul_vec(const RatMat& A, const RatVec& x) {
  const int m = row_count(A), k = col_count(A);
  if (k != static_cast<int>(x.size())) throw std::invalid_argument("rat_mul_vec: shape mismatch");
  RatVec y(m, Rat(0));
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < k; ++l) y[i] += A[i][l] * x[l];
  return y;
}

namespace {

void col_axpy(IntMat& A, int dst, int src, const Int& q) {
  // column[dst] -= q * column[src]
  if (q == 0) return;
  for (auto& row : A) row[dst] -= q * row[src];
}

void col_swap(IntMat& A, int a, int b) {
  if (a == b) return;
  for (auto& row : A) std::swap(row[a], row[b]);
}

void col_negate(IntMat& A, int c) {
  for (auto& row : A) row[c] = -row[c];
}

// Column echelon reduction with a tracked transform: on return A*U0 = E where
// E is the reduced copy.  Returns pivot (row, col) pairs in order.
std::vector<std::pair<int, int>> column_echelon(IntMat& A, IntMat& U) {
  const int m = row_count(A), n = col_count(A);
  U = int_identity(n);
  std::vector<std::pair<int, int>> pivots;
  int r = 0;  // next pivot column
  for (int row = 0; row < m && r < n; ++row) {
    // Euclidean elimination across columns r..n-1 in this row.
    for (;;) {
      int best = -1;
      for (int c = r; c < n; ++c) {
        if (A[row][c] != 0 && (best < 0 || mpz_cmpabs(A[row][c].get_mpz_t(), A[row][best].get_mpz_t()) < 0))
          best = c;
      }
      if (best < 0) break;  // row is clear
      bool others = false;
      for (int c = r; c < n; ++c) {
        if (c == best || A[row][c] == 0) continue;
        others = true;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), A[row][c].get_mpz_t(), A[row][best].get_mpz_t());
        col_axpy(A, c, best, q);
        col_axpy(U, c, best, q);
      }
      if (!others) {
        col_swap(A, r, best);
        col_swap(U, r, best);
        if (A[row][r] < 0) {
          col_negate(A, r);
          col_negate(U, r);
        }
        pivots.emplace_back(row, r);
        ++r;
        break;
      }
    }
  }
  return pivots;
}

}  // namespace

IntMat hnf_column_basis(const IntMat& A) {
  IntMat E = A, U;
  auto pivots = column_echelon(E, U);
  const int m = row_count(A), r = static_cast<int>(pivots.size());
  if (r == 0) throw std::invalid_argument("zero lattice");
  // Normalize: entries left of each pivot reduced into [0, pivot).
  for (int j = 0; j < r; ++j) {
    const int prow = pivots[j].first;
    for (int i = 0; i < j; ++i) {
      Int q;
      mpz_fdiv_q(q.get_mpz_t(), E[prow][i].get_mpz_t(), E[prow][j].get_mpz_t());
      col_axpy(E, i, j, q);
    }
  }
  IntMat H(m, IntVec(r, 0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < r; ++j) H[i][j] = E[i][j];
  return H;
}

IntMat integer_kernel_basis_mat(const IntMat& A) {
  IntMat E = A, U;
  auto pivots = column_echelon(E, U);
  const int n = col_count(A), r = static_cast<int>(pivots.size());
  IntMat K(row_count(U), IntVec(n - r));
  for (int c = r; c < n; ++c)
    for (int i = 0; i < row_count(U); ++i) K[i][c - r] = U[i][c];
  return K;
}

int rational_rank(RatMat A) {
  const int m = row_count(A), n = col_count(A);
  int rank = 0;
  for (int col = 0; col < n && rank < m; ++col) {
    int piv = -1;
    for (int i = rank; i < m; ++i)
      if (A[i][col] != 0) { piv = i; break; }
    if (piv < 0) continue;
    std::swap(A[rank], A[piv]);
    for (int i = rank + 1; i < m; ++i) {
      if (A[i][col] == 0) continue;
      Rat f = A[i][col] / A[rank][col];
      for (int j = col; j < n; ++j) A[i][j] -= f * A[rank][j];
    }
    ++rank;
  }
  return rank;
}

Rat rational_det(RatMat A) {
  const int n = row_count(A);
  if (n != col_count(A)) throw std::invalid_argument("det: not square");
  Rat det(1);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int i = col; i < n; ++i)
      if (A[i][col] != 0) { piv = i; break; }
    if (piv < 0) return Rat(0);
    if (piv != col) { std::swap(A[col], A[piv]); det = -det; }
    det *= A[col][col];
    for (int i = col + 1; i < n; ++i) {
      if (A[i][col] == 0) continue;
      Rat f = A[i][col] / A[col][col];
      for (int j = col; j < n; ++j) A[i][j] -= f * A[col][j];
    }
  }
  return det;
}

RatMat rational_inverse(RatMat A) {
  const int n = row_count(A);
  if (n != col_count(A)) throw std::invalid_argument("inverse: not square");
  RatMat I(n, RatVec(n, Rat(0)));
  for (int i = 0; i < n; ++i) I[i][i] = 1;
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int i = col; i < n; ++i)
      if (A[i][col] != 0) { piv = i; break; }
    if (piv < 0) throw std::invalid_argument("inverse: singular matrix");
    std::swap(A[col], A[piv]);
    std::swap(I[col], I[piv]);
    Rat d = A[col][col];
    for (int j = 0; j < n; ++j) { A[col][j] /= d; I[col][j] /= d; }
    for (int i = 0; i < n; ++i) {
      if (i == col || A[i][col] == 0) continue;
      Rat f = A[i][col];
      for (int j = 0; j < n; ++j) { A[i][j] -= f * A[col][j]; I[i][j] -= f * I[col][j]; }
    }
  }
  return I;
}

std::optional<RatVec> solve_full_column_rank(const RatMat& A, const RatVec& b) {
  // Solve the normal equations exactly, then verify A x = b (detects b
  // outside the column span).
  RatMat At = rat_transpose(A);
  RatMat G = rat_mul(At, A);
  RatVec rhs = rat_mul_vec(At, b);
  RatMat Gi;
  try {
    Gi = rational_inverse(G);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("solve: matrix does not have full column rank");
  }
  RatVec x = rat_mul_vec(Gi, rhs);
  RatVec Ax = rat_mul_vec(A, x);
  for (size_t i = 0; i < b.size(); ++i)
    if (Ax[i] != b[i]) return std::nullopt;
  return x;
}

std::optional<IntVec> integer_solve(const IntMat& A, const IntVec& b) {
  IntMat E = A, U;
  auto pivots = column_echelon(E, U);
  const int n = col_count(A);
  // Forward-substitute on pivot rows of the echelon matrix.
  IntVec z(n, 0);
  IntVec residual = b;
  for (size_t j = 0; j < pivots.size(); ++j) {
    auto [prow, pcol] = pivots[j];
    Int q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), residual[prow].get_mpz_t(), E[prow][pcol].get_mpz_t());
    if (r != 0) return std::nullopt;
    z[pcol] = q;
    for (int i = 0; i < row_count(A); ++i) residual[i] -= q * E[i][pcol];
  }
  for (const auto& v : residual)
    if (v != 0) return std::nullopt;
  IntVec x(n, 0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n; ++c) x[i] += U[i][c] * z[c];
  return x;
}

}  // namespace latdisc
