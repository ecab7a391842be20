#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "latdisc/lattice.hpp"
#include "latdisc/rational.hpp"
#include "latdisc/rng.hpp"

namespace latdisc {

// Integer matrix in solver-friendly form: row-major m x n, machine integers.
using Mat64 = std::vector<std::vector<int64_t>>;

using Coloring = std::vector<int8_t>;  // entries exactly +1 / -1

struct DiscrepancyResult {
  double value = 0.0;
  Coloring coloring;
  double lower_bound = 0.0;
  bool certified = false;
  std::string method;
};

int mat_rows(const Mat64& M);
int mat_cols(const Mat64& M);
IntMat to_int_mat(const Mat64& M);
Eigen::MatrixXd to_dense(const Mat64& M);

// |M y|_*: exact integer arithmetic for integral M with the sup-norm.
double disc_value(const Mat64& M, const Coloring& y, NormSpec norm);
double disc_value(const Eigen::MatrixXd& M, const Coloring& y, NormSpec norm);

// Exhaustive minimum over colorings via Gray-code enumeration (n <= 30).
DiscrepancyResult disc_exact(const Mat64& M, NormSpec norm);
DiscrepancyResult disc_exact(const Eigen::MatrixXd& M, NormSpec norm);

// Split-half tabulation with sorted first-coordinate lookup (sup-norm,
// integer entries, n <= 44).
DiscrepancyResult disc_meet_middle(const Mat64& M);

struct DecisionResult {
  bool feasible = false;
  Coloring coloring;        // witness when feasible
  std::string route;        // "dp" | "parity" | "construction"
};

// Decide whether some coloring reaches |My|_inf <= K.  Generic route: forward
// DP over reachable partial sums with box pruning and a hard state cap.
// Repeated-column instances take a certified fast path: infeasibility from
// the parity congruence My = M1 (mod 2L), feasibility from an explicitly
// constructed and re-verified coloring.
DecisionResult disc_decision_dp(const Mat64& M, int64_t K, uint64_t state_cap = 10000000ULL);

struct ParityBound {
  double distance = 0.0;
  RatVec nearest;
  bool certified = false;
};

// d_*(M 1, 2L), a true lower bound on disc_*(M): every My is congruent to
// M 1 mod 2L.  Exact for rank <= 6; otherwise a rounding estimate with the
// certified flag cleared.
ParityBound parity_lower_bound(const Mat64& M, NormSpec norm);

// Closed-form odd discrepancy of a t-sparse matrix from its row sums.
int tsparse_odd_disc(const std::vector<int64_t>& row_sums, int t, int64_t n);

// Random-restart descent: steepest single flips to a local optimum, then
// first-improvement pair flips, alternating until neither helps.  Never
// certified.
DiscrepancyResult local_search(const Eigen::MatrixXd& M, NormSpec norm, long budget,
                               RandomStream& rng);

}  // namespace latdisc
