#pragma once

// Spanningness machinery: beta-boundedness via integral kernel spanning sets,
// alpha-spreading estimation, the alpha/beta lower bound, direct pseudodual
// search, and the sample-size thresholds N0/N.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include <json.hpp>

#include "latdisc/distribution.hpp"
#include "latdisc/lattice.hpp"
#include "latdisc/rational.hpp"
#include "latdisc/rng.hpp"

namespace latdisc {

// Spanningness can genuinely be infinite (no pseudodual points at all); the
// sentinel is explicit rather than a float overflow.
struct SpanningnessValue {
  bool is_infinite = false;
  double value = 0.0;
};

struct BetaResult {
  long beta = 0;                    // max l1 norm over the spanning set; 0 if kernel trivial
  std::vector<IntVec> spanning_set; // integer vectors spanning ker A_X over R
};

// Bounded integral spanning set of ker A_X (A_X = support matrix, columns
// indexed by support points).  TSparse uses the swap construction, giving
// beta <= 4; general finite distributions use an integer kernel basis.
// Throws std::invalid_argument without finite support.
BetaResult beta_bound(const ColumnDistribution& dist);

// Rebuilds the full swap family { e_{S'} - e_S + e_T - e_{T'} } over all
// single-element swaps and pairs, checks every element lies in ker A_X and
// that the family's rank is (m choose t) - m.  Throws when (m choose t)
// exceeds the combinatorial cap.
bool verify_tsparse_spanning_set(int m, int t);

struct AlphaEstimate {
  double value = 1.0;       // min ratio found: an UPPER bound on the true alpha
  Eigen::VectorXd witness;  // theta achieving it
};

// Minimize X~(theta) / sup_x |<x,theta> mod 1| over a fundamental cell by
// random restarts (budget of them) plus coordinate descent.
AlphaEstimate alpha_estimate(const ColumnDistribution& dist, long restarts, RandomStream& rng);

// s(X) >= alpha / beta.  TSparse carries the proven alpha = 1/(2m); other
// distributions need a caller-supplied proven alpha.  A trivial kernel
// (beta = 0) yields the infinite sentinel.
SpanningnessValue spanningness_lower_bound(const ColumnDistribution& dist,
                                           std::optional<double> alpha = std::nullopt);

struct SearchResult {
  SpanningnessValue upper;  // min X~ over pseudodual points found
  Eigen::VectorXd witness;
  long restarts = 0;
  long evaluations = 0;
};

// Direct search for pseudodual points: sample theta in the dual Voronoi cell
// minus a small ball, keep points with X~(theta) <= d(theta, L*)/2, descend
// X~ by coordinate step-halving.  Budget counts X~ evaluations; restarts own
// independent substreams so the min is seed-deterministic.  UnitSphere uses
// Monte Carlo X~ and d(theta, {0}) = |theta|.
SearchResult spanningness_search(const ColumnDistribution& dist, long budget, RandomStream& rng);

struct SpanningnessReport {
  double alpha = 0.0;
  bool alpha_proven = false;
  long beta = 0;
  SpanningnessValue lower_bound;
  SpanningnessValue numeric_upper;
  Eigen::VectorXd witness_theta;
};

SpanningnessReport spanningness_report(const ColumnDistribution& dist, long alpha_budget,
                                       long search_budget, RandomStream& rng);

struct ThresholdReport {
  double n0 = 0.0;          // c * max of the three N0 terms
  double n = 0.0;           // c * max of all four terms
  double constant_c = 1.0;
  double term_moment = 0.0;    // m^2 L^2 (log m + log L)^2
  double term_span = 0.0;      // s^{-4} L^{-2}
  double term_det = 0.0;       // L^2 log^2 det(span lattice)
  double term_covering = 0.0;  // R^2 rho^2 / sigma_min
};

// Sample-size thresholds.  L is the isotropized radius, rho the covering
// radius of the span lattice in the given norm (closed form 1 for TSparse
// sup-norm), sigma_min the smallest covariance eigenvalue.  Nonlattice
// distributions get zero det/covering terms.
ThresholdReport n_threshold(const ColumnDistribution& dist, NormSpec norm, double c,
                            double s_value);

nlohmann::json spanningness_to_json(const SpanningnessReport& r);
nlohmann::json threshold_to_json(const ThresholdReport& r);

}  // namespace latdisc
