#pragma once

// Exact machinery for the Hamming-weight mixing analysis of sums of random
// t-sparse 0/1 vectors over F2: the weight-law DP, the parity-conditioned
// binomial it converges to, total variation distance, and Walsh/Krawtchouk
// coefficients.

#include <vector>

#include "latdisc/rational.hpp"

namespace latdisc {

// Law of a Hamming weight on {0,...,m}.  Computed exactly in rationals when
// feasible (exact == true, exact_probs populated); probs always carries the
// double view.
struct WeightDistribution {
  int m = 0;
  bool exact = true;
  std::vector<Rat> exact_probs;  // size m+1 when exact
  std::vector<double> probs;     // size m+1 always
};

// Exact binomial coefficient.
Int binomial(unsigned long n, unsigned long k);

// One step of the weight walk: add a uniformly random t-subset indicator
// (mod 2).  From weight w the walk moves to w + t - 2j with hypergeometric
// probability C(w,j) C(m-w,t-j) / C(m,t).
WeightDistribution mixing_step(const WeightDistribution& dist, int t);

// Law of the weight of the sum of n i.i.d. uniform t-sparse vectors over F2.
// Exact rationals for n <= 500; compensated doubles beyond.
// Pre: 0 < t < m, n >= 1.
WeightDistribution weight_distribution(int m, int t, long n);

// Weight law of a uniform vector conditioned on parity: weight k has mass
// 2^{-(m-1)} C(m,k) for k == parity (mod 2), zero otherwise.
WeightDistribution conditioned_binomial(int m, int parity);

// Total variation distance 1/2 sum |p_k - q_k|; exact when both inputs are.
// Throws std::invalid_argument on mismatched m.
double tv_distance(const WeightDistribution& p, const WeightDistribution& q);
Rat tv_distance_exact(const WeightDistribution& p, const WeightDistribution& q);

// Krawtchouk value: the Walsh coefficient of the uniform t-subset indicator
// law at a frequency vector of weight s,
//   sum_j (-1)^j C(s,j) C(m-s,t-j) / C(m,t).
// Pre: 0 <= s <= m.
Rat walsh_coefficient(int m, int t, int s);

// Empirical mixing bound e^{-2n/m + m}.
double mixing_tv_bound(int m, long n);

}  // namespace latdisc
