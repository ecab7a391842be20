#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include <json.hpp>

#include "latdisc/lattice.hpp"
#include "latdisc/rational.hpp"
#include "latdisc/rng.hpp"

namespace latdisc {

enum class DistKind { TSparse, FiniteLattice, UnitSphere };

// A column distribution X on R^m: uniform t-sparse indicator vectors, a
// general finitely supported integer-vector law, or the uniform unit sphere.
struct ColumnDistribution {
  DistKind kind;
  int m = 0;
  int t = 0;                       // TSparse only
  IntMat support;                  // FiniteLattice: m x q, columns are support points
  std::vector<double> probs;       // FiniteLattice: per-column probabilities
};

ColumnDistribution tsparse_distribution(int m, int t);
ColumnDistribution finite_lattice_distribution(IntMat support_columns, std::vector<double> probs);
ColumnDistribution unit_sphere_distribution(int m);

// Materialized support columns (m x q).  TSparse enumerates the (m choose t)
// indicators, capped so combinatorial operations stay bounded.
IntMat support_columns(const ColumnDistribution& dist, long cap = 2000);
bool has_finite_support(const ColumnDistribution& dist);
std::vector<double> support_probs(const ColumnDistribution& dist, long cap = 2000);

Eigen::VectorXd sample(const ColumnDistribution& dist, RandomStream& rng);
// Integer sample for the lattice kinds (errors on UnitSphere).
IntVec sample_int(const ColumnDistribution& dist, RandomStream& rng);

struct CovarianceResult {
  Eigen::MatrixXd sigma;
  double min_eigenvalue;
};
CovarianceResult covariance(const ColumnDistribution& dist);

struct IsotropizedView {
  ColumnDistribution parent;
  Eigen::MatrixXd transform;          // Sigma^{-1/2}
  Eigen::MatrixXd inverse_transform;  // Sigma^{1/2}
  Eigen::MatrixXd lattice_basis;      // Sigma^{-1/2} * (span-lattice basis), lattice kinds
  double radius;                      // L = max |transform * x|_2 over support (sqrt(m) closed forms)
};
IsotropizedView isotropize(const ColumnDistribution& dist);

// X^(theta) = E[exp(2 pi i <X, theta>)], exact over finite support.
std::complex<double> char_fn(const ColumnDistribution& dist, const Eigen::VectorXd& theta);

// Fractional part into (-1/2, 1/2].
double mod_half_open(double x);

struct TildeEstimate {
  double value = 0.0;
  double std_error = 0.0;  // of the mean-square estimate, 0 for exact kinds
  long samples = 0;
};
// X~(theta) = sqrt(E[ |<theta, X> mod 1|^2 ]): exact for finite support,
// Monte Carlo (budget samples) for the unit sphere.
TildeEstimate tilde(const ColumnDistribution& dist, const Eigen::VectorXd& theta,
                    long mc_budget = 0, RandomStream* rng = nullptr);

// |theta|_X = sqrt(theta^T Sigma theta).
double norm_X(const ColumnDistribution& dist, const Eigen::VectorXd& theta);

// Integer span of the support (lattice kinds).
Lattice span_lattice(const ColumnDistribution& dist);

nlohmann::json distribution_to_json(const ColumnDistribution& dist);
ColumnDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace latdisc
