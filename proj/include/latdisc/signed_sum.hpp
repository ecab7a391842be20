#pragma once

// Exact signed-sum distributions Y_M = My (y uniform over {+-1/2}^n), the
// lattice Gaussian with covariance (1/4) M M^T, the local-limit comparison
// between the two, characteristic functions, concentration checks, the
// epsilon error budget, and the smoothed tent-function mass estimate.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "latdisc/discrepancy.hpp"
#include "latdisc/distribution.hpp"
#include "latdisc/lattice.hpp"
#include "latdisc/rational.hpp"
#include "latdisc/rng.hpp"

namespace latdisc {

// Exact law of Y_M on the coset L - (1/2) M 1.  Points are stored doubled
// (2 * lambda, integral for integer M); the probability of a point is
// count / 2^n.
struct SignedSumTable {
  int m = 0;
  int n = 0;
  std::vector<double> offset;                 // coset offset -(1/2) M 1
  std::map<std::vector<int64_t>, Int> table;  // doubled point -> numerator over 2^n
  Rat probability(const std::vector<int64_t>& doubled_point) const;
};

// Column-by-column convolution; throws "state cap exceeded" past the
// reachable-point cap.
SignedSumTable signed_sum_distribution(const Mat64& M, uint64_t point_cap = 10000000ULL);

// G_M(lambda) = 2^{m/2} det(L) / (pi^{m/2} sqrt(det MM^T)) *
//               exp(-2 lambda^T (MM^T)^{-1} lambda).
// Throws on singular MM^T.
double lattice_gaussian(const Mat64& M, const Lattice& L, const Eigen::VectorXd& lambda);

struct PointRecord {
  std::vector<int64_t> doubled;  // 2 * lambda
  Rat prob;                      // exact P(lambda)
  double prob_double = 0.0;
  double gauss = 0.0;
  double deviation = 0.0;
  bool bulk = false;
};

struct GaussianComparison {
  double bound = 0.0;        // G_M(0) * 2 m^2 L^2 / n
  double max_abs_dev = 0.0;  // over coset points (table plus the whole bulk)
  bool pass = false;
  long table_points = 0;
  long bulk_points = 0;
  std::vector<PointRecord> records;  // per-point records for bulk points
};

// Compare the exact law of Y_M against the lattice Gaussian: max |P - G| over
// coset points versus the bound, where L is the span lattice of dist and the
// radius enters through the isotropized view.  Points outside the bulk with
// P = 0 cannot violate the bound, so scanning table plus bulk is exhaustive.
GaussianComparison llt_compare(const Mat64& M, const ColumnDistribution& dist);

// Y^hat_M(theta) = prod_j cos(pi <x_j, theta>).
double char_fn_signed_sum(const Mat64& M, const Eigen::VectorXd& theta);
double char_fn_signed_sum(const Eigen::MatrixXd& M, const Eigen::VectorXd& theta);

struct ConcentrationCheck {
  bool lower_ok = false;  // min eigenvalue of (1/n) M M^T >= 1/2
  bool upper_ok = false;  // max eigenvalue <= 2
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};
ConcentrationCheck concentration_check(const Eigen::MatrixXd& M, long n);

struct ErrorBudget {
  double eps = 0.0;  // default L^{-1/2} n^{-1/4}
  bool flag_small_eps = false;       // (i)   eps <= 1/(2L)
  bool flag_fourth_moment = false;   // (ii)  L^2 n eps^4 <= 1
  bool flag_bulk_width = false;      // (iii) eps^2 >= 16 m / (pi^2 n)
  bool flag_spanningness = false;    // (iv)  eps <= s(X)
  double i1_bound = 0.0;  // c m^2 L^2 / (n (2 pi)^{m/2} sqrt(det Sigma_M))
  double i2_bound = 0.0;  // e^{-pi^2 eps^2 n / 8} / ((2 pi)^{m/2} sqrt(det Sigma_M))
  double i3_expected_bound = 0.0;  // det(L*) e^{-2 eps^2 n}
};

// Constraint flags and integral bounds; the unknown absolute constant in I1
// is exposed as c (default 1), so budgets are order-of-magnitude only.
ErrorBudget error_budget(const Mat64& M, const ColumnDistribution& dist, double s_value,
                         std::optional<double> eps = std::nullopt, double c = 1.0);

// Tent product B(w) = prod_i max(0, 2K - |w_i|) / (2K)^2: the density of the
// self-convolved uniform box, supported on [-2K, 2K]^m with B(0) = (2K)^{-m}.
double tent_product(const Eigen::VectorXd& w, double K);

struct SmoothedMass {
  double estimate = 0.0;
  double std_error = 0.0;
  long samples = 0;
  double best_sup = 0.0;       // smallest |My|_inf seen, y in {+-1/2}^n
  Coloring best_coloring;      // the +-1 coloring achieving it
};

// Monte Carlo estimate of E[B(Y_M)] over uniform y in {+-1/2}^n.  An
// estimate positive beyond three standard errors certifies some sampled y
// with |My|_inf < 2K (i.e. a +-1 coloring below 4K).
SmoothedMass smoothed_mass(const Eigen::MatrixXd& M, double K, long samples, RandomStream& rng);

// Numeric normalization check: det(L) * sum of G_M over coset points with
// lambda^T (MM^T)^{-1} lambda <= radius_sq.
double gaussian_coset_mass(const Mat64& M, const Lattice& L, double radius_sq);

nlohmann::json comparison_to_json(const GaussianComparison& g);
// CSV lines for the per-point records: point;prob_rational;prob;gauss;dev;bulk.
std::string comparison_records_csv(const GaussianComparison& g);

}  // namespace latdisc
