#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "latdisc/exact_linalg.hpp"
#include "latdisc/rational.hpp"

namespace latdisc {

enum class Norm { Sup, Euclid };

struct NormSpec {
  Norm kind = Norm::Sup;
};

// Max Euclidean length over the unit ball of the norm: sqrt(m) for sup, 1 for
// Euclidean.
double norm_distortion(NormSpec norm, int m);

double vector_norm(const Eigen::VectorXd& v, NormSpec norm);

// Exact norm measure of a rational vector: the sup-norm itself, or the
// *squared* Euclidean norm (rational either way).
Rat exact_measure(const RatVec& v, NormSpec norm);
double measure_to_distance(const Rat& measure, NormSpec norm);

struct Lattice {
  int ambient_dim = 0;
  int rank = 0;
  RatMat basis;  // ambient_dim x rank; columns are the basis vectors
};

// Same shape as a lattice, tagged as the dual of a parent.
struct DualLattice {
  Lattice lattice;
};

// Integer span of the given columns (m x n matrix), with the canonical
// column-Hermite basis, so equal spans produce identical Lattice values.
Lattice lattice_from_columns(const IntMat& columns);

Lattice scale_lattice(const Lattice& L, const Rat& factor);

// Exact Gram determinant det(B^T B) and the lattice determinant sqrt of it.
Rat gram_det(const Lattice& L);
double lattice_det(const Lattice& L);

// Dual basis B (B^T B)^{-1}; requires rank = ambient_dim.
DualLattice dual_lattice(const Lattice& L);

struct CvpResult {
  RatVec point;      // nearest lattice vector
  IntVec coeffs;     // its coefficients in the lattice basis
  double distance;   // d_*(target, L)
  Rat exact;         // exact measure of target - point (sup value, or squared Euclidean)
  bool certified = true;
};

// Exact closest vector by certified coefficient-box enumeration.  Ties broken
// by lexicographically smallest coefficient vector.  Throws "instance too
// large" beyond rank 6 / the candidate cap, and rejects targets outside the
// span.
CvpResult closest_vector(const Lattice& L, const RatVec& target, NormSpec norm,
                         long max_candidates = 20000000L);

struct CoveringRadius {
  double value = 0.0;       // best deep-hole distance found (valid lower bound)
  double upper = 0.0;       // certified upper bound (certified mode only)
  bool certified = false;
};

// Deep-hole search over the fundamental cell.  Certified mode (rank <= 4)
// brackets the covering radius between the best probe and a grid-Lipschitz
// upper bound; estimate mode returns the best probe only.
CoveringRadius covering_radius(const Lattice& L, NormSpec norm, bool certified_mode,
                               int grid_per_dim = 0, uint64_t seed = 12345);

// True iff theta is as close to the origin as to every candidate dual vector
// in a ball of radius 2 * |theta| + longest basis vector (sufficient by the
// triangle inequality).
bool in_voronoi(const DualLattice& dual, const Eigen::VectorXd& theta);

// Integer vectors spanning ker(A) over the reals; count = cols - rank.
std::vector<IntVec> integer_kernel_basis(const IntMat& A);

bool lattice_equal(const Lattice& a, const Lattice& b);

nlohmann::json lattice_to_json(const Lattice& L);
Lattice lattice_from_json(const nlohmann::json& j);

namespace detail {

// Shared double-precision enumeration context for one lattice: used for fast
// distance probes (covering-radius grid, Voronoi candidates, spanningness).
struct CvpContext {
  Eigen::MatrixXd B;                 // m x k basis
  Eigen::MatrixXd P;                 // k x m pseudoinverse (B^T B)^{-1} B^T
  std::vector<double> pinv_row_norm; // Euclidean norms of P's rows
  double longest_basis = 0.0;        // max Euclidean basis-vector length
  explicit CvpContext(const Eigen::MatrixXd& basis);
};

// Nearest-lattice-vector distance in doubles; exhaustive over the certified
// coefficient box (norm as given).  Optionally reports the nearest point.
double cvp_distance(const CvpContext& ctx, const Eigen::VectorXd& target, NormSpec norm,
                    Eigen::VectorXd* nearest = nullptr, Eigen::VectorXi* coeffs = nullptr);

Eigen::MatrixXd basis_to_double(const Lattice& L);

}  // namespace detail

}  // namespace latdisc
