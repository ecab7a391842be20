#include <doctest.h>

#include <cmath>

#include "latdisc/lattice.hpp"

using namespace latdisc;

namespace {

IntMat int_mat(std::initializer_list<std::initializer_list<long>> rows) {
  IntMat A;
  for (const auto& r : rows) {
    IntVec row;
    for (long v : r) row.push_back(Int(v));
    A.push_back(row);
  }
  return A;
}

RatVec rat_vec(std::initializer_list<Rat> xs) { return RatVec(xs); }

}  // namespace

TEST_CASE("norms and measures") {
  CHECK(norm_distortion(NormSpec{Norm::Sup}, 4) == doctest::Approx(2.0));
  CHECK(norm_distortion(NormSpec{Norm::Euclid}, 4) == doctest::Approx(1.0));
  Eigen::VectorXd v(2);
  v << 3.0, -4.0;
  CHECK(vector_norm(v, NormSpec{Norm::Sup}) == doctest::Approx(4.0));
  CHECK(vector_norm(v, NormSpec{Norm::Euclid}) == doctest::Approx(5.0));
  // Sup measure is the norm itself; Euclid measure is the squared norm.
  RatVec r = rat_vec({Rat(3), Rat(-4)});
  CHECK(exact_measure(r, NormSpec{Norm::Sup}) == Rat(4));
  CHECK(exact_measure(r, NormSpec{Norm::Euclid}) == Rat(25));
  CHECK(measure_to_distance(Rat(25), NormSpec{Norm::Euclid}) == doctest::Approx(5.0));
  CHECK(measure_to_distance(Rat(4), NormSpec{Norm::Sup}) == doctest::Approx(4.0));
}

TEST_CASE("lattice from columns: canonical basis, determinant") {
  // {(1,0), (1,1)} spans Z^2: det 1.
  Lattice L = lattice_from_columns(int_mat({{1, 1}, {0, 1}}));
  CHECK(L.rank == 2);
  CHECK(gram_det(L) == Rat(1));
  CHECK(lattice_det(L) == doctest::Approx(1.0));

  // Columns (2r+1) and (r) of the worst-case 1 x 2 example span Z (gcd 1).
  for (long r = 1; r <= 5; ++r) {
    Lattice Z = lattice_from_columns(int_mat({{2 * r + 1, r}}));
    CHECK(Z.rank == 1);
    CHECK(Z.basis[0][0] == Rat(1));
  }

  // Even-sum sublattice of Z^2 from t-sparse-style columns: index 2.
  Lattice E = lattice_from_columns(int_mat({{1, 2}, {1, 0}}));
  CHECK(gram_det(E) == Rat(4));
  CHECK(lattice_det(E) == doctest::Approx(2.0));
}

TEST_CASE("scaling multiplies the determinant by factor^rank") {
  Lattice L = lattice_from_columns(int_mat({{1, 0}, {0, 1}}));
  Lattice L2 = scale_lattice(L, Rat(2));
  CHECK(gram_det(L2) == Rat(16));
  CHECK(lattice_det(L2) == doctest::Approx(4.0));
}

TEST_CASE("dual lattice of a scaled integer lattice") {
  // (2Z)^2 has dual (Z/2)^2; det inverts.
  Lattice L = scale_lattice(lattice_from_columns(int_mat({{1, 0}, {0, 1}})), Rat(2));
  DualLattice D = dual_lattice(L);
  CHECK(lattice_det(D.lattice) == doctest::Approx(0.25));
  // Every dual basis vector pairs integrally with every primal basis vector.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Rat dot = D.lattice.basis[0][i] * L.basis[0][j] + D.lattice.basis[1][i] * L.basis[1][j];
      CHECK(dot.get_den() == 1);
    }
}

TEST_CASE("closest vector in Z^2, both norms, exact values") {
  Lattice Z2 = lattice_from_columns(int_mat({{1, 0}, {0, 1}}));
  RatVec target = rat_vec({Rat(2, 5), Rat(18, 5)});  // (0.4, 3.6)
  for (Norm k : {Norm::Sup, Norm::Euclid}) {
    CvpResult r = closest_vector(Z2, target, NormSpec{k});
    CHECK(r.certified);
    CHECK(r.point[0] == Rat(0));
    CHECK(r.point[1] == Rat(4));
  }
  CvpResult sup = closest_vector(Z2, target, NormSpec{Norm::Sup});
  CHECK(sup.exact == Rat(2, 5));
  CvpResult euc = closest_vector(Z2, target, NormSpec{Norm::Euclid});
  CHECK(euc.exact == Rat(4, 25) + Rat(4, 25));  // squared distance
  CHECK(euc.distance == doctest::Approx(std::sqrt(8.0 / 25.0)));
}

TEST_CASE("closest vector on a rank-deficient lattice rejects off-span targets") {
  Lattice line = lattice_from_columns(int_mat({{1}, {1}}));  // Z * (1,1)
  CvpResult r = closest_vector(line, rat_vec({Rat(5, 2), Rat(5, 2)}), NormSpec{Norm::Euclid});
  CHECK(r.exact == Rat(1, 2));  // squared: 2 * (1/2)^2
  CHECK_THROWS(closest_vector(line, rat_vec({Rat(1), Rat(0)}), NormSpec{Norm::Euclid}));
}

TEST_CASE("cvp tie-break is deterministic") {
  Lattice Z1 = lattice_from_columns(int_mat({{1}}));
  CvpResult r = closest_vector(Z1, rat_vec({Rat(1, 2)}), NormSpec{Norm::Sup});
  // 0 and 1 are equidistant; the lexicographically smaller coefficient wins.
  CHECK(r.coeffs[0] == 0);
  CHECK(r.exact == Rat(1, 2));
}

TEST_CASE("covering radius of Z^n") {
  Lattice Z1 = lattice_from_columns(int_mat({{1}}));
  CoveringRadius c1 = covering_radius(Z1, NormSpec{Norm::Sup}, true);
  CHECK(c1.certified);
  CHECK(c1.value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c1.upper >= c1.value);
  CHECK(c1.upper == doctest::Approx(0.5).epsilon(1e-6));

  Lattice Z2 = lattice_from_columns(int_mat({{1, 0}, {0, 1}}));
  CoveringRadius c2sup = covering_radius(Z2, NormSpec{Norm::Sup}, true);
  CHECK(c2sup.value == doctest::Approx(0.5).epsilon(1e-6));
  CoveringRadius c2euc = covering_radius(Z2, NormSpec{Norm::Euclid}, true);
  CHECK(c2euc.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
  CHECK(c2euc.upper >= c2euc.value - 1e-12);
}

TEST_CASE("voronoi membership") {
  Lattice Z2 = lattice_from_columns(int_mat({{1, 0}, {0, 1}}));
  DualLattice D = dual_lattice(Z2);  // dual of Z^2 is Z^2
  Eigen::VectorXd in(2), out(2);
  in << 0.3, -0.2;
  out << 0.8, 0.1;
  CHECK(in_voronoi(D, in));
  CHECK_FALSE(in_voronoi(D, out));
}

TEST_CASE("integer kernel basis as vectors") {
  auto K = integer_kernel_basis(int_mat({{1, 2, 4}}));
  REQUIRE(K.size() == 2);
  for (const auto& v : K) CHECK(v[0] + 2 * v[1] + 4 * v[2] == 0);
}

TEST_CASE("lattice equality is span equality") {
  Lattice a = lattice_from_columns(int_mat({{1, 1}, {0, 1}}));
  Lattice b = lattice_from_columns(int_mat({{1, 0}, {0, 1}}));
  CHECK(lattice_equal(a, b));
  Lattice c = lattice_from_columns(int_mat({{2, 0}, {0, 1}}));
  CHECK_FALSE(lattice_equal(a, c));
}

TEST_CASE("lattice json round trip") {
  Lattice L = lattice_from_columns(int_mat({{1, 2}, {1, 0}}));
  Lattice back = lattice_from_json(lattice_to_json(L));
  CHECK(lattice_equal(L, back));
  CHECK(back.ambient_dim == 2);
  CHECK(back.rank == 2);
}
