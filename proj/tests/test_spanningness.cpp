#include <doctest.h>

#include <cmath>

#include "latdisc/spanningness.hpp"

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

}  // namespace

TEST_CASE("beta bound: swap kernel vectors give beta = 4 for t-sparse") {
  for (int m = 3; m <= 6; ++m)
    for (int t = 2; t <= m - 2; ++t) {
      BetaResult b = beta_bound(tsparse_distribution(m, t));
      CHECK(b.beta == 4);
      CHECK_FALSE(b.spanning_set.empty());
      for (const IntVec& v : b.spanning_set) {
        Int l1 = 0;
        for (const Int& x : v) l1 += abs(x);
        CHECK(l1 <= 4);
      }
    }
}

TEST_CASE("beta bound: trivial kernels report beta = 0") {
  // TSparse(m,1) and TSparse(m,m-1) have injective support matrices.
  CHECK(beta_bound(tsparse_distribution(4, 1)).beta == 0);
  CHECK(beta_bound(tsparse_distribution(4, 3)).beta == 0);
}

TEST_CASE("beta bound: generic finite support {e1, e2, e1+e2}") {
  ColumnDistribution d = finite_lattice_distribution(
      int_mat({{1, 0, 1}, {0, 1, 1}}), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  BetaResult b = beta_bound(d);
  // Kernel is spanned by (1, 1, -1): l1 norm 3.
  CHECK(b.beta == 3);
  REQUIRE(b.spanning_set.size() == 1);
  const IntVec& v = b.spanning_set[0];
  CHECK(v[0] + v[2] == 0);  // row 1: 1*c0 + 0*c1 + 1*c2
  CHECK(v[1] + v[2] == 0);  // row 2
}

TEST_CASE("t-sparse spanning set has rank C(m,t) - m") {
  // verify_tsparse_spanning_set rebuilds the swap family, checks kernel
  // membership of every element, and compares the rank to C(m,t) - m.
  for (int m = 3; m <= 6; ++m)
    for (int t = 1; t < m; ++t) CHECK(verify_tsparse_spanning_set(m, t));
}

TEST_CASE("alpha estimate for t-sparse clears the proven 1/(2m) floor") {
  RandomStream rng(21);
  for (int m = 3; m <= 6; ++m)
    for (int t = 1; t < m; ++t) {
      AlphaEstimate a = alpha_estimate(tsparse_distribution(m, t), 32, rng);
      CHECK(a.value >= 1.0 / (2.0 * m) - 1e-6);
      CHECK(a.value <= 1.0 + 1e-9);
    }
}

TEST_CASE("spanningness lower bound is alpha/beta, infinite on trivial kernel") {
  ColumnDistribution d = tsparse_distribution(6, 2);
  SpanningnessValue lb = spanningness_lower_bound(d, 1.0 / 12.0);
  CHECK_FALSE(lb.is_infinite);
  CHECK(lb.value == doctest::Approx(1.0 / 48.0));

  SpanningnessValue inf_lb = spanningness_lower_bound(tsparse_distribution(4, 1), 0.125);
  CHECK(inf_lb.is_infinite);
}

TEST_CASE("search finds the pseudodual of a near-sublattice distribution") {
  // Mass 0.01 on {1}, the rest on {2, 4}: theta near 1/2 wraps the even
  // support to 0 while staying far from the dual Z, so X~(1/2) = sqrt(.01)/2.
  ColumnDistribution d = finite_lattice_distribution(
      int_mat({{1, 2, 4}}), {0.01, 0.495, 0.495});
  RandomStream rng(4);
  SearchResult s = spanningness_search(d, 30000, rng);
  REQUIRE_FALSE(s.upper.is_infinite);
  CHECK(s.upper.value == doctest::Approx(0.05).epsilon(0.05));
  REQUIRE(s.witness.size() == 1);
  // The witness satisfies the pseudodual inequality with the Sigma metric.
  TildeEstimate t = tilde(d, s.witness);
  CHECK(t.value == doctest::Approx(s.upper.value).epsilon(1e-6));
}

TEST_CASE("search reports infinity when no pseudodual exists") {
  // TSparse(4,1): X~ equals the Sigma distance near every dual point, so the
  // pseudodual inequality X~ <= d_X/2 never holds.
  RandomStream rng(4);
  SearchResult s = spanningness_search(tsparse_distribution(4, 1), 4000, rng);
  CHECK(s.upper.is_infinite);
}

TEST_CASE("report ties the sandwich together for t-sparse") {
  RandomStream rng(12);
  SpanningnessReport r = spanningness_report(tsparse_distribution(5, 2), 16, 8000, rng);
  CHECK(r.beta == 4);
  CHECK(r.alpha >= 1.0 / 10.0 - 1e-6);
  REQUIRE_FALSE(r.lower_bound.is_infinite);
  CHECK(r.lower_bound.value == doctest::Approx(r.alpha / 4.0));
  if (!r.numeric_upper.is_infinite)
    CHECK(r.numeric_upper.value >= r.lower_bound.value - 1e-9);
}

TEST_CASE("threshold terms frozen for TSparse(6,2), c = 1, s = 1/48") {
  ThresholdReport tr = n_threshold(tsparse_distribution(6, 2), NormSpec{Norm::Sup}, 1.0, 1.0 / 48.0);
  // s^{-4} L^{-2} = 48^4 / 6.
  CHECK(tr.term_span == doctest::Approx(884736.0));
  // m^2 L^2 (log m + log L)^2 with L = sqrt(6).
  const double logs = std::log(6.0) + 0.5 * std::log(6.0);
  CHECK(tr.term_moment == doctest::Approx(36.0 * 6.0 * logs * logs));
  // L^2 log^2 det: span lattice determinant 2.
  CHECK(tr.term_det == doctest::Approx(6.0 * std::log(2.0) * std::log(2.0)));
  // R^2 rho^2 / sigma_min = 6 * 1 / (4/15).
  CHECK(tr.term_covering == doctest::Approx(22.5));
  CHECK(tr.n0 == doctest::Approx(884736.0));
  CHECK(tr.n == doctest::Approx(884736.0));
  CHECK(tr.constant_c == doctest::Approx(1.0));

  // The constant scales every term.
  ThresholdReport tr2 = n_threshold(tsparse_distribution(6, 2), NormSpec{Norm::Sup}, 2.0, 1.0 / 48.0);
  CHECK(tr2.n0 == doctest::Approx(2.0 * tr.n0));
}

TEST_CASE("json emission uses an explicit infinity sentinel") {
  RandomStream rng(2);
  SpanningnessReport r = spanningness_report(tsparse_distribution(4, 1), 8, 2000, rng);
  nlohmann::json j = spanningness_to_json(r);
  CHECK(j.at("lower_bound") == "inf");
  CHECK(j.at("numeric_upper") == "inf");
  ThresholdReport tr = n_threshold(tsparse_distribution(6, 2), NormSpec{Norm::Sup}, 1.0, 1.0 / 48.0);
  nlohmann::json tj = threshold_to_json(tr);
  CHECK(tj.at("n0").get<double>() == doctest::Approx(884736.0));
}
