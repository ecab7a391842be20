#include "latdisc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "latdisc/rng.hpp"

namespace latdisc {

double norm_distortion(NormSpec norm, int m) {
  return norm.kind == Norm::Sup ? std::sqrt(static_cast<double>(m)) : 1.0;
}

double vector_norm(const Eigen::VectorXd& v, NormSpec norm) {
  return norm.kind == Norm::Sup ? v.lpNorm<Eigen::Infinity>() : v.norm();
}

Rat exact_measure(const RatVec& v, NormSpec norm) {
  Rat out(0);
  for (const auto& x : v) {
    if (norm.kind == Norm::Sup) {
      Rat a = abs(x);
      if (a > out) out = a;
    } else {
      out += x * x;
    }
  }
  return out;
}

double measure_to_distance(const Rat& measure, NormSpec norm) {
  double d = to_double(measure);
  return norm.kind == Norm::Sup ? d : std::sqrt(d);
}

Lattice lattice_from_columns(const IntMat& columns) {
  if (columns.empty() || columns[0].empty()) throw std::invalid_argument("zero lattice");
  IntMat H = hnf_column_basis(columns);  // throws "zero lattice" on rank 0
  Lattice L;
  L.ambient_dim = row_count(columns);
  L.rank = col_count(H);
  L.basis = rat_from_int(H);
  return L;
}

Lattice scale_lattice(const Lattice& L, const Rat& factor) {
  if (factor == 0) throw std::invalid_argument("zero lattice");
  Lattice S = L;
  for (auto& row : S.basis)
    for (auto& e : row) e *= factor;
  return S;
}

Rat gram_det(const Lattice& L) {
  RatMat Bt = rat_transpose(L.basis);
  return rational_det(rat_mul(Bt, L.basis));
}

double lattice_det(const Lattice& L) { return std::sqrt(to_double(gram_det(L))); }

DualLattice dual_lattice(const Lattice& L) {
  if (L.rank != L.ambient_dim)
    throw std::invalid_argument("degenerate lattice; restrict to span first");
  RatMat G = rat_mul(rat_transpose(L.basis), L.basis);
  RatMat D = rat_mul(L.basis, rational_inverse(G));
  DualLattice out;
  out.lattice.ambient_dim = L.ambient_dim;
  out.lattice.rank = L.rank;
  out.lattice.basis = std::move(D);
  return out;
}

namespace detail {

namespace {

// LLL reduction (delta = 0.75) by integer column operations: the lattice is
// unchanged, but the pseudoinverse rows — and with them every enumeration
// box sized below — shrink dramatically for skewed inputs such as
// isotropized dual bases.  Rank <= 6 throughout, so the quadratic
// recompute-everything Gram-Schmidt is irrelevant to cost.
void lll_reduce(Eigen::MatrixXd& B) {
  const int k = static_cast<int>(B.cols());
  if (k <= 1) return;
  Eigen::MatrixXd Bs = B;
  Eigen::MatrixXd mu = Eigen::MatrixXd::Identity(k, k);
  auto gso = [&]() {
    for (int i = 0; i < k; ++i) {
      Bs.col(i) = B.col(i);
      for (int j = 0; j < i; ++j) {
        const double denom = Bs.col(j).squaredNorm();
        mu(i, j) = denom > 0.0 ? B.col(i).dot(Bs.col(j)) / denom : 0.0;
        Bs.col(i) -= mu(i, j) * Bs.col(j);
      }
    }
  };
  gso();
  int i = 1;
  for (int guard = 0; i < k && guard < 10000; ++guard) {
    for (int j = i - 1; j >= 0; --j) {
      const double r = std::round(mu(i, j));
      if (r != 0.0) {
        B.col(i) -= r * B.col(j);
        gso();
      }
    }
    if (Bs.col(i).squaredNorm() <
        (0.75 - mu(i, i - 1) * mu(i, i - 1)) * Bs.col(i - 1).squaredNorm()) {
      B.col(i).swap(B.col(i - 1));
      gso();
      i = std::max(1, i - 1);
    } else {
      ++i;
    }
  }
}

}  // namespace

CvpContext::CvpContext(const Eigen::MatrixXd& basis) : B(basis) {
  lll_reduce(B);
  Eigen::MatrixXd G = B.transpose() * B;
  P = G.inverse() * B.transpose();
  pinv_row_norm.resize(P.rows());
  for (int i = 0; i < P.rows(); ++i) pinv_row_norm[i] = P.row(i).norm();
  for (int j = 0; j < B.cols(); ++j) longest_basis = std::max(longest_basis, B.col(j).norm());
}

Eigen::MatrixXd basis_to_double(const Lattice& L) {
  Eigen::MatrixXd B(L.ambient_dim, L.rank);
  for (int i = 0; i < L.ambient_dim; ++i)
    for (int j = 0; j < L.rank; ++j) B(i, j) = to_double(L.basis[i][j]);
  return B;
}

double cvp_distance(const CvpContext& ctx, const Eigen::VectorXd& target, NormSpec norm,
                    Eigen::VectorXd* nearest, Eigen::VectorXi* coeffs) {
  const int m = static_cast<int>(ctx.B.rows());
  const int k = static_cast<int>(ctx.B.cols());
  Eigen::VectorXd cstar = ctx.P * target;
  Eigen::VectorXi c0(k);
  for (int i = 0; i < k; ++i) c0(i) = static_cast<int>(std::llround(cstar(i)));
  Eigen::VectorXd best_vec = ctx.B * c0.cast<double>() - target;
  double best = vector_norm(best_vec, norm);
  Eigen::VectorXi best_c = c0;
  const double conv = norm.kind == Norm::Sup ? std::sqrt(static_cast<double>(m)) : 1.0;

  // Greedy coefficient descent from the rounded guess: in skewed bases the
  // naive rounding can be far from optimal, and the enumeration box below is
  // sized by the best distance known, so each improvement shrinks it.
  bool moved = true;
  for (int pass = 0; pass < 256 && moved && best > 0.0; ++pass) {
    moved = false;
    for (int j = 0; j < k; ++j)
      for (int step : {1, -1, 2, -2}) {
        Eigen::VectorXi c = best_c;
        c(j) += step;
        double d = vector_norm(ctx.B * c.cast<double>() - target, norm);
        if (d < best - 1e-13) {
          best = d;
          best_c = c;
          moved = true;
        }
      }
  }

  // Any candidate at *-distance <= best has coefficients within
  // pinv_row_norm[i] * conv * best of cstar[i]; the box sized by the initial
  // guess therefore contains the optimum.
  std::vector<int> lo(k), hi(k), cur(k);
  double span_product = 1.0;
  for (int i = 0; i < k; ++i) {
    double r = ctx.pinv_row_norm[i] * conv * best * (1.0 + 1e-12) + 1e-9;
    lo[i] = static_cast<int>(std::ceil(cstar(i) - r));
    hi[i] = static_cast<int>(std::floor(cstar(i) + r));
    cur[i] = lo[i];
    span_product *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (span_product > 5e7) throw std::invalid_argument("instance too large");
  Eigen::VectorXi cand(k);
  for (;;) {
    for (int i = 0; i < k; ++i) cand(i) = cur[i];
    Eigen::VectorXd v = ctx.B * cand.cast<double>() - target;
    double d = vector_norm(v, norm);
    if (d < best - 1e-13) {
      best = d;
      best_c = cand;
    }
    int i = k - 1;
    while (i >= 0 && cur[i] == hi[i]) { cur[i] = lo[i]; --i; }
    if (i < 0) break;
    ++cur[i];
  }
  if (nearest) *nearest = ctx.B * best_c.cast<double>();
  if (coeffs) *coeffs = best_c;
  return best;
}

}  // namespace detail

CvpResult closest_vector(const Lattice& L, const RatVec& target, NormSpec norm,
                         long max_candidates) {
  if (L.rank > 6) throw std::invalid_argument("instance too large");
  if (static_cast<int>(target.size()) != L.ambient_dim)
    throw std::invalid_argument("closest_vector: dimension mismatch");
  auto cstar = solve_full_column_rank(L.basis, target);
  if (!cstar) throw std::invalid_argument("closest_vector: target outside lattice span");

  const int k = L.rank;
  // Round the exact coefficients to an initial integer guess.
  IntVec c0(k);
  for (int i = 0; i < k; ++i) {
    Rat half = (*cstar)[i] + Rat(1, 2);
    Int fl;
    mpz_fdiv_q(fl.get_mpz_t(), half.get_num_mpz_t(), half.get_den_mpz_t());
    c0[i] = fl;
  }
  auto residual = [&](const IntVec& c) {
    RatVec v(target.size());
    for (size_t r = 0; r < target.size(); ++r) {
      Rat acc = -target[r];
      for (int j = 0; j < k; ++j) acc += L.basis[r][j] * Rat(c[j]);
      v[r] = acc;
    }
    return v;
  };
  RatVec v0 = residual(c0);
  Rat best_measure = exact_measure(v0, norm);
  IntVec best_c = c0;
  // Greedy coefficient descent from the rounded guess.  The enumeration box
  // below is sized by the best distance known so far, so every improvement
  // here shrinks it (often by orders of magnitude) without affecting the
  // certificate: the box still contains every optimal coefficient vector.
  bool moved = true;
  for (int pass = 0; pass < 256 && moved && best_measure != 0; ++pass) {
    moved = false;
    for (int j = 0; j < k; ++j)
      for (long step : {1L, -1L, 2L, -2L}) {
        IntVec c = best_c;
        c[j] += step;
        Rat meas = exact_measure(residual(c), norm);
        if (meas < best_measure) {
          best_measure = meas;
          best_c = c;
          moved = true;
        }
      }
  }
  if (best_measure != 0) {
    // Pseudoinverse rows bound the coefficient box.
    RatMat G = rat_mul(rat_transpose(L.basis), L.basis);
    RatMat P = rat_mul(rational_inverse(G), rat_transpose(L.basis));
    std::vector<double> row_norm(k);
    for (int i = 0; i < k; ++i) {
      Rat s(0);
      for (const auto& e : P[i]) s += e * e;
      row_norm[i] = std::sqrt(to_double(s)) * (1.0 + 1e-12);
    }
    const double conv = norm.kind == Norm::Sup ? std::sqrt(static_cast<double>(L.ambient_dim)) : 1.0;
    double best_dist = measure_to_distance(best_measure, norm);
    std::vector<long> lo(k), hi(k), cur(k);
    double span_product = 1.0;
    for (int i = 0; i < k; ++i) {
      double r = row_norm[i] * conv * best_dist * (1.0 + 1e-12) + 1e-9;
      double ci = to_double((*cstar)[i]);
      lo[i] = static_cast<long>(std::ceil(ci - r - 1e-9));
      hi[i] = static_cast<long>(std::floor(ci + r + 1e-9));
      span_product *= static_cast<double>(hi[i] - lo[i] + 1);
    }
    if (span_product > static_cast<double>(max_candidates))
      throw std::invalid_argument("instance too large");

    // Double-precision prefilter; exact rational comparison for near-ties.
    Eigen::MatrixXd Bd = detail::basis_to_double(L);
    Eigen::VectorXd td(L.ambient_dim);
    for (int i = 0; i < L.ambient_dim; ++i) td(i) = to_double(target[i]);
    for (int i = 0; i < k; ++i) cur[i] = lo[i];
    Eigen::VectorXd cd(k);
    for (;;) {
      for (int i = 0; i < k; ++i) cd(i) = static_cast<double>(cur[i]);
      double d = vector_norm(Bd * cd - td, norm);
      if (d <= best_dist * (1.0 + 1e-9) + 1e-12) {
        IntVec c(k);
        for (int i = 0; i < k; ++i) c[i] = static_cast<long>(cur[i]);
        Rat meas = exact_measure(residual(c), norm);
        if (meas < best_measure) {
          best_measure = meas;
          best_c = c;
          best_dist = measure_to_distance(best_measure, norm);
        }
        // Equal measure: the sweep is lexicographically ascending, so an
        // earlier-found candidate already has the smallest coefficients...
        // except the rounded initial guess, which must yield to a lex-smaller
        // tie inside the box.
        else if (meas == best_measure && c < best_c) {
          best_c = c;
        }
      }
      int i = k - 1;
      while (i >= 0 && cur[i] == hi[i]) { cur[i] = lo[i]; --i; }
      if (i < 0) break;
      ++cur[i];
    }
  }
  CvpResult out;
  out.coeffs = best_c;
  out.exact = best_measure;
  out.distance = measure_to_distance(best_measure, norm);
  out.point.resize(target.size());
  RatVec res = residual(best_c);
  for (size_t i = 0; i < target.size(); ++i) out.point[i] = res[i] + target[i];
  out.certified = true;
  return out;
}

CoveringRadius covering_radius(const Lattice& L, NormSpec norm, bool certified_mode,
                               int grid_per_dim, uint64_t seed) {
  const int k = L.rank;
  if (certified_mode && k > 4) throw std::invalid_argument("certified covering radius needs rank <= 4");
  Eigen::MatrixXd Bd = detail::basis_to_double(L);
  detail::CvpContext ctx(Bd);

  double cell_diam = 0.0;  // sum of basis lengths bounds the cell diameter
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd col = Bd.col(j);
    cell_diam += vector_norm(col, norm);
  }

  auto probe = [&](const Eigen::VectorXd& u) {
    return detail::cvp_distance(ctx, Bd * u, norm, nullptr, nullptr);
  };

  double best = 0.0;
  Eigen::VectorXd best_u = Eigen::VectorXd::Zero(k);
  double grid_max = 0.0;
  double tolerance = 0.0;

  if (certified_mode) {
    if (grid_per_dim <= 0) {
      static const int defaults[4] = {1000, 200, 36, 14};
      grid_per_dim = defaults[k - 1];
    }
    tolerance = cell_diam / (2.0 * grid_per_dim);
    std::vector<int> cur(k, 0);
    Eigen::VectorXd u(k);
    for (;;) {
      for (int i = 0; i < k; ++i) u(i) = (cur[i] + 0.5) / grid_per_dim;
      double d = probe(u);
      grid_max = std::max(grid_max, d);
      if (d > best) { best = d; best_u = u; }
      int i = k - 1;
      while (i >= 0 && cur[i] == grid_per_dim - 1) { cur[i] = 0; --i; }
      if (i < 0) break;
      ++cur[i];
    }
  } else {
    RandomStream rng(seed);
    const int starts = 64;
    for (int s = 0; s < starts; ++s) {
      Eigen::VectorXd u(k);
      for (int i = 0; i < k; ++i) u(i) = rng.uniform01();
      double d = probe(u);
      if (d > best) { best = d; best_u = u; }
    }
  }

  // Local ascent (pattern search in coefficient space) sharpens the deep hole.
  double step = certified_mode ? 1.0 / grid_per_dim : 0.05;
  Eigen::VectorXd u = best_u;
  while (step > 1e-6) {
    bool moved = false;
    for (int i = 0; i < k; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd cand = u;
        cand(i) += sgn * step;
        double d = probe(cand);
        if (d > best + 1e-15) { best = d; u = cand; moved = true; }
      }
    }
    if (!moved) step *= 0.5;
  }

  CoveringRadius out;
  out.value = best;
  out.certified = certified_mode;
  out.upper = certified_mode ? grid_max + tolerance + 1e-9 : std::numeric_limits<double>::infinity();
  return out;
}

bool in_voronoi(const DualLattice& dual, const Eigen::VectorXd& theta) {
  const Lattice& L = dual.lattice;
  if (L.rank != L.ambient_dim) throw std::invalid_argument("in_voronoi: degenerate dual");
  double tnorm = theta.norm();
  if (tnorm == 0.0) return true;
  Eigen::MatrixXd Bd = detail::basis_to_double(L);
  detail::CvpContext ctx(Bd);
  const double radius = 2.0 * tnorm + ctx.longest_basis;
  const int k = L.rank;
  std::vector<long> lo(k), hi(k), cur(k);
  for (int i = 0; i < k; ++i) {
    double r = ctx.pinv_row_norm[i] * radius * (1.0 + 1e-12) + 1e-9;
    lo[i] = static_cast<long>(std::ceil(-r));
    hi[i] = static_cast<long>(std::floor(r));
    cur[i] = lo[i];
  }
  Eigen::VectorXd cd(k);
  const double t2 = tnorm * tnorm;
  for (;;) {
    for (int i = 0; i < k; ++i) cd(i) = static_cast<double>(cur[i]);
    // ctx.B, not Bd: the coefficient box above is sized for the context's
    // (reduced) basis.
    Eigen::VectorXd v = ctx.B * cd;
    if ((theta - v).squaredNorm() < t2 * (1.0 - 1e-12) - 1e-15) return false;
    int i = k - 1;
    while (i >= 0 && cur[i] == hi[i]) { cur[i] = lo[i]; --i; }
    if (i < 0) break;
    ++cur[i];
  }
  return true;
}

std::vector<IntVec> integer_kernel_basis(const IntMat& A) {
  IntMat K = integer_kernel_basis_mat(A);
  std::vector<IntVec> out;
  for (int c = 0; c < col_count(K); ++c) {
    IntVec v(row_count(K));
    for (int i = 0; i < row_count(K); ++i) v[i] = K[i][c];
    out.push_back(std::move(v));
  }
  return out;
}

bool lattice_equal(const Lattice& a, const Lattice& b) {
  if (a.ambient_dim != b.ambient_dim || a.rank != b.rank) return false;
  // Clear denominators with a common scale, then compare canonical forms.
  Int scale_a(1), scale_b(1);
  for (const auto& row : a.basis)
    for (const auto& e : row) scale_a = lcm(scale_a, e.get_den());
  for (const auto& row : b.basis)
    for (const auto& e : row) scale_b = lcm(scale_b, e.get_den());
  Int scale = lcm(scale_a, scale_b);
  auto to_int = [&](const RatMat& B) {
    IntMat M(B.size(), IntVec(B[0].size()));
    for (size_t i = 0; i < B.size(); ++i)
      for (size_t j = 0; j < B[i].size(); ++j) {
        Rat v = B[i][j] * Rat(scale);
        M[i][j] = v.get_num();  // denominator is 1 after scaling
      }
    return M;
  };
  return hnf_column_basis(to_int(a.basis)) == hnf_column_basis(to_int(b.basis));
}

nlohmann::json lattice_to_json(const Lattice& L) {
  std::vector<std::string> entries;
  entries.reserve(static_cast<size_t>(L.ambient_dim) * L.rank);
  for (int i = 0; i < L.ambient_dim; ++i)
    for (int j = 0; j < L.rank; ++j) entries.push_back(rational_string(L.basis[i][j]));
  return nlohmann::json{{"ambient_dim", L.ambient_dim}, {"rank", L.rank}, {"basis", entries}};
}

Lattice lattice_from_json(const nlohmann::json& j) {
  Lattice L;
  L.ambient_dim = j.at("ambient_dim").get<int>();
  L.rank = j.at("rank").get<int>();
  auto entries = j.at("basis").get<std::vector<std::string>>();
  if (static_cast<int>(entries.size()) != L.ambient_dim * L.rank)
    throw std::invalid_argument("lattice JSON: basis size mismatch");
  L.basis.assign(L.ambient_dim, RatVec(L.rank));
  size_t idx = 0;
  for (int i = 0; i < L.ambient_dim; ++i)
    for (int j2 = 0; j2 < L.rank; ++j2) L.basis[i][j2] = parse_rational(entries[idx++]);
  return L;
}

}  // namespace latdisc
