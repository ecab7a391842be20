#include "latdisc/signed_sum.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace latdisc {

Rat SignedSumTable::probability(const std::vector<int64_t>& doubled_point) const {
  auto it = table.find(doubled_point);
  if (it == table.end()) return Rat(0);
  Int denom = Int(1) << n;
  Rat p(it->second, denom);
  p.canonicalize();
  return p;
}

SignedSumTable signed_sum_distribution(const Mat64& M, uint64_t point_cap) {
  const int m = mat_rows(M), n = mat_cols(M);
  if (n < 1) throw std::invalid_argument("empty matrix");
  SignedSumTable out;
  out.m = m;
  out.n = n;
  out.offset.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    int64_t s = 0;
    for (int j = 0; j < n; ++j) s += M[i][j];
    out.offset[i] = -0.5 * static_cast<double>(s);
  }
  // Fold columns: each contributes +-(1/2) x_j, i.e. +-x_j on doubled points.
  // Coordinates stay within the total column reach, so small-m instances get
  // a packed-key fast path (16 bits per row, offset-shifted).
  int64_t reach = 0;
  for (int i = 0; i < m; ++i) {
    int64_t row = 0;
    for (int j = 0; j < n; ++j) row += std::abs(M[i][j]);
    reach = std::max(reach, row);
  }
  if (m <= 4 && reach < 32000) {
    std::unordered_map<uint64_t, Int> cur;
    uint64_t origin = 0;
    for (int i = 0; i < m; ++i) origin |= uint64_t{32768} << (16 * i);
    cur.emplace(origin, Int(1));
    int64_t q[4];
    for (int j = 0; j < n; ++j) {
      std::unordered_map<uint64_t, Int> next;
      next.reserve(cur.size() * 2);
      for (const auto& [key, count] : cur) {
        for (int i = 0; i < m; ++i)
          q[i] = static_cast<int64_t>((key >> (16 * i)) & 0xFFFF) - 32768;
        for (int sign = 0; sign < 2; ++sign) {
          uint64_t nk = 0;
          for (int i = 0; i < m; ++i) {
            int64_t v = q[i] + (sign ? -M[i][j] : M[i][j]);
            nk |= static_cast<uint64_t>(v + 32768) << (16 * i);
          }
          next[nk] += count;
        }
        if (next.size() > point_cap) throw std::runtime_error("state cap exceeded");
      }
      cur = std::move(next);
    }
    for (const auto& [key, count] : cur) {
      std::vector<int64_t> q(m);
      for (int i = 0; i < m; ++i)
        q[i] = static_cast<int64_t>((key >> (16 * i)) & 0xFFFF) - 32768;
      out.table.emplace(std::move(q), count);
    }
    return out;
  }

  std::map<std::vector<int64_t>, Int> cur;
  cur[std::vector<int64_t>(m, 0)] = Int(1);
  std::vector<int64_t> p(m);
  for (int j = 0; j < n; ++j) {
    std::map<std::vector<int64_t>, Int> next;
    for (const auto& [point, count] : cur) {
      for (int sign = 0; sign < 2; ++sign) {
        for (int i = 0; i < m; ++i) p[i] = point[i] + (sign ? -M[i][j] : M[i][j]);
        next[p] += count;
      }
      if (next.size() > point_cap) throw std::runtime_error("state cap exceeded");
    }
    cur = std::move(next);
  }
  out.table = std::move(cur);
  return out;
}

namespace {

Eigen::MatrixXd mmt_double(const Mat64& M) {
  const int m = mat_rows(M), n = mat_cols(M);
  Eigen::MatrixXd D(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) D(i, j) = static_cast<double>(M[i][j]);
  return D * D.transpose();
}

struct GaussianContext {
  Eigen::MatrixXd inv;   // (MM^T)^{-1}
  double det_mmt = 0.0;
  double prefactor = 0.0;  // G_M(0)
};

GaussianContext gaussian_context(const Mat64& M, const Lattice& L) {
  const int m = mat_rows(M);
  Eigen::MatrixXd S = mmt_double(M);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible()) throw std::invalid_argument("singular MM^T");
  GaussianContext ctx;
  ctx.det_mmt = lu.determinant();
  if (ctx.det_mmt <= 0) throw std::invalid_argument("singular MM^T");
  ctx.inv = lu.inverse();
  ctx.prefactor = std::pow(2.0, m / 2.0) * lattice_det(L) /
                  (std::pow(M_PI, m / 2.0) * std::sqrt(ctx.det_mmt));
  return ctx;
}

double gaussian_at(const GaussianContext& ctx, const Eigen::VectorXd& lambda) {
  return ctx.prefactor * std::exp(-2.0 * lambda.dot(ctx.inv * lambda));
}

// Integer basis of a span lattice (denominators must be 1).
std::vector<std::vector<int64_t>> integral_basis(const Lattice& L) {
  std::vector<std::vector<int64_t>> B(L.ambient_dim, std::vector<int64_t>(L.rank));
  for (int i = 0; i < L.ambient_dim; ++i)
    for (int j = 0; j < L.rank; ++j) {
      if (L.basis[i][j].get_den() != 1)
        throw std::invalid_argument("span lattice basis not integral");
      B[i][j] = L.basis[i][j].get_num().get_si();
    }
  return B;
}

// All coset points lambda in (L - (1/2) M 1) with
// lambda^T (MM^T)^{-1} lambda <= radius_sq, as (doubled integer point, lambda).
std::vector<std::pair<std::vector<int64_t>, Eigen::VectorXd>> enumerate_coset(
    const Mat64& M, const Lattice& L, const GaussianContext& ctx, double radius_sq) {
  const int m = mat_rows(M), n = mat_cols(M);
  if (L.rank != m || L.ambient_dim != m)
    throw std::invalid_argument("full-rank span lattice required");
  auto Bint = integral_basis(L);
  Eigen::MatrixXd Bd(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) Bd(i, j) = static_cast<double>(Bint[i][j]);
  Eigen::MatrixXd Binv = Bd.inverse();

  std::vector<int64_t> row_sums(m, 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) row_sums[i] += M[i][j];
  Eigen::VectorXd half_m1(m);
  for (int i = 0; i < m; ++i) half_m1(i) = 0.5 * static_cast<double>(row_sums[i]);

  // |lambda|_2 bound from the ellipsoid, then a coefficient box around the
  // center B^{-1} (1/2) M 1.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ctx.inv);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig <= 0) throw std::invalid_argument("singular MM^T");
  const double r = std::sqrt(radius_sq / min_eig);
  Eigen::VectorXd center = Binv * half_m1;
  std::vector<long> lo(m), hi(m);
  double count = 1.0;
  for (int i = 0; i < m; ++i) {
    double reach = Binv.row(i).norm() * r;
    lo[i] = static_cast<long>(std::floor(center(i) - reach));
    hi[i] = static_cast<long>(std::ceil(center(i) + reach));
    count *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (count > 2e6) throw std::runtime_error("state cap exceeded");

  std::vector<std::pair<std::vector<int64_t>, Eigen::VectorXd>> out;
  std::vector<long> u(m);
  for (int i = 0; i < m; ++i) u[i] = lo[i];
  for (;;) {
    std::vector<int64_t> doubled(m);
    for (int i = 0; i < m; ++i) {
      int64_t acc = -row_sums[i];
      for (int j = 0; j < m; ++j) acc += 2 * Bint[i][j] * u[j];
      doubled[i] = acc;
    }
    Eigen::VectorXd lambda(m);
    for (int i = 0; i < m; ++i) lambda(i) = 0.5 * static_cast<double>(doubled[i]);
    if (lambda.dot(ctx.inv * lambda) <= radius_sq * (1 + 1e-12))
      out.emplace_back(std::move(doubled), std::move(lambda));
    int k = m - 1;
    while (k >= 0 && u[k] == hi[k]) {
      u[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++u[k];
  }
  return out;
}

}  // namespace

double lattice_gaussian(const Mat64& M, const Lattice& L, const Eigen::VectorXd& lambda) {
  return gaussian_at(gaussian_context(M, L), lambda);
}

GaussianComparison llt_compare(const Mat64& M, const ColumnDistribution& dist) {
  const int m = mat_rows(M), n = mat_cols(M);
  SignedSumTable table = signed_sum_distribution(M);
  Lattice span = span_lattice(dist);
  GaussianContext ctx = gaussian_context(M, span);
  const double L = isotropize(dist).radius;

  GaussianComparison out;
  const double tau = 2.0 * m * m * L * L / n;
  out.bound = ctx.prefactor * tau;
  out.table_points = static_cast<long>(table.table.size());

  const Int denom = Int(1) << n;
  auto prob_of = [&](const Int& count) {
    Rat p(count, denom);
    p.canonicalize();
    return p;
  };

  for (const auto& [doubled, count] : table.table) {
    Eigen::VectorXd lambda(m);
    for (int i = 0; i < m; ++i) lambda(i) = 0.5 * static_cast<double>(doubled[i]);
    double g = gaussian_at(ctx, lambda);
    double dev = std::abs(to_double(prob_of(count)) - g);
    out.max_abs_dev = std::max(out.max_abs_dev, dev);
  }

  // The bulk: coset points where the Gaussian alone exceeds the bound.  Any
  // violation at a zero-probability point must happen here.
  if (tau < 1.0) {
    const double radius_sq = std::log(1.0 / tau) / 2.0;
    for (auto& [doubled, lambda] : enumerate_coset(M, span, ctx, radius_sq)) {
      double g = gaussian_at(ctx, lambda);
      if (!(std::exp(-2.0 * lambda.dot(ctx.inv * lambda)) > tau)) continue;
      PointRecord rec;
      rec.doubled = doubled;
      auto it = table.table.find(doubled);
      rec.prob = it == table.table.end() ? Rat(0) : prob_of(it->second);
      rec.prob_double = to_double(rec.prob);
      rec.gauss = g;
      rec.deviation = std::abs(rec.prob_double - g);
      rec.bulk = true;
      out.max_abs_dev = std::max(out.max_abs_dev, rec.deviation);
      out.records.push_back(std::move(rec));
      ++out.bulk_points;
    }
  }
  out.pass = out.max_abs_dev <= out.bound;
  return out;
}

double char_fn_signed_sum(const Mat64& M, const Eigen::VectorXd& theta) {
  double prod = 1.0;
  for (int j = 0; j < mat_cols(M); ++j) {
    double dot = 0.0;
    for (int i = 0; i < mat_rows(M); ++i) dot += static_cast<double>(M[i][j]) * theta(i);
    prod *= std::cos(M_PI * dot);
  }
  return prod;
}

double char_fn_signed_sum(const Eigen::MatrixXd& M, const Eigen::VectorXd& theta) {
  double prod = 1.0;
  for (int j = 0; j < M.cols(); ++j) prod *= std::cos(M_PI * M.col(j).dot(theta));
  return prod;
}

ConcentrationCheck concentration_check(const Eigen::MatrixXd& M, long n) {
  Eigen::MatrixXd S = (M * M.transpose()) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  ConcentrationCheck out;
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  out.max_eigenvalue = es.eigenvalues().maxCoeff();
  out.lower_ok = out.min_eigenvalue >= 0.5;
  out.upper_ok = out.max_eigenvalue <= 2.0;
  return out;
}

ErrorBudget error_budget(const Mat64& M, const ColumnDistribution& dist, double s_value,
                         std::optional<double> eps, double c) {
  const int m = mat_rows(M), n = mat_cols(M);
  const double L = isotropize(dist).radius;
  ErrorBudget out;
  out.eps = eps ? *eps : 1.0 / (std::sqrt(L) * std::pow(static_cast<double>(n), 0.25));
  out.flag_small_eps = out.eps <= 1.0 / (2.0 * L);
  out.flag_fourth_moment = L * L * n * std::pow(out.eps, 4) <= 1.0 + 1e-12;
  out.flag_bulk_width = out.eps * out.eps >= 16.0 * m / (M_PI * M_PI * n);
  out.flag_spanningness = out.eps <= s_value;

  // Sigma_M = (1/4) M M^T, so det Sigma_M = 4^{-m} det(MM^T).
  Eigen::MatrixXd S = mmt_double(M);
  double det_sigma = S.determinant() * std::pow(4.0, -m);
  if (det_sigma <= 0) throw std::invalid_argument("singular MM^T");
  const double gauss_norm = std::pow(2.0 * M_PI, m / 2.0) * std::sqrt(det_sigma);
  out.i1_bound = c * m * m * L * L / (n * gauss_norm);
  out.i2_bound = std::exp(-M_PI * M_PI * out.eps * out.eps * n / 8.0) / gauss_norm;
  const double det_dual = 1.0 / lattice_det(span_lattice(dist));
  out.i3_expected_bound = det_dual * std::exp(-2.0 * out.eps * out.eps * n);
  return out;
}

double tent_product(const Eigen::VectorXd& w, double K) {
  if (K <= 0) throw std::invalid_argument("need K > 0");
  double prod = 1.0;
  for (int i = 0; i < w.size(); ++i)
    prod *= std::max(0.0, 2.0 * K - std::abs(w(i))) / (4.0 * K * K);
  return prod;
}

SmoothedMass smoothed_mass(const Eigen::MatrixXd& M, double K, long samples, RandomStream& rng) {
  if (K <= 0) throw std::invalid_argument("need K > 0");
  if (samples < 1) throw std::invalid_argument("need samples >= 1");
  const int n = static_cast<int>(M.cols());
  SmoothedMass out;
  out.samples = samples;
  out.best_sup = std::numeric_limits<double>::infinity();
  double mean = 0.0, m2 = 0.0;
  Coloring y(n);
  for (long s = 1; s <= samples; ++s) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(M.rows());
    for (int j = 0; j < n; ++j) {
      y[j] = rng.coin() ? 1 : -1;
      sum += (0.5 * y[j]) * M.col(j);
    }
    double b = tent_product(sum, K);
    double d1 = b - mean;
    mean += d1 / static_cast<double>(s);
    m2 += d1 * (b - mean);
    double sup = sum.lpNorm<Eigen::Infinity>();
    if (sup < out.best_sup) {
      out.best_sup = sup;
      out.best_coloring = y;
    }
  }
  out.estimate = mean;
  out.std_error = samples > 1 ? std::sqrt(m2 / (samples - 1.0) / samples) : 0.0;
  return out;
}

double gaussian_coset_mass(const Mat64& M, const Lattice& L, double radius_sq) {
  GaussianContext ctx = gaussian_context(M, L);
  double acc = 0.0;
  for (auto& [doubled, lambda] : enumerate_coset(M, L, ctx, radius_sq))
    acc += gaussian_at(ctx, lambda);
  return lattice_det(L) * acc;
}

nlohmann::json comparison_to_json(const GaussianComparison& g) {
  nlohmann::json j;
  j["bound"] = g.bound;
  j["max_abs_dev"] = g.max_abs_dev;
  j["pass"] = g.pass;
  j["table_points"] = g.table_points;
  j["bulk_points"] = g.bulk_points;
  return j;
}

std::string comparison_records_csv(const GaussianComparison& g) {
  std::ostringstream os;
  os << "point;prob_rational;prob;gauss;dev;bulk\n";
  for (const auto& r : g.records) {
    for (size_t i = 0; i < r.doubled.size(); ++i) os << (i ? " " : "") << r.doubled[i];
    os << ';' << rational_string(r.prob) << ';' << r.prob_double << ';' << r.gauss << ';'
       << r.deviation << ';' << (r.bulk ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace latdisc
