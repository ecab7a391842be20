#include "latdisc/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace latdisc {

namespace {

long binomial_long(int m, int t) {
  long r = 1;
  for (int i = 1; i <= t; ++i) {
    if (r > 4000000000000000L / (m - t + i)) throw std::overflow_error("binomial too large");
    r = r * (m - t + i) / i;
  }
  return r;
}

}  // namespace

ColumnDistribution tsparse_distribution(int m, int t) {
  if (m < 2 || t <= 0 || t >= m)
    throw std::invalid_argument("t-sparse distribution requires 0 < t < m");
  ColumnDistribution d;
  d.kind = DistKind::TSparse;
  d.m = m;
  d.t = t;
  return d;
}

ColumnDistribution finite_lattice_distribution(IntMat support_columns, std::vector<double> probs) {
  if (support_columns.empty() || support_columns[0].empty())
    throw std::invalid_argument("finite distribution: empty support");
  if (probs.size() != static_cast<size_t>(col_count(support_columns)))
    throw std::invalid_argument("finite distribution: probability count mismatch");
  double total = 0.0;
  for (double p : probs) {
    if (p <= 0.0) throw std::invalid_argument("finite distribution: probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("finite distribution: probabilities must sum to 1");
  ColumnDistribution d;
  d.kind = DistKind::FiniteLattice;
  d.m = row_count(support_columns);
  d.support = std::move(support_columns);
  d.probs = std::move(probs);
  return d;
}

ColumnDistribution unit_sphere_distribution(int m) {
  if (m < 1) throw std::invalid_argument("unit sphere: m must be positive");
  ColumnDistribution d;
  d.kind = DistKind::UnitSphere;
  d.m = m;
  return d;
}

bool has_finite_support(const ColumnDistribution& dist) {
  return dist.kind != DistKind::UnitSphere;
}

IntMat support_columns(const ColumnDistribution& dist, long cap) {
  switch (dist.kind) {
    case DistKind::FiniteLattice:
      return dist.support;
    case DistKind::TSparse: {
      long q = binomial_long(dist.m, dist.t);
      if (q > cap) throw std::invalid_argument("t-sparse support too large to enumerate");
      IntMat cols(dist.m, IntVec(q, 0));
      // Enumerate t-subsets in lexicographic order.
      std::vector<int> idx(dist.t);
      for (int i = 0; i < dist.t; ++i) idx[i] = i;
      long c = 0;
      for (;;) {
        for (int i : idx) cols[i][c] = 1;
        ++c;
        int i = dist.t - 1;
        while (i >= 0 && idx[i] == dist.m - dist.t + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < dist.t; ++j) idx[j] = idx[j - 1] + 1;
      }
      return cols;
    }
    case DistKind::UnitSphere:
      throw std::invalid_argument("unit sphere has no finite support");
  }
  throw std::logic_error("unreachable");
}

std::vector<double> support_probs(const ColumnDistribution& dist, long cap) {
  if (dist.kind == DistKind::FiniteLattice) return dist.probs;
  if (dist.kind == DistKind::TSparse) {
    long q = binomial_long(dist.m, dist.t);
    if (q > cap) throw std::invalid_argument("t-sparse support too large to enumerate");
    return std::vector<double>(q, 1.0 / static_cast<double>(q));
  }
  throw std::invalid_argument("unit sphere has no finite support");
}

IntVec sample_int(const ColumnDistribution& dist, RandomStream& rng) {
  switch (dist.kind) {
    case DistKind::TSparse: {
      std::vector<int> subset;
      rng.sample_subset(dist.m, dist.t, subset);
      IntVec v(dist.m, 0);
      for (int i : subset) v[i] = 1;
      return v;
    }
    case DistKind::FiniteLattice: {
      double u = rng.uniform01();
      double acc = 0.0;
      int q = col_count(dist.support);
      int pick = q - 1;
      for (int j = 0; j < q; ++j) {
        acc += dist.probs[j];
        if (u < acc) { pick = j; break; }
      }
      IntVec v(dist.m);
      for (int i = 0; i < dist.m; ++i) v[i] = dist.support[i][pick];
      return v;
    }
    case DistKind::UnitSphere:
      throw std::invalid_argument("unit sphere samples are not integer vectors");
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd sample(const ColumnDistribution& dist, RandomStream& rng) {
  if (dist.kind == DistKind::UnitSphere) {
    Eigen::VectorXd v(dist.m);
    double n2 = 0.0;
    do {
      for (int i = 0; i < dist.m; ++i) v(i) = rng.normal();
      n2 = v.norm();
    } while (n2 < 1e-12);
    return v / n2;
  }
  IntVec x = sample_int(dist, rng);
  Eigen::VectorXd v(dist.m);
  for (int i = 0; i < dist.m; ++i) v(i) = x[i].get_d();
  return v;
}

CovarianceResult covariance(const ColumnDistribution& dist) {
  const int m = dist.m;
  Eigen::MatrixXd sigma(m, m);
  switch (dist.kind) {
    case DistKind::TSparse: {
      double diag = static_cast<double>(dist.t) / m;
      double off = static_cast<double>(dist.t) * (dist.t - 1) / (static_cast<double>(m) * (m - 1));
      sigma.setConstant(off);
      sigma.diagonal().setConstant(diag);
      break;
    }
    case DistKind::UnitSphere:
      sigma = Eigen::MatrixXd::Identity(m, m) / static_cast<double>(m);
      break;
    case DistKind::FiniteLattice: {
      sigma.setZero();
      int q = col_count(dist.support);
      Eigen::VectorXd x(m);
      for (int j = 0; j < q; ++j) {
        for (int i = 0; i < m; ++i) x(i) = dist.support[i][j].get_d();
        sigma += dist.probs[j] * x * x.transpose();
      }
      break;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  return {sigma, es.eigenvalues().minCoeff()};
}

IsotropizedView isotropize(const ColumnDistribution& dist) {
  auto cov = covariance(dist);
  if (cov.min_eigenvalue <= 1e-10)
    throw std::domain_error("degenerate distribution; restrict to span");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.sigma);
  Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  Eigen::VectorXd sqrt_ev = es.eigenvalues().cwiseSqrt();
  IsotropizedView view;
  view.parent = dist;
  view.transform = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  view.inverse_transform = es.eigenvectors() * sqrt_ev.asDiagonal() * es.eigenvectors().transpose();
  if (dist.kind == DistKind::TSparse || dist.kind == DistKind::UnitSphere) {
    view.radius = std::sqrt(static_cast<double>(dist.m));
  } else {
    double r = 0.0;
    Eigen::VectorXd x(dist.m);
    for (int j = 0; j < col_count(dist.support); ++j) {
      for (int i = 0; i < dist.m; ++i) x(i) = dist.support[i][j].get_d();
      r = std::max(r, (view.transform * x).norm());
    }
    view.radius = r;
  }
  if (has_finite_support(dist)) {
    Lattice L = span_lattice(dist);
    view.lattice_basis = view.transform * detail::basis_to_double(L);
  }
  return view;
}

std::complex<double> char_fn(const ColumnDistribution& dist, const Eigen::VectorXd& theta) {
  if (!has_finite_support(dist))
    throw std::invalid_argument("char_fn is not available for the unit sphere");
  IntMat cols = support_columns(dist);
  std::vector<double> probs = support_probs(dist);
  std::complex<double> acc(0.0, 0.0);
  const double two_pi = 6.283185307179586476925287;
  for (size_t j = 0; j < probs.size(); ++j) {
    double dot = 0.0;
    for (int i = 0; i < dist.m; ++i) dot += cols[i][j].get_d() * theta(i);
    acc += probs[j] * std::polar(1.0, two_pi * dot);
  }
  return acc;
}

double mod_half_open(double x) {
  // x mod 1 in (-1/2, 1/2]: x minus round-half-down(x).
  return x - std::ceil(x - 0.5);
}

TildeEstimate tilde(const ColumnDistribution& dist, const Eigen::VectorXd& theta,
                    long mc_budget, RandomStream* rng) {
  TildeEstimate est;
  if (has_finite_support(dist)) {
    IntMat cols = support_columns(dist);
    std::vector<double> probs = support_probs(dist);
    double acc = 0.0;
    for (size_t j = 0; j < probs.size(); ++j) {
      double dot = 0.0;
      for (int i = 0; i < dist.m; ++i) dot += cols[i][j].get_d() * theta(i);
      double f = mod_half_open(dot);
      acc += probs[j] * f * f;
    }
    est.value = std::sqrt(acc);
    est.samples = static_cast<long>(probs.size());
    return est;
  }
  if (mc_budget <= 0 || rng == nullptr)
    throw std::invalid_argument("unit-sphere tilde needs a Monte Carlo budget and stream");
  double sum = 0.0, sumsq = 0.0;
  for (long s = 0; s < mc_budget; ++s) {
    Eigen::VectorXd x = sample(dist, *rng);
    double f = mod_half_open(theta.dot(x));
    double v = f * f;
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / mc_budget;
  double var = std::max(0.0, sumsq / mc_budget - mean * mean);
  est.value = std::sqrt(mean);
  est.std_error = std::sqrt(var / mc_budget);
  est.samples = mc_budget;
  return est;
}

double norm_X(const ColumnDistribution& dist, const Eigen::VectorXd& theta) {
  auto cov = covariance(dist);
  return std::sqrt(std::max(0.0, theta.dot(cov.sigma * theta)));
}

Lattice span_lattice(const ColumnDistribution& dist) {
  if (dist.kind == DistKind::TSparse) {
    // Span of all t-subset indicators = {x : sum(x) = 0 mod t}, whose
    // canonical Hermite basis is e_j + (t-1) e_m for j < m together with
    // t e_m.  Matches hnf of the enumerated support; no cap needed.
    const int m = dist.m;
    IntMat B(m, IntVec(m, 0));
    for (int j = 0; j + 1 < m; ++j) {
      B[j][j] = 1;
      B[m - 1][j] = dist.t - 1;
    }
    B[m - 1][m - 1] = dist.t;
    Lattice L;
    L.ambient_dim = m;
    L.rank = m;
    L.basis = rat_from_int(B);
    return L;
  }
  return lattice_from_columns(support_columns(dist));
}

nlohmann::json distribution_to_json(const ColumnDistribution& dist) {
  switch (dist.kind) {
    case DistKind::TSparse:
      return {{"kind", "tsparse"}, {"m", dist.m}, {"t", dist.t}};
    case DistKind::UnitSphere:
      return {{"kind", "unit_sphere"}, {"m", dist.m}};
    case DistKind::FiniteLattice: {
      std::vector<std::vector<long>> sup;
      for (int j = 0; j < col_count(dist.support); ++j) {
        std::vector<long> col(dist.m);
        for (int i = 0; i < dist.m; ++i) col[i] = dist.support[i][j].get_si();
        sup.push_back(std::move(col));
      }
      return {{"kind", "finite"}, {"m", dist.m}, {"support", sup}, {"probs", dist.probs}};
    }
  }
  throw std::logic_error("unreachable");
}

ColumnDistribution distribution_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "tsparse") return tsparse_distribution(j.at("m").get<int>(), j.at("t").get<int>());
  if (kind == "unit_sphere") return unit_sphere_distribution(j.at("m").get<int>());
  if (kind == "finite") {
    auto sup = j.at("support").get<std::vector<std::vector<long>>>();
    auto probs = j.at("probs").get<std::vector<double>>();
    if (sup.empty()) throw std::invalid_argument("finite distribution: empty support");
    int m = j.contains("m") ? j.at("m").get<int>() : static_cast<int>(sup[0].size());
    IntMat cols(m, IntVec(sup.size()));
    for (size_t c = 0; c < sup.size(); ++c) {
      if (static_cast<int>(sup[c].size()) != m)
        throw std::invalid_argument("finite distribution: ragged support");
      for (int i = 0; i < m; ++i) cols[i][c] = sup[c][i];
    }
    return finite_lattice_distribution(std::move(cols), std::move(probs));
  }
  throw std::invalid_argument("unknown distribution kind: " + kind);
}

}  // namespace latdisc
