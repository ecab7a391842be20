#include "latdisc/spanningness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "latdisc/hypercube_mixing.hpp"

namespace latdisc {

namespace {

// Indices of the t-subsets admitting the swap u -> v (u in S, v not in S),
// paired with the index of the swapped subset, over the lexicographic
// support enumeration.
struct SwapPair {
  int from;  // index of S
  int to;    // index of S - u + v
};

std::vector<std::vector<int>> enumerate_subsets(int m, int t) {
  std::vector<std::vector<int>> subsets;
  std::vector<int> cur(t);
  for (int i = 0; i < t; ++i) cur[i] = i;
  for (;;) {
    subsets.push_back(cur);
    int i = t - 1;
    while (i >= 0 && cur[i] == m - t + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < t; ++j) cur[j] = cur[j - 1] + 1;
  }
  return subsets;
}

int subset_index(const std::vector<std::vector<int>>& subsets, const std::vector<int>& s) {
  auto it = std::lower_bound(subsets.begin(), subsets.end(), s);
  if (it == subsets.end() || *it != s) throw std::logic_error("subset not found");
  return static_cast<int>(it - subsets.begin());
}

std::vector<SwapPair> swap_pairs(const std::vector<std::vector<int>>& subsets, int u, int v) {
  std::vector<SwapPair> out;
  for (int idx = 0; idx < static_cast<int>(subsets.size()); ++idx) {
    const auto& s = subsets[idx];
    if (!std::binary_search(s.begin(), s.end(), u)) continue;
    if (std::binary_search(s.begin(), s.end(), v)) continue;
    std::vector<int> swapped;
    swapped.reserve(s.size());
    for (int e : s)
      if (e != u) swapped.push_back(e);
    swapped.push_back(v);
    std::sort(swapped.begin(), swapped.end());
    out.push_back({idx, subset_index(subsets, swapped)});
  }
  return out;
}

void verify_in_kernel(const IntMat& support, const IntVec& coeffs) {
  const int m = row_count(support);
  const int q = col_count(support);
  for (int i = 0; i < m; ++i) {
    Int acc(0);
    for (int j = 0; j < q; ++j) acc += support[i][j] * coeffs[j];
    if (acc != 0) throw std::logic_error("spanning vector not in kernel");
  }
}

long l1_norm(const IntVec& v) {
  Int acc(0);
  for (const Int& x : v) acc += abs(x);
  return acc.get_si();
}

}  // namespace

BetaResult beta_bound(const ColumnDistribution& dist) {
  if (!has_finite_support(dist)) throw std::invalid_argument("finite support required");
  BetaResult out;
  if (dist.kind == DistKind::TSparse) {
    const int m = dist.m, t = dist.t;
    auto subsets = enumerate_subsets(m, t);
    const int q = static_cast<int>(subsets.size());
    IntMat support = support_columns(dist, q);
    for (int u = 0; u < m; ++u) {
      for (int v = 0; v < m; ++v) {
        if (u == v) continue;
        auto pairs = swap_pairs(subsets, u, v);
        // All swapped differences e_{S'} - e_S agree for a fixed swap; pin
        // the first pair as T and difference the rest against it.
        for (size_t i = 1; i < pairs.size(); ++i) {
          IntVec z(q, Int(0));
          z[pairs[i].to] += 1;
          z[pairs[i].from] -= 1;
          z[pairs[0].to] -= 1;
          z[pairs[0].from] += 1;
          verify_in_kernel(support, z);
          out.spanning_set.push_back(std::move(z));
        }
      }
    }
  } else {
    for (auto& v : integer_kernel_basis(dist.support)) {
      verify_in_kernel(dist.support, v);
      out.spanning_set.push_back(std::move(v));
    }
  }
  for (const auto& v : out.spanning_set) out.beta = std::max(out.beta, l1_norm(v));
  return out;
}

bool verify_tsparse_spanning_set(int m, int t) {
  if (t <= 0 || t >= m) throw std::invalid_argument("need 0 < t < m");
  Int count = binomial(m, t);
  if (count > 2000) throw std::invalid_argument("combinatorial size cap exceeded");
  auto subsets = enumerate_subsets(m, t);
  const int q = static_cast<int>(subsets.size());
  ColumnDistribution dist = tsparse_distribution(m, t);
  IntMat support = support_columns(dist, q);

  std::vector<IntVec> family;
  for (int u = 0; u < m; ++u) {
    for (int v = 0; v < m; ++v) {
      if (u == v) continue;
      auto pairs = swap_pairs(subsets, u, v);
      if (family.size() + pairs.size() * pairs.size() > 200000)
        throw std::invalid_argument("combinatorial size cap exceeded");
      for (const auto& sp : pairs) {
        for (const auto& tp : pairs) {
          IntVec z(q, Int(0));
          z[sp.to] += 1;
          z[sp.from] -= 1;
          z[tp.to] -= 1;
          z[tp.from] += 1;
          verify_in_kernel(support, z);
          family.push_back(std::move(z));
        }
      }
    }
  }

  // Rank of the family over the rationals must fill the kernel.
  RatMat F(q, RatVec(family.size(), Rat(0)));
  for (size_t j = 0; j < family.size(); ++j)
    for (int i = 0; i < q; ++i) F[i][j] = Rat(family[j][i]);
  const int want = q - m;
  if (family.empty()) return want == 0;
  return rational_rank(F) == want;
}

namespace {

// Ratio X~(theta) / sup_x |<x, theta> mod 1| over the finite support, or
// nullopt when the denominator vanishes.
std::optional<double> spreading_ratio(const Eigen::MatrixXd& support,
                                      const std::vector<double>& probs,
                                      const Eigen::VectorXd& theta) {
  double sup = 0.0, mean_sq = 0.0;
  for (int j = 0; j < support.cols(); ++j) {
    double v = mod_half_open(support.col(j).dot(theta));
    sup = std::max(sup, std::abs(v));
    mean_sq += probs[j] * v * v;
  }
  if (sup < 1e-12) return std::nullopt;
  return std::sqrt(mean_sq) / sup;
}

}  // namespace

AlphaEstimate alpha_estimate(const ColumnDistribution& dist, long restarts, RandomStream& rng) {
  if (!has_finite_support(dist)) throw std::invalid_argument("finite support required");
  IntMat sup_int = support_columns(dist);
  const int m = dist.m;
  const int q = col_count(sup_int);
  Eigen::MatrixXd support(m, q);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < q; ++j) support(i, j) = sup_int[i][j].get_d();
  std::vector<double> probs = support_probs(dist);

  AlphaEstimate best;
  best.value = std::numeric_limits<double>::infinity();
  best.witness = Eigen::VectorXd::Zero(m);

  auto descend = [&](Eigen::VectorXd theta) {
    auto r0 = spreading_ratio(support, probs, theta);
    if (!r0) return;
    double cur = *r0;
    double step = 0.25;
    while (step > 1e-6) {
      bool improved = false;
      for (int i = 0; i < m; ++i) {
        for (double delta : {step, -step}) {
          Eigen::VectorXd cand = theta;
          cand(i) += delta;
          cand(i) -= std::floor(cand(i));  // fundamental cell [0,1)^m
          auto r = spreading_ratio(support, probs, cand);
          if (r && *r < cur - 1e-15) {
            cur = *r;
            theta = cand;
            improved = true;
          }
        }
      }
      if (!improved) step /= 2;
    }
    if (cur < best.value) {
      best.value = cur;
      best.witness = theta;
    }
  };

  // Deterministic single-coordinate starts, then random restarts.
  for (int i = 0; i < m; ++i) descend(0.3 * Eigen::VectorXd::Unit(m, i));
  for (long r = 0; r < restarts; ++r) {
    Eigen::VectorXd theta(m);
    for (int i = 0; i < m; ++i) theta(i) = rng.uniform01();
    descend(theta);
  }
  if (!std::isfinite(best.value)) best.value = 1.0;  // vacuous support
  best.value = std::min(best.value, 1.0);
  return best;
}

SpanningnessValue spanningness_lower_bound(const ColumnDistribution& dist,
                                           std::optional<double> alpha) {
  BetaResult beta = beta_bound(dist);
  if (beta.beta == 0) return {true, 0.0};
  double a;
  if (dist.kind == DistKind::TSparse)
    a = 1.0 / (2.0 * dist.m);
  else if (alpha)
    a = *alpha;
  else
    throw std::invalid_argument("no proven spreading constant; supply alpha");
  return {false, a / static_cast<double>(beta.beta)};
}

namespace {

struct Candidate {
  double value;
  Eigen::VectorXd y;  // isotropized coordinates
};

}  // namespace

// The pseudodual condition X~(theta) <= d_X(theta, L*)/2 uses the metric
// |v|_X = sqrt(v^T Sigma v), under which spanningness is invariant to linear
// reparametrization.  The search therefore runs in isotropized coordinates
// y = Sigma^{1/2} theta, where d_X becomes the Euclidean distance to the
// transformed dual lattice Sigma^{1/2} L* and X~ is evaluated at
// theta = Sigma^{-1/2} y.  Distances come from the certified double box
// enumeration (the transformed dual basis is irrational, so rational CVP
// does not apply); the 1e-9 acceptance slack dwarfs double rounding.
SearchResult spanningness_search(const ColumnDistribution& dist, long budget, RandomStream& rng) {
  const int m = dist.m;
  const bool lattice_kind = has_finite_support(dist);
  const long mc_budget = 2000;

  IsotropizedView iso = isotropize(dist);
  std::optional<detail::CvpContext> ctx;
  if (lattice_kind) {
    DualLattice dual = dual_lattice(span_lattice(dist));
    ctx.emplace(iso.inverse_transform * detail::basis_to_double(dual.lattice));
  }

  SearchResult out;
  out.upper.is_infinite = true;

  long evals = 0;
  auto xtilde = [&](const Eigen::VectorXd& y, RandomStream& rs) {
    ++evals;
    Eigen::VectorXd theta = iso.transform * y;
    return tilde(dist, theta, lattice_kind ? 0 : mc_budget, &rs).value;
  };
  auto dual_dist = [&](const Eigen::VectorXd& y) {
    if (ctx) return detail::cvp_distance(*ctx, y, NormSpec{Norm::Euclid});
    return y.norm();  // nonlattice: the only dual vector is 0
  };

  std::vector<Candidate> candidates;
  const uint64_t base_seed = rng.next_u64();
  long restart = 0;
  while (evals < budget) {
    RandomStream rs = RandomStream::substream(base_seed, static_cast<uint64_t>(restart));
    ++restart;

    // Start in the dual Voronoi cell (Babai-reduced) minus a small ball;
    // nonlattice kinds sample a ball directly.
    Eigen::VectorXd y(m);
    bool ok = false;
    for (int attempt = 0; attempt < 16 && !ok; ++attempt) {
      if (ctx) {
        Eigen::VectorXd c(m);
        for (int i = 0; i < m; ++i) c(i) = rs.uniform01() - 0.5;
        y = ctx->B * c;
        Eigen::VectorXd nearest;
        detail::cvp_distance(*ctx, y, NormSpec{Norm::Euclid}, &nearest);
        y -= nearest;
      } else {
        for (int i = 0; i < m; ++i) y(i) = rs.normal();
        y *= rs.uniform01() * 3.0 / std::max(y.norm(), 1e-12);
      }
      ok = y.norm() > 1e-6;
    }
    if (!ok) continue;

    double cur = xtilde(y, rs);
    double d = dual_dist(y);
    bool pseudodual = d > 1e-7 && cur <= d / 2.0;
    if (pseudodual) candidates.push_back({cur, y});

    // Coordinate step-halving descent of X~, keeping the pseudodual filter.
    double step = 0.25 * std::max(y.norm(), 1.0);
    while (step > 1e-7 && evals < budget) {
      bool improved = false;
      for (int i = 0; i < m && evals < budget; ++i) {
        for (double delta : {step, -step}) {
          Eigen::VectorXd cand = y;
          cand(i) += delta;
          double xv = xtilde(cand, rs);
          double dv = dual_dist(cand);
          bool ps = dv > 1e-7 && xv <= dv / 2.0;
          if (ps && (!pseudodual || xv < cur - 1e-15)) {
            y = cand;
            cur = xv;
            pseudodual = true;
            candidates.push_back({cur, y});
            improved = true;
          }
        }
      }
      if (!improved) step /= 2;
    }
  }
  out.restarts = restart;
  out.evaluations = evals;

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  RandomStream verify_rs = RandomStream::substream(base_seed, 0x76657269ULL);
  for (const auto& c : candidates) {
    double xt = lattice_kind ? c.value : xtilde(c.y, verify_rs);
    double d = dual_dist(c.y);
    if (d > 1e-7 && xt <= d / 2.0 + 1e-9) {
      out.upper = {false, xt};
      out.witness = iso.transform * c.y;  // original coordinates
      break;
    }
  }
  return out;
}

SpanningnessReport spanningness_report(const ColumnDistribution& dist, long alpha_budget,
                                       long search_budget, RandomStream& rng) {
  SpanningnessReport r;
  BetaResult beta = beta_bound(dist);
  r.beta = beta.beta;
  if (dist.kind == DistKind::TSparse) {
    r.alpha = 1.0 / (2.0 * dist.m);
    r.alpha_proven = true;
  } else {
    r.alpha = alpha_estimate(dist, alpha_budget, rng).value;
    r.alpha_proven = false;
  }
  r.lower_bound = spanningness_lower_bound(dist, r.alpha);
  SearchResult s = spanningness_search(dist, search_budget, rng);
  r.numeric_upper = s.upper;
  r.witness_theta = s.witness;
  return r;
}

ThresholdReport n_threshold(const ColumnDistribution& dist, NormSpec norm, double c,
                            double s_value) {
  if (s_value <= 0) throw std::invalid_argument("need s_value > 0");
  ThresholdReport r;
  r.constant_c = c;
  const int m = dist.m;
  IsotropizedView iso = isotropize(dist);
  const double L = iso.radius;
  CovarianceResult cov = covariance(dist);
  if (cov.min_eigenvalue <= 0) throw std::invalid_argument("need positive covariance");

  double log_det = 0.0;
  double rho = 0.0;
  if (has_finite_support(dist)) {
    Lattice span = span_lattice(dist);
    log_det = std::log(lattice_det(span));
    if (dist.kind == DistKind::TSparse && norm.kind == Norm::Sup) {
      rho = 1.0;  // closed form: every residue class meets the unit sup ball
    } else {
      CoveringRadius cr = covering_radius(span, norm, span.rank <= 4);
      rho = cr.certified ? cr.upper : cr.value;
    }
  }

  r.term_moment = m * static_cast<double>(m) * L * L * std::pow(std::log(m) + std::log(L), 2);
  r.term_span = std::pow(s_value, -4.0) / (L * L);
  r.term_det = L * L * log_det * log_det;
  r.term_covering = L * L * rho * rho / cov.min_eigenvalue;
  r.n0 = c * std::max({r.term_moment, r.term_span, r.term_det});
  r.n = std::max(r.n0, c * r.term_covering);
  return r;
}

nlohmann::json spanningness_to_json(const SpanningnessReport& r) {
  nlohmann::json j;
  j["alpha"] = r.alpha;
  j["alpha_proven"] = r.alpha_proven;
  j["beta"] = r.beta;
  j["lower_bound"] = r.lower_bound.is_infinite ? nlohmann::json("inf")
                                               : nlohmann::json(r.lower_bound.value);
  j["numeric_upper"] = r.numeric_upper.is_infinite ? nlohmann::json("inf")
                                                   : nlohmann::json(r.numeric_upper.value);
  std::vector<double> w(r.witness_theta.data(), r.witness_theta.data() + r.witness_theta.size());
  j["witness"] = w;
  return j;
}

nlohmann::json threshold_to_json(const ThresholdReport& r) {
  nlohmann::json j;
  j["n0"] = r.n0;
  j["n"] = r.n;
  j["constant_c"] = r.constant_c;
  j["terms"] = {{"moment", r.term_moment},
                {"span", r.term_span},
                {"det", r.term_det},
                {"covering", r.term_covering}};
  return j;
}

}  // namespace latdisc
