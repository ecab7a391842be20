#include "latdisc/hypercube_mixing.hpp"

#include <cmath>
#include <stdexcept>

namespace latdisc {

Int binomial(unsigned long n, unsigned long k) {
  Int r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

namespace {

void check_weight_dist(const WeightDistribution& d) {
  if (d.m < 1) throw std::invalid_argument("empty weight distribution");
  if (static_cast<int>(d.probs.size()) != d.m + 1)
    throw std::invalid_argument("weight distribution size mismatch");
  if (d.exact && static_cast<int>(d.exact_probs.size()) != d.m + 1)
    throw std::invalid_argument("weight distribution size mismatch");
}

void sync_double_view(WeightDistribution& d) {
  d.probs.assign(d.m + 1, 0.0);
  for (int k = 0; k <= d.m; ++k) d.probs[k] = to_double(d.exact_probs[k]);
}

}  // namespace

WeightDistribution mixing_step(const WeightDistribution& dist, int t) {
  check_weight_dist(dist);
  const int m = dist.m;
  if (t <= 0 || t >= m) throw std::invalid_argument("need 0 < t < m");
  const Int choose_mt = binomial(m, t);

  WeightDistribution out;
  out.m = m;
  out.exact = dist.exact;
  if (dist.exact) {
    out.exact_probs.assign(m + 1, Rat(0));
    for (int w = 0; w <= m; ++w) {
      if (dist.exact_probs[w] == 0) continue;
      const int jlo = std::max(0, t - (m - w));
      const int jhi = std::min(w, t);
      for (int j = jlo; j <= jhi; ++j) {
        Rat p(binomial(w, j) * binomial(m - w, t - j), choose_mt);
        p.canonicalize();
        out.exact_probs[w + t - 2 * j] += dist.exact_probs[w] * p;
      }
    }
    sync_double_view(out);
    return out;
  }

  // Double path with Kahan-compensated accumulation per target weight.
  std::vector<double> acc(m + 1, 0.0), comp(m + 1, 0.0);
  const double denom = to_double(Rat(choose_mt));
  for (int w = 0; w <= m; ++w) {
    if (dist.probs[w] == 0.0) continue;
    const int jlo = std::max(0, t - (m - w));
    const int jhi = std::min(w, t);
    for (int j = jlo; j <= jhi; ++j) {
      double p = to_double(Rat(binomial(w, j) * binomial(m - w, t - j))) / denom;
      double term = dist.probs[w] * p;
      int k = w + t - 2 * j;
      double y = term - comp[k];
      double s = acc[k] + y;
      comp[k] = (s - acc[k]) - y;
      acc[k] = s;
    }
  }
  out.probs = acc;
  return out;
}

WeightDistribution weight_distribution(int m, int t, long n) {
  if (t <= 0 || t >= m) throw std::invalid_argument("need 0 < t < m");
  if (n < 1) throw std::invalid_argument("need n >= 1");
  WeightDistribution d;
  d.m = m;
  d.exact = n <= 500;
  if (d.exact) {
    d.exact_probs.assign(m + 1, Rat(0));
    d.exact_probs[0] = Rat(1);
    sync_double_view(d);
  } else {
    d.probs.assign(m + 1, 0.0);
    d.probs[0] = 1.0;
  }
  for (long step = 0; step < n; ++step) d = mixing_step(d, t);
  return d;
}

WeightDistribution conditioned_binomial(int m, int parity) {
  if (m < 1) throw std::invalid_argument("need m >= 1");
  WeightDistribution d;
  d.m = m;
  d.exact = true;
  d.exact_probs.assign(m + 1, Rat(0));
  Int denom = Int(1) << (m - 1);
  for (int k = parity & 1; k <= m; k += 2) {
    Rat p(binomial(m, k), denom);
    p.canonicalize();
    d.exact_probs[k] = p;
  }
  sync_double_view(d);
  return d;
}

Rat tv_distance_exact(const WeightDistribution& p, const WeightDistribution& q) {
  check_weight_dist(p);
  check_weight_dist(q);
  if (p.m != q.m) throw std::invalid_argument("mismatched m");
  if (!p.exact || !q.exact) throw std::invalid_argument("inputs not exact");
  Rat acc(0);
  for (int k = 0; k <= p.m; ++k) {
    Rat d = p.exact_probs[k] - q.exact_probs[k];
    acc += d < 0 ? -d : d;
  }
  return acc / 2;
}

double tv_distance(const WeightDistribution& p, const WeightDistribution& q) {
  check_weight_dist(p);
  check_weight_dist(q);
  if (p.m != q.m) throw std::invalid_argument("mismatched m");
  if (p.exact && q.exact) return to_double(tv_distance_exact(p, q));
  double acc = 0.0, comp = 0.0;
  for (int k = 0; k <= p.m; ++k) {
    double term = std::abs(p.probs[k] - q.probs[k]);
    double y = term - comp;
    double s = acc + y;
    comp = (s - acc) - y;
    acc = s;
  }
  return acc / 2.0;
}

Rat walsh_coefficient(int m, int t, int s) {
  if (s < 0 || s > m) throw std::invalid_argument("need 0 <= s <= m");
  if (t <= 0 || t >= m) throw std::invalid_argument("need 0 < t < m");
  Int num(0);
  const int jlo = std::max(0, t - (m - s));
  const int jhi = std::min(s, t);
  for (int j = jlo; j <= jhi; ++j) {
    Int term = binomial(s, j) * binomial(m - s, t - j);
    if (j & 1)
      num -= term;
    else
      num += term;
  }
  Rat r(num, binomial(m, t));
  r.canonicalize();
  return r;
}

double mixing_tv_bound(int m, long n) {
  return std::exp(-2.0 * static_cast<double>(n) / m + m);
}

}  // namespace latdisc
