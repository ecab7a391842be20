// Acceptance suite: end-to-end checks of the workbench, one pass/fail line
// per criterion.  Exit status is the number of failed criteria (0 = all
// green).  Every randomized check runs from a fixed seed so reruns are
// byte-for-byte comparable.

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "latdisc/discrepancy.hpp"
#include "latdisc/distribution.hpp"
#include "latdisc/experiment.hpp"
#include "latdisc/hypercube_mixing.hpp"
#include "latdisc/lattice.hpp"
#include "latdisc/rng.hpp"
#include "latdisc/signed_sum.hpp"
#include "latdisc/spanningness.hpp"

using json = nlohmann::json;
using namespace latdisc;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", idx, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// Runs one criterion body, turning any exception into a FAIL line.
template <typename Fn>
void criterion(int idx, Fn&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(idx, false, std::string("exception: ") + e.what());
  }
}

bool verdict_pass(const ExperimentReport& r, const std::string& name) {
  for (const auto& v : r.verdicts)
    if (v.at("name").get<std::string>() == name) return v.at("pass").get<bool>();
  return false;
}

std::string fmt(double v) { return format_double(v); }

// --- criteria 1 and 2: the t-sparse limiting law at large n ----------------

void tsparse_law(int idx, int t, long n, uint64_t seed, const std::vector<double>& predicted,
                 bool check_runtime) {
  ExperimentConfig cfg;
  cfg.kind = "tsparse-disc";
  cfg.m = 6;
  cfg.t = t;
  cfg.n = n;
  cfg.trials = 2000;
  cfg.seed = seed;
  cfg.workers = 4;
  cfg.subsample_fraction = 0.05;
  const ExperimentReport r = run_experiment(cfg);

  long counts[3] = {0, 0, 0};
  for (int v = 0; v < 3; ++v) counts[v] = r.aggregates.at("counts").at(v).get<long>();
  double freqs[3] = {0.0, 0.0, 0.0};
  for (int v = 0; v < 3; ++v) freqs[v] = r.aggregates.at("freqs").at(v).get<double>();

  bool ok = true;
  std::string why;
  // Predicted masses must come out exactly as the conditioned-binomial values.
  for (int v = 0; v < 3; ++v)
    if (r.aggregates.at("predicted").at(v).get<double>() != predicted[v]) {
      ok = false;
      why += " predicted[" + std::to_string(v) + "] off;";
    }
  // Every predicted-positive class within three binomial standard errors
  // (the harness verdicts), plus the fixed +-0.012 window on the small class.
  for (int v = 0; v < 3; ++v)
    if (predicted[v] > 0.0 && !verdict_pass(r, "freq_disc" + std::to_string(v) + "_within_3se")) {
      ok = false;
      why += " freq_disc" + std::to_string(v) + " outside 3se;";
    }
  if (n % 2 == 0 && std::fabs(freqs[0] - predicted[0]) > 0.012) {
    ok = false;
    why += " freq0 outside +-0.012;";
  }
  if (n % 2 == 0 && counts[0] + counts[1] < 1990) {  // Pr[disc <= 1] >= 0.995
    ok = false;
    why += " Pr[disc<=1] < 0.995;";
  }
  if (!verdict_pass(r, "max_disc_le_2") || counts[0] + counts[1] + counts[2] != 2000) {
    ok = false;
    why += " disc > 2 seen;";
  }
  if (!verdict_pass(r, "dp_cross_check_agreed")) {
    ok = false;
    why += " dp cross-check disagreed;";
  }
  if (check_runtime && r.wall_seconds >= 300.0) {
    ok = false;
    why += " runtime >= 300s;";
  }
  std::string detail = "t=" + std::to_string(t) + " n=" + std::to_string(n) + " freqs=[" +
                       fmt(freqs[0]) + "," + fmt(freqs[1]) + "," + fmt(freqs[2]) +
                       "] wall=" + fmt(r.wall_seconds) + "s";
  report(idx, ok, ok ? detail : detail + why);
}

// --- criterion 3: closed form vs certified lattice distance ----------------

void closed_form_vs_cvp(int idx) {
  RandomStream rng(9301);
  int agreed = 0;
  const int total = 500;
  for (int it = 0; it < total; ++it) {
    const int m = 2 + static_cast<int>(rng.below(4));       // 2..5
    const int t = 1 + static_cast<int>(rng.below(m));       // 1..m
    const long n = 4 + static_cast<long>(rng.below(21));    // 4..24
    Mat64 M(m, std::vector<int64_t>(n, 0));
    std::vector<int64_t> row_sums(m, 0);
    std::vector<int> subset;
    for (long j = 0; j < n; ++j) {
      rng.sample_subset(m, t, subset);
      for (int i : subset) {
        M[static_cast<size_t>(i)][static_cast<size_t>(j)] = 1;
        ++row_sums[static_cast<size_t>(i)];
      }
    }
    const int closed = tsparse_odd_disc(row_sums, t, n);
    const ParityBound pb = parity_lower_bound(M, NormSpec{Norm::Sup});
    if (pb.certified && std::fabs(pb.distance - closed) < 1e-9) ++agreed;
  }
  report(idx, agreed == total,
         "closed form == certified coset distance on " + std::to_string(agreed) + "/" +
             std::to_string(total) + " random instances (m<=5)");
}

// --- criterion 4: local-limit comparison at desk scale ---------------------

ExperimentReport run_llt(const ExperimentConfig& base) { return run_experiment(base); }

void llt_desk_scale(int idx) {
  // (a) one uniform +-1 row, n = 400.
  ExperimentConfig a;
  a.kind = "llt";
  a.m = 1;
  a.n = 400;
  a.trials = 50;
  a.seed = 404;
  a.workers = 4;
  json support = json::array();
  support.push_back(json::array({1}));
  support.push_back(json::array({-1}));
  json dist;
  dist["kind"] = "finite";
  dist["support"] = support;
  dist["probs"] = json::array({0.5, 0.5});
  a.distribution = dist;
  const ExperimentReport ra = run_llt(a);

  // (b) two rows, 1-sparse columns, n = 400 (isotropized internally).
  ExperimentConfig b;
  b.kind = "llt";
  b.m = 2;
  b.t = 1;
  b.n = 400;
  b.trials = 50;
  b.seed = 405;
  b.workers = 4;
  const ExperimentReport rb = run_llt(b);

  const double rate_a = ra.aggregates.at("pass_rate").get<double>();
  const double rate_b = rb.aggregates.at("pass_rate").get<double>();
  const bool ok = verdict_pass(ra, "pass_rate_ge_0.8") && verdict_pass(ra, "no_trial_errors") &&
                  verdict_pass(rb, "pass_rate_ge_0.8") && verdict_pass(rb, "no_trial_errors");
  report(idx, ok,
         "gaussian-comparison pass rates at n=400: one-row " + fmt(rate_a) + ", two-row " +
             fmt(rate_b) + " (threshold 0.8)");
}

// --- criterion 5: characteristic-function identity -------------------------

double fourier_sum(const SignedSumTable& tab, const Eigen::VectorXd& theta) {
  // Points are stored doubled, so <theta, Y> contributes pi * <theta, point>.
  double acc = 0.0;
  const double denom = std::pow(2.0, tab.n);
  for (const auto& [pt, cnt] : tab.table) {
    double dot = 0.0;
    for (int i = 0; i < tab.m; ++i) dot += theta[i] * static_cast<double>(pt[i]);
    acc += to_double(Rat(cnt)) / denom * std::cos(std::numbers::pi * dot);
  }
  return acc;
}

void char_fn_identity(int idx) {
  RandomStream rng(5501);
  int agreed = 0;
  const int total = 100;
  double worst = 0.0;
  for (int it = 0; it < total; ++it) {
    const int m = 1 + static_cast<int>(rng.below(3));  // 1..3
    const int n = 2 + static_cast<int>(rng.below(13)); // 2..14
    Mat64 M(m, std::vector<int64_t>(n, 0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        M[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            static_cast<int64_t>(rng.below(7)) - 3;  // -3..3
    Eigen::VectorXd theta(m);
    for (int i = 0; i < m; ++i) theta[i] = 4.0 * rng.uniform01() - 2.0;  // [-2, 2)
    const double lhs = char_fn_signed_sum(M, theta);
    const double rhs = fourier_sum(signed_sum_distribution(M), theta);
    const double dev = std::fabs(lhs - rhs);
    worst = std::max(worst, dev);
    if (dev <= 1e-9) ++agreed;
  }
  report(idx, agreed == total,
         "product formula == table fourier sum on " + std::to_string(agreed) + "/" +
             std::to_string(total) + " random (M, theta); worst dev " + fmt(worst));
}

// --- criterion 6: spanningness sandwich for t-sparse -----------------------

void spanningness_sandwich(int idx) {
  bool ok = true;
  std::string why;
  for (int m = 3; m <= 6; ++m)
    for (int t = 1; t < m; ++t) {
      const ColumnDistribution dist = tsparse_distribution(m, t);
      const std::string tag = " (m=" + std::to_string(m) + ",t=" + std::to_string(t) + ");";
      const BetaResult beta = beta_bound(dist);
      if (beta.beta > 4) {
        ok = false;
        why += " beta > 4" + tag;
      }
      if (!verify_tsparse_spanning_set(m, t)) {
        ok = false;
        why += " spanning-set rank mismatch" + tag;
      }
      RandomStream rng(4200 + 10ULL * static_cast<uint64_t>(m) + static_cast<uint64_t>(t));
      const AlphaEstimate alpha = alpha_estimate(dist, 120, rng);
      if (!(alpha.value >= 1.0 / (2.0 * m) - 1e-6)) {
        ok = false;
        why += " alpha below 1/(2m)" + tag;
      }
      const SpanningnessValue lower = spanningness_lower_bound(dist, alpha.value);
      const SearchResult search = spanningness_search(dist, 12000, rng);
      const bool sandwich =
          search.upper.is_infinite ||
          (!lower.is_infinite && search.upper.value >= lower.value - 1e-12);
      if (!sandwich) {
        ok = false;
        why += " search upper below proved lower" + tag;
      }
    }
  report(idx, ok,
         ok ? "beta <= 4, spanning-set rank, alpha >= 1/(2m), and lower <= upper for all "
              "m in 3..6, t in 1..m-1"
            : "sandwich violations:" + why);
}

// --- criterion 7: mixing decay and the exact small-case check --------------

void mixing_checks(int idx) {
  ExperimentConfig cfg;
  cfg.kind = "mixing";
  cfg.m = 8;
  cfg.t = 3;
  for (long n = 8; n <= 40; ++n) cfg.n_grid.push_back(n);
  cfg.seed = 707;
  const ExperimentReport r = run_experiment(cfg);
  bool ok = verdict_pass(r, "tv_monotone_decreasing_fixed_parity") &&
            verdict_pass(r, "fit_rate_le_bound") && verdict_pass(r, "tv_within_proved_bound");
  std::string why = ok ? "" : " harness verdicts failed;";

  // Exhaustive enumeration for m <= 4, n <= 3: the walk's weight distribution
  // must match the brute-force count exactly, as rationals.
  int checked = 0;
  for (int m = 2; m <= 4; ++m)
    for (int t = 1; t < m; ++t) {
      std::vector<int> masks;
      for (int s = 0; s < (1 << m); ++s)
        if (std::popcount(static_cast<unsigned>(s)) == t) masks.push_back(s);
      const long q = static_cast<long>(masks.size());
      for (int n = 1; n <= 3; ++n) {
        const WeightDistribution wd = weight_distribution(m, t, n);
        if (!wd.exact) {
          ok = false;
          why += " non-exact small case;";
          continue;
        }
        std::vector<Int> cnt(static_cast<size_t>(m) + 1, Int(0));
        long seqs = 1;
        for (int k = 0; k < n; ++k) seqs *= q;
        std::vector<long> odo(static_cast<size_t>(n), 0);
        for (long s = 0; s < seqs; ++s) {
          long rem = s;
          int x = 0;
          for (int k = 0; k < n; ++k) {
            x ^= masks[static_cast<size_t>(rem % q)];
            rem /= q;
          }
          ++cnt[static_cast<size_t>(std::popcount(static_cast<unsigned>(x)))];
        }
        Int qn = 1;
        for (int k = 0; k < n; ++k) qn *= q;
        for (int w = 0; w <= m; ++w) {
          Rat brute(cnt[static_cast<size_t>(w)], qn);
          brute.canonicalize();
          if (brute != wd.exact_probs[static_cast<size_t>(w)]) {
            ok = false;
            why += " brute-force mismatch at (m=" + std::to_string(m) +
                   ",t=" + std::to_string(t) + ",n=" + std::to_string(n) + ");";
          }
        }
        ++checked;
      }
    }
  report(idx, ok,
         ok ? "tv decay verdicts at m=8,t=3 over n=8..40 and exact brute-force agreement on " +
                  std::to_string(checked) + " small cases"
            : "mixing failures:" + why);
}

// --- criterion 8: walsh coefficient bound ----------------------------------

void walsh_gap(int idx) {
  bool ok = true;
  int checked = 0;
  std::string why;
  for (int m = 2; m <= 12; ++m)
    for (int t = 1; t < m; ++t)
      for (int s = 1; s < m; ++s) {
        const Rat f = walsh_coefficient(m, t, s);
        const Rat af = f < 0 ? Rat(-f) : f;
        if (!(af <= Rat(m - 1, m))) {
          ok = false;
          why += " |f|(m=" + std::to_string(m) + ",t=" + std::to_string(t) +
                 ",s=" + std::to_string(s) + ") > 1-1/m;";
        }
        ++checked;
      }
  report(idx, ok,
         ok ? "|walsh| <= 1 - 1/m on all " + std::to_string(checked) +
                  " interior (m, t, s) with m <= 12"
            : "walsh bound violations:" + why);
}

// --- criterion 9: the stretched-pair family and its covering radius --------

void stretched_pairs(int idx) {
  bool ok = true;
  std::string why;
  for (int r = 1; r <= 5; ++r) {
    const Mat64 M = {{2 * r + 1, r}};
    const DiscrepancyResult d = disc_exact(M, NormSpec{Norm::Sup});
    if (d.value != static_cast<double>(r + 1)) {
      ok = false;
      why += " disc([" + std::to_string(2 * r + 1) + "," + std::to_string(r) + "]) = " +
             fmt(d.value) + " != " + std::to_string(r + 1) + ";";
    }
    const Lattice L = lattice_from_columns(to_int_mat(M));
    const CoveringRadius cr = covering_radius(L, NormSpec{Norm::Sup}, /*certified_mode=*/true);
    if (!(cr.certified && std::fabs(cr.value - 0.5) <= 1e-9 && cr.upper >= cr.value &&
          std::fabs(cr.upper - 0.5) <= 1e-6)) {
      ok = false;
      why += " covering radius at r=" + std::to_string(r) + " = " + fmt(cr.value) + ";";
    }
  }
  report(idx, ok,
         ok ? "disc([2r+1, r]) = r+1 and span covering radius = 1/2 for r in 1..5"
            : "stretched-pair failures:" + why);
}

// --- criterion 10: unit-sphere decay proxy ---------------------------------

void unit_sphere_decay(int idx) {
  ExperimentConfig cfg;
  cfg.kind = "unit-disc";
  cfg.m = 3;
  cfg.n_grid = {100, 200, 400, 700, 1200};
  cfg.trials = 20;
  cfg.budget = 30000;
  cfg.mc_samples = 20000;
  cfg.seed = 1;
  cfg.workers = 4;
  const ExperimentReport r = run_experiment(cfg);
  const bool ok = verdict_pass(r, "median_strictly_decreasing") &&
                  verdict_pass(r, "fit_slope_negative") && verdict_pass(r, "fit_r2_ge_0.8") &&
                  verdict_pass(r, "smoothed_mass_certificate");
  const double slope = r.aggregates.at("fit").at("slope").get<double>();
  const double r2 = r.aggregates.at("fit").at("r2").get<double>();
  report(idx, ok,
         "unit-sphere medians over n=100..1200: log-fit slope " + fmt(slope) + ", r2 " + fmt(r2) +
             ", certificate " + (ok ? "fired" : "missing or decay not monotone"));
}

// --- criterion 11: exact solver cross-checks -------------------------------

void exact_cross_checks(int idx) {
  RandomStream rng(1101);
  int mm_agree = 0;
  const int mm_total = 100;
  for (int it = 0; it < mm_total; ++it) {
    const int m = 2 + static_cast<int>(rng.below(3));  // 2..4
    const int n = 6 + static_cast<int>(rng.below(9));  // 6..14
    Mat64 M(m, std::vector<int64_t>(n, 0));
    for (auto& row : M)
      for (auto& e : row) e = static_cast<int64_t>(rng.below(7)) - 3;
    const DiscrepancyResult ex = disc_exact(M, NormSpec{Norm::Sup});
    const DiscrepancyResult mm = disc_meet_middle(M);
    const bool value_ok = std::fabs(ex.value - mm.value) < 1e-9;
    const bool witness_ok =
        std::fabs(disc_value(M, mm.coloring, NormSpec{Norm::Sup}) - mm.value) < 1e-9;
    if (value_ok && witness_ok) ++mm_agree;
  }

  int dp_agree = 0;
  const int dp_total = 200;
  for (int it = 0; it < dp_total; ++it) {
    const int m = 2 + static_cast<int>(rng.below(3));  // 2..4
    const int n = 6 + static_cast<int>(rng.below(7));  // 6..12
    Mat64 M(m, std::vector<int64_t>(n, 0));
    for (auto& row : M)
      for (auto& e : row) e = static_cast<int64_t>(rng.below(9)) - 4;
    const int64_t v = std::llround(disc_exact(M, NormSpec{Norm::Sup}).value);
    const DecisionResult at_v = disc_decision_dp(M, v);
    bool good = at_v.feasible;
    if (good && !at_v.coloring.empty())
      good = disc_value(M, at_v.coloring, NormSpec{Norm::Sup}) <= static_cast<double>(v) + 1e-9;
    if (good && v > 0) good = !disc_decision_dp(M, v - 1).feasible;
    if (good) ++dp_agree;
  }

  report(idx, mm_agree == mm_total && dp_agree == dp_total,
         "meet-in-middle == exact on " + std::to_string(mm_agree) + "/" +
             std::to_string(mm_total) + "; decision dp bracketed exact on " +
             std::to_string(dp_agree) + "/" + std::to_string(dp_total));
}

}  // namespace

int main() {
  std::printf("acceptance: lattice discrepancy workbench\n");
  criterion(1, [] {
    tsparse_law(1, /*t=*/2, /*n=*/4000, /*seed=*/101,
                {1.0 / 32.0, 31.0 / 32.0, 0.0}, /*check_runtime=*/true);
  });
  criterion(2, [] {
    tsparse_law(2, /*t=*/3, /*n=*/4001, /*seed=*/202,
                {0.0, 26.0 / 32.0, 6.0 / 32.0}, /*check_runtime=*/false);
  });
  criterion(3, [] { closed_form_vs_cvp(3); });
  criterion(4, [] { llt_desk_scale(4); });
  criterion(5, [] { char_fn_identity(5); });
  criterion(6, [] { spanningness_sandwich(6); });
  criterion(7, [] { mixing_checks(7); });
  criterion(8, [] { walsh_gap(8); });
  criterion(9, [] { stretched_pairs(9); });
  criterion(10, [] { unit_sphere_decay(10); });
  criterion(11, [] { exact_cross_checks(11); });
  if (g_failures == 0)
    std::printf("acceptance: all 11 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures;
}
