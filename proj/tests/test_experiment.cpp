#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "latdisc/discrepancy.hpp"
#include "latdisc/experiment.hpp"
#include "latdisc/hypercube_mixing.hpp"
#include "latdisc/rng.hpp"

using namespace latdisc;
using nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t nl = s.find('\n', pos);
    if (nl == std::string::npos) nl = s.size();
    out.push_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t c = line.find(',', pos);
    if (c == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
}

json base_tsparse_config() {
  return json{{"kind", "tsparse-disc"}, {"m", 3}, {"t", 2}, {"n", 10},
              {"trials", 40},           {"seed", 7}};
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  CHECK_THROWS_WITH_AS(config_from_json(json::array()), "config: root: must be a JSON object",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"m", 3}}), "config: kind: missing",
                       std::invalid_argument);
  json c = base_tsparse_config();
  c.erase("seed");
  CHECK_THROWS_WITH_AS(config_from_json(c), "config: seed: missing (experiments must be seeded)",
                       std::invalid_argument);
  c = base_tsparse_config();
  c["frobnicate"] = 1;
  CHECK_THROWS_WITH_AS(config_from_json(c), "config: frobnicate: unknown field",
                       std::invalid_argument);
  c = base_tsparse_config();
  c["kind"] = "disco";
  CHECK_THROWS_WITH_AS(config_from_json(c), "config: kind: unknown kind 'disco'",
                       std::invalid_argument);
  c = base_tsparse_config();
  c["m"] = 0;
  CHECK_THROWS_AS(config_from_json(c), std::invalid_argument);
  c = base_tsparse_config();
  c["m"] = 65;
  CHECK_THROWS_AS(config_from_json(c), std::invalid_argument);
  c = base_tsparse_config();
  c["trials"] = 0;
  CHECK_THROWS_AS(config_from_json(c), std::invalid_argument);
  c = base_tsparse_config();
  c["t"] = 4;  // t > m
  CHECK_THROWS_AS(config_from_json(c), std::invalid_argument);
  c = base_tsparse_config();
  c["subsample_fraction"] = 1.5;
  CHECK_THROWS_AS(config_from_json(c), std::invalid_argument);
  c = base_tsparse_config();
  c["workers"] = 0;
  CHECK_THROWS_AS(config_from_json(c), std::invalid_argument);

  // Per-kind field discipline.
  json mix = json{{"kind", "mixing"}, {"m", 4}, {"t", 2}, {"seed", 1},
                  {"n_grid", json::array({4, 6, 8})}};
  CHECK_NOTHROW(config_from_json(mix));
  json bad = mix;
  bad["n_grid"] = json::array({4, 6, 6});
  CHECK_THROWS_WITH_AS(config_from_json(bad), "config: n_grid: must be strictly increasing",
                       std::invalid_argument);
  bad = mix;
  bad["n"] = 12;
  CHECK_THROWS_WITH_AS(config_from_json(bad), "config: n: not used by kind 'mixing'",
                       std::invalid_argument);
  bad = mix;
  bad.erase("n_grid");
  CHECK_THROWS_WITH_AS(config_from_json(bad), "config: n_grid: missing", std::invalid_argument);
  json ud = json{{"kind", "unit-disc"}, {"m", 2}, {"seed", 1},
                 {"n_grid", json::array({8, 16})}};
  CHECK_NOTHROW(config_from_json(ud));
  bad = ud;
  bad["t"] = 1;
  CHECK_THROWS_WITH_AS(config_from_json(bad), "config: t: not used by kind 'unit-disc'",
                       std::invalid_argument);
  // llt needs t or an explicit distribution; the distribution must match m.
  json llt = json{{"kind", "llt"}, {"m", 1}, {"n", 50}, {"seed", 1}};
  CHECK_THROWS_WITH_AS(config_from_json(llt),
                       "config: t: missing (or supply an explicit distribution)",
                       std::invalid_argument);
  llt["distribution"] = json{{"kind", "finite"},
                             {"m", 1},
                             {"support", json::array({json::array({1}), json::array({-1})})},
                             {"probs", json::array({0.5, 0.5})}};
  CHECK_NOTHROW(config_from_json(llt));
  llt["m"] = 2;
  CHECK_THROWS_WITH_AS(config_from_json(llt), "config: distribution: dimension disagrees with m",
                       std::invalid_argument);
}

TEST_CASE("config json round trip materializes defaults") {
  ExperimentConfig c = config_from_json(base_tsparse_config());
  json j = config_to_json(c);
  CHECK(j.at("norm") == "sup");
  CHECK(j.at("constant_c") == 1.0);
  CHECK(j.at("subsample_fraction") == 0.05);
  CHECK(j.at("budget") == 30000);
  CHECK(j.at("mc_samples") == 20000);
  CHECK(j.at("workers") == 1);
  ExperimentConfig c2 = config_from_json(j);
  CHECK(config_to_json(c2).dump() == j.dump());
}

TEST_CASE("tsparse-disc runs are deterministic and mirror the sampler") {
  json cj = base_tsparse_config();
  cj["subsample_fraction"] = 0.25;
  ExperimentConfig cfg1 = config_from_json(cj);
  cj["workers"] = 3;
  ExperimentConfig cfg3 = config_from_json(cj);
  ExperimentReport r1 = run_experiment(cfg1);
  ExperimentReport r3 = run_experiment(cfg3);
  CHECK(r1.csv == r3.csv);
  CHECK(r1.aggregates.dump() == r3.aggregates.dump());
  CHECK(r1.verdicts.dump() == r3.verdicts.dump());

  auto ls = lines_of(r1.csv);
  REQUIRE(ls.size() == 41);
  CHECK(ls[0] == "trial,n_parity,num_odd_rows,disc_closed_form,disc_dp_confirmed,disc");

  // Rebuild trial 0 from its substream: same columns, same closed form, and
  // stride 1/0.25 = 4 makes trial 0 a cross-checked one.
  RandomStream rs = RandomStream::substream(7, 0);
  std::vector<int64_t> row_sums(3, 0);
  std::vector<int> cols;
  for (int j = 0; j < 10; ++j) {
    rs.sample_subset(3, 2, cols);
    for (int r : cols) ++row_sums[static_cast<size_t>(r)];
  }
  int num_odd = 0;
  for (int64_t v : row_sums) num_odd += static_cast<int>(v % 2);
  const int closed = tsparse_odd_disc(row_sums, 2, 10);
  CHECK(ls[1] == "0,0," + std::to_string(num_odd) + "," + std::to_string(closed) + ",1," +
                     std::to_string(closed));

  // 40 trials, stride 4: trials 0,4,...,36 checked.
  CHECK(r1.aggregates.at("checked_trials") == 10);
  long counts_total = 0;
  for (const json& v : r1.aggregates.at("counts")) counts_total += v.get<long>();
  CHECK(counts_total == 40);
  bool saw_dp = false;
  for (const json& v : r1.verdicts)
    if (v.at("name") == "dp_cross_check_agreed") {
      saw_dp = true;
      CHECK(v.at("pass").get<bool>());
    }
  CHECK(saw_dp);
}

TEST_CASE("llt experiment end to end on the 1-d sign distribution") {
  json cj = json{{"kind", "llt"},
                 {"m", 1},
                 {"n", 400},
                 {"trials", 3},
                 {"seed", 5},
                 {"distribution",
                  json{{"kind", "finite"},
                       {"m", 1},
                       {"support", json::array({json::array({1}), json::array({-1})})},
                       {"probs", json::array({0.5, 0.5})}}}};
  ExperimentReport rep = run_experiment(config_from_json(cj));
  CHECK(lines_of(rep.csv).size() == 4);
  CHECK(rep.aggregates.at("trials") == 3);
  // With sign columns |My| has the exact symmetric binomial law, so every
  // trial passes the local-limit bound.
  CHECK(rep.aggregates.at("pass_count") == 3);
  CHECK(rep.aggregates.at("error_count") == 0);
  REQUIRE(rep.verdicts.size() == 2);
  CHECK(rep.verdicts[0].at("name") == "pass_rate_ge_0.8");
  CHECK(rep.verdicts[0].at("pass").get<bool>());
  CHECK(rep.verdicts[1].at("name") == "no_trial_errors");
  CHECK(rep.verdicts[1].at("pass").get<bool>());
}

TEST_CASE("mixing experiment rows match the exact library computation") {
  json cj = json{{"kind", "mixing"}, {"m", 4}, {"t", 2}, {"seed", 1},
                 {"n_grid", json::array({4, 6, 8})}};
  ExperimentReport rep = run_experiment(config_from_json(cj));

  std::string expect = "m,t,n,tv,bound\n";
  for (long n : {4L, 6L, 8L}) {
    WeightDistribution wd = weight_distribution(4, 2, n);
    WeightDistribution cb = conditioned_binomial(4, 0);
    expect += "4,2," + std::to_string(n) + "," +
              format_double(to_double(tv_distance_exact(wd, cb))) + "," +
              format_double(mixing_tv_bound(4, n)) + "\n";
  }
  CHECK(rep.csv == expect);
  REQUIRE(rep.verdicts.size() == 3);
  for (const json& v : rep.verdicts) CHECK(v.at("pass").get<bool>());
}

TEST_CASE("unit-disc experiment structure is worker-invariant") {
  json cj = json{{"kind", "unit-disc"}, {"m", 2}, {"seed", 11}, {"trials", 2},
                 {"n_grid", json::array({8, 16})}, {"budget", 400}, {"mc_samples", 300}};
  ExperimentReport r1 = run_experiment(config_from_json(cj));
  cj["workers"] = 2;
  ExperimentReport r2 = run_experiment(config_from_json(cj));
  CHECK(r1.csv == r2.csv);
  CHECK(r1.aggregates.dump() == r2.aggregates.dump());

  auto ls = lines_of(r1.csv);
  REQUIRE(ls.size() == 5);
  CHECK(ls[0] == "m,n,trial,disc_heuristic");
  CHECK(split_csv(ls[1])[0] == "2");
  CHECK(split_csv(ls[1])[1] == "8");
  CHECK(r1.aggregates.at("per_n").size() == 2);
  CHECK(r1.aggregates.at("certificate").contains("ladder"));
  REQUIRE(r1.verdicts.size() == 4);
  CHECK(r1.verdicts[0].at("name") == "median_strictly_decreasing");
  CHECK(r1.verdicts[1].at("name") == "fit_slope_negative");
  CHECK(r1.verdicts[2].at("name") == "fit_r2_ge_0.8");
  CHECK(r1.verdicts[3].at("name") == "smoothed_mass_certificate");
}

TEST_CASE("summarize pools tsparse-disc counts exactly and rejects mixed kinds") {
  json cj = base_tsparse_config();
  cj["trials"] = 30;
  cj["seed"] = 1;
  ExperimentReport a = run_experiment(config_from_json(cj));
  cj["trials"] = 50;
  cj["seed"] = 2;
  ExperimentReport b = run_experiment(config_from_json(cj));
  json ja = report_to_json(a), jb = report_to_json(b);
  std::string pooled = summarize({ja, jb});
  auto ls = lines_of(pooled);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] ==
        "m,t,n,trials,count_disc0,count_disc1,count_disc2,freq_disc0,freq_disc1,freq_disc2");
  long c[3];
  for (int v = 0; v < 3; ++v)
    c[v] = a.aggregates.at("counts").at(v).get<long>() +
           b.aggregates.at("counts").at(v).get<long>();
  std::string expect = "3,2,10,80";
  for (int v = 0; v < 3; ++v) expect += "," + std::to_string(c[v]);
  for (int v = 0; v < 3; ++v) expect += "," + format_double(static_cast<double>(c[v]) / 80.0);
  CHECK(ls[1] == expect);

  json mix = json{{"kind", "mixing"}, {"m", 4}, {"t", 2}, {"seed", 1},
                  {"n_grid", json::array({4, 6})}};
  json jm = report_to_json(run_experiment(config_from_json(mix)));
  CHECK_THROWS_AS(summarize({ja, jm}), std::invalid_argument);
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("threshold experiment freezes the sample-size constants") {
  json cj = json{{"kind", "threshold"}, {"m", 6}, {"t", 2}, {"seed", 3}};
  ExperimentReport rep = run_experiment(config_from_json(cj));
  auto ls = lines_of(rep.csv);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == "n0,n,constant_c,term_moment,term_span,term_det,term_covering");
  auto f = split_csv(ls[1]);
  REQUIRE(f.size() == 7);
  // s^{-4} L^{-2} = 48^4 / 6 dominates every other term, so n0 = n = term_span.
  CHECK(std::stod(f[4]) == doctest::Approx(884736.0).epsilon(1e-12));
  CHECK(f[0] == f[4]);
  CHECK(f[1] == f[4]);
  CHECK(f[2] == "1");
  CHECK(f[3] == format_double(1560.2553698462425));
  CHECK(f[5] == format_double(2.882718083509208));
  CHECK(f[6] == format_double(22.499999999999996));
  CHECK(rep.aggregates.at("s_value").get<double>() == doctest::Approx(1.0 / 48.0));
  REQUIRE(rep.verdicts.size() == 1);
  CHECK(rep.verdicts[0].at("name") == "n_ge_n0");
  CHECK(rep.verdicts[0].at("pass").get<bool>());
}

TEST_CASE("spanningness experiment reports the proven sandwich for TSparse(6,2)") {
  json cj = json{{"kind", "spanningness"}, {"m", 6}, {"t", 2}, {"seed", 9}, {"budget", 5000}};
  ExperimentReport rep = run_experiment(config_from_json(cj));
  auto ls = lines_of(rep.csv);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == "alpha,beta,lower_bound,numeric_upper");
  auto f = split_csv(ls[1]);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == format_double(1.0 / 12.0));  // proven alpha = 1/(2m)
  CHECK(f[1] == "4");
  CHECK(f[2] == format_double(1.0 / 48.0));
  CHECK(f[3] == "inf");  // no pseudodual points exist for this family
  REQUIRE(rep.verdicts.size() == 2);
  CHECK(rep.verdicts[0].at("name") == "lower_bound_le_numeric_upper");
  CHECK(rep.verdicts[0].at("pass").get<bool>());
  CHECK(rep.verdicts[1].at("name") == "alpha_ge_half_inverse_m");
  CHECK(rep.verdicts[1].at("pass").get<bool>());
}

TEST_CASE("report json carries the version and drops wall time on request") {
  json cj = json{{"kind", "threshold"}, {"m", 4}, {"t", 1}, {"seed", 2}};
  ExperimentReport r1 = run_experiment(config_from_json(cj));
  ExperimentReport r2 = run_experiment(config_from_json(cj));
  json with = report_to_json(r1);
  CHECK(with.at("version") == kVersion);
  CHECK(with.contains("wall_seconds"));
  json without1 = report_to_json(r1, false);
  json without2 = report_to_json(r2, false);
  CHECK_FALSE(without1.contains("wall_seconds"));
  CHECK(without1.dump() == without2.dump());
}

TEST_CASE("format_double is the shortest round-trip form") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(884736.0) == "884736");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  for (double v : {1.25e-7, 3.0, 6.02214076e23, -17.125}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
