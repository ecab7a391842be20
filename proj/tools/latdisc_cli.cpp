// latdisc: seeded discrepancy experiments on random matrices.
//
//   latdisc run <config.json> [--seed S] [--trials N] [--out PATH]
//                             [--workers W] [--subsample-check FRACTION]
//   latdisc summarize <report.json...> [--out PATH]
//
// `run` executes one experiment and writes <out>.json (full report) and
// <out>.csv (per-trial rows).  `summarize` pools reports of one kind into a
// single CSV, adding counts exactly.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "latdisc/experiment.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int run_command(const std::string& config_path, std::optional<uint64_t> seed,
                std::optional<long> trials, std::optional<std::string> out,
                std::optional<int> workers, std::optional<double> subsample) {
  nlohmann::json j = load_json(config_path);
  if (seed) j["seed"] = *seed;
  if (trials) j["trials"] = *trials;
  if (out) j["out"] = *out;
  if (workers) j["workers"] = *workers;
  if (subsample) j["subsample_fraction"] = *subsample;

  latdisc::ExperimentConfig cfg = latdisc::config_from_json(j);
  latdisc::ExperimentReport rep = latdisc::run_experiment(cfg);

  const std::string base = cfg.out_path.empty() ? "report" : cfg.out_path;
  write_file(base + ".json", latdisc::report_to_json(rep).dump(2) + "\n");
  write_file(base + ".csv", rep.csv);

  bool all_pass = true;
  for (const auto& v : rep.verdicts) {
    const bool p = v.at("pass").get<bool>();
    all_pass = all_pass && p;
    std::cout << (p ? "pass" : "FAIL") << "  " << v.at("name").get<std::string>() << "\n";
  }
  std::cout << "wrote " << base << ".json and " << base << ".csv ("
            << latdisc::format_double(rep.wall_seconds) << " s)\n";
  return all_pass ? 0 : 1;
}

int summarize_command(const std::vector<std::string>& paths,
                      std::optional<std::string> out) {
  std::vector<nlohmann::json> reports;
  reports.reserve(paths.size());
  for (const std::string& p : paths) reports.push_back(load_json(p));
  const std::string csv = latdisc::summarize(reports);
  if (out) {
    write_file(*out, csv);
    std::cout << "wrote " << *out << "\n";
  } else {
    std::cout << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrepancy-of-random-matrices experiment workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<long> trials;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<double> subsample;

  CLI::App* run = app.add_subcommand("run", "execute one experiment from a JSON config");
  run->add_option("config", config_path, "experiment config JSON")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--trials", trials, "override the trial count");
  run->add_option("--out", out, "output basename (writes <out>.json and <out>.csv)");
  run->add_option("--workers", workers, "worker thread count");
  run->add_option("--subsample-check", subsample,
                  "fraction of trials re-verified by the decision solver");

  std::vector<std::string> report_paths;
  std::optional<std::string> summary_out;
  CLI::App* sum = app.add_subcommand("summarize", "pool reports of one kind into a CSV");
  sum->add_option("reports", report_paths, "report JSON files")->required()->expected(-1);
  sum->add_option("--out", summary_out, "summary CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(config_path, seed, trials, out, workers, subsample);
    return summarize_command(report_paths, summary_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
