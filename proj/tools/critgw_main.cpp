#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "critgw/experiment.hpp"
#include "critgw/extinction.hpp"
#include "critgw/laplace.hpp"
#include "critgw/offspring.hpp"

namespace fs = std::filesystem;
using namespace critgw;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::vector<std::string> theory_files;
  std::vector<std::string> estimate_files;
};

ExperimentConfig resolve(const Options& opt) {
  ExperimentConfig config = opt.config_path.empty() ? ExperimentConfig{} : load_config(opt.config_path);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.out) config.out_dir = *opt.out;
  if (opt.format) config.format = *opt.format;
  config.validate();
  return config;
}

int cmd_theory(const Options& opt) {
  const ExperimentConfig config = resolve(opt);
  const fs::path dir = config.out_dir;
  const std::vector<Record> records = theory_records(config);
  write_immutable(dir / "theory.json", theory_json(config, records));
  if (config.format == "csv") write_immutable(dir / "theory.csv", records_csv(config, records, false));
  for (int id : config.regimes) {
    write_immutable(dir / ("regime" + std::to_string(id) + ".csv"), regime_table_csv(config, id));
  }
  const auto checks = identity_suite();
  write_immutable(dir / "identity_suite.json", identity_suite_json(checks).dump(2) + "\n");

  std::ostringstream table;
  const ExtinctionTable ext(OffspringLaw::parse(config.law), config.n_grid.back());
  ext.write_csv(table);
  write_immutable(dir / "extinction.csv", table.str());

  std::printf("wrote %zu theory records to %s\n", records.size(), dir.c_str());
  bool ok = true;
  for (const auto& c : checks) ok = ok && c.pass();
  return ok ? 0 : 2;
}

int cmd_simulate(const Options& opt) {
  const ExperimentConfig config = resolve(opt);
  const fs::path dir = config.out_dir;
  const SimulationResult result = run_simulation(config, opt.threads);
  write_immutable(dir / "estimates.json", estimates_json(config, result));
  if (config.format == "csv") write_immutable(dir / "estimates.csv", records_csv(config, result.records, true));
  std::printf("wrote %zu estimates to %s%s\n", result.records.size(), dir.c_str(),
              result.converged ? "" : " (some runs did not reach min_hits)");
  return result.converged ? 0 : 3;
}

int cmd_compare(const Options& opt) {
  std::vector<Record> theory, estimates;
  for (const auto& f : opt.theory_files) {
    auto r = read_records(f);
    theory.insert(theory.end(), r.begin(), r.end());
  }
  for (const auto& f : opt.estimate_files) {
    auto r = read_records(f);
    estimates.insert(estimates.end(), r.begin(), r.end());
  }
  const CompareReport report = compare(theory, estimates);
  std::cout << compare_summary(report);
  if (opt.out) {
    const fs::path dir = *opt.out;
    write_immutable(dir / "report.json", compare_json(report));
    if (opt.format.value_or("json") == "csv") write_immutable(dir / "report.csv", compare_csv(report));
  }
  return report.pass ? 0 : 2;
}

int cmd_identity(const Options& opt) {
  const auto checks = identity_suite();
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("%-4s %-52s residual=%-12.4g tol=%g%s\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(), c.residual,
                c.tolerance, c.asserted ? "" : " (reported)");
    ok = ok && c.pass();
  }
  if (opt.out) write_immutable(fs::path(*opt.out) / "identity_suite.json", identity_suite_json(checks).dump(2) + "\n");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional limit laws of critical Galton-Watson processes: theory tables, simulation, comparison"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) {
      sub->add_option("--config", opt.config_path, "experiment config file")->check(CLI::ExistingFile);
      sub->add_option("--seed", opt.seed, "root seed (overrides the config)");
    }
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* theory = app.add_subcommand("theory", "tabulate limit values and the identity suite");
  add_common(theory, true);
  CLI::App* simulate = app.add_subcommand("simulate", "run the conditional Monte Carlo estimates");
  add_common(simulate, true);
  simulate->add_option("--threads", opt.threads, "worker threads (speed only)")->check(CLI::PositiveNumber);
  CLI::App* comp = app.add_subcommand("compare", "join theory and estimates and apply the pass rules");
  add_common(comp, false);
  comp->add_option("--theory", opt.theory_files, "theory JSON files")->required()->check(CLI::ExistingFile);
  comp->add_option("--estimates", opt.estimate_files, "estimate JSON files")->required()->check(CLI::ExistingFile);
  CLI::App* identity = app.add_subcommand("identity-check", "run the numerical identity suite");
  add_common(identity, false);

  CLI11_PARSE(app, argc, argv);
  try {
    if (theory->parsed()) return cmd_theory(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (comp->parsed()) return cmd_compare(opt);
    return cmd_identity(opt);
  } catch (const TamperError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const laplace::InversionError& e) {
    std::fprintf(stderr, "inversion error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
