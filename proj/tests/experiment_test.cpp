#include "critgw/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

using namespace critgw;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n_grid = {30, 60};
  c.lambdas = {0.5, 1.0};
  c.regimes = {1, 3, 5};
  c.reduced_y = {1.0};
  c.j_max = 3;
  c.mrca_y = {1.0};
  c.min_hits = 400;
  c.block_size = 1 << 12;
  c.seed = 77;
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("critgw_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

Record rec(const std::string& key, std::size_t n, double value, double se = 0.0) {
  Record r;
  r.kind = key.substr(0, key.find('/'));
  r.key = key;
  r.n = n;
  r.value = value;
  r.std_error = se;
  return r;
}

}  // namespace

TEST(Config, RoundTrip) {
  ExperimentConfig c = small_config();
  c.law = "stable(alpha=0.29999999999999999, c=0.5)";
  c.regime.theta = 0.1;
  c.regime.chi_zero = true;
  c.w = 2.5;
  c.format = "csv";
  const ExperimentConfig back = parse_config(serialize_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));
  EXPECT_EQ(parse_config(serialize_config(ExperimentConfig{})), ExperimentConfig{});
}

TEST(Config, ParsesCommentsAndDefaults) {
  const ExperimentConfig c = parse_config(
      "# header\n"
      "[grid]\n"
      "n = 50, 100   # inline comment\n"
      "\n"
      "[law]\n"
      "spec = geometric\n"
      "[run]\n"
      "seed = 12\n");
  EXPECT_EQ(c.n_grid, (std::vector<std::size_t>{50, 100}));
  EXPECT_EQ(c.law, "geometric");
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.lambdas, ExperimentConfig{}.lambdas);
}

TEST(Config, ErrorsCarryLineNumbers) {
  const auto line_of = [](const char* text) -> std::size_t {
    try {
      (void)parse_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("[grid]\nn = 10, x\n"), 2u);
  EXPECT_EQ(line_of("[bogus]\n"), 1u);
  EXPECT_EQ(line_of("[grid]\n\nfoo = 1\n"), 3u);
  EXPECT_EQ(line_of("seed = 1\n"), 1u);
  EXPECT_EQ(line_of("[law]\nspec = poisson\n"), 2u);
  EXPECT_EQ(line_of("[regime]\nchi_zero = yes\n"), 2u);
  EXPECT_EQ(line_of("[grid\n"), 1u);
  EXPECT_EQ(line_of("[run]\nseed\n"), 2u);
  EXPECT_THROW((void)parse_config("[grid]\nn = 100, 50\n"), std::invalid_argument);
  EXPECT_THROW((void)parse_config("[output]\nformat = xml\n"), std::invalid_argument);
  EXPECT_THROW((void)parse_config("[regime]\na_psi = 0.4\n"), std::invalid_argument);
}

TEST(Output, WriteImmutable) {
  const fs::path dir = temp_dir("immutable");
  const fs::path file = dir / "sub" / "a.json";
  write_immutable(file, "one");
  EXPECT_NO_THROW(write_immutable(file, "one"));
  EXPECT_THROW(write_immutable(file, "two"), TamperError);
  std::ifstream in(file);
  std::string content;
  std::getline(in, content);
  EXPECT_EQ(content, "one");
  fs::remove_all(dir);
}

TEST(Output, RecordJsonRoundTrip) {
  Record r = rec("regime1/lambda=0.5", 100, 0.25, 0.01);
  r.hits = 10;
  r.trials = 1000;
  r.converged = false;
  const Record back = record_from_json(to_json(r, true));
  EXPECT_EQ(back.key, r.key);
  EXPECT_EQ(back.kind, "regime1");
  EXPECT_EQ(back.n, r.n);
  EXPECT_EQ(back.value, r.value);
  EXPECT_EQ(back.std_error, r.std_error);
  EXPECT_EQ(back.hits, r.hits);
  EXPECT_EQ(back.trials, r.trials);
  EXPECT_FALSE(back.converged);
}

TEST(Theory, RecordsCoverEveryEstimate) {
  const ExperimentConfig c = small_config();
  const auto theory = theory_records(c);
  const auto sim = run_simulation(c, 2);
  const CompareReport report = compare(theory, sim.records);
  EXPECT_TRUE(report.errors.empty());
  EXPECT_EQ(theory.size(), sim.records.size());
  // 1 event + 3 regimes x 2 lambdas + (3 pmf + tail) + 1 mrca per n.
  EXPECT_EQ(theory.size(), 2u * (1 + 6 + 4 + 1));
}

TEST(Theory, RegimeTableCsv) {
  const std::string csv = regime_table_csv(small_config(), 3);
  EXPECT_NE(csv.find("\nalpha,regime,params,lambda,limit_value\n"), std::string::npos);
  EXPECT_NE(csv.find(",3,"), std::string::npos);
}

TEST(Identity, SuitePasses) {
  const auto checks = identity_suite();
  EXPECT_GT(checks.size(), 20u);
  for (const auto& c : checks) EXPECT_TRUE(c.pass()) << c.name << " residual " << c.residual;
  const auto j = identity_suite_json(checks);
  EXPECT_EQ(j.size(), checks.size());
}

TEST(Simulation, ByteIdenticalAcrossThreads) {
  const ExperimentConfig c = small_config();
  const std::string one = estimates_json(c, run_simulation(c, 1));
  EXPECT_EQ(one, estimates_json(c, run_simulation(c, 4)));
  EXPECT_EQ(one, estimates_json(c, run_simulation(c, 16)));
  ExperimentConfig other = c;
  other.seed = 78;
  EXPECT_NE(one, estimates_json(other, run_simulation(other, 1)));
}

TEST(Simulation, UnitLawSmoke) {
  ExperimentConfig c = small_config();
  c.law = "unit";
  c.regimes = {2, 4};
  const SimulationResult r = run_simulation(c, 1);
  EXPECT_TRUE(r.converged);
  for (const auto& rec : r.records) {
    if (rec.key == "event_prob" || rec.key == "reduced_pmf/y=1/j=1" || rec.key == "mrca/y=1") {
      EXPECT_EQ(rec.value, 1.0) << rec.key;
    }
  }
  EXPECT_EQ(theory_records(c).front().value, 1.0);
}

TEST(Compare, IdenticalInputsPass) {
  std::vector<Record> theory{rec("regime1/lambda=1", 100, 0.3), rec("regime1/lambda=1", 200, 0.3),
                             rec("event_prob", 100, 1e-4), rec("event_prob", 200, 5e-5),
                             rec("reduced_tail/y=1", 100, 0.01)};
  std::vector<Record> est = theory;
  for (auto& e : est) e.std_error = 1e-3 * e.value;
  const CompareReport report = compare(theory, est);
  EXPECT_TRUE(report.pass);
  EXPECT_TRUE(report.errors.empty());
  EXPECT_EQ(report.rows.size(), 5u);
  EXPECT_FALSE(compare_summary(report).empty());
  EXPECT_NE(compare_csv(report).find("regime1/lambda=1,200"), std::string::npos);
}

TEST(Compare, LargeDeviationFails) {
  std::vector<Record> theory{rec("regime2/lambda=1", 100, 0.3), rec("regime2/lambda=1", 400, 0.3)};
  std::vector<Record> est{rec("regime2/lambda=1", 100, 0.3, 0.001), rec("regime2/lambda=1", 400, 0.3 + 0.04, 0.001)};
  CompareReport report = compare(theory, est);
  EXPECT_FALSE(report.pass);
  EXPECT_TRUE(report.rows.back().z_flag);
  EXPECT_FALSE(report.rows.back().pass);
  // Within 4 sigma + 0.03 at the last n, but the gap grows along n.
  est[1].value = 0.3 + 0.02;
  report = compare(theory, est);
  EXPECT_FALSE(report.pass);
  EXPECT_NE(report.rows.back().note.find("grows"), std::string::npos);
  est[0].value = 0.3 + 0.025;
  report = compare(theory, est);
  EXPECT_TRUE(report.pass);
  EXPECT_LT(report.rows.back().trend_slope, 0.0);
}

TEST(Compare, EventRatio) {
  std::vector<Record> theory{rec("event_prob", 100, 1e-4), rec("event_prob", 400, 1e-5)};
  std::vector<Record> est{rec("event_prob", 100, 0.7e-4, 1e-7), rec("event_prob", 400, 0.85e-5, 1e-8)};
  EXPECT_TRUE(compare(theory, est).pass);
  est[1].value = 0.75e-5;
  EXPECT_FALSE(compare(theory, est).pass);
}

TEST(Compare, MismatchedKeysAreErrors) {
  std::vector<Record> theory{rec("regime1/lambda=1", 100, 0.3), rec("mrca/y=1", 100, 0.5)};
  std::vector<Record> est{rec("regime1/lambda=1", 100, 0.3, 0.01), rec("regime1/lambda=2", 100, 0.2, 0.01)};
  const CompareReport report = compare(theory, est);
  EXPECT_FALSE(report.pass);
  EXPECT_EQ(report.errors.size(), 2u);
  const std::vector<Record> unknown{rec("foo/bar", 100, 1.0)};
  EXPECT_FALSE(compare(unknown, unknown).pass);
}

TEST(Compare, NonConvergedFails) {
  std::vector<Record> theory{rec("regime3/lambda=1", 100, 0.3)};
  std::vector<Record> est{rec("regime3/lambda=1", 100, 0.3, 0.01)};
  est[0].converged = false;
  const CompareReport report = compare(theory, est);
  EXPECT_FALSE(report.pass);
  EXPECT_NE(report.rows[0].note.find("not converged"), std::string::npos);
}

TEST(Compare, ReadsFiles) {
  const fs::path dir = temp_dir("files");
  const ExperimentConfig c = small_config();
  const auto theory = theory_records(c);
  write_immutable(dir / "theory.json", theory_json(c, theory));
  const auto back = read_records(dir / "theory.json");
  ASSERT_EQ(back.size(), theory.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].key, theory[i].key);
    EXPECT_EQ(back[i].value, theory[i].value);
  }
  EXPECT_THROW((void)read_records(dir / "missing.json"), std::runtime_error);
  fs::remove_all(dir);
}
