#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "critgw/conditioned.hpp"
#include "critgw/regime.hpp"

namespace critgw {

/// Experiment description read from a line-oriented config file:
///
///   # comment
///   [law]
///   spec = stable(alpha=0.5, c=0.6666)
///   [grid]
///   n = 100, 200, 400
///   lambda = 0.5, 1, 2
///   [regime]
///   ids = 1, 2, 3, 5
///   theta = 0.5
///   ...
///
/// Unknown sections or keys are errors. serialize_config emits every field,
/// so parse(serialize(c)) == c.
struct ExperimentConfig {
  std::string law = "stable(alpha=0.5, c=0.66666666666666663)";
  std::vector<std::size_t> n_grid{100, 200, 400};
  std::vector<double> lambdas{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<int> regimes{1, 2, 3, 4, 5};
  /// Shared regime parameters; the id field is ignored.
  RegimeSpec regime;
  /// y values for the reduced-process pmf Z(n - ceil(y phi), n).
  std::vector<double> reduced_y{0.5, 1.0, 2.0};
  int j_max = 10;
  /// y values for the MRCA CDF P(d(n) <= y phi).
  std::vector<double> mrca_y{0.5, 1.0, 2.0};
  double w = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t min_hits = 20000;
  std::uint64_t max_trials = std::uint64_t{1} << 42;
  std::uint64_t block_size = std::uint64_t{1} << 20;
  std::string out_dir = "out";
  std::string format = "json";

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
  RunConfig run_config(unsigned threads) const;
  RegimeSpec regime_spec(int id) const;
};

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Raised when an output file exists with different content.
class TamperError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `content` to `path` unless an identical file is already there;
/// throws TamperError if a different file is there.
void write_immutable(const std::filesystem::path& path, std::string_view content);

/// One theory value or estimate, identified by (key, n). Keys look like
/// `regime1/lambda=1`, `event_prob`, `reduced_pmf/y=1/j=2`, `reduced_tail/y=1`
/// or `mrca/y=0.5`; the kind is the part before the first slash.
struct Record {
  std::string kind;
  std::string key;
  std::size_t n = 0;
  double value = 0.0;
  /// Estimates only.
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  bool converged = true;
};

nlohmann::json to_json(const Record& record, bool estimate);
Record record_from_json(const nlohmann::json& j);

/// Limit values for every record the simulation produces, for each n in the grid.
std::vector<Record> theory_records(const ExperimentConfig& config);

/// Regime transform table rows: alpha, regime, params, lambda, limit_value.
std::string regime_table_csv(const ExperimentConfig& config, int regime_id);

struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  /// False for checks that are reported but not asserted.
  bool asserted = true;
  bool pass() const { return !asserted || residual <= tolerance; }
};

/// Numerical identities of the limit objects (renewal identity, series
/// closed form, Stirling/Bell equality, regime consistency, exponential case).
std::vector<IdentityCheck> identity_suite();
nlohmann::json identity_suite_json(const std::vector<IdentityCheck>& checks);

struct SimulationResult {
  std::vector<Record> records;
  /// Per-n event details: n, phi, w, threshold, trials, survivors, hits.
  nlohmann::json events = nlohmann::json::array();
  bool converged = true;
};

/// Runs the conditional sampler once per n and derives every estimate from
/// that sample. Results depend on the config only, not on `threads`.
SimulationResult run_simulation(const ExperimentConfig& config, unsigned threads);

/// Serialized forms written to disk; each embeds the resolved config and seed.
std::string theory_json(const ExperimentConfig& config, const std::vector<Record>& records);
std::string estimates_json(const ExperimentConfig& config, const SimulationResult& result);
std::string records_csv(const ExperimentConfig& config, const std::vector<Record>& records, bool estimate);

/// Allowances of the comparison rules.
struct CompareRules {
  double regime_gap = 0.03;
  double regime4_gap = 0.04;
  double reduced_gap = 0.03;
  double sigmas = 4.0;
  double ratio_low = 0.8;
  double ratio_high = 1.2;
};

struct CompareRow {
  std::string key;
  std::size_t n = 0;
  double theory = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double abs_gap = 0.0;
  /// Least-squares slope of abs_gap (or |ratio - 1| for event_prob) against
  /// log2 n over the grid; repeated on every row of the key.
  double trend_slope = 0.0;
  /// |z| > sigmas.
  bool z_flag = false;
  /// Final-n tolerance and trend verdict for the key; set on the largest n only.
  bool final_row = false;
  bool pass = true;
  std::string note;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  std::vector<std::string> errors;
  bool pass = true;
};

/// Joins theory and estimate records on (key, n). A key passes when its
/// |estimate - theory| at the largest n is within sigmas * stderr plus the
/// allowance of its kind and the gaps do not grow along the grid by more than
/// the combined one-sigma noise of neighbouring points. event_prob keys use
/// the ratio estimate / theory instead: within [ratio_low, ratio_high] at the
/// largest n, with |ratio - 1| not growing beyond noise. reduced_tail keys pass
/// when the estimate is below the theory bound plus sigmas * stderr.
CompareReport compare(const std::vector<Record>& theory, const std::vector<Record>& estimates,
                      const CompareRules& rules = {});
std::string compare_csv(const CompareReport& report);
std::string compare_json(const CompareReport& report);
std::string compare_summary(const CompareReport& report);

/// Reads the `records` array of a theory or estimates JSON file.
std::vector<Record> read_records(const std::filesystem::path& path);

}  // namespace critgw
