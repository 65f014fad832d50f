#include "critgw/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "critgw/combinatorics.hpp"
#include "critgw/extinction.hpp"
#include "critgw/limit_laws.hpp"
#include "critgw/offspring.hpp"

namespace critgw {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string regime_key(int id, double lambda) {
  return "regime" + std::to_string(id) + "/lambda=" + short_fmt(lambda);
}
std::string reduced_key(double y, int j) { return "reduced_pmf/y=" + short_fmt(y) + "/j=" + std::to_string(j); }
std::string tail_key(double y) { return "reduced_tail/y=" + short_fmt(y); }
std::string mrca_key(double y) { return "mrca/y=" + short_fmt(y); }

std::string kind_of(const std::string& key) { return key.substr(0, key.find('/')); }

std::string config_comment(const ExperimentConfig& config) {
  std::string out;
  std::istringstream in(serialize_config(config));
  for (std::string line; std::getline(in, line);) out += line.empty() ? "#\n" : "# " + line + "\n";
  return out;
}

std::size_t back_steps(double y, std::size_t phi, std::size_t n) {
  const auto back = static_cast<std::size_t>(std::ceil(y * static_cast<double>(phi)));
  if (back > n) throw std::invalid_argument("n - ceil(y phi) is negative for n = " + std::to_string(n));
  return back;
}

Record make_record(const std::string& key, std::size_t n, double value) {
  Record r;
  r.kind = kind_of(key);
  r.key = key;
  r.n = n;
  r.value = value;
  return r;
}

Record make_record(const std::string& key, std::size_t n, const McEstimate& est) {
  Record r = make_record(key, n, est.value);
  r.std_error = est.std_error;
  r.hits = est.hits;
  r.trials = est.trials;
  r.converged = est.converged;
  return r;
}

double event_theory(const ExtinctionTable& table, std::size_t n, std::size_t phi, double w) {
  const OffspringLaw& law = table.law();
  switch (law.kind()) {
    case OffspringLaw::Kind::unit: return w >= 1.0 ? 1.0 : 0.0;
    case OffspringLaw::Kind::geometric:
      return finite_variance_small_deviation(2.0, n, w * table.threshold(phi));
    case OffspringLaw::Kind::stable: break;
  }
  // A threshold w / u_phi acts like phi' with u_phi' = u_phi / w, i.e. phi' ~ w^alpha phi.
  return small_deviation_prob(table, n, phi) * std::pow(w, law.alpha());
}

}  // namespace

json to_json(const Record& r, bool estimate) {
  json j = {{"kind", r.kind}, {"key", r.key}, {"n", r.n}, {"value", r.value}};
  if (estimate) {
    j["stderr"] = r.std_error;
    j["hits"] = r.hits;
    j["trials"] = r.trials;
    j["converged"] = r.converged;
  }
  return j;
}

Record record_from_json(const json& j) {
  Record r;
  r.key = j.at("key").get<std::string>();
  r.kind = j.contains("kind") ? j.at("kind").get<std::string>() : kind_of(r.key);
  r.n = j.at("n").get<std::size_t>();
  r.value = j.at("value").get<double>();
  if (j.contains("stderr")) r.std_error = j.at("stderr").get<double>();
  if (j.contains("hits")) r.hits = j.at("hits").get<std::uint64_t>();
  if (j.contains("trials")) r.trials = j.at("trials").get<std::uint64_t>();
  if (j.contains("converged")) r.converged = j.at("converged").get<bool>();
  return r;
}

std::vector<Record> theory_records(const ExperimentConfig& config) {
  config.validate();
  const OffspringLaw law = OffspringLaw::parse(config.law);
  const ExtinctionTable table(law, config.n_grid.back());
  const YaglomLaw yaglom(law.alpha());

  std::vector<Record> limits;
  for (int id : config.regimes) {
    const RegimeSpec spec = config.regime_spec(id);
    for (double lambda : config.lambdas) {
      limits.push_back(make_record(regime_key(id, lambda), 0, regime_transform(spec, yaglom, lambda)));
    }
  }
  for (double y : config.reduced_y) {
    const std::vector<double> pmf = reduced_limit_pmfs(yaglom, y, config.j_max);
    for (int j = 1; j <= config.j_max; ++j) limits.push_back(make_record(reduced_key(y, j), 0, pmf[j - 1]));
    limits.push_back(make_record(tail_key(y), 0, reduced_limit_tail_bound(yaglom, y, config.j_max)));
  }
  for (double y : config.mrca_y) limits.push_back(make_record(mrca_key(y), 0, mrca_limit_cdf(yaglom, y)));

  std::vector<Record> out;
  for (std::size_t n : config.n_grid) {
    const std::size_t phi = config.regime.phi(n);
    out.push_back(make_record("event_prob", n, event_theory(table, n, phi, config.w)));
    for (Record r : limits) {
      r.n = n;
      out.push_back(r);
    }
  }
  return out;
}

std::string regime_table_csv(const ExperimentConfig& config, int regime_id) {
  const OffspringLaw law = OffspringLaw::parse(config.law);
  const YaglomLaw yaglom(law.alpha());
  const RegimeSpec spec = config.regime_spec(regime_id);
  std::string params = "-";
  if (regime_id == 2) params = "theta=" + short_fmt(spec.theta);
  if (regime_id == 4) params = "y=" + short_fmt(spec.y);
  std::string out = config_comment(config);
  out += "alpha,regime,params,lambda,limit_value\n";
  for (double lambda : config.lambdas) {
    out += fmt(law.alpha()) + "," + std::to_string(regime_id) + "," + params + "," + fmt(lambda) + "," +
           fmt(regime_transform(spec, yaglom, lambda)) + "\n";
  }
  return out;
}

std::vector<IdentityCheck> identity_suite() {
  std::vector<IdentityCheck> checks;
  const auto add = [&](std::string name, double residual, double tol, bool asserted = true) {
    checks.push_back({std::move(name), residual, tol, asserted});
  };

  for (double alpha : {0.3, 0.5, 0.8}) {
    const YaglomLaw law(alpha);
    for (double x : {0.5, 1.0, 2.0}) {
      const SeriesValue u = renewal_measure(law, x);
      add("renewal alpha=" + short_fmt(alpha) + " x=" + short_fmt(x), std::abs(u.value - std::pow(x, alpha)), 1e-4);
    }
  }

  for (double alpha : {0.1, 0.3, 0.5, 0.8, 0.95}) {
    double worst = 0.0;
    for (double t : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9}) worst = std::max(worst, term2_residual(alpha, t));
    add("series closed form alpha=" + short_fmt(alpha) + " t<=0.9", worst, 1e-10);
  }
  {
    double worst = 0.0;
    for (double t : {0.1, 0.25, 0.5, 0.75, 0.9}) worst = std::max(worst, term2_residual(1.0, t));
    add("series closed form alpha=1 t<=0.9 (reported)", worst, 1e-10, false);
  }

  {
    int mismatches = 0;
    for (int J = 1; J <= 30; ++J) {
      for (int k = 1; k <= J; ++k) mismatches += stirling2(J, k) == bell_at_ones(J, k) ? 0 : 1;
    }
    add("stirling2 == bell_at_ones for J<=30", mismatches, 0.0);
  }

  for (double alpha : {0.3, 0.5, 0.8}) {
    double worst = 0.0;
    for (double lambda : {0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0, 100.0}) {
      worst = std::max(worst, std::abs(regime2_transform(alpha, 0.0, lambda) - regime1_transform(alpha, lambda)));
    }
    add("regime2(theta=0) == regime1 alpha=" + short_fmt(alpha), worst, 1e-12);
  }

  {
    const YaglomLaw law(1.0);
    double worst = 0.0;
    for (int i = 0; i <= 60; ++i) {
      const double x = 0.01 * std::pow(1000.0, i / 60.0);
      worst = std::max(worst, std::abs(law.cdf(x) + std::expm1(-x)));
    }
    add("alpha=1 inversion vs 1-exp(-x) on [0.01,10]", worst, 1e-8);
  }

  {
    const YaglomLaw law(0.5);
    double worst = 0.0;
    for (double x : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
      const double a = law.conv_cdfs_with(laplace::Method::talbot, 10, x).back();
      const double b = law.conv_cdfs_with(laplace::Method::euler, 10, x).back();
      worst = std::max(worst, std::abs(a - b));
    }
    add("inversion backend agreement alpha=0.5 j<=10", worst, 1e-6);
  }

  {
    const YaglomLaw law(0.5);
    for (double y : {0.5, 1.0, 2.0}) {
      const SeriesValue v = regime4_transform(law, y, 0.0);
      add("reduced pmf total mass alpha=0.5 y=" + short_fmt(y), std::abs(v.value - 1.0) + v.tail_bound, 1e-5);
    }
    const double gap = std::abs(regime4_transform(law, 1000.0, 1.0).value / regime3_transform(0.5, 1.0) - 1.0);
    add("regime4(y=1000) vs regime3 relative gap", gap, 0.02);
    double worst_drop = 0.0;
    double previous = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double y = 0.01 * std::pow(1e5, i / 63.0);
      const double v = mrca_limit_cdf(law, y);
      worst_drop = std::max(worst_drop, previous - v);
      previous = v;
    }
    add("mrca limit cdf nondecreasing alpha=0.5", std::max(0.0, worst_drop), 0.0);
  }
  return checks;
}

json identity_suite_json(const std::vector<IdentityCheck>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    out.push_back({{"check", c.name},
                   {"residual", c.residual},
                   {"tolerance", c.tolerance},
                   {"asserted", c.asserted},
                   {"pass", c.pass()}});
  }
  return out;
}

SimulationResult run_simulation(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const OffspringLaw law = OffspringLaw::parse(config.law);
  const ExtinctionTable table(law, config.n_grid.back());
  const RunConfig run = config.run_config(threads);

  SimulationResult result;
  for (std::size_t n : config.n_grid) {
    const std::size_t phi = config.regime.phi(n);
    const EventSpec event{n, phi, config.w};
    const std::uint64_t threshold = event.threshold(table);

    Observables obs;
    for (int id : config.regimes) obs.population_at.push_back(config.regime_spec(id).m(n));
    for (double y : config.reduced_y) obs.reduced_at.push_back(n - back_steps(y, phi, n));
    const ConditionalSample sample = sample_conditioned(table, n, threshold, threshold, obs, run);

    const McEstimate event_est = event_estimate(sample, threshold, config.seed);
    result.records.push_back(make_record("event_prob", n, event_est));
    for (std::size_t i = 0; i < config.regimes.size(); ++i) {
      const RegimeSpec spec = config.regime_spec(config.regimes[i]);
      const double scale = table.survival(spec.scaling_index(n));
      const auto values = lst_estimates(sample, threshold, i, scale, config.lambdas, config.seed);
      for (std::size_t l = 0; l < values.size(); ++l) {
        result.records.push_back(make_record(regime_key(spec.id, config.lambdas[l]), n, values[l]));
      }
    }
    for (std::size_t i = 0; i < config.reduced_y.size(); ++i) {
      const double y = config.reduced_y[i];
      const ReducedEstimate red =
          reduced_estimates(sample, threshold, i, obs.reduced_at[i], config.j_max, phi, {}, config.seed);
      for (int j = 1; j <= config.j_max; ++j) result.records.push_back(make_record(reduced_key(y, j), n, red.pmf[j - 1]));
      result.records.push_back(make_record(tail_key(y), n, red.tail));
    }
    const auto mrca = mrca_estimates(sample, threshold, phi, config.mrca_y, config.seed);
    for (std::size_t i = 0; i < mrca.size(); ++i) {
      result.records.push_back(make_record(mrca_key(config.mrca_y[i]), n, mrca[i]));
    }

    result.events.push_back({{"n", n},
                             {"phi", phi},
                             {"w", config.w},
                             {"threshold", threshold},
                             {"trials", sample.trials},
                             {"survivors", sample.survivors},
                             {"hits", event_est.hits},
                             {"converged", sample.converged}});
    result.converged = result.converged && sample.converged;
  }
  return result;
}

std::string theory_json(const ExperimentConfig& config, const std::vector<Record>& records) {
  json out;
  out["config"] = serialize_config(config);
  out["seed"] = config.seed;
  out["law"] = config.law;
  json rows = json::array();
  for (const auto& r : records) rows.push_back(to_json(r, false));
  out["records"] = std::move(rows);
  return out.dump(2) + "\n";
}

std::string estimates_json(const ExperimentConfig& config, const SimulationResult& result) {
  json out;
  out["config"] = serialize_config(config);
  out["seed"] = config.seed;
  out["law"] = config.law;
  out["converged"] = result.converged;
  out["events"] = result.events;
  json rows = json::array();
  for (const auto& r : result.records) rows.push_back(to_json(r, true));
  out["records"] = std::move(rows);
  return out.dump(2) + "\n";
}

std::string records_csv(const ExperimentConfig& config, const std::vector<Record>& records, bool estimate) {
  std::string out = config_comment(config);
  out += estimate ? "key,n,value,stderr,hits,trials,converged\n" : "key,n,value\n";
  for (const auto& r : records) {
    out += r.key + "," + std::to_string(r.n) + "," + fmt(r.value);
    if (estimate) {
      out += "," + fmt(r.std_error) + "," + std::to_string(r.hits) + "," + std::to_string(r.trials) + "," +
             (r.converged ? "true" : "false");
    }
    out += "\n";
  }
  return out;
}

std::vector<Record> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const json doc = json::parse(in);
  std::vector<Record> out;
  for (const auto& j : doc.at("records")) out.push_back(record_from_json(j));
  return out;
}

// ---------------------------------------------------------------------------
// Comparison

CompareReport compare(const std::vector<Record>& theory, const std::vector<Record>& estimates,
                      const CompareRules& rules) {
  CompareReport report;
  std::map<std::pair<std::string, std::size_t>, const Record*> theory_by_key;
  for (const auto& t : theory) theory_by_key[{t.key, t.n}] = &t;
  std::map<std::pair<std::string, std::size_t>, const Record*> estimate_by_key;
  for (const auto& e : estimates) estimate_by_key[{e.key, e.n}] = &e;

  for (const auto& [k, e] : estimate_by_key) {
    if (!theory_by_key.count(k)) {
      report.errors.push_back("no theory value for " + k.first + " at n=" + std::to_string(k.second));
    }
  }
  for (const auto& [k, t] : theory_by_key) {
    if (!estimate_by_key.count(k)) {
      report.errors.push_back("no estimate for " + k.first + " at n=" + std::to_string(k.second));
    }
  }

  std::map<std::string, std::vector<CompareRow>> groups;
  for (const auto& [k, e] : estimate_by_key) {
    const auto it = theory_by_key.find(k);
    if (it == theory_by_key.end()) continue;
    CompareRow row;
    row.key = k.first;
    row.n = k.second;
    row.theory = it->second->value;
    row.estimate = e->value;
    row.std_error = e->std_error;
    row.abs_gap = std::abs(row.estimate - row.theory);
    if (row.std_error > 0.0) {
      row.z = (row.estimate - row.theory) / row.std_error;
    } else if (row.abs_gap > 0.0) {
      row.z = std::copysign(std::numeric_limits<double>::infinity(), row.estimate - row.theory);
    }
    row.z_flag = std::abs(row.z) > rules.sigmas;
    if (!e->converged) row.note = "not converged";
    groups[row.key].push_back(row);
  }

  for (auto& [key, rows] : groups) {
    const std::string kind = kind_of(key);
    const bool ratio = kind == "event_prob";
    // Distance from theory and its one-sigma noise, per n.
    std::vector<double> measure, noise;
    for (const auto& r : rows) {
      if (ratio) {
        measure.push_back(r.theory > 0.0 ? std::abs(r.estimate / r.theory - 1.0) : r.abs_gap);
        noise.push_back(r.theory > 0.0 ? r.std_error / r.theory : r.std_error);
      } else {
        measure.push_back(r.abs_gap);
        noise.push_back(r.std_error);
      }
    }
    double slope = 0.0;
    if (rows.size() > 1) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        mx += std::log2(static_cast<double>(rows[i].n));
        my += measure[i];
      }
      mx /= static_cast<double>(rows.size());
      my /= static_cast<double>(rows.size());
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const double dx = std::log2(static_cast<double>(rows[i].n)) - mx;
        sxy += dx * (measure[i] - my);
        sxx += dx * dx;
      }
      slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    bool trend_ok = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      if (measure[i + 1] > measure[i] + noise[i] + noise[i + 1]) trend_ok = false;
    }

    CompareRow& last = rows.back();
    bool final_ok = false;
    std::string why;
    if (ratio) {
      const double r = last.theory > 0.0 ? last.estimate / last.theory : 0.0;
      final_ok = r >= rules.ratio_low && r <= rules.ratio_high;
      why = "ratio " + short_fmt(r);
    } else if (kind == "reduced_tail") {
      final_ok = last.estimate <= last.theory + rules.sigmas * last.std_error;
      trend_ok = true;
      why = "below bound";
    } else {
      double allowance = -1.0;
      if (kind == "regime1" || kind == "regime2" || kind == "regime3" || kind == "regime5") allowance = rules.regime_gap;
      if (kind == "regime4") allowance = rules.regime4_gap;
      if (kind == "reduced_pmf" || kind == "mrca") allowance = rules.reduced_gap;
      if (allowance < 0.0) {
        report.errors.push_back("no comparison rule for " + key);
      } else {
        final_ok = last.abs_gap <= rules.sigmas * last.std_error + allowance;
        why = "gap within " + short_fmt(rules.sigmas) + " sigma + " + short_fmt(allowance);
      }
    }
    for (auto& r : rows) r.trend_slope = slope;
    last.final_row = true;
    last.pass = final_ok && trend_ok && last.note.empty();
    std::string note = final_ok ? why : "fails: " + why;
    if (!trend_ok) note += "; gap grows along n";
    last.note = last.note.empty() ? note : last.note + "; " + note;
    report.pass = report.pass && last.pass;
    for (auto& r : rows) report.rows.push_back(r);
  }
  if (!report.errors.empty()) report.pass = false;
  return report;
}

std::string compare_csv(const CompareReport& report) {
  std::string out = "key,n,theory,estimate,stderr,z,abs_gap,trend_slope,z_flag,final,pass,note\n";
  for (const auto& r : report.rows) {
    out += r.key + "," + std::to_string(r.n) + "," + fmt(r.theory) + "," + fmt(r.estimate) + "," +
           fmt(r.std_error) + "," + fmt(r.z) + "," + fmt(r.abs_gap) + "," + fmt(r.trend_slope) + "," +
           (r.z_flag ? "true" : "false") + "," + (r.final_row ? "true" : "false") + "," +
           (r.pass ? "true" : "false") + ",\"" + r.note + "\"\n";
  }
  return out;
}

std::string compare_json(const CompareReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json j = {{"key", r.key},
              {"n", r.n},
              {"theory", r.theory},
              {"estimate", r.estimate},
              {"stderr", r.std_error},
              {"abs_gap", r.abs_gap},
              {"trend_slope", r.trend_slope},
              {"z_flag", r.z_flag},
              {"final", r.final_row},
              {"pass", r.pass},
              {"note", r.note}};
    j["z"] = std::isfinite(r.z) ? json(r.z) : json(r.z > 0 ? "inf" : "-inf");
    rows.push_back(std::move(j));
  }
  json out = {{"pass", report.pass}, {"errors", report.errors}, {"rows", std::move(rows)}};
  return out.dump(2) + "\n";
}

std::string compare_summary(const CompareReport& report) {
  std::ostringstream out;
  std::size_t keys = 0, passed = 0;
  for (const auto& r : report.rows) {
    if (!r.final_row) continue;
    ++keys;
    passed += r.pass ? 1 : 0;
    char line[512];
    std::snprintf(line, sizeof line, "%-4s %-28s n=%-6zu theory=%-12.6g estimate=%-12.6g stderr=%-10.3g z=%-8.3g %s\n",
                  r.pass ? "PASS" : "FAIL", r.key.c_str(), r.n, r.theory, r.estimate, r.std_error, r.z,
                  r.note.c_str());
    out << line;
  }
  for (const auto& e : report.errors) out << "ERROR " << e << "\n";
  out << "overall: " << (report.pass ? "PASS" : "FAIL") << " (" << passed << "/" << keys << " keys)\n";
  return out.str();
}

}  // namespace critgw
