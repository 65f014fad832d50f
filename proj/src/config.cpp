#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "critgw/experiment.hpp"
#include "critgw/offspring.hpp"

namespace critgw {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
T parse_value(std::string_view s, std::size_t line) {
  s = trim(s);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(line, "malformed number '" + std::string(s) + "'");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(std::string_view s, std::size_t line) {
  std::vector<T> out;
  s = trim(s);
  if (s.empty()) return out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_value<T>(s.substr(0, comma), line));
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  return out;
}

bool parse_bool(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(line, "expected true or false, got '" + std::string(s) + "'");
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::invalid_argument("config line " + std::to_string(line) + ": " + message), line_(line) {}

void ExperimentConfig::validate() const {
  const OffspringLaw parsed = OffspringLaw::parse(law);
  (void)parsed;
  if (n_grid.empty()) throw std::invalid_argument("config: n grid is empty");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
    throw std::invalid_argument("config: n grid must be strictly increasing");
  }
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("config: lambda must be nonnegative");
  }
  for (int id : regimes) {
    const RegimeSpec spec = regime_spec(id);
    spec.validate();
    for (std::size_t n : n_grid) {
      if (spec.phi(n) >= n) throw std::invalid_argument("config: phi(n) must be below n");
      (void)spec.m(n);
    }
  }
  for (double y : reduced_y) {
    if (!(y > 0.0)) throw std::invalid_argument("config: reduced y must be positive");
  }
  for (double y : mrca_y) {
    if (!(y > 0.0)) throw std::invalid_argument("config: mrca y must be positive");
  }
  if (j_max < 1) throw std::invalid_argument("config: j_max must be at least 1");
  if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("config: w must be positive");
  if (min_hits == 0) throw std::invalid_argument("config: min_hits must be positive");
  if (max_trials == 0 || block_size == 0) throw std::invalid_argument("config: trial budget must be positive");
  if (format != "csv" && format != "json") throw std::invalid_argument("config: format must be csv or json");
}

RunConfig ExperimentConfig::run_config(unsigned threads) const {
  RunConfig run;
  run.seed = seed;
  run.min_hits = min_hits;
  run.max_trials = max_trials;
  run.block_size = block_size;
  run.threads = threads;
  return run;
}

RegimeSpec ExperimentConfig::regime_spec(int id) const {
  RegimeSpec spec = regime;
  spec.id = id;
  return spec;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "law" && section != "grid" && section != "regime" && section != "reduced" &&
          section != "run" && section != "output") {
        throw ConfigError(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string where = section + "." + key;
    auto& c = config;
    if (where == "law.spec") {
      try {
        c.law = OffspringLaw::parse(value).to_string();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(line_no, e.what());
      }
    } else if (where == "grid.n") {
      c.n_grid = parse_list<std::size_t>(value, line_no);
    } else if (where == "grid.lambda") {
      c.lambdas = parse_list<double>(value, line_no);
    } else if (where == "regime.ids") {
      c.regimes = parse_list<int>(value, line_no);
    } else if (where == "regime.theta") {
      c.regime.theta = parse_value<double>(value, line_no);
    } else if (where == "regime.y") {
      c.regime.y = parse_value<double>(value, line_no);
    } else if (where == "regime.a_phi") {
      c.regime.a_phi = parse_value<double>(value, line_no);
    } else if (where == "regime.a_psi") {
      c.regime.a_psi = parse_value<double>(value, line_no);
    } else if (where == "regime.a_chi") {
      c.regime.a_chi = parse_value<double>(value, line_no);
    } else if (where == "regime.chi_zero") {
      c.regime.chi_zero = parse_bool(value, line_no);
    } else if (where == "regime.a_m") {
      c.regime.a_m = parse_value<double>(value, line_no);
    } else if (where == "reduced.y") {
      c.reduced_y = parse_list<double>(value, line_no);
    } else if (where == "reduced.j_max") {
      c.j_max = parse_value<int>(value, line_no);
    } else if (where == "reduced.mrca_y") {
      c.mrca_y = parse_list<double>(value, line_no);
    } else if (where == "run.w") {
      c.w = parse_value<double>(value, line_no);
    } else if (where == "run.seed") {
      c.seed = parse_value<std::uint64_t>(value, line_no);
    } else if (where == "run.min_hits") {
      c.min_hits = parse_value<std::uint64_t>(value, line_no);
    } else if (where == "run.max_trials") {
      c.max_trials = parse_value<std::uint64_t>(value, line_no);
    } else if (where == "run.block_size") {
      c.block_size = parse_value<std::uint64_t>(value, line_no);
    } else if (where == "output.dir") {
      c.out_dir = std::string(value);
    } else if (where == "output.format") {
      c.format = std::string(value);
    } else {
      throw ConfigError(line_no, section.empty() ? "key '" + key + "' outside a section"
                                                 : "unknown key '" + key + "' in [" + section + "]");
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[law]\n"
      << "spec = " << c.law << "\n"
      << "\n[grid]\n"
      << "n = " << join(c.n_grid) << "\n"
      << "lambda = " << join(c.lambdas) << "\n"
      << "\n[regime]\n"
      << "ids = " << join(c.regimes) << "\n"
      << "theta = " << format_double(c.regime.theta) << "\n"
      << "y = " << format_double(c.regime.y) << "\n"
      << "a_phi = " << format_double(c.regime.a_phi) << "\n"
      << "a_psi = " << format_double(c.regime.a_psi) << "\n"
      << "a_chi = " << format_double(c.regime.a_chi) << "\n"
      << "chi_zero = " << (c.regime.chi_zero ? "true" : "false") << "\n"
      << "a_m = " << format_double(c.regime.a_m) << "\n"
      << "\n[reduced]\n"
      << "y = " << join(c.reduced_y) << "\n"
      << "j_max = " << c.j_max << "\n"
      << "mrca_y = " << join(c.mrca_y) << "\n"
      << "\n[run]\n"
      << "w = " << format_double(c.w) << "\n"
      << "seed = " << c.seed << "\n"
      << "min_hits = " << c.min_hits << "\n"
      << "max_trials = " << c.max_trials << "\n"
      << "block_size = " << c.block_size << "\n"
      << "\n[output]\n"
      << "dir = " << c.out_dir << "\n"
      << "format = " << c.format << "\n";
  return out.str();
}

void write_immutable(const std::filesystem::path& path, std::string_view content) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (buf.str() == content) return;
    throw TamperError("refusing to overwrite " + path.string() + ": existing content differs");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace critgw
