#include "conefreq/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <sstream>

#include "conefreq/error.hpp"
#include "conefreq/solver.hpp"

namespace conefreq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_factor(const std::string& raw) {
  std::string t = trim(raw);
  double sign = 1.0;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    if (t[0] == '-') sign = -1.0;
    t = trim(t.substr(1));
  }
  if (t == "pi") return sign * kPi;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw std::invalid_argument(fmt::format("'{}' is not a number", raw));
  return sign * v;
}

bool parse_bool(const std::string& raw) {
  std::string t = trim(raw);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw std::invalid_argument(fmt::format("'{}' is not a boolean", raw));
}

long long parse_int(const std::string& raw) {
  const std::string t = trim(raw);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw std::invalid_argument(fmt::format("'{}' is not an integer", raw));
  return v;
}

std::vector<double> parse_list(const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_scalar(item));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"domain.dimension", [](RunConfig& c, const std::string& v) { c.dimension = static_cast<int>(parse_int(v)); }},
      {"domain.opening", [](RunConfig& c, const std::string& v) { c.opening = parse_scalar(v); }},
      {"mesh.h", [](RunConfig& c, const std::string& v) { c.h = parse_scalar(v); }},
      {"mesh.grading", [](RunConfig& c, const std::string& v) { c.grading = parse_scalar(v); }},
      {"mesh.r_min", [](RunConfig& c, const std::string& v) { c.r_min = parse_scalar(v); }},
      {"coefficients.preset", [](RunConfig& c, const std::string& v) { c.preset = trim(v); }},
      {"outer_data.spec", [](RunConfig& c, const std::string& v) { c.outer = trim(v); }},
      {"solver.tol", [](RunConfig& c, const std::string& v) { c.tol = parse_scalar(v); }},
      {"solver.max_iter", [](RunConfig& c, const std::string& v) { c.max_iter = static_cast<int>(parse_int(v)); }},
      {"r_grid.r_lo", [](RunConfig& c, const std::string& v) { c.r_lo = parse_scalar(v); }},
      {"r_grid.r_hi", [](RunConfig& c, const std::string& v) { c.r_hi = parse_scalar(v); }},
      {"r_grid.points", [](RunConfig& c, const std::string& v) { c.points = static_cast<int>(parse_int(v)); }},
      {"r_grid.geometric", [](RunConfig& c, const std::string& v) { c.geometric = parse_bool(v); }},
      {"frequency.doubling_R", [](RunConfig& c, const std::string& v) { c.doubling_R = parse_scalar(v); }},
      {"frequency.r1", [](RunConfig& c, const std::string& v) { c.r1 = parse_scalar(v); }},
      {"frequency.vanishing_k_max",
       [](RunConfig& c, const std::string& v) { c.vanishing_k_max = static_cast<int>(parse_int(v)); }},
      {"frequency.c1_max", [](RunConfig& c, const std::string& v) { c.c1_max = parse_scalar(v); }},
      {"blowup.lambda", [](RunConfig& c, const std::string& v) { c.lambdas = parse_list(v); }},
      {"spectral.k_max", [](RunConfig& c, const std::string& v) { c.k_max = static_cast<int>(parse_int(v)); }},
      {"spectral.cap_alpha", [](RunConfig& c, const std::string& v) { c.cap_alpha = parse_scalar(v); }},
      {"spectral.cap_k_max", [](RunConfig& c, const std::string& v) { c.cap_k_max = static_cast<int>(parse_int(v)); }},
      {"spectral.grid_n", [](RunConfig& c, const std::string& v) { c.grid_n = static_cast<int>(parse_int(v)); }},
      {"inequalities.count", [](RunConfig& c, const std::string& v) { c.ineq_count = static_cast<int>(parse_int(v)); }},
      {"inequalities.h", [](RunConfig& c, const std::string& v) { c.ineq_h = parse_scalar(v); }},
      {"inequalities.refine", [](RunConfig& c, const std::string& v) { c.ineq_refine = parse_bool(v); }},
      {"checks.dnuova_tol", [](RunConfig& c, const std::string& v) { c.dnuova_tol = parse_scalar(v); }},
      {"checks.gamma_tol", [](RunConfig& c, const std::string& v) { c.gamma_tol = parse_scalar(v); }},
      {"checks.trace_stability_tol",
       [](RunConfig& c, const std::string& v) { c.trace_stability_tol = parse_scalar(v); }},
      {"checks.margin_floor", [](RunConfig& c, const std::string& v) { c.margin_floor = parse_scalar(v); }},
      {"checks.require_hypotheses",
       [](RunConfig& c, const std::string& v) { c.require_hypotheses = parse_bool(v); }},
      {"checks.require_monotonicity",
       [](RunConfig& c, const std::string& v) { c.require_monotonicity = parse_bool(v); }},
      {"output.dir", [](RunConfig& c, const std::string& v) { c.out_dir = trim(v); }},
      {"output.svg", [](RunConfig& c, const std::string& v) { c.svg = parse_bool(v); }},
      {"run.seed",
       [](RunConfig& c, const std::string& v) {
         const long long s = parse_int(v);
         if (s < 0) throw std::invalid_argument("seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"run.stage", [](RunConfig& c, const std::string& v) { c.stage = trim(v); }},
      {"run.threads", [](RunConfig& c, const std::string& v) { c.threads = static_cast<int>(parse_int(v)); }},
  };
  return table;
}

std::string where(const RunConfig& c, const std::string& field) {
  const auto it = c.key_lines.find(field);
  if (it == c.key_lines.end()) return fmt::format("{}: {}", c.source_name, field);
  return fmt::format("{}:{}: {}", c.source_name, it->second, field);
}

void apply(RunConfig& c, const std::string& section, const std::string& key, const std::string& value) {
  const std::string field = section + "." + key;
  try {
    if (section == "coefficients" && key != "preset") {
      c.params[key] = parse_scalar(value);
      return;
    }
    const auto it = setters().find(field);
    if (it == setters().end()) throw std::invalid_argument("unknown key");
    it->second(c, value);
  } catch (const std::invalid_argument& e) {
    fail(ErrorKind::Config, fmt::format("{}: {}", where(c, field), e.what()));
  }
}

}  // namespace

double parse_scalar(const std::string& text) {
  double value = 1.0;
  char op = '*';
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '*' || text[i] == '/') {
      const double f = parse_factor(text.substr(start, i - start));
      value = op == '*' ? value * f : value / f;
      if (i < text.size()) op = text[i];
      start = i + 1;
    }
  }
  if (!std::isfinite(value)) throw std::invalid_argument(fmt::format("'{}' is not finite", text));
  return value;
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"validate", "mesh",    "solve", "freq",
                                              "spectrum", "blowup", "ineq",  "all"};
  return names;
}

double RunConfig::effective_dnuova_tol() const {
  if (dnuova_tol) return *dnuova_tol;
  const auto cs = make_preset(preset, params);
  const bool constant_weight = cs.gradA(Vec2(0.3, 0.2)).norm() == 0.0 && cs.gradA(Vec2(0.05, 0.6)).norm() == 0.0;
  return constant_weight ? 2e-2 : 5e-2;
}

void validate_config(const RunConfig& c) {
  auto bad = [&](const std::string& field, const std::string& msg) {
    fail(ErrorKind::Config, fmt::format("{}: {}", where(c, field), msg));
  };
  if (c.dimension != 2)
    bad("domain.dimension", "only planar sectors (2) are meshed; set spectral.cap_alpha for the n = 3 cap");
  if (!(c.opening > 0.0 && c.opening < 2.0 * kPi)) bad("domain.opening", "must lie in (0, 2 pi)");
  if (!(c.h > 0.0) || c.opening / c.h < 4.0) bad("mesh.h", "must be positive with at least 4 angular divisions");
  if (!(c.grading > 0.0 && c.grading < 1.0)) bad("mesh.grading", "must lie in (0, 1)");
  if (!(c.r_min > 0.0 && c.r_min < 0.1)) bad("mesh.r_min", "must lie in (0, 0.1)");
  try {
    (void)make_preset(c.preset, c.params);
  } catch (const Error& e) {
    bad("coefficients.preset", e.what());
  }
  try {
    (void)OuterData::parse(c.outer);
  } catch (const Error& e) {
    bad("outer_data.spec", e.what());
  }
  if (!(c.tol > 0.0)) bad("solver.tol", "must be positive");
  if (c.max_iter < 1) bad("solver.max_iter", "must be >= 1");
  if (c.r_lo < c.r_min)
    bad("r_grid.r_lo", fmt::format("r_lo = {} is below mesh.r_min = {}", c.r_lo, c.r_min));
  if (!(c.r_hi <= 0.8)) bad("r_grid.r_hi", "must be <= 0.8");
  if (!(c.r_lo < c.r_hi)) bad("r_grid.r_lo", "must be below r_hi");
  if (c.points < 8) bad("r_grid.points", "need at least 8 radii");
  if (!(c.doubling_R > 1.0)) bad("frequency.doubling_R", "must exceed 1");
  if (!(c.r1 > 0.0 && c.r1 <= 1.0)) bad("frequency.r1", "must lie in (0, 1]");
  if (c.vanishing_k_max < 0) bad("frequency.vanishing_k_max", "must be >= 0");
  if (!(c.c1_max > 0.0)) bad("frequency.c1_max", "must be positive");
  if (c.lambdas.size() < 3) bad("blowup.lambda", "need at least 3 values");
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    if (i > 0 && !(c.lambdas[i] < c.lambdas[i - 1])) bad("blowup.lambda", "must be decreasing");
    if (c.lambdas[i] < c.r_min / 0.8 || c.lambdas[i] > 0.5)
      bad("blowup.lambda", fmt::format("{} outside [r_min / 0.8, 0.5]", c.lambdas[i]));
  }
  if (c.k_max < 6) bad("spectral.k_max", "need at least 6 modes");
  if (!(c.cap_alpha >= 0.0 && c.cap_alpha <= kPi / 2)) bad("spectral.cap_alpha", "must lie in [0, pi/2]");
  if (c.cap_k_max < 1) bad("spectral.cap_k_max", "must be >= 1");
  if (c.grid_n < 200) bad("spectral.grid_n", "must be >= 200");
  if (c.ineq_count < 1) bad("inequalities.count", "must be >= 1");
  if (!(c.ineq_h > 0.0) || c.opening / c.ineq_h < 4.0)
    bad("inequalities.h", "must be positive with at least 4 angular divisions");
  if (c.dnuova_tol && !(*c.dnuova_tol > 0.0)) bad("checks.dnuova_tol", "must be positive");
  if (!(c.gamma_tol > 0.0)) bad("checks.gamma_tol", "must be positive");
  if (!(c.trace_stability_tol > 0.0)) bad("checks.trace_stability_tol", "must be positive");
  if (c.out_dir.empty()) bad("output.dir", "must not be empty");
  if (std::find(stage_names().begin(), stage_names().end(), c.stage) == stage_names().end())
    bad("run.stage", fmt::format("unknown stage '{}'", c.stage));
  if (c.threads < 0) bad("run.threads", "must be >= 0");
}

RunConfig parse_config(std::istream& is, const std::string& source_name) {
  std::stringstream buffer;
  buffer << is.rdbuf();
  const std::string text = buffer.str();

  RunConfig c;
  c.source_name = source_name;
  {
    std::istringstream lines(text);
    std::string line, section;
    for (int n = 1; std::getline(lines, line); ++n) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == ';' || t[0] == '#') continue;
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
      } else if (const auto eq = t.find('='); eq != std::string::npos) {
        c.key_lines.emplace(section + "." + trim(t.substr(0, eq)), n);
      }
    }
  }

  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::Config, fmt::format("{}:{}: {}", source_name, e.line(), e.message()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      fail(ErrorKind::Config, fmt::format("{}: key '{}' outside any section", source_name, section));
    for (const auto& [key, value] : body) apply(c, section, key, value.data());
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, fmt::format("cannot open config '{}'", path));
  return parse_config(in, path);
}

void set_config_value(RunConfig& config, const std::string& section, const std::string& key,
                      const std::string& value) {
  apply(config, section, key, value);
  validate_config(config);
}

}  // namespace conefreq
