#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conefreq/coefficients.hpp"
#include "conefreq/types.hpp"

namespace conefreq {

// Pipeline configuration. The file format is sectioned key = value text;
// see README.md for the grammar and every recognized key.
struct RunConfig {
  // [domain]
  int dimension = 2;
  double opening = kPi / 2;
  // [mesh]
  double h = 0.02;
  double grading = 0.7;
  double r_min = 1e-3;
  // [coefficients]
  std::string preset = "constant";
  ParamTable params;
  // [outer_data]
  std::string outer = "eigen:2";
  // [solver]
  double tol = 1e-10;
  int max_iter = 50;
  // [r_grid]
  double r_lo = 0.05;
  double r_hi = 0.8;
  int points = 12;
  bool geometric = true;
  // [frequency]
  double doubling_R = 2.0;
  double r1 = 0.5;
  int vanishing_k_max = 6;
  double c1_max = 1e3;
  // [blowup]
  std::vector<double> lambdas{0.4, 0.2, 0.1};
  // [spectral]
  int k_max = 8;
  double cap_alpha = 0.0;  // > 0 also computes the axisymmetric n = 3 cap spectrum
  int cap_k_max = 3;
  int grid_n = 2000;
  // [inequalities]
  int ineq_count = 100;
  double ineq_h = 0.05;     // mesh size of the inequality corpus
  bool ineq_refine = true;  // rerun the suite at h/2 and compare the trace constant
  // [checks]
  std::optional<double> dnuova_tol;  // default 2e-2 for constant weights, 5e-2 otherwise
  double gamma_tol = 5e-2;
  double trace_stability_tol = 0.2;
  double margin_floor = -1e-10;
  bool require_hypotheses = true;
  bool require_monotonicity = true;
  // [output]
  std::string out_dir = "conefreq_out";
  bool svg = true;
  // [run]
  std::uint64_t seed = 42;
  std::string stage = "all";
  int threads = 0;

  // "section.key" -> 1-based line in the source file, for diagnostics.
  std::map<std::string, int> key_lines;
  std::string source_name = "<defaults>";

  double effective_dnuova_tol() const;
};

// Parses and validates; errors are ErrorKind::Config with "line N" or
// "[section] key" context.
RunConfig parse_config(std::istream& is, const std::string& source_name = "<config>");
RunConfig load_config(const std::string& path);

// Applies one override such as ("output", "dir", "/tmp/x"), then revalidates.
void set_config_value(RunConfig& config, const std::string& section, const std::string& key,
                      const std::string& value);

void validate_config(const RunConfig& config);

// Number, "pi", or products/quotients of those ("2*pi/3", "pi/2").
double parse_scalar(const std::string& text);

const std::vector<std::string>& stage_names();

}  // namespace conefreq
