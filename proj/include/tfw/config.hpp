#pragma once

// Run configuration: plain text, one `key = value` per line, '#' starts a
// comment. Lists are comma separated. Every key is optional except `study`;
// unknown or repeated keys are errors.
//
// Model keys:    alpha beta nu hurst domain_len horizon n_modes gamma
//                init_a init_b (lists of modal coefficients)
//                {f,g,h}.kind {f,g,h}.c0 {f,g,h}.c1 {f,g,h}.amplitude
//                {sigma,rho}.kind .scale .rate .mod_amp .mod_freq .perturbation
// Sampling:      n_samples min_samples batch rel_stderr seed
// Studies:       modeling.*, fem.*, total.*, holder.*, stability.*
//                (see config_keys() for the full list)
// Output:        output (directory; the --out flag takes precedence)

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tfw/experiments.hpp"
#include "tfw/model.hpp"

namespace tfw {

struct RunConfig {
  std::string study;  // modeling-error, fem-error, holder, stability, special-selftest
  ModelSpec model = benchmark_model();
  experiments::McOptions mc;
  experiments::ModelingErrorOptions modeling;
  experiments::FemErrorOptions fem;
  bool total_error = true;  // fem-error also runs the fixed-h tau-refinement study
  experiments::TotalErrorOptions total;
  experiments::HolderOptions holder;
  experiments::StabilityOptions stability;
  std::optional<std::string> output;
};

const std::vector<std::string>& study_names();

/// Every accepted key, in documentation order.
std::vector<std::string> config_keys();

/// Parses and validates. Throws ConfigError with the 1-based line number for
/// syntax, unknown keys and malformed values, and without a line number when
/// the assembled model violates an invariant.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace tfw
