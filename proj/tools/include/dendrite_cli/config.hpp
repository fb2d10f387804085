#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dendrite/analysis.hpp"

namespace dendrite::cli {

/// Everything a study or run needs, after defaults and validation.
struct RunConfig {
  bool has_case = false;  // set when the file names a case explicitly
  CaseId case_id = CaseId::ex2;
  int order = 2;
  std::vector<double> h_list{0.2, 0.15, 0.1, 0.05};
  double tau = 1e-3;
  std::vector<double> tau_list{0.1, 0.05, 0.025, 0.0125};
  double final_time = 1.0;
  std::string output = "out";
  std::uint64_t seed = 20240601;
  std::vector<double> eps_list{0.01, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4};
  RandomDistribution distribution = RandomDistribution::uniform;
  bool deterministic = false;
  int jobs = 1;
  std::vector<double> snapshot_times;  // empty: final time only
  double slice_y = 0.5;
  int slice_points = 101;

  std::string preset = "nondimensional";
  ModelParameters params = ModelParameters::nondimensional();
  NewtonOptions newton;
  AssemblyOptions assembly;

  /// Throws ValidationError on any inconsistent value.
  void validate() const;
};

/// Parses the flat `key = value` format with `[section]` headers
/// (sections: study, model, newton). Unknown keys are rejected.
[[nodiscard]] RunConfig parse_config(std::istream& in);
[[nodiscard]] RunConfig load_config(const std::string& path);

/// Every key with its resolved value; parse_config(write) reproduces the config.
void write_resolved_config(std::ostream& out, const RunConfig& config);

}  // namespace dendrite::cli
