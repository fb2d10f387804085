#pragma once

#include <iosfwd>
#include <string>

#include "dendrite_cli/config.hpp"

namespace dendrite::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

/// Table of h, elements and boundary edges for every mesh of the h list.
void cmd_mesh_stats(const RunConfig& config, std::ostream& out);
/// Spatial study; writes spatial_rates.csv and loglog_<field>.dat.
void cmd_convergence(const RunConfig& config, std::ostream& out);
/// Temporal study; writes temporal_rates.csv and loglog_tau_<field>.dat.
void cmd_temporal(const RunConfig& config, std::ostream& out);
/// Perturbation study; writes stability.csv.
void cmd_stability(const RunConfig& config, std::ostream& out);
/// One transient solve on the first mesh of the h list; writes snapshots,
/// slices and the Newton log.
void cmd_run(const RunConfig& config, std::ostream& out);

/// Output directory: $MHD_DENDRITE_OUT if set, else config.output.
[[nodiscard]] std::string output_directory(const RunConfig& config);

/// Dispatches a subcommand and maps exceptions to exit codes.
[[nodiscard]] int run_command(const std::string& name, const RunConfig& config, std::ostream& out,
                              std::ostream& err);

}  // namespace dendrite::cli
