#pragma once

#include <string>
#include <vector>

#include "chaoscomm/cli/config.hpp"
#include "chaoscomm/metrics.hpp"

namespace chaoscomm::cli {

inline constexpr const char* kToolVersion = "chaoscomm 1.0.0";

/// Result of one experiment command: files written under config.out_dir plus
/// the manifest (written as <experiment>_manifest.json).  Re-running any
/// command from the same config reproduces the CSV outputs byte-for-byte;
/// the manifest additionally records wall time, which may differ.
struct RunManifest {
    std::string experiment;
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;
    std::string manifest_path;
};

RunManifest cmd_return_maps(const RunConfig& config);
RunManifest cmd_received_map(const RunConfig& config);
RunManifest cmd_sweep_snr(const RunConfig& config);
RunManifest cmd_matched_filter(const RunConfig& config);
RunManifest cmd_lyapunov(const RunConfig& config);
RunManifest cmd_dispersion(const RunConfig& config);
RunManifest cmd_interference(const RunConfig& config);
RunManifest cmd_overlay_external(const RunConfig& config);

/// Dispatch by experiment name; throws ConfigError for unknown names.
RunManifest run_command(const std::string& name, const RunConfig& config);

/// The SNR sweep rows, exposed for tests and for overlay merging.
std::vector<RateReport> sweep_snr_rows(const RunConfig& config);

/// Exit codes: 0 success, 2 config error, 3 numerical failure.
int cli_main(int argc, const char* const* argv);

} // namespace chaoscomm::cli
