#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chaoscomm/errors.hpp"

namespace chaoscomm::cli {

/// Flat INI-style key/value file with [section] headers and '#' comments.
/// Unknown keys are rejected so that typos fail loudly.
struct RawConfig {
    std::map<std::string, std::string> values; ///< "section.key" -> value

    static RawConfig parse_file(const std::string& path);
    static RawConfig parse_text(const std::string& text);
};

/// Resolved run configuration.  The seed is mandatory (either in the file or
/// via --seed); every output path is taken relative to out_dir.
struct RunConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    // [oscillator]
    double beta_base;
    double base_freq = 1.0;
    int steps_per_period = 2000;
    int warmup_periods = 500;
    int truncation = 60;

    // [users]
    int n_users = 2;
    std::vector<int> freq_multipliers = {1, 2};

    // [coding]
    double zeta1 = 0.2;

    // [channel]
    double snr_db = 40.0;
    std::vector<double> snr_grid; ///< from "lo:hi:step"; default 0:50:2
    std::vector<std::pair<double, double>> taps = {{1.0, 0.0}}; ///< alpha@tau
    double dispersion_delay_fraction = 0.125; ///< of the base period
    double interference_amplitude = 0.05;
    double interference_freq = 1.0;
    double interference_phase = 0.78539816339744831; // pi/4

    // [run]
    long periods = 100000;
    int message_periods = 240;
    int filter_warmup_periods = 10;
    int trace_stride = 10;
    std::string baseline_csv;

    RunConfig();

    static RunConfig from_raw(const RawConfig& raw);
    static RunConfig load(const std::string& path);
    void validate() const;
};

std::vector<double> parse_grid(const std::string& text);

} // namespace chaoscomm::cli
