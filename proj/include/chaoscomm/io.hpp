#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "chaoscomm/oscillator.hpp"

namespace chaoscomm {

/// Decimal rendering of a double at 17 significant digits (round-trip safe);
/// the fixed format keeps re-runs byte-identical.
std::string format_double(double v);

/// Minimal CSV writer with the 17-digit float convention.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    void header(const std::vector<std::string>& names);
    void field(double v);
    void field(long v);
    void field(int v) { field(static_cast<long>(v)); }
    void field(const std::string& v);
    void end_row();

private:
    std::ofstream out_;
    bool row_started_ = false;
    void sep();
};

/// Trajectory export: columns t,x,xdot,s.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

} // namespace chaoscomm
