#include "chaoscomm/io.hpp"

#include <cstdio>

#include "chaoscomm/errors.hpp"

namespace chaoscomm {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
    if (!out_)
        throw ConfigError("cannot open output file " + path);
}

void CsvWriter::sep() {
    if (row_started_)
        out_ << ',';
    row_started_ = true;
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (const auto& n : names) {
        sep();
        out_ << n;
    }
    end_row();
}

void CsvWriter::field(double v) {
    sep();
    out_ << format_double(v);
}

void CsvWriter::field(long v) {
    sep();
    out_ << v;
}

void CsvWriter::field(const std::string& v) {
    sep();
    out_ << v;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_started_ = false;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    CsvWriter csv(path);
    csv.header({"t", "x", "xdot", "s"});
    for (const TrajectorySample& s : traj.samples) {
        csv.field(s.t);
        csv.field(s.x);
        csv.field(s.xdot);
        csv.field(s.s);
        csv.end_row();
    }
}

} // namespace chaoscomm
