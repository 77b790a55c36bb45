#pragma once

// Flat tables and their CSV / JSON writers.

#include "jetflow/integrators.hpp"
#include "jetflow/verify.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace jetflow::cli {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// t, q1..qn, p1..pn, z, H, S, energy_rate, entropy_rate.
std::vector<std::string> trajectory_columns(std::size_t n);
/// Every stride-th sample; the last sample is always kept.
Table trajectory_table(const Trajectory& traj, std::size_t stride = 1);

/// 17 significant digits, dot decimal separator regardless of locale; nan/inf spelled out.
std::string format_double(double v);

void write_csv(std::ostream& out, const Table& table);
/// {"meta": {...}, "columns": [...], "rows": [[...], ...]}; non-finite values become null.
void write_json(std::ostream& out, const Table& table, const std::vector<std::pair<std::string, std::string>>& meta);
/// Writes to `path`, or to stdout when it is empty.
void write_table(const std::string& path, const std::string& format, const Table& table,
                 const std::vector<std::pair<std::string, std::string>>& meta);

/// {"system", "seed", "pass", "results": [{identity, max_residual, threshold, pass}]}.
std::string report_json(const VerifyReport& report, const std::string& system, unsigned long long seed);

}  // namespace jetflow::cli
