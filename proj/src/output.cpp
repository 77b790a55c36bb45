#include "jetflow/output.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace jetflow::cli {

std::vector<std::string> trajectory_columns(std::size_t n)
{
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 1; i <= n; ++i) cols.push_back("q" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) cols.push_back("p" + std::to_string(i));
    for (const char* c : {"z", "H", "S", "energy_rate", "entropy_rate"}) cols.emplace_back(c);
    return cols;
}

Table trajectory_table(const Trajectory& traj, std::size_t stride)
{
    if (stride == 0) stride = 1;
    const std::size_t n = traj.states.empty() ? 1 : traj.states.front().n();
    Table table{trajectory_columns(n), {}};
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (k % stride != 0 && k + 1 != traj.size()) continue;
        std::vector<double> row{traj.times[k]};
        const Vector& c = traj.states[k].coords();
        row.insert(row.end(), c.data(), c.data() + c.size());
        row.push_back(traj.hamiltonian[k]);
        row.push_back(traj.entropy[k]);
        row.push_back(traj.energy_rate[k]);
        row.push_back(traj.entropy_rate[k]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

void write_csv(std::ostream& out, const Table& table)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    std::string line;
    for (const auto& row : table.rows) {
        line.clear();
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += ',';
            line += format_double(row[i]);
        }
        line += '\n';
        out << line;
    }
}

void write_json(std::ostream& out, const Table& table, const std::vector<std::pair<std::string, std::string>>& meta)
{
    nlohmann::json doc;
    doc["meta"] = nlohmann::json::object();
    for (const auto& [key, value] : meta) doc["meta"][key] = value;
    doc["columns"] = table.columns;
    auto rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        auto r = nlohmann::json::array();
        for (double v : row) {
            if (std::isfinite(v)) r.push_back(v);
            else r.push_back(nullptr);
        }
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(1) << '\n';
}

void write_table(const std::string& path, const std::string& format, const Table& table,
                 const std::vector<std::pair<std::string, std::string>>& meta)
{
    if (format != "csv" && format != "json") throw std::invalid_argument("unknown output format '" + format + "'");
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!path.empty()) {
        file.open(path);
        if (!file) throw std::runtime_error("cannot write '" + path + "'");
        out = &file;
    }
    if (format == "csv") write_csv(*out, table);
    else write_json(*out, table, meta);
    out->flush();
    if (!*out) throw std::runtime_error("error while writing '" + (path.empty() ? "<stdout>" : path) + "'");
}

std::string report_json(const VerifyReport& report, const std::string& system, unsigned long long seed)
{
    nlohmann::json doc;
    doc["system"] = system;
    doc["seed"] = seed;
    doc["pass"] = report.pass();
    auto results = nlohmann::json::array();
    for (const auto& r : report.results) {
        nlohmann::json entry;
        entry["identity"] = r.identity;
        if (std::isfinite(r.max_residual)) entry["max_residual"] = r.max_residual;
        else entry["max_residual"] = nullptr;
        entry["threshold"] = r.threshold;
        entry["pass"] = r.pass;
        results.push_back(std::move(entry));
    }
    doc["results"] = std::move(results);
    return doc.dump(2) + "\n";
}

}  // namespace jetflow::cli
