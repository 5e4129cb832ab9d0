#include "contactor/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "contactor/errors.hpp"

namespace contactor {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_csv(const Trajectory& traj,
               const std::vector<std::string>& state_names,
               const std::vector<std::string>& multiplier_names,
               const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF endings on every platform
    if (!out)
        throw SchemaError("/", "cannot open '" + path + "' for writing");
    out << "t";
    for (const auto& s : state_names)
        out << "," << s;
    for (const auto& m : multiplier_names)
        out << "," << m;
    for (const auto& [key, values] : traj.diagnostics)
        out << ",diag:" << key;
    out << "\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << fmt17(traj.times[i]);
        const Vec& x = traj.states[i];
        for (int j = 0; j < x.size(); ++j)
            out << "," << fmt17(x(j));
        if (!traj.multipliers.empty()) {
            const Vec& lam = traj.multipliers[i];
            for (int j = 0; j < lam.size(); ++j)
                out << "," << fmt17(lam(j));
        }
        for (const auto& [key, values] : traj.diagnostics)
            out << "," << fmt17(values[i]);
        out << "\n";
    }
}

Trajectory read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SchemaError("/", "cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header))
        throw SchemaError("/", "empty CSV '" + path + "'");
    std::vector<std::string> columns;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ','))
            columns.push_back(col);
    }
    if (columns.empty() || columns[0] != "t")
        throw SchemaError("/", "CSV must start with a 't' column");
    std::vector<int> diag_cols;
    std::vector<std::string> diag_names;
    int state_cols = 0;
    for (std::size_t c = 1; c < columns.size(); ++c) {
        if (columns[c].rfind("diag:", 0) == 0) {
            diag_cols.push_back(static_cast<int>(c));
            diag_names.push_back(columns[c].substr(5));
        } else {
            ++state_cols;
        }
    }
    Trajectory traj;
    for (const auto& name : diag_names)
        traj.diagnostics[name] = {};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        if (row.size() != columns.size())
            throw SchemaError("/", "ragged CSV row in '" + path + "'");
        traj.times.push_back(row[0]);
        Vec x(state_cols);
        for (int j = 0; j < state_cols; ++j)
            x(j) = row[static_cast<std::size_t>(1 + j)];
        traj.states.push_back(x);
        for (std::size_t d = 0; d < diag_cols.size(); ++d)
            traj.diagnostics[diag_names[d]].push_back(
                row[static_cast<std::size_t>(diag_cols[d])]);
    }
    return traj;
}

} // namespace contactor
