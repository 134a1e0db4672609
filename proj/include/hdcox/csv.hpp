#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdcox/dataset.hpp"

namespace hdcox {

/// Schema: header `time,status,z1,...,zp`; status in {0,1}; plain numeric
/// fields, comma separated.
inline SurvivalDataset read_survival_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split(line);
    if (header.size() < 3 || header[0] != "time" || header[1] != "status")
        throw std::runtime_error(path + ": expected header time,status,z1,...");
    const int p = static_cast<int>(header.size()) - 2;

    auto parse_cell = [&](const std::string& cell, int row, int col) {
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size() || errno != 0)
            throw std::runtime_error(path + ": non-numeric cell at row " + std::to_string(row) +
                                     ", column " + std::to_string(col + 1) + " ('" + cell + "')");
        return v;
    };

    std::vector<double> times;
    std::vector<bool> events;
    std::vector<double> zflat;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line);
        if (static_cast<int>(cells.size()) != p + 2)
            throw std::runtime_error(path + ": row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(p + 2));
        times.push_back(parse_cell(cells[0], row, 0));
        const double st = parse_cell(cells[1], row, 1);
        if (st != 0.0 && st != 1.0)
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": status must be 0 or 1");
        events.push_back(st == 1.0);
        for (int j = 0; j < p; ++j) zflat.push_back(parse_cell(cells[2 + j], row, 2 + j));
    }
    const int n = static_cast<int>(times.size());
    if (n < 2) throw std::runtime_error(path + ": need at least 2 data rows");

    Eigen::VectorXd t(n);
    Eigen::MatrixXd z(n, p);
    for (int i = 0; i < n; ++i) {
        t[i] = times[static_cast<std::size_t>(i)];
        for (int j = 0; j < p; ++j) z(i, j) = zflat[static_cast<std::size_t>(i) * p + j];
    }
    return make_dataset(std::move(t), std::move(events), std::move(z));
}

/// 17 significant digits so a write/read round trip preserves every value.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_survival_csv(const std::string& path, const SurvivalDataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "time,status";
    for (int j = 0; j < data.p(); ++j) out << ",z" << (j + 1);
    out << "\n";
    for (int i = 0; i < data.n(); ++i) {
        out << format_full(data.times[i]) << ',' << (data.events[i] ? 1 : 0);
        for (int j = 0; j < data.p(); ++j) out << ',' << format_full(data.covariates(i, j));
        out << "\n";
    }
}

} // namespace hdcox
