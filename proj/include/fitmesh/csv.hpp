#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "fitmesh/convergence.hpp"
#include "fitmesh/discretization.hpp"
#include "fitmesh/errors.hpp"
#include "fitmesh/mesh.hpp"

namespace fitmesh {

/// Three-significant-digit scientific notation with a sub-unit mantissa,
/// e.g. 0.0153 -> "0.153E-01" and 1.37136 -> "0.137E+01".
inline std::string format_table_float(double v) {
    if (v == 0.0) return "0.000E+00";
    const bool negative = v < 0.0;
    double a = std::abs(v);
    int exponent = static_cast<int>(std::floor(std::log10(a))) + 1;
    double mantissa = a / std::pow(10.0, exponent);
    char digits[16];
    std::snprintf(digits, sizeof digits, "%.3f", mantissa);
    if (digits[0] == '1') { // rounding carried past 1.000
        ++exponent;
        std::snprintf(digits, sizeof digits, "%.3f", 0.1);
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%sE%+03d", negative ? "-" : "", digits, exponent);
    return buf;
}

/// Round-trip-exact decimal rendering used for the full-precision columns.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Write `content` to `path` atomically (temp file in the same directory,
/// then rename). Throws IoError on any filesystem failure.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    try {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
            out << content;
            out.flush();
            if (!out) throw IoError("write failed for " + tmp.string());
        }
        fs::rename(tmp, path);
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("filesystem error: ") + e.what());
    }
}

/// Mesh audit dump: one row per point with the left step and a flag marking
/// membership in the mesh-change set J (h undefined at j = 0, written as 0).
inline std::string mesh_csv(const SpaceMesh& mesh) {
    std::string out = "j,x,h,in_J\n";
    for (int j = 0; j <= mesh.intervals(); ++j) {
        const double h = j == 0 ? 0.0 : mesh.step(j);
        const bool in_change_set =
            std::find(mesh.change_set.begin(), mesh.change_set.end(), j) != mesh.change_set.end();
        out += std::to_string(j) + "," + format_full(mesh.points[static_cast<std::size_t>(j)]) + "," +
               format_full(h) + "," + (in_change_set ? "1" : "0") + "\n";
    }
    return out;
}

/// Full solution dump, row-major in time then space: t, x, u_1, ..., u_n.
inline std::string grid_csv(const GridFunction& grid) {
    std::string out = "t,x";
    for (int i = 1; i <= grid.components; ++i) out += ",u" + std::to_string(i);
    out += "\n";
    for (int k = 0; k < grid.time_points(); ++k)
        for (int j = 0; j < grid.space_points(); ++j) {
            out += format_full(grid.time.points[static_cast<std::size_t>(k)]) + "," +
                   format_full(grid.space.points[static_cast<std::size_t>(j)]);
            for (int i = 0; i < grid.components; ++i) out += "," + format_full(grid.value(k, j, i));
            out += "\n";
        }
    return out;
}

/// Two-mesh table in the familiar report layout: one row per eta, one column
/// pair (display + full precision) per resolution, footer rows D, p, C and
/// the scalar p*, C* lines.
inline std::string report_csv(const ConvergenceReport& report) {
    if (report.etas.empty()) throw ConfigError("report: eta list is empty");
    if (report.differences.size() != report.etas.size())
        throw ConfigError("report: difference table is incomplete");

    const char* res_name = report.axis == SweepAxis::time ? "M" : "N";
    const char* fixed_name = report.axis == SweepAxis::time ? "N" : "M";
    const std::size_t R = report.resolutions.size();

    std::string out;
    out += std::string("axis,") + (report.axis == SweepAxis::time ? "time" : "space") + "\n";
    out += std::string("fixed_") + fixed_name + "," + std::to_string(report.fixed_resolution) + "\n";

    out += "eta";
    for (int r : report.resolutions) {
        out += std::string(",") + res_name + std::to_string(r);
        out += std::string(",") + res_name + std::to_string(r) + "_full";
    }
    out += "\n";

    auto append_row = [&](const std::string& label, const std::vector<double>& row) {
        out += label;
        for (std::size_t r = 0; r < R; ++r) {
            if (r < row.size())
                out += "," + format_table_float(row[r]) + "," + format_full(row[r]);
            else
                out += ",,";
        }
        out += "\n";
    };

    for (std::size_t e = 0; e < report.etas.size(); ++e)
        append_row(report.eta_labels[e], report.differences[e]);
    append_row("D", report.uniform_differences);
    append_row("p", report.orders);
    append_row("C", report.constants);
    out += "p*," + format_table_float(report.uniform_order) + "," + format_full(report.uniform_order) + "\n";
    out += "C*," + format_table_float(report.uniform_constant) + "," + format_full(report.uniform_constant) + "\n";
    return out;
}

} // namespace fitmesh
