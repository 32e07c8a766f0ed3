// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "noisediff/config.hpp"
#include "noisediff/error.hpp"

namespace noisediff {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string format_ms(double ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    return buf;
}

[[noreturn]] void schema_error(const std::filesystem::path& path, const std::string& message) {
    fail(ErrorCode::invalid_config, path.string() + ": " + message);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    fail(ErrorCode::invalid_config, "missing column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::invalid_config, "cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        schema_error(path, "empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split_line(line);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            continue;
        }
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            schema_error(path, "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                   " fields, expected " + std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

double parse_csv_number(const std::string& text) {
    if (text == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) {
            return v;
        }
    } catch (const std::logic_error&) {
    }
    fail(ErrorCode::invalid_config, "not a number: '" + text + "'");
}

std::string trajectory_csv(const TrajectoryRecord& record) {
    std::string out = std::string(kTrajectoryHeader) + "\n";
    for (const auto& r : record.rows) {
        out += std::to_string(r.epoch) + "," + format_number(r.score) + "," + format_number(r.best_score) + "," +
               format_number(r.gamma) + "," + format_number(r.selected_ratio) + "," + format_number(r.grad_norm) +
               "," + format_number(r.v_norm) + "," + format_ms(r.wall_ms) + "\n";
    }
    return out;
}

std::string latent_csv(const TrajectoryRecord& record) {
    std::string out = std::string(kLatentHeader) + "\n";
    const std::size_t d = record.initial_latent.dim();
    const auto at = [](const LatentVector& v, std::size_t i) {
        return i < v.dim() ? v[i] : std::numeric_limits<double>::quiet_NaN();
    };
    for (std::size_t i = 0; i < d; ++i) {
        out += std::to_string(i) + "," + format_number(record.initial_latent[i]) + "," +
               format_number(at(record.best_latent, i)) + "," + format_number(at(record.final_latent, i)) + "\n";
    }
    return out;
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    std::string header;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        header += (i ? "," : "") + t.header[i];
    }
    if (header != kTrajectoryHeader) {
        schema_error(path, "not a trajectory file (header '" + header + "')");
    }
    std::vector<TrajectoryRow> rows;
    for (const auto& c : t.rows) {
        TrajectoryRow r;
        r.epoch = static_cast<int>(parse_csv_number(c[0]));
        r.score = parse_csv_number(c[1]);
        r.best_score = parse_csv_number(c[2]);
        r.gamma = parse_csv_number(c[3]);
        r.selected_ratio = parse_csv_number(c[4]);
        r.grad_norm = parse_csv_number(c[5]);
        r.v_norm = parse_csv_number(c[6]);
        r.wall_ms = parse_csv_number(c[7]);
        rows.push_back(r);
    }
    return rows;
}

LatentColumns read_latent_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t ci = t.column("initial"), cb = t.column("best"), cf = t.column("final");
    LatentColumns cols;
    for (const auto& row : t.rows) {
        cols.initial.push_back(parse_csv_number(row[ci]));
        cols.best.push_back(parse_csv_number(row[cb]));
        cols.final.push_back(parse_csv_number(row[cf]));
    }
    return cols;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = std::string(kSummaryHeader) + "\n";
    for (const auto& r : rows) {
        out += r.method + "," + std::to_string(r.seed) + "," + format_number(r.initial_score) + "," +
               format_number(r.final_best_score) + "," + std::to_string(r.epochs_to_0_9) + "," +
               format_number(r.mean_selected_ratio) + "," + format_number(r.final_ks_statistic) + "," +
               (r.complete ? "true" : "false") + "\n";
    }
    return out;
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t cm = t.column("method"), cs = t.column("seed"), ci = t.column("initial_score"),
                      cb = t.column("final_best_score"), ce = t.column("epochs_to_0_9"),
                      cr = t.column("mean_selected_ratio"), ck = t.column("final_ks_statistic"),
                      cc = t.column("complete");
    std::vector<SummaryRow> rows;
    for (const auto& c : t.rows) {
        SummaryRow r;
        r.method = c[cm];
        r.seed = static_cast<std::uint64_t>(parse_csv_number(c[cs]));
        r.initial_score = parse_csv_number(c[ci]);
        r.final_best_score = parse_csv_number(c[cb]);
        r.epochs_to_0_9 = static_cast<int>(parse_csv_number(c[ce]));
        r.mean_selected_ratio = parse_csv_number(c[cr]);
        r.final_ks_statistic = parse_csv_number(c[ck]);
        r.complete = c[cc] == "true";
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorCode::invalid_config, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        fail(ErrorCode::invalid_config, "write failed for " + path.string());
    }
}

}  // namespace noisediff
