// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noisediff/optimizers.hpp"

namespace noisediff {

inline constexpr const char* kTrajectoryHeader =
    "epoch,score,best_score,gamma,selected_ratio,grad_norm,v_norm,wall_ms";
inline constexpr const char* kLatentHeader = "index,initial,best,final";
inline constexpr const char* kSummaryHeader =
    "method,seed,initial_score,final_best_score,epochs_to_0_9,mean_selected_ratio,final_ks_statistic,complete";

/// Plain comma-separated table; no quoting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position, or invalid_config if missing.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::string trajectory_csv(const TrajectoryRecord& record);
std::string latent_csv(const TrajectoryRecord& record);

/// Parses a trajectory file; the header must match exactly.
std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path);

struct LatentColumns {
    std::vector<double> initial;
    std::vector<double> best;
    std::vector<double> final;
};

LatentColumns read_latent_csv(const std::filesystem::path& path);

struct SummaryRow {
    std::string method;
    std::uint64_t seed = 0;
    double initial_score = 0.0;
    double final_best_score = 0.0;
    int epochs_to_0_9 = -1;
    double mean_selected_ratio = 0.0;
    double final_ks_statistic = 0.0;
    bool complete = true;
};

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

double parse_csv_number(const std::string& text);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace noisediff
