// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noisediff/analysis.hpp"
#include "noisediff/config.hpp"
#include "noisediff/csv.hpp"
#include "noisediff/optimizers.hpp"

namespace noisediff {

struct SeedRun {
    std::uint64_t seed = 0;
    TrajectoryRecord record;
};

struct ExperimentResult {
    std::vector<SeedRun> runs;  // in config seed order
    bool complete() const;
};

/// Initial latent for a seed: standard normal from the "init" fork of the run stream.
LatentVector initial_latent(const ExperimentConfig& config, std::uint64_t seed);

TrajectoryRecord run_seed(const ExperimentConfig& config, const Pipeline& pipeline, std::uint64_t seed);

/// Runs every seed (OpenMP-parallel across seeds when run.parallel_seeds is set).
ExperimentResult run_experiment(const ExperimentConfig& config);

SummaryRow summarize(const ExperimentConfig& config, const SeedRun& run);

/// Writes <method>_seed<k>.csv, <method>_seed<k>_latent.csv, summary.csv and
/// resolved_config.txt into `dir`, plus an INCOMPLETE marker listing failed
/// seeds when any run was cut short.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result,
                      const std::filesystem::path& dir);

std::string trajectory_file_name(Method method, std::uint64_t seed);
std::string latent_file_name(Method method, std::uint64_t seed);

enum class SweepAxis { T, N, M };

SweepAxis parse_sweep_axis(std::string_view text);
std::string_view to_string(SweepAxis axis);

struct SweepPoint {
    int value = 0;
    double median_initial_score = 0.0;
    double median_final_best_score = 0.0;
    /// Quartiles of selected ratios; NaN when fewer than 4 are available.
    Quartiles ratio;
    bool complete = true;
};

inline constexpr const char* kSweepHeader =
    "axis,value,median_initial_score,median_final_best_score,ratio_q1,ratio_median,ratio_q3";

/// One experiment per value, written to <output_dir>/<axis>_<value>/, and
/// the per-value aggregates to <output_dir>/sweep_<axis>.csv.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<int>& values);

SweepPoint sweep_point(int value, const ExperimentResult& result);
std::string sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points);

}  // namespace noisediff
