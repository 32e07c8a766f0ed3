// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace noisediff {

/// Mean best-score curve for one method across its seed files.
struct PlotSeries {
    std::string label;
    std::vector<double> mean_best;  // indexed by epoch
    std::size_t files = 0;
};

/// Groups trajectory files by the name before "_seed". A summary.csv is
/// expanded to the trajectory files it lists next to it. Schema mismatches
/// and an empty input list raise invalid_config.
std::vector<PlotSeries> load_plot_series(const std::vector<std::filesystem::path>& inputs);

/// Best score versus epoch, one polyline per series, y axis fixed to [0, 1].
std::string render_svg(const std::vector<PlotSeries>& series);

/// Human-readable diagnostics for one trajectory file and, if present, its
/// sibling latent file.
std::string diagnose_report(const std::filesystem::path& trajectory_csv);

}  // namespace noisediff
