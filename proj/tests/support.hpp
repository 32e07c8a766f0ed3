// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "noisediff/config.hpp"
#include "noisediff/denoiser.hpp"
#include "noisediff/latent.hpp"
#include "noisediff/pipeline.hpp"
#include "noisediff/schedule.hpp"

namespace noisediff::test {

inline double rel_error(std::span<const double> a, std::span<const double> b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

inline Pipeline constant_pipeline(std::size_t dim, int steps, double eps_value = 0.3) {
    Pipeline p;
    std::vector<double> eps(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        eps[i] = eps_value * (1.0 + 0.1 * static_cast<double>(i));
    }
    p.model = std::make_shared<ConstantDenoiser>(LatentVector(eps));
    p.schedule = steps == 0 ? NoiseSchedule::degenerate() : build_schedule(steps, 1e-4, 0.02);
    p.decoder = std::make_shared<IdentityDecoder>(dim);
    return p;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("noisediff_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Drops the last (wall_ms) column of every line.
inline std::string without_wall_ms(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        out += line.substr(0, line.rfind(',')) + "\n";
    }
    return out;
}

/// The synthetic comparison benchmark: d = 16, 4-component mixture, two
/// attribute groups, T = 10, M = N = 50, 25 seeds.
inline ExperimentConfig benchmark_config() {
    ExperimentConfig c;
    c.dim = 16;
    c.steps = 10;
    c.epochs = 50;
    c.candidates = 50;
    c.seeds.clear();
    for (std::uint64_t s = 0; s < 25; ++s) {
        c.seeds.push_back(s);
    }
    return c;
}

}  // namespace noisediff::test
