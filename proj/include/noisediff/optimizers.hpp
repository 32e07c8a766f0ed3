// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noisediff/gradient.hpp"
#include "noisediff/latent.hpp"
#include "noisediff/pipeline.hpp"
#include "noisediff/scorer.hpp"

namespace noisediff {

struct NoiseDiffusionConfig {
    int max_epochs = 50;  // M
    int candidates = 50;  // N
    GradientOptions gradient;
    double v_norm_guard = 1e-12;
    /// Extension: skip epochs whose best candidate has a negative ratio
    /// instead of applying the update anyway.
    bool strict = false;
    bool parallel = true;
};

enum class BaselineMethod { pgd, mean_variance, random_sampling, random_diffusion };

std::string_view to_string(BaselineMethod method);

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::random_sampling;
    double pgd_step = 0.05;
    double pgd_radius = 0.5;
    double learning_rate = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    GradientOptions gradient;
};

/// One epoch of an optimizer run. Epoch 0 is the initial latent; fields that
/// do not apply to a method or epoch are NaN.
struct TrajectoryRow {
    int epoch = 0;
    double score = 0.0;
    double best_score = 0.0;
    double gamma = 0.0;
    double selected_ratio = 0.0;
    double grad_norm = 0.0;
    double v_norm = 0.0;
    double wall_ms = 0.0;
};

struct TrajectoryRecord {
    std::vector<TrajectoryRow> rows;
    LatentVector initial_latent;
    LatentVector final_latent;
    LatentVector best_latent;
    Sample best_sample;
    double initial_score = 0.0;
    double best_score = 0.0;
    /// False when a scorer failure cut the run short; rows hold what finished.
    bool complete = true;
    std::string failure;
};

/// Called with (epoch, current z_T) after the initial scoring and after every epoch.
using LatentObserver = std::function<void(int, const LatentVector&)>;

/// gamma = 1 - sqrt(s) for s in [0, 1].
double step_size_gamma(double score);

/// v = (sqrt(1 - gamma) - 1) z + sqrt(gamma) sigma
LatentVector step_difference(const LatentVector& z, double gamma, const LatentVector& sigma);

/// z' = sqrt(1 - gamma) z + sqrt(gamma) sigma
LatentVector apply_update(const LatentVector& z, double gamma, const LatentVector& sigma);

struct Selection {
    std::size_t index = 0;
    double ratio = 0.0;
};

/// Candidate maximizing grad . v_i / |v_i|^2, skipping |v_i|^2 < v_norm_guard,
/// lowest index on ties. degenerate_step error when every candidate is skipped.
Selection select_noise(const LatentVector& grad, const LatentVector& z, double gamma,
                       std::span<const LatentVector> candidates, double v_norm_guard, bool parallel = true);

/// The Noise Diffusion loop: score-aware step size, gradient, N fresh
/// candidates from the "candidates" stream of `rng`, gradient-guided
/// selection, distribution-preserving update, best tracking.
TrajectoryRecord run_noise_diffusion(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer,
                                     const NoiseDiffusionConfig& config, const RngStream& rng,
                                     const LatentObserver& observer = {});

TrajectoryRecord run_baseline(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer,
                              const BaselineConfig& config, int max_epochs, const RngStream& rng,
                              const LatentObserver& observer = {});

/// First epoch whose best score reaches `threshold`, or -1.
int epochs_to_reach(const TrajectoryRecord& record, double threshold);

}  // namespace noisediff
