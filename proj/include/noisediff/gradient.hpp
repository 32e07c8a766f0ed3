// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

#include "noisediff/latent.hpp"
#include "noisediff/pipeline.hpp"
#include "noisediff/scorer.hpp"

namespace noisediff {

enum class GradientMode {
    approx_constant_eps,  // treat eps as constant: dz0/dzT = sqrt(1 / alpha_bar_T)
    finite_difference,    // central differences through the full pipeline
    analytic_chain,       // exact chain rule through every DDIM step
};

std::string_view to_string(GradientMode mode);
GradientMode parse_gradient_mode(std::string_view text);

/// Scores a sample and enforces the [0, 1] contract.
double checked_score(const Scorer& scorer, std::span<const double> sample);

/// s(z_T) = scorer(decode(Omega(z_T))).
double score_latent(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer);

/// sqrt(1 / alpha_bar_T) * decoder^T * grad_sample(s). One pipeline pass and
/// no differentiation through the denoiser.
LatentVector grad_latent_approx(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer);
/// Same, reusing an already computed pipeline pass for z_T.
LatentVector grad_latent_approx(const PipelineOutput& forward, const Pipeline& pipeline, const Scorer& scorer);

/// Default FD step 1e-3 * (1 + |z|_inf).
double default_fd_step(const LatentVector& z);

/// Central differences of s over z_T; 2d pipeline passes. h <= 0 picks the default.
LatentVector grad_latent_fd(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer,
                            double h = 0.0, bool parallel = true);

/// Exact reverse-mode chain rule; needs denoiser Jacobian products and a scorer gradient.
LatentVector grad_latent_chain(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer);

struct GradientOptions {
    GradientMode mode = GradientMode::approx_constant_eps;
    double fd_step = 0.0;
    bool parallel = true;
};

/// Dispatches on options.mode; `forward` must be denoise_pipeline(z_T).
LatentVector latent_gradient(const LatentVector& z_T, const PipelineOutput& forward, const Pipeline& pipeline,
                             const Scorer& scorer, const GradientOptions& options);

}  // namespace noisediff
