// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "noisediff/latent.hpp"

namespace noisediff {

/// Variance schedule for T denoising steps. Index t runs 1..T for betas and
/// alphas (stored 0-based), and 0..T for alpha_bar with alpha_bar(0) == 1.
class NoiseSchedule {
public:
    /// Validates 0 < beta < 1 and builds alpha_bar as the running product.
    static NoiseSchedule from_betas(std::vector<double> betas);
    /// Zero-step schedule: denoising is the identity map.
    static NoiseSchedule degenerate();

    int steps() const noexcept { return static_cast<int>(betas_.size()); }
    double beta(int t) const;
    double alpha(int t) const;
    double alpha_bar(int t) const;

    std::span<const double> betas() const noexcept { return betas_; }
    std::span<const double> alphas() const noexcept { return alphas_; }
    std::span<const double> alpha_bars() const noexcept { return alpha_bars_; }

private:
    NoiseSchedule() : alpha_bars_{1.0} {}

    std::vector<double> betas_;
    std::vector<double> alphas_;
    std::vector<double> alpha_bars_;
};

/// Linear beta ramp from beta_start to beta_end over exactly T steps.
NoiseSchedule build_schedule(int steps, double beta_start, double beta_end);

/// Linear ramp over `train_steps` fine steps, sampled at the T evenly spaced
/// DDIM timesteps k * train_steps / T. The returned schedule's alpha_bar(t)
/// equals the fine schedule's cumulative product at timestep t * train_steps / T.
NoiseSchedule build_ddim_schedule(int steps, double beta_start, double beta_end, int train_steps);

/// sqrt(alpha_bar_t) * z0 + sqrt(1 - alpha_bar_t) * noise
LatentVector forward_diffuse(const LatentVector& z0, int t, const LatentVector& noise,
                             const NoiseSchedule& schedule);

/// One deterministic DDIM step t -> t-1 given the noise prediction eps.
LatentVector ddim_step(const LatentVector& z_t, int t, const LatentVector& eps,
                       const NoiseSchedule& schedule);

/// Coefficients of z_{t-1} = a * z_t + b * eps.
struct DdimCoefficients {
    double latent;
    double noise;
};
DdimCoefficients ddim_coefficients(int t, const NoiseSchedule& schedule);

}  // namespace noisediff
