// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/schedule.hpp"

#include <cmath>
#include <string>

#include "noisediff/error.hpp"

namespace noisediff {

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
    NoiseSchedule s;
    s.alphas_.reserve(betas.size());
    s.alpha_bars_.reserve(betas.size() + 1);
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const double b = betas[i];
        require(std::isfinite(b) && b > 0.0 && b < 1.0, ErrorCode::invalid_schedule,
                "beta[" + std::to_string(i + 1) + "] must lie in (0, 1)");
        s.alphas_.push_back(1.0 - b);
        s.alpha_bars_.push_back(s.alpha_bars_.back() * s.alphas_.back());
    }
    s.betas_ = std::move(betas);
    return s;
}

NoiseSchedule NoiseSchedule::degenerate() {
    return NoiseSchedule();
}

double NoiseSchedule::beta(int t) const {
    require(t >= 1 && t <= steps(), ErrorCode::out_of_range, "beta index " + std::to_string(t));
    return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha(int t) const {
    require(t >= 1 && t <= steps(), ErrorCode::out_of_range, "alpha index " + std::to_string(t));
    return alphas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
    require(t >= 0 && t <= steps(), ErrorCode::out_of_range,
            "timestep " + std::to_string(t) + " outside [0, " + std::to_string(steps()) + "]");
    return alpha_bars_[static_cast<std::size_t>(t)];
}

namespace {

void check_ramp(int steps, double beta_start, double beta_end) {
    require(steps >= 1, ErrorCode::invalid_schedule, "schedule needs T >= 1");
    require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0, ErrorCode::invalid_schedule,
            "need 0 < beta_start <= beta_end < 1");
}

std::vector<double> linear_ramp(int steps, double beta_start, double beta_end) {
    std::vector<double> betas(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        betas[static_cast<std::size_t>(i)] = beta_start + (beta_end - beta_start) * frac;
    }
    return betas;
}

}  // namespace

NoiseSchedule build_schedule(int steps, double beta_start, double beta_end) {
    check_ramp(steps, beta_start, beta_end);
    return NoiseSchedule::from_betas(linear_ramp(steps, beta_start, beta_end));
}

NoiseSchedule build_ddim_schedule(int steps, double beta_start, double beta_end, int train_steps) {
    check_ramp(steps, beta_start, beta_end);
    require(train_steps >= steps, ErrorCode::invalid_schedule, "train_steps must be >= T");
    const NoiseSchedule fine = build_schedule(train_steps, beta_start, beta_end);
    std::vector<double> betas(static_cast<std::size_t>(steps));
    double prev = 1.0;
    for (int k = 1; k <= steps; ++k) {
        const int tau = static_cast<int>(static_cast<long long>(k) * train_steps / steps);
        const double ab = fine.alpha_bar(tau);
        betas[static_cast<std::size_t>(k - 1)] = 1.0 - ab / prev;
        prev = ab;
    }
    return NoiseSchedule::from_betas(std::move(betas));
}

LatentVector forward_diffuse(const LatentVector& z0, int t, const LatentVector& noise,
                             const NoiseSchedule& schedule) {
    require_same_dim(z0.dim(), noise.dim(), "forward_diffuse");
    const double ab = schedule.alpha_bar(t);
    const double a = std::sqrt(ab);
    const double b = std::sqrt(1.0 - ab);
    std::vector<double> out(z0.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a * z0[i] + b * noise[i];
    }
    return LatentVector(std::move(out));
}

DdimCoefficients ddim_coefficients(int t, const NoiseSchedule& schedule) {
    require(t >= 1 && t <= schedule.steps(), ErrorCode::out_of_range,
            "ddim_step needs 1 <= t <= T, got " + std::to_string(t));
    const double ab_t = schedule.alpha_bar(t);
    const double ab_prev = schedule.alpha_bar(t - 1);
    const double scale = std::sqrt(ab_prev / ab_t);
    return {scale, std::sqrt(1.0 - ab_prev) - scale * std::sqrt(1.0 - ab_t)};
}

LatentVector ddim_step(const LatentVector& z_t, int t, const LatentVector& eps,
                       const NoiseSchedule& schedule) {
    require_same_dim(z_t.dim(), eps.dim(), "ddim_step");
    require(t >= 1 && t <= schedule.steps(), ErrorCode::out_of_range,
            "ddim_step needs 1 <= t <= T, got " + std::to_string(t));
    const double ab_t = schedule.alpha_bar(t);
    const double ab_prev = schedule.alpha_bar(t - 1);
    const double scale = std::sqrt(ab_prev / ab_t);
    const double eps_out = std::sqrt(1.0 - ab_t);
    const double eps_in = std::sqrt(1.0 - ab_prev);
    std::vector<double> out(z_t.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = scale * (z_t[i] - eps_out * eps[i]) + eps_in * eps[i];
    }
    return LatentVector(std::move(out));
}

}  // namespace noisediff
