// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/gradient.hpp"

#include <cmath>
#include <string>

#include "noisediff/error.hpp"
#include "noisediff/kernels.hpp"

namespace noisediff {

std::string_view to_string(GradientMode mode) {
    switch (mode) {
        case GradientMode::approx_constant_eps: return "approx-constant-eps";
        case GradientMode::finite_difference: return "finite-difference";
        case GradientMode::analytic_chain: return "analytic-chain";
    }
    return "unknown";
}

GradientMode parse_gradient_mode(std::string_view text) {
    if (text == "approx-constant-eps") return GradientMode::approx_constant_eps;
    if (text == "finite-difference") return GradientMode::finite_difference;
    if (text == "analytic-chain") return GradientMode::analytic_chain;
    fail(ErrorCode::invalid_config, "unknown gradient mode '" + std::string(text) + "'");
}

double checked_score(const Scorer& scorer, std::span<const double> sample) {
    const double s = scorer.score(sample);
    if (!(s >= 0.0 && s <= 1.0)) {
        fail(ErrorCode::scorer_contract,
             scorer.name() + " returned " + std::to_string(s) + " outside [0, 1]");
    }
    return s;
}

double score_latent(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer) {
    const PipelineOutput out = denoise_pipeline(z_T, pipeline);
    return checked_score(scorer, out.sample);
}

namespace {

std::vector<double> sample_gradient(const Scorer& scorer, std::span<const double> sample) {
    auto g = scorer.gradient(sample);
    if (!g) {
        fail(ErrorCode::gradient_unavailable, scorer.name() + " has no analytic gradient");
    }
    require_same_dim(g->size(), sample.size(), "scorer gradient");
    return std::move(*g);
}

}  // namespace

LatentVector grad_latent_approx(const PipelineOutput& forward, const Pipeline& pipeline, const Scorer& scorer) {
    const std::vector<double> g = sample_gradient(scorer, forward.sample);
    const LatentVector back = pipeline.decoder->adjoint(forward.z0, g);
    const double scale = std::sqrt(1.0 / pipeline.schedule.alpha_bar(pipeline.schedule.steps()));
    std::vector<double> out(back.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = scale * back[i];
    }
    return LatentVector(std::move(out));
}

LatentVector grad_latent_approx(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer) {
    return grad_latent_approx(denoise_pipeline(z_T, pipeline), pipeline, scorer);
}

double default_fd_step(const LatentVector& z) {
    return 1e-3 * (1.0 + max_abs(z.values()));
}

LatentVector grad_latent_fd(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer, double h,
                            bool parallel) {
    const double step = h > 0.0 ? h : default_fd_step(z_T);
    const kernels::ScalarField f = [&](std::span<const double> x) {
        const PipelineOutput out = denoise_pipeline(LatentVector(std::vector<double>(x.begin(), x.end())), pipeline);
        return checked_score(scorer, out.sample);
    };
    std::vector<double> grad(z_T.dim());
    if (parallel) {
        kernels::parallel::central_difference(f, z_T.values(), step, grad);
    } else {
        kernels::serial::central_difference(f, z_T.values(), step, grad);
    }
    return LatentVector(std::move(grad));
}

LatentVector grad_latent_chain(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer) {
    const NoiseSchedule& sched = pipeline.schedule;
    const int steps = sched.steps();
    std::vector<LatentVector> trajectory(static_cast<std::size_t>(steps) + 1);
    trajectory[static_cast<std::size_t>(steps)] = z_T;
    for (int t = steps; t >= 1; --t) {
        const LatentVector& z = trajectory[static_cast<std::size_t>(t)];
        const LatentVector eps = cfg_predict(*pipeline.model, z, t, pipeline.guidance, sched);
        trajectory[static_cast<std::size_t>(t - 1)] = ddim_step(z, t, eps, sched);
    }
    const LatentVector& z0 = trajectory.front();
    const Sample sample = pipeline.decoder->decode(z0);
    LatentVector cot = pipeline.decoder->adjoint(z0, sample_gradient(scorer, sample));
    for (int t = 1; t <= steps; ++t) {
        const DdimCoefficients c = ddim_coefficients(t, sched);
        const auto jt = cfg_predict_vjp(*pipeline.model, trajectory[static_cast<std::size_t>(t)], t,
                                        pipeline.guidance, sched, cot);
        if (!jt) {
            fail(ErrorCode::gradient_unavailable, "denoiser provides no Jacobian for the analytic chain");
        }
        std::vector<double> next(cot.dim());
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] = c.latent * cot[i] + c.noise * (*jt)[i];
        }
        cot = LatentVector(std::move(next));
    }
    return cot;
}

LatentVector latent_gradient(const LatentVector& z_T, const PipelineOutput& forward, const Pipeline& pipeline,
                             const Scorer& scorer, const GradientOptions& options) {
    switch (options.mode) {
        case GradientMode::approx_constant_eps: return grad_latent_approx(forward, pipeline, scorer);
        case GradientMode::finite_difference:
            return grad_latent_fd(z_T, pipeline, scorer, options.fd_step, options.parallel);
        case GradientMode::analytic_chain: return grad_latent_chain(z_T, pipeline, scorer);
    }
    fail(ErrorCode::invalid_config, "unknown gradient mode");
}

}  // namespace noisediff
