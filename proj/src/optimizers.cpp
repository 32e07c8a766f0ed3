// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "noisediff/error.hpp"
#include "noisediff/kernels.hpp"

namespace noisediff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_gamma(double gamma) {
    require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::out_of_range, "step size gamma must lie in [0, 1]");
}

std::vector<double> difference(const LatentVector& a, const LatentVector& b) {
    std::vector<double> d(a.dim());
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = a[i] - b[i];
    }
    return d;
}

/// Shared bookkeeping: current latent and its pipeline pass, best tracking
/// and the row log.
class RunState {
public:
    RunState(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer, const LatentObserver& observer)
        : pipeline_(pipeline), scorer_(scorer), observer_(observer) {
        require_same_dim(z_T.dim(), pipeline.dim(), "optimizer initial latent");
        record_.initial_latent = z_T;
        record_.final_latent = z_T;
        record_.best_latent = z_T;
        current_ = z_T;
    }

    /// Scores the initial latent and logs epoch 0; false on scorer failure.
    bool start() {
        const auto t0 = Clock::now();
        if (!rescore()) {
            return false;
        }
        record_.initial_score = score_;
        record_.best_score = score_;
        record_.best_sample = forward_->sample;
        record_.rows.push_back({0, score_, score_, kNaN, kNaN, kNaN, kNaN, elapsed_ms(t0)});
        notify(0);
        return true;
    }

    /// Moves to `next`, rescores and logs the epoch; false on scorer failure.
    bool advance(int epoch, LatentVector next, TrajectoryRow row, Clock::time_point t0) {
        current_ = std::move(next);
        record_.final_latent = current_;
        if (!rescore()) {
            return false;
        }
        if (score_ > record_.best_score) {
            record_.best_score = score_;
            record_.best_latent = current_;
            record_.best_sample = forward_->sample;
        }
        row.epoch = epoch;
        row.score = score_;
        row.best_score = record_.best_score;
        row.wall_ms = elapsed_ms(t0);
        record_.rows.push_back(row);
        notify(epoch);
        return true;
    }

    /// Logs an epoch that left the latent unchanged.
    void skip(int epoch, TrajectoryRow row, Clock::time_point t0) {
        row.epoch = epoch;
        row.score = score_;
        row.best_score = record_.best_score;
        row.wall_ms = elapsed_ms(t0);
        record_.rows.push_back(row);
        notify(epoch);
    }

    /// Runs `fn`, converting scorer failures into an incomplete record.
    template <class Fn>
    bool guarded(Fn&& fn) {
        try {
            fn();
            return true;
        } catch (const Error& e) {
            if (!e.is_scorer_failure()) {
                throw;
            }
            record_.complete = false;
            record_.failure = e.what();
            return false;
        }
    }

    const LatentVector& current() const { return current_; }
    const PipelineOutput& forward() const { return *forward_; }
    double score() const { return score_; }
    TrajectoryRecord take() { return std::move(record_); }

private:
    bool rescore() {
        return guarded([&] {
            forward_ = denoise_pipeline(current_, pipeline_);
            score_ = checked_score(scorer_, forward_->sample);
        });
    }

    void notify(int epoch) {
        if (observer_) {
            observer_(epoch, current_);
        }
    }

    const Pipeline& pipeline_;
    const Scorer& scorer_;
    const LatentObserver& observer_;
    TrajectoryRecord record_;
    LatentVector current_;
    std::optional<PipelineOutput> forward_;
    double score_ = 0.0;
};

}  // namespace

std::string_view to_string(BaselineMethod method) {
    switch (method) {
        case BaselineMethod::pgd: return "pgd";
        case BaselineMethod::mean_variance: return "mean-variance";
        case BaselineMethod::random_sampling: return "random-sampling";
        case BaselineMethod::random_diffusion: return "random-diffusion";
    }
    return "unknown";
}

double step_size_gamma(double score) {
    require(score >= 0.0 && score <= 1.0, ErrorCode::invalid_score, "score must lie in [0, 1]");
    return 1.0 - std::sqrt(score);
}

LatentVector step_difference(const LatentVector& z, double gamma, const LatentVector& sigma) {
    check_gamma(gamma);
    require_same_dim(z.dim(), sigma.dim(), "step_difference");
    const double keep = std::sqrt(1.0 - gamma) - 1.0;
    const double inject = std::sqrt(gamma);
    std::vector<double> v(z.dim());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = keep * z[i] + inject * sigma[i];
    }
    return LatentVector(std::move(v));
}

LatentVector apply_update(const LatentVector& z, double gamma, const LatentVector& sigma) {
    check_gamma(gamma);
    require_same_dim(z.dim(), sigma.dim(), "apply_update");
    const double keep = std::sqrt(1.0 - gamma);
    const double inject = std::sqrt(gamma);
    std::vector<double> out(z.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = keep * z[i] + inject * sigma[i];
    }
    return LatentVector(std::move(out));
}

Selection select_noise(const LatentVector& grad, const LatentVector& z, double gamma,
                       std::span<const LatentVector> candidates, double v_norm_guard, bool parallel) {
    check_gamma(gamma);
    require(!candidates.empty(), ErrorCode::degenerate_step, "select_noise needs at least one candidate");
    std::vector<double> ratios(candidates.size());
    if (parallel) {
        kernels::parallel::selection_ratios(grad.values(), z.values(), gamma, candidates, v_norm_guard, ratios);
    } else {
        kernels::serial::selection_ratios(grad.values(), z.values(), gamma, candidates, v_norm_guard, ratios);
    }
    const std::size_t best = kernels::argmax_lowest_index(ratios);
    if (best == kernels::npos) {
        fail(ErrorCode::degenerate_step, "every candidate step is below the norm guard");
    }
    return {best, ratios[best]};
}

TrajectoryRecord run_noise_diffusion(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer,
                                     const NoiseDiffusionConfig& config, const RngStream& rng,
                                     const LatentObserver& observer) {
    require(config.max_epochs >= 0, ErrorCode::invalid_config, "M must be >= 0");
    require(config.candidates >= 1, ErrorCode::invalid_config, "N must be >= 1");
    require(config.v_norm_guard > 0.0, ErrorCode::invalid_config, "v-norm guard must be > 0");

    RunState state(z_T, pipeline, scorer, observer);
    if (!state.start()) {
        return state.take();
    }
    const RngStream candidate_stream = rng.fork("candidates");
    const RngStream retry_stream = rng.fork("candidates-retry");
    const auto n = static_cast<std::size_t>(config.candidates);
    const std::size_t dim = z_T.dim();

    const auto draw = [&](const RngStream& stream) {
        return config.parallel ? kernels::parallel::draw_candidates(stream, n, dim)
                               : kernels::serial::draw_candidates(stream, n, dim);
    };

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto t0 = Clock::now();
        const LatentVector& z = state.current();
        const double gamma = step_size_gamma(state.score());

        std::optional<LatentVector> grad;
        if (!state.guarded([&] { grad = latent_gradient(z, state.forward(), pipeline, scorer, config.gradient); })) {
            break;
        }
        TrajectoryRow row{epoch, 0.0, 0.0, gamma, kNaN, norm(grad->values()), kNaN, 0.0};

        std::vector<LatentVector> candidates = draw(candidate_stream.substream(static_cast<std::uint64_t>(epoch)));
        std::optional<Selection> pick;
        try {
            pick = select_noise(*grad, z, gamma, candidates, config.v_norm_guard, config.parallel);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::degenerate_step) {
                throw;
            }
            candidates = draw(retry_stream.substream(static_cast<std::uint64_t>(epoch)));
            try {
                pick = select_noise(*grad, z, gamma, candidates, config.v_norm_guard, config.parallel);
            } catch (const Error& again) {
                if (again.code() != ErrorCode::degenerate_step) {
                    throw;
                }
            }
        }
        if (!pick) {
            state.skip(epoch, row, t0);
            continue;
        }
        row.selected_ratio = pick->ratio;
        const LatentVector& sigma = candidates[pick->index];
        const LatentVector v = step_difference(z, gamma, sigma);
        row.v_norm = norm(v.values());
        if (config.strict && pick->ratio < 0.0) {
            state.skip(epoch, row, t0);
            continue;
        }
        if (!state.advance(epoch, apply_update(z, gamma, sigma), row, t0)) {
            break;
        }
    }
    return state.take();
}

namespace {

void run_pgd(RunState& state, const Pipeline& pipeline, const Scorer& scorer, const BaselineConfig& config,
             int max_epochs) {
    require(config.pgd_step >= 0.0 && config.pgd_radius > 0.0, ErrorCode::invalid_config,
            "pgd needs step >= 0 and radius > 0");
    const LatentVector anchor = state.current();
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        const auto t0 = Clock::now();
        const LatentVector& z = state.current();
        std::optional<LatentVector> grad;
        if (!state.guarded([&] { grad = latent_gradient(z, state.forward(), pipeline, scorer, config.gradient); })) {
            return;
        }
        std::vector<double> next(z.dim());
        for (std::size_t i = 0; i < next.size(); ++i) {
            const double g = (*grad)[i];
            const double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
            next[i] = std::clamp(z[i] + config.pgd_step * sign, anchor[i] - config.pgd_radius,
                                 anchor[i] + config.pgd_radius);
        }
        LatentVector moved(std::move(next));
        TrajectoryRow row{epoch, 0.0, 0.0, kNaN, kNaN, norm(grad->values()), norm(difference(moved, z)), 0.0};
        if (!state.advance(epoch, std::move(moved), row, t0)) {
            return;
        }
    }
}

void run_mean_variance(RunState& state, const Pipeline& pipeline, const Scorer& scorer,
                       const BaselineConfig& config, int max_epochs) {
    require(config.learning_rate > 0.0 && config.adam_eps > 0.0, ErrorCode::invalid_config,
            "mean-variance needs positive learning rate and eps");
    require(config.adam_beta1 >= 0.0 && config.adam_beta1 < 1.0 && config.adam_beta2 >= 0.0 &&
                config.adam_beta2 < 1.0,
            ErrorCode::invalid_config, "Adam betas must lie in [0, 1)");
    // z_T(mu, rho) = mu + exp(rho) * eps0 with eps0 the initial draw.
    const LatentVector eps0 = state.current();
    const std::size_t d = eps0.dim();
    std::vector<double> mu(d, 0.0), rho(d, 0.0);
    std::vector<double> m(2 * d, 0.0), v(2 * d, 0.0);
    double beta1_pow = 1.0, beta2_pow = 1.0;
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        const auto t0 = Clock::now();
        const LatentVector& z = state.current();
        std::optional<LatentVector> grad;
        if (!state.guarded([&] { grad = latent_gradient(z, state.forward(), pipeline, scorer, config.gradient); })) {
            return;
        }
        beta1_pow *= config.adam_beta1;
        beta2_pow *= config.adam_beta2;
        std::vector<double> next(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double scale = std::exp(rho[i]);
            const double g_param[2] = {(*grad)[i], (*grad)[i] * scale * eps0[i]};
            double* params[2] = {&mu[i], &rho[i]};
            for (int p = 0; p < 2; ++p) {
                const std::size_t k = static_cast<std::size_t>(p) * d + i;
                m[k] = config.adam_beta1 * m[k] + (1.0 - config.adam_beta1) * g_param[p];
                v[k] = config.adam_beta2 * v[k] + (1.0 - config.adam_beta2) * g_param[p] * g_param[p];
                const double m_hat = m[k] / (1.0 - beta1_pow);
                const double v_hat = v[k] / (1.0 - beta2_pow);
                *params[p] += config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
            }
            next[i] = mu[i] + std::exp(rho[i]) * eps0[i];
        }
        LatentVector moved(std::move(next));
        TrajectoryRow row{epoch, 0.0, 0.0, kNaN, kNaN, norm(grad->values()), norm(difference(moved, z)), 0.0};
        if (!state.advance(epoch, std::move(moved), row, t0)) {
            return;
        }
    }
}

void run_random_sampling(RunState& state, int max_epochs, const RngStream& rng) {
    const RngStream stream = rng.fork("random-sampling");
    const std::size_t d = state.current().dim();
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        const auto t0 = Clock::now();
        LatentVector fresh = sample_standard_normal(stream.substream(static_cast<std::uint64_t>(epoch)), d);
        TrajectoryRow row{epoch, 0.0, 0.0, 1.0, kNaN, kNaN, norm(difference(fresh, state.current())), 0.0};
        if (!state.advance(epoch, std::move(fresh), row, t0)) {
            return;
        }
    }
}

void run_random_diffusion(RunState& state, int max_epochs, const RngStream& rng) {
    const RngStream stream = rng.fork("random-diffusion");
    const std::size_t d = state.current().dim();
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        const auto t0 = Clock::now();
        const LatentVector& z = state.current();
        const double gamma = step_size_gamma(state.score());
        const LatentVector sigma = sample_standard_normal(stream.substream(static_cast<std::uint64_t>(epoch)), d);
        const LatentVector v = step_difference(z, gamma, sigma);
        TrajectoryRow row{epoch, 0.0, 0.0, gamma, kNaN, kNaN, norm(v.values()), 0.0};
        if (!state.advance(epoch, apply_update(z, gamma, sigma), row, t0)) {
            return;
        }
    }
}

}  // namespace

TrajectoryRecord run_baseline(const LatentVector& z_T, const Pipeline& pipeline, const Scorer& scorer,
                              const BaselineConfig& config, int max_epochs, const RngStream& rng,
                              const LatentObserver& observer) {
    require(max_epochs >= 0, ErrorCode::invalid_config, "M must be >= 0");
    RunState state(z_T, pipeline, scorer, observer);
    if (!state.start()) {
        return state.take();
    }
    switch (config.method) {
        case BaselineMethod::pgd: run_pgd(state, pipeline, scorer, config, max_epochs); break;
        case BaselineMethod::mean_variance: run_mean_variance(state, pipeline, scorer, config, max_epochs); break;
        case BaselineMethod::random_sampling: run_random_sampling(state, max_epochs, rng); break;
        case BaselineMethod::random_diffusion: run_random_diffusion(state, max_epochs, rng); break;
    }
    return state.take();
}

int epochs_to_reach(const TrajectoryRecord& record, double threshold) {
    for (const auto& row : record.rows) {
        if (row.best_score >= threshold) {
            return row.epoch;
        }
    }
    return -1;
}

}  // namespace noisediff
