// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "noisediff/error.hpp"

namespace noisediff {

std::optional<LatentVector> DenoiserModel::predict_vjp(const LatentVector&, int, const ConditionId&,
                                                       const NoiseSchedule&, const LatentVector&) const {
    return std::nullopt;
}

LatentVector ConstantDenoiser::predict(const LatentVector& z, int t, const ConditionId&,
                                       const NoiseSchedule& schedule) const {
    require_same_dim(z.dim(), eps_.dim(), "ConstantDenoiser::predict");
    require(t >= 1 && t <= schedule.steps(), ErrorCode::out_of_range, "denoiser timestep");
    return eps_;
}

std::optional<LatentVector> ConstantDenoiser::predict_vjp(const LatentVector& z, int, const ConditionId&,
                                                          const NoiseSchedule&,
                                                          const LatentVector& cotangent) const {
    require_same_dim(z.dim(), cotangent.dim(), "ConstantDenoiser::predict_vjp");
    return LatentVector::zeros(z.dim());
}

AnalyticMixtureDenoiser::AnalyticMixtureDenoiser(
    std::vector<MixtureComponent> components,
    std::map<std::string, std::vector<std::size_t>> condition_map)
    : components_(std::move(components)), condition_map_(std::move(condition_map)) {
    require(!components_.empty(), ErrorCode::invalid_config, "mixture needs at least one component");
    dim_ = components_.front().mean.size();
    require(dim_ >= 1, ErrorCode::invalid_dimension, "mixture component mean is empty");
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        const std::string where = "component " + std::to_string(k);
        require(c.mean.size() == dim_, ErrorCode::dimension_mismatch, where + " mean has wrong dimension");
        require(std::isfinite(c.weight) && c.weight > 0.0, ErrorCode::invalid_config,
                where + " weight must be > 0");
        require(std::isfinite(c.variance) && c.variance > 0.0, ErrorCode::invalid_config,
                where + " variance must be > 0");
        for (double m : c.mean) {
            require(std::isfinite(m), ErrorCode::invalid_config, where + " mean is not finite");
        }
    }
    for (const auto& [label, indices] : condition_map_) {
        require(!label.empty(), ErrorCode::invalid_config, "the null condition cannot be remapped");
        require(!indices.empty(), ErrorCode::invalid_config, "condition '" + label + "' has no components");
        for (std::size_t k : indices) {
            require(k < components_.size(), ErrorCode::invalid_config,
                    "condition '" + label + "' references missing component " + std::to_string(k));
        }
    }
    all_components_.resize(components_.size());
    std::iota(all_components_.begin(), all_components_.end(), std::size_t{0});
}

const std::vector<std::size_t>& AnalyticMixtureDenoiser::active(const ConditionId& condition) const {
    if (condition.is_null()) {
        return all_components_;
    }
    const auto it = condition_map_.find(condition.label());
    if (it == condition_map_.end()) {
        fail(ErrorCode::unknown_condition, "unknown condition '" + condition.label() + "'");
    }
    return it->second;
}

AnalyticMixtureDenoiser::Posterior AnalyticMixtureDenoiser::posterior(const LatentVector& z, int t,
                                                                      const ConditionId& condition,
                                                                      const NoiseSchedule& schedule) const {
    require_same_dim(z.dim(), dim_, "AnalyticMixtureDenoiser");
    require(t >= 1 && t <= schedule.steps(), ErrorCode::out_of_range,
            "mixture eps needs 1 <= t <= T, got " + std::to_string(t));
    const auto& idx = active(condition);
    const double ab = schedule.alpha_bar(t);
    const double signal = std::sqrt(ab);
    const double d = static_cast<double>(dim_);

    Posterior p;
    p.noise_scale = std::sqrt(1.0 - ab);
    p.responsibility.resize(idx.size());
    p.component_score.assign(idx.size(), std::vector<double>(dim_));
    p.inv_variance.resize(idx.size());

    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& c = components_[idx[j]];
        const double var = ab * c.variance + 1.0 - ab;
        p.inv_variance[j] = 1.0 / var;
        double sq = 0.0;
        auto& g = p.component_score[j];
        for (std::size_t i = 0; i < dim_; ++i) {
            const double diff = z[i] - signal * c.mean[i];
            sq += diff * diff;
            g[i] = -diff / var;
        }
        const double log_density = std::log(c.weight) - 0.5 * d * std::log(var) - 0.5 * sq / var;
        p.responsibility[j] = log_density;
        max_log = std::max(max_log, log_density);
    }
    double total = 0.0;
    for (double& r : p.responsibility) {
        r = std::exp(r - max_log);
        total += r;
    }
    p.score.assign(dim_, 0.0);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        p.responsibility[j] /= total;
        const double r = p.responsibility[j];
        for (std::size_t i = 0; i < dim_; ++i) {
            p.score[i] += r * p.component_score[j][i];
        }
    }
    return p;
}

LatentVector analytic_mixture_eps(const AnalyticMixtureDenoiser& denoiser, const LatentVector& z, int t,
                                  const ConditionId& condition, const NoiseSchedule& schedule) {
    return denoiser.predict(z, t, condition, schedule);
}

LatentVector AnalyticMixtureDenoiser::predict(const LatentVector& z, int t, const ConditionId& condition,
                                              const NoiseSchedule& schedule) const {
    Posterior p = posterior(z, t, condition, schedule);
    for (double& s : p.score) {
        s *= -p.noise_scale;
    }
    return LatentVector(std::move(p.score));
}

std::optional<LatentVector> AnalyticMixtureDenoiser::predict_vjp(const LatentVector& z, int t,
                                                                 const ConditionId& condition,
                                                                 const NoiseSchedule& schedule,
                                                                 const LatentVector& cotangent) const {
    require_same_dim(z.dim(), cotangent.dim(), "AnalyticMixtureDenoiser::predict_vjp");
    const Posterior p = posterior(z, t, condition, schedule);
    // Hessian of log p_t is symmetric:
    //   sum_k r_k (-I / v_k) + sum_k r_k g_k g_k^T - g g^T
    std::vector<double> out(dim_, 0.0);
    const double mean_dot = dot(p.score, cotangent.values());
    for (std::size_t j = 0; j < p.responsibility.size(); ++j) {
        const double r = p.responsibility[j];
        const auto& g = p.component_score[j];
        const double g_dot = dot(g, cotangent.values());
        for (std::size_t i = 0; i < dim_; ++i) {
            out[i] += r * (-p.inv_variance[j] * cotangent[i] + g[i] * g_dot);
        }
    }
    for (std::size_t i = 0; i < dim_; ++i) {
        out[i] = -p.noise_scale * (out[i] - p.score[i] * mean_dot);
    }
    return LatentVector(std::move(out));
}

LatentVector cfg_predict(const DenoiserModel& model, const LatentVector& z, int t,
                         const GuidanceConfig& guidance, const NoiseSchedule& schedule) {
    require(std::isfinite(guidance.w), ErrorCode::invalid_config, "guidance scale must be finite");
    if (guidance.condition == guidance.null_condition) {
        return model.predict(z, t, guidance.condition, schedule);
    }
    const LatentVector cond = model.predict(z, t, guidance.condition, schedule);
    const LatentVector uncond = model.predict(z, t, guidance.null_condition, schedule);
    require_same_dim(cond.dim(), z.dim(), "cfg_predict");
    const double w = guidance.w;
    std::vector<double> out(z.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = w * cond[i] + (1.0 - w) * uncond[i];
    }
    return LatentVector(std::move(out));
}

std::optional<LatentVector> cfg_predict_vjp(const DenoiserModel& model, const LatentVector& z, int t,
                                            const GuidanceConfig& guidance, const NoiseSchedule& schedule,
                                            const LatentVector& cotangent) {
    if (guidance.condition == guidance.null_condition) {
        return model.predict_vjp(z, t, guidance.condition, schedule, cotangent);
    }
    auto cond = model.predict_vjp(z, t, guidance.condition, schedule, cotangent);
    auto uncond = model.predict_vjp(z, t, guidance.null_condition, schedule, cotangent);
    if (!cond || !uncond) {
        return std::nullopt;
    }
    const double w = guidance.w;
    std::vector<double> out(z.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = w * (*cond)[i] + (1.0 - w) * (*uncond)[i];
    }
    return LatentVector(std::move(out));
}

}  // namespace noisediff
