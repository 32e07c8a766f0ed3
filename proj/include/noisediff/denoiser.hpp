// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noisediff/latent.hpp"
#include "noisediff/schedule.hpp"

namespace noisediff {

/// Label selecting which conditioning a denoiser applies. The empty label is
/// the null (unconditional) condition.
class ConditionId {
public:
    ConditionId() = default;
    explicit ConditionId(std::string label) : label_(std::move(label)) {}

    static ConditionId null() { return ConditionId(); }

    bool is_null() const noexcept { return label_.empty(); }
    const std::string& label() const noexcept { return label_; }

    friend auto operator<=>(const ConditionId&, const ConditionId&) = default;

private:
    std::string label_;
};

/// Noise predictor eps(z, t, condition). Implementations are immutable and
/// safe to call concurrently.
class DenoiserModel {
public:
    virtual ~DenoiserModel() = default;

    virtual std::size_t dim() const = 0;

    virtual LatentVector predict(const LatentVector& z, int t, const ConditionId& condition,
                                 const NoiseSchedule& schedule) const = 0;

    /// J^T * cotangent where J = d eps / d z. Models without a closed-form
    /// Jacobian return nullopt.
    virtual std::optional<LatentVector> predict_vjp(const LatentVector& z, int t,
                                                    const ConditionId& condition,
                                                    const NoiseSchedule& schedule,
                                                    const LatentVector& cotangent) const;
};

/// eps(z, t, c) == eps_bar for every input.
class ConstantDenoiser final : public DenoiserModel {
public:
    explicit ConstantDenoiser(LatentVector eps) : eps_(std::move(eps)) {}

    std::size_t dim() const override { return eps_.dim(); }
    LatentVector predict(const LatentVector& z, int t, const ConditionId& condition,
                         const NoiseSchedule& schedule) const override;
    std::optional<LatentVector> predict_vjp(const LatentVector& z, int t, const ConditionId& condition,
                                            const NoiseSchedule& schedule,
                                            const LatentVector& cotangent) const override;

    const LatentVector& value() const noexcept { return eps_; }

private:
    LatentVector eps_;
};

struct MixtureComponent {
    double weight = 1.0;
    std::vector<double> mean;
    double variance = 1.0;  // isotropic s^2
};

/// Exact eps-prediction for data drawn from an isotropic Gaussian mixture.
/// Each named condition activates a subset of components; the null condition
/// activates all of them.
class AnalyticMixtureDenoiser final : public DenoiserModel {
public:
    AnalyticMixtureDenoiser(std::vector<MixtureComponent> components,
                            std::map<std::string, std::vector<std::size_t>> condition_map);

    std::size_t dim() const override { return dim_; }
    LatentVector predict(const LatentVector& z, int t, const ConditionId& condition,
                         const NoiseSchedule& schedule) const override;
    std::optional<LatentVector> predict_vjp(const LatentVector& z, int t, const ConditionId& condition,
                                            const NoiseSchedule& schedule,
                                            const LatentVector& cotangent) const override;

    const std::vector<MixtureComponent>& components() const noexcept { return components_; }
    /// Active component indices; unknown_condition error for unmapped labels.
    const std::vector<std::size_t>& active(const ConditionId& condition) const;

private:
    struct Posterior {
        std::vector<double> responsibility;          // per active component
        std::vector<std::vector<double>> component_score;  // -(z - m_k) / v_k
        std::vector<double> score;                   // sum_k r_k * component_score_k
        std::vector<double> inv_variance;
        double noise_scale = 0.0;                    // sqrt(1 - alpha_bar)
    };
    Posterior posterior(const LatentVector& z, int t, const ConditionId& condition,
                        const NoiseSchedule& schedule) const;

    std::size_t dim_ = 0;
    std::vector<MixtureComponent> components_;
    std::map<std::string, std::vector<std::size_t>> condition_map_;
    std::vector<std::size_t> all_components_;
};

/// eps* = -sqrt(1 - alpha_bar_t) * grad log p_t(z) for the mixture marginal
/// p_t = sum_k w_k N(sqrt(alpha_bar_t) mu_k, (alpha_bar_t s_k^2 + 1 - alpha_bar_t) I).
LatentVector analytic_mixture_eps(const AnalyticMixtureDenoiser& denoiser, const LatentVector& z, int t,
                                  const ConditionId& condition, const NoiseSchedule& schedule);

struct GuidanceConfig {
    double w = 7.5;
    ConditionId condition;
    ConditionId null_condition;
};

/// w * eps(z, t, C) + (1 - w) * eps(z, t, null). When C equals the null
/// condition the single prediction is returned unchanged.
LatentVector cfg_predict(const DenoiserModel& model, const LatentVector& z, int t,
                         const GuidanceConfig& guidance, const NoiseSchedule& schedule);

/// Vector-Jacobian product of cfg_predict; nullopt if the model has none.
std::optional<LatentVector> cfg_predict_vjp(const DenoiserModel& model, const LatentVector& z, int t,
                                            const GuidanceConfig& guidance, const NoiseSchedule& schedule,
                                            const LatentVector& cotangent);

}  // namespace noisediff
