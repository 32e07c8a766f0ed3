// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace noisediff {

/// Bounded alignment score of a decoded sample, standing in for a
/// yes-probability from a vision-language model.
class Scorer {
public:
    virtual ~Scorer() = default;

    /// Value in [0, 1].
    virtual double score(std::span<const double> sample) const = 0;

    /// d score / d sample, when the scorer has a closed form.
    virtual std::optional<std::vector<double>> gradient(std::span<const double> sample) const {
        (void)sample;
        return std::nullopt;
    }

    virtual std::string name() const = 0;
};

double logistic(double x);

/// s(x) = logistic(offset - sharpness * |x - target|^2)
class QuadraticSigmoidScorer final : public Scorer {
public:
    QuadraticSigmoidScorer(std::vector<double> target, double sharpness, double offset);

    double score(std::span<const double> sample) const override;
    std::optional<std::vector<double>> gradient(std::span<const double> sample) const override;
    std::string name() const override { return "quadratic-sigmoid"; }

    /// Upper bound on the spectral norm of the Hessian over all of R^d.
    ///
    /// With u = offset - b r^2 and s = logistic(u), the Hessian has the
    /// transverse eigenvalue -2b s(1-s) and the radial eigenvalue
    /// 2b s(1-s) (2 (offset - u)(1 - 2s) - 1). Both depend on u alone, so the
    /// sup is a one-dimensional maximization over u <= offset.
    double hessian_bound() const;

    const std::vector<double>& target() const noexcept { return target_; }
    double sharpness() const noexcept { return sharpness_; }
    double offset() const noexcept { return offset_; }

private:
    std::vector<double> target_;
    double sharpness_;
    double offset_;
};

struct AttributeGroup {
    std::vector<std::size_t> indices;
    std::vector<double> target;  // one entry per index
    double radius = 1.0;
    double sharpness = 1.0;
};

/// s(x) = prod_j logistic(k_j (r_j - |x_{S_j} - t_j|)); each group plays the
/// role of one object or attribute in a compositional prompt.
class CompositeTargetScorer final : public Scorer {
public:
    CompositeTargetScorer(std::size_t dim, std::vector<AttributeGroup> groups);

    double score(std::span<const double> sample) const override;
    std::optional<std::vector<double>> gradient(std::span<const double> sample) const override;
    std::string name() const override { return "composite"; }

    const std::vector<AttributeGroup>& groups() const noexcept { return groups_; }

private:
    double group_distance(const AttributeGroup& g, std::span<const double> sample) const;

    std::size_t dim_;
    std::vector<AttributeGroup> groups_;
};

class ConstantScorer final : public Scorer {
public:
    explicit ConstantScorer(double value);
    double score(std::span<const double>) const override { return value_; }
    std::optional<std::vector<double>> gradient(std::span<const double> sample) const override {
        return std::vector<double>(sample.size(), 0.0);
    }
    std::string name() const override { return "constant"; }

private:
    double value_;
};

}  // namespace noisediff
