// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisediff/error.hpp"
#include "noisediff/latent.hpp"

namespace noisediff {

double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

QuadraticSigmoidScorer::QuadraticSigmoidScorer(std::vector<double> target, double sharpness, double offset)
    : target_(std::move(target)), sharpness_(sharpness), offset_(offset) {
    require(!target_.empty(), ErrorCode::invalid_dimension, "quadratic-sigmoid target is empty");
    require(std::isfinite(sharpness_) && sharpness_ > 0.0, ErrorCode::invalid_config,
            "quadratic-sigmoid sharpness must be > 0");
    require(std::isfinite(offset_), ErrorCode::invalid_config, "quadratic-sigmoid offset must be finite");
}

double QuadraticSigmoidScorer::score(std::span<const double> sample) const {
    require_same_dim(sample.size(), target_.size(), "QuadraticSigmoidScorer");
    double sq = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double d = sample[i] - target_[i];
        sq += d * d;
    }
    return logistic(offset_ - sharpness_ * sq);
}

std::optional<std::vector<double>> QuadraticSigmoidScorer::gradient(std::span<const double> sample) const {
    const double s = score(sample);
    const double scale = -2.0 * sharpness_ * s * (1.0 - s);
    std::vector<double> g(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        g[i] = scale * (sample[i] - target_[i]);
    }
    return g;
}

double QuadraticSigmoidScorer::hessian_bound() const {
    const double b = sharpness_;
    const auto eigen_max = [&](double q) {  // q = b r^2 >= 0
        const double s = logistic(offset_ - q);
        const double w = s * (1.0 - s);
        const double transverse = 2.0 * b * w;
        const double radial = 2.0 * b * w * std::abs(2.0 * q * (1.0 - 2.0 * s) - 1.0);
        return std::max(transverse, radial);
    };
    // Beyond q_max the weight s(1-s) < exp(offset - q_max) makes both
    // eigenvalues negligible against the value already found near q = 0.
    const double q_max = std::max(offset_, 0.0) + 80.0;
    const int n = 400000;
    const double step = q_max / n;
    double best = eigen_max(0.0);
    double best_q = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double q = step * i;
        const double v = eigen_max(q);
        if (v > best) {
            best = v;
            best_q = q;
        }
    }
    // Golden-section refinement inside the bracketing grid cell.
    double lo = std::max(0.0, best_q - step);
    double hi = best_q + step;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80; ++it) {
        const double m1 = hi - phi * (hi - lo);
        const double m2 = lo + phi * (hi - lo);
        if (eigen_max(m1) > eigen_max(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
        best = std::max({best, eigen_max(m1), eigen_max(m2)});
    }
    return best * (1.0 + 1e-6);
}

CompositeTargetScorer::CompositeTargetScorer(std::size_t dim, std::vector<AttributeGroup> groups)
    : dim_(dim), groups_(std::move(groups)) {
    require(dim_ >= 1, ErrorCode::invalid_dimension, "composite scorer dim must be >= 1");
    require(!groups_.empty(), ErrorCode::invalid_config, "composite scorer needs at least one group");
    for (std::size_t j = 0; j < groups_.size(); ++j) {
        const auto& g = groups_[j];
        const std::string where = "group " + std::to_string(j);
        require(!g.indices.empty(), ErrorCode::invalid_config, where + " has no indices");
        require(g.indices.size() == g.target.size(), ErrorCode::dimension_mismatch,
                where + " target size differs from index count");
        for (std::size_t i : g.indices) {
            require(i < dim_, ErrorCode::invalid_config, where + " index out of range");
        }
        require(std::isfinite(g.radius) && g.radius >= 0.0, ErrorCode::invalid_config,
                where + " radius must be >= 0");
        require(std::isfinite(g.sharpness) && g.sharpness > 0.0, ErrorCode::invalid_config,
                where + " sharpness must be > 0");
    }
}

double CompositeTargetScorer::group_distance(const AttributeGroup& g, std::span<const double> sample) const {
    double sq = 0.0;
    for (std::size_t k = 0; k < g.indices.size(); ++k) {
        const double d = sample[g.indices[k]] - g.target[k];
        sq += d * d;
    }
    return std::sqrt(sq);
}

double CompositeTargetScorer::score(std::span<const double> sample) const {
    require_same_dim(sample.size(), dim_, "CompositeTargetScorer");
    double s = 1.0;
    for (const auto& g : groups_) {
        s *= logistic(g.sharpness * (g.radius - group_distance(g, sample)));
    }
    return s;
}

std::optional<std::vector<double>> CompositeTargetScorer::gradient(std::span<const double> sample) const {
    const double s = score(sample);
    std::vector<double> grad(dim_, 0.0);
    for (const auto& g : groups_) {
        const double dist = group_distance(g, sample);
        if (dist == 0.0) {
            continue;  // kink of the norm; use the zero subgradient
        }
        const double factor = logistic(g.sharpness * (g.radius - dist));
        // d log factor / d dist = -k (1 - factor)
        const double scale = -s * g.sharpness * (1.0 - factor) / dist;
        for (std::size_t k = 0; k < g.indices.size(); ++k) {
            grad[g.indices[k]] += scale * (sample[g.indices[k]] - g.target[k]);
        }
    }
    return grad;
}

ConstantScorer::ConstantScorer(double value) : value_(value) {
    require(value >= 0.0 && value <= 1.0, ErrorCode::invalid_config, "constant score must lie in [0, 1]");
}

}  // namespace noisediff
