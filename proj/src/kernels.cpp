// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/kernels.hpp"

#include <cmath>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace noisediff::kernels {

namespace {

double ratio_one(std::span<const double> grad, std::span<const double> z, double keep, double inject,
                 std::span<const double> sigma, double v_norm_guard) {
    double g_dot_v = 0.0;
    double v_sq = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double v = keep * z[j] + inject * sigma[j];
        g_dot_v += grad[j] * v;
        v_sq += v * v;
    }
    if (!(v_sq >= v_norm_guard)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return g_dot_v / v_sq;
}

double fd_one(const ScalarField& f, std::span<const double> x, double h, std::size_t i,
              std::vector<double>& probe) {
    probe.assign(x.begin(), x.end());
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    return (up - down) / (2.0 * h);
}

void check_ratio_args(std::span<const double> grad, std::span<const double> z,
                      std::span<const LatentVector> candidates, std::span<double> ratios) {
    require_same_dim(grad.size(), z.size(), "selection_ratios gradient");
    require_same_dim(ratios.size(), candidates.size(), "selection_ratios output");
    for (const auto& c : candidates) {
        require_same_dim(c.dim(), z.size(), "selection_ratios candidate");
    }
}

}  // namespace

std::size_t argmax_lowest_index(std::span<const double> values) {
    std::size_t best = npos;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) {
            continue;
        }
        if (best == npos || values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace serial {

void selection_ratios(std::span<const double> grad, std::span<const double> z, double gamma,
                      std::span<const LatentVector> candidates, double v_norm_guard,
                      std::span<double> ratios) {
    check_ratio_args(grad, z, candidates, ratios);
    const double keep = std::sqrt(1.0 - gamma) - 1.0;
    const double inject = std::sqrt(gamma);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ratios[i] = ratio_one(grad, z, keep, inject, candidates[i].values(), v_norm_guard);
    }
}

void central_difference(const ScalarField& f, std::span<const double> x, double h, std::span<double> grad) {
    require_same_dim(grad.size(), x.size(), "central_difference");
    std::vector<double> probe;
    for (std::size_t i = 0; i < x.size(); ++i) {
        grad[i] = fd_one(f, x, h, i, probe);
    }
}

std::vector<LatentVector> draw_candidates(const RngStream& stream, std::size_t count, std::size_t dim) {
    std::vector<LatentVector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(sample_standard_normal(stream.substream(i), dim));
    }
    return out;
}

}  // namespace serial

namespace parallel {

void selection_ratios(std::span<const double> grad, std::span<const double> z, double gamma,
                      std::span<const LatentVector> candidates, double v_norm_guard,
                      std::span<double> ratios) {
    check_ratio_args(grad, z, candidates, ratios);
    const double keep = std::sqrt(1.0 - gamma) - 1.0;
    const double inject = std::sqrt(gamma);
    const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        ratios[k] = ratio_one(grad, z, keep, inject, candidates[k].values(), v_norm_guard);
    }
}

void central_difference(const ScalarField& f, std::span<const double> x, double h, std::span<double> grad) {
    require_same_dim(grad.size(), x.size(), "central_difference");
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    // Exceptions may not cross the parallel region; keep the one from the
    // lowest coordinate so the error reported does not depend on scheduling.
    std::vector<std::exception_ptr> errors(x.size());
#pragma omp parallel
    {
        std::vector<double> probe;
#pragma omp for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            try {
                grad[k] = fd_one(f, x, h, k, probe);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::vector<LatentVector> draw_candidates(const RngStream& stream, std::size_t count, std::size_t dim) {
    std::vector<LatentVector> out(count);
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = sample_standard_normal(stream.substream(k), dim);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

}  // namespace parallel

}  // namespace noisediff::kernels
