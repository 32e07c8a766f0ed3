// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "noisediff/error.hpp"

namespace noisediff {

double quadratic_form_fd(const kernels::ScalarField& f, std::span<const double> x, std::span<const double> u,
                         double h) {
    require_same_dim(x.size(), u.size(), "quadratic_form_fd");
    const double u_sq = squared_norm(u);
    require(u_sq > 0.0 && h > 0.0, ErrorCode::degenerate_step, "quadratic_form_fd needs u != 0 and h > 0");
    std::vector<double> plus(x.size()), minus(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        plus[i] = x[i] + h * u[i];
        minus[i] = x[i] - h * u[i];
    }
    return (f(plus) - 2.0 * f(x) + f(minus)) / (h * h * u_sq);
}

namespace {

struct Probe {
    double lo = 0.0;
    double hi = 0.0;
};

Probe probe_value(const kernels::ScalarField& f, std::span<const double> center, double radius,
                  const RngStream& probe_rng) {
    const std::size_t d = center.size();
    std::vector<double> dir(d), u(d);
    probe_rng.fork("position").fill_normal(dir);
    probe_rng.fork("direction").fill_normal(u);
    const double dir_norm = norm(dir);
    const double r = radius * std::pow(probe_rng.uniform(0), 1.0 / static_cast<double>(d));
    std::vector<double> xi(d);
    for (std::size_t i = 0; i < d; ++i) {
        xi[i] = center[i] + (dir_norm > 0.0 ? r * dir[i] / dir_norm : 0.0);
    }
    const double h = 1e-2 * radius;
    Probe p{std::numeric_limits<double>::infinity(), 0.0};
    for (double step : {h, 0.5 * h, 0.25 * h}) {
        const double q = std::abs(quadratic_form_fd(f, xi, u, step));
        p.lo = std::min(p.lo, q);
        p.hi = std::max(p.hi, q);
    }
    return p;
}

}  // namespace

HessianEstimate estimate_hessian_bound(const kernels::ScalarField& f, std::span<const double> center, double radius,
                                       std::size_t num_probes, const RngStream& rng, double kink_tolerance,
                                       bool parallel) {
    require(num_probes >= 1, ErrorCode::insufficient_sample, "need at least one probe");
    require(!center.empty(), ErrorCode::invalid_dimension, "probe center is empty");
    require(radius > 0.0, ErrorCode::out_of_range, "probe radius must be > 0");

    std::vector<Probe> values(num_probes);
    std::vector<std::exception_ptr> errors(num_probes);
    const auto n = static_cast<std::ptrdiff_t>(num_probes);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            values[k] = probe_value(f, center, radius, rng.substream(k));
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    HessianEstimate est;
    est.probes = num_probes;
    for (const Probe& p : values) {
        const double v = p.hi;
        est.max_including_outliers = std::max(est.max_including_outliers, v);
        if (kink_tolerance > 0.0 && p.hi - p.lo > kink_tolerance * v + 1e-9) {
            ++est.outliers;
            continue;
        }
        est.bound = std::max(est.bound, v);
    }
    return est;
}

FeasibilityReport check_improvement_condition(double s, double s_next, const LatentVector& grad,
                                              const LatentVector& v, double c, double delta, double tol) {
    require(c >= 0.0, ErrorCode::out_of_range, "Hessian bound c must be >= 0");
    require(delta > 0.0, ErrorCode::out_of_range, "delta must be > 0");
    FeasibilityReport r;
    r.c_estimate = c;
    r.delta = delta;
    r.ratio = selection_ratio(grad, v, 0.0);
    const double v_sq = squared_norm(v.values());
    r.predicted_floor = s + delta * v_sq;
    r.actual = s_next;
    r.condition_met = r.ratio >= 0.5 * c + delta;
    r.satisfied = !r.condition_met || s_next >= r.predicted_floor - tol;
    return r;
}

double selection_ratio(const LatentVector& grad, const LatentVector& v, double v_norm_guard) {
    require_same_dim(grad.dim(), v.dim(), "selection_ratio");
    const double v_sq = squared_norm(v.values());
    if (!(v_sq > 0.0) || v_sq < v_norm_guard) {
        fail(ErrorCode::degenerate_step, "step difference is numerically zero");
    }
    return dot(grad.values(), v.values()) / v_sq;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    require(!sorted.empty(), ErrorCode::insufficient_sample, "quantile of empty data");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::vector<double> values) {
    require(values.size() >= 4, ErrorCode::insufficient_sample, "quartiles need at least 4 values");
    std::sort(values.begin(), values.end());
    return {quantile_sorted(values, 0.25), quantile_sorted(values, 0.5), quantile_sorted(values, 0.75)};
}

Quartiles ratio_quartiles(std::span<const TrajectoryRecord> trajectories) {
    std::vector<double> ratios;
    for (const auto& rec : trajectories) {
        for (const auto& row : rec.rows) {
            if (std::isfinite(row.selected_ratio)) {
                ratios.push_back(row.selected_ratio);
            }
        }
    }
    return quartiles(std::move(ratios));
}

DistributionReport distribution_report(std::span<const double> z) {
    const Moments m = moment_diagnostics(z);
    const KsResult ks = ks_normality(z);
    return {m.mean, m.variance, m.skewness, m.excess_kurtosis, ks.statistic, ks.p_value};
}

double median(std::vector<double> values) {
    require(!values.empty(), ErrorCode::insufficient_sample, "median of empty data");
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

}  // namespace noisediff
