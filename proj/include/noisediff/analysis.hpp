// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "noisediff/kernels.hpp"
#include "noisediff/latent.hpp"
#include "noisediff/optimizers.hpp"

namespace noisediff {

struct HessianEstimate {
    /// Largest |u^T H u| / |u|^2 over probes not flagged as kink artifacts.
    double bound = 0.0;
    /// Same maximum including the flagged probes.
    double max_including_outliers = 0.0;
    std::size_t outliers = 0;
    std::size_t probes = 0;
};

/// (f(x + h u) - 2 f(x) + f(x - h u)) / (h^2 |u|^2)
double quadratic_form_fd(const kernels::ScalarField& f, std::span<const double> x, std::span<const double> u,
                         double h);

/// Probe-based lower estimate of sup |u^T H(xi) u| / |u|^2 over the ball of
/// `radius` around `center`. Probe i uses substream i of `rng`, so a longer
/// run extends a shorter one. Each probe is evaluated at steps h, h/2 and
/// h/4; when these disagree by more than kink_tolerance (relative, with a 1e-9
/// absolute floor) the probe sits on a kink, is counted as an outlier and is
/// kept out of `bound`. kink_tolerance <= 0 disables the check.
HessianEstimate estimate_hessian_bound(const kernels::ScalarField& f, std::span<const double> center, double radius,
                                       std::size_t num_probes, const RngStream& rng, double kink_tolerance = 0.1,
                                       bool parallel = true);

struct FeasibilityReport {
    double c_estimate = 0.0;
    double delta = 0.0;
    double ratio = 0.0;
    double predicted_floor = 0.0;  // s + delta |v|^2
    double actual = 0.0;           // s(z + v)
    bool condition_met = false;    // ratio >= c/2 + delta
    bool satisfied = true;
};

/// If grad . v / |v|^2 >= c/2 + delta the update must reach s + delta |v|^2
/// (up to tol); otherwise the report is vacuously satisfied.
FeasibilityReport check_improvement_condition(double s, double s_next, const LatentVector& grad,
                                              const LatentVector& v, double c, double delta, double tol);

/// grad . v / |v|^2; degenerate_step error when |v|^2 < v_norm_guard.
double selection_ratio(const LatentVector& grad, const LatentVector& v, double v_norm_guard = 1e-12);

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

/// Linear-interpolation quantile of sorted data (type 7).
double quantile_sorted(std::span<const double> sorted, double p);
Quartiles quartiles(std::vector<double> values);

/// Quartiles of every finite selected_ratio entry across the trajectories.
Quartiles ratio_quartiles(std::span<const TrajectoryRecord> trajectories);

DistributionReport distribution_report(std::span<const double> z);
inline DistributionReport distribution_report(const LatentVector& z) { return distribution_report(z.values()); }

double median(std::vector<double> values);

}  // namespace noisediff
