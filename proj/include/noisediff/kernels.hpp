// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version; both compute every element with the same expression so
// their outputs are bit-identical and the parallel path can be tested
// against the serial one.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "noisediff/latent.hpp"

namespace noisediff::kernels {

using ScalarField = std::function<double(std::span<const double>)>;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Index of the largest non-NaN entry, lowest index on ties; npos if none.
std::size_t argmax_lowest_index(std::span<const double> values);

namespace serial {

/// ratio_i = grad . v_i / |v_i|^2 with v_i = (sqrt(1-gamma) - 1) z + sqrt(gamma) sigma_i.
/// Candidates whose |v_i|^2 falls below v_norm_guard get NaN.
void selection_ratios(std::span<const double> grad, std::span<const double> z, double gamma,
                      std::span<const LatentVector> candidates, double v_norm_guard,
                      std::span<double> ratios);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
void central_difference(const ScalarField& f, std::span<const double> x, double h, std::span<double> grad);

/// Candidate i is the standard-normal vector of stream.substream(i).
std::vector<LatentVector> draw_candidates(const RngStream& stream, std::size_t count, std::size_t dim);

}  // namespace serial

namespace parallel {

void selection_ratios(std::span<const double> grad, std::span<const double> z, double gamma,
                      std::span<const LatentVector> candidates, double v_norm_guard,
                      std::span<double> ratios);

void central_difference(const ScalarField& f, std::span<const double> x, double h, std::span<double> grad);

std::vector<LatentVector> draw_candidates(const RngStream& stream, std::size_t count, std::size_t dim);

}  // namespace parallel

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

}  // namespace noisediff::kernels
