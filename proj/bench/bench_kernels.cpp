// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>

#include "noisediff/config.hpp"
#include "noisediff/gradient.hpp"
#include "noisediff/kernels.hpp"
#include "noisediff/latent.hpp"

using namespace noisediff;

namespace {

struct RatioInput {
    LatentVector grad, z;
    std::vector<LatentVector> candidates;
    std::vector<double> ratios;
};

RatioInput ratio_input(std::size_t dim, std::size_t count) {
    const RngStream rng(1, "bench");
    return {sample_standard_normal(rng.fork("grad"), dim), sample_standard_normal(rng.fork("z"), dim),
            kernels::serial::draw_candidates(rng.fork("candidates"), count, dim), std::vector<double>(count)};
}

template <bool Parallel>
void BM_SelectionRatios(benchmark::State& state) {
    auto in = ratio_input(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::parallel::selection_ratios(in.grad.values(), in.z.values(), 0.3, in.candidates, 1e-12, in.ratios);
        } else {
            kernels::serial::selection_ratios(in.grad.values(), in.z.values(), 0.3, in.candidates, 1e-12, in.ratios);
        }
        benchmark::DoNotOptimize(in.ratios.data());
    }
}

template <bool Parallel>
void BM_DrawCandidates(benchmark::State& state) {
    const RngStream rng(2, "candidates");
    const auto dim = static_cast<std::size_t>(state.range(0));
    const auto count = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        auto c = Parallel ? kernels::parallel::draw_candidates(rng, count, dim)
                          : kernels::serial::draw_candidates(rng, count, dim);
        benchmark::DoNotOptimize(c.data());
    }
}

template <bool Parallel>
void BM_CentralDifference(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.dim = static_cast<std::size_t>(state.range(0));
    cfg.steps = 10;
    const Pipeline pipeline = build_pipeline(cfg);
    const auto scorer = build_scorer(cfg, pipeline, 0);
    const kernels::ScalarField f = [&](std::span<const double> z) {
        return score_latent(LatentVector(std::vector<double>(z.begin(), z.end())), pipeline, *scorer);
    };
    const auto x = sample_standard_normal(RngStream(3, "x"), cfg.dim);
    std::vector<double> grad(cfg.dim);
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::parallel::central_difference(f, x.values(), 1e-3, grad);
        } else {
            kernels::serial::central_difference(f, x.values(), 1e-3, grad);
        }
        benchmark::DoNotOptimize(grad.data());
    }
}

}  // namespace

BENCHMARK(BM_SelectionRatios<false>)->Args({16, 50})->Args({1024, 50})->Args({1024, 500});
BENCHMARK(BM_SelectionRatios<true>)->Args({16, 50})->Args({1024, 50})->Args({1024, 500});
BENCHMARK(BM_DrawCandidates<false>)->Args({16, 50})->Args({1024, 50});
BENCHMARK(BM_DrawCandidates<true>)->Args({16, 50})->Args({1024, 50});
BENCHMARK(BM_CentralDifference<false>)->Arg(16)->Arg(64);
BENCHMARK(BM_CentralDifference<true>)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
