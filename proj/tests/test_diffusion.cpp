// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "noisediff/denoiser.hpp"
#include "noisediff/error.hpp"
#include "noisediff/pipeline.hpp"
#include "noisediff/schedule.hpp"
#include "support.hpp"

using namespace noisediff;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::invalid_config;
}

LatentVector vec(std::initializer_list<double> v) { return LatentVector(std::vector<double>(v)); }

}  // namespace

TEST_CASE("schedule small examples") {
    const auto one = build_schedule(1, 0.5, 0.5);
    REQUIRE(one.steps() == 1);
    CHECK(one.alpha_bar(0) == 1.0);
    CHECK(one.alpha_bar(1) == 0.5);

    const auto two = NoiseSchedule::from_betas({0.1, 0.2});
    CHECK(two.alpha_bar(0) == 1.0);
    CHECK(two.alpha_bar(1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(two.alpha_bar(2) == doctest::Approx(0.72).epsilon(1e-15));
    CHECK(two.alpha(2) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("default 50-step ramp matches an independent product loop") {
    const auto s = build_schedule(50, 1e-4, 0.02);
    double ab = 1.0;
    for (int t = 1; t <= 50; ++t) {
        const double beta = 1e-4 + (0.02 - 1e-4) * (t - 1) / 49.0;
        ab *= 1.0 - beta;
        CHECK(std::abs(s.alpha_bar(t) - ab) <= 1e-12 * ab);
        CHECK(s.beta(t) == doctest::Approx(beta).epsilon(1e-12));
    }
}

TEST_CASE("schedule invariants") {
    for (const auto& s : {build_schedule(50, 1e-4, 0.02), build_ddim_schedule(50, 1e-4, 0.02, 1000),
                          build_ddim_schedule(10, 1e-4, 0.02, 1000), build_schedule(7, 0.3, 0.6)}) {
        CHECK(s.alpha_bar(0) == 1.0);
        for (int t = 1; t <= s.steps(); ++t) {
            CHECK(s.beta(t) > 0.0);
            CHECK(s.beta(t) < 1.0);
            CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
            CHECK(std::abs(s.alpha_bar(t) - s.alpha_bar(t - 1) * s.alpha(t)) <= 1e-12 * s.alpha_bar(t));
        }
    }
}

TEST_CASE("ddim schedule samples the fine training ramp") {
    const auto s = build_ddim_schedule(10, 1e-4, 0.02, 1000);
    double ab = 1.0;
    for (int tau = 1; tau <= 1000; ++tau) {
        ab *= 1.0 - (1e-4 + (0.02 - 1e-4) * (tau - 1) / 999.0);
        if (tau % 100 == 0) {
            CHECK(s.alpha_bar(tau / 100) == doctest::Approx(ab).epsilon(1e-12));
        }
    }
    CHECK(s.alpha_bar(10) < 1e-4);
}

TEST_CASE("schedule errors") {
    CHECK(code_of([] { build_schedule(0, 1e-4, 0.02); }) == ErrorCode::invalid_schedule);
    CHECK(code_of([] { build_schedule(5, 0.0, 0.02); }) == ErrorCode::invalid_schedule);
    CHECK(code_of([] { build_schedule(5, 0.03, 0.02); }) == ErrorCode::invalid_schedule);
    CHECK(code_of([] { build_schedule(5, 1e-4, 1.0); }) == ErrorCode::invalid_schedule);
    CHECK(code_of([] { NoiseSchedule::from_betas({0.5, 1.0}); }) == ErrorCode::invalid_schedule);
    CHECK(code_of([] { build_schedule(5, 1e-4, 0.02).alpha_bar(6); }) == ErrorCode::out_of_range);
}

TEST_CASE("forward_diffuse") {
    const auto s = build_schedule(50, 1e-4, 0.02);
    const auto z0 = vec({0.5, -1.0, 2.0});
    const auto noise = vec({1.0, 0.25, -0.75});
    CHECK(forward_diffuse(z0, 0, noise, s) == z0);

    const auto quarter = NoiseSchedule::from_betas({0.75});
    const auto out = forward_diffuse(vec({2.0, 0.0}), 1, vec({0.0, 2.0}), quarter);
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));

    for (int t = 1; t <= 50; ++t) {
        const auto got = forward_diffuse(z0, t, noise, s);
        double ab = 1.0;
        for (int k = 1; k <= t; ++k) ab *= 1.0 - (1e-4 + (0.02 - 1e-4) * (k - 1) / 49.0);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(std::abs(got[i] - (std::sqrt(ab) * z0[i] + std::sqrt(1.0 - ab) * noise[i])) <= 1e-12);
        }
    }
    CHECK(code_of([&] { forward_diffuse(z0, 51, noise, s); }) == ErrorCode::out_of_range);
    CHECK(code_of([&] { forward_diffuse(z0, 1, vec({1.0}), s); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("ddim_step examples") {
    const auto s = build_schedule(50, 1e-4, 0.02);
    const auto z = vec({1.0, -2.0, 0.5});
    const auto zero = LatentVector::zeros(3);
    const auto out = ddim_step(z, 20, zero, s);
    const double scale = std::sqrt(s.alpha_bar(19) / s.alpha_bar(20));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(out[i] == doctest::Approx(scale * z[i]).epsilon(1e-15));
    }

    const auto flat = NoiseSchedule::from_betas({1e-17});
    REQUIRE(flat.alpha_bar(1) == flat.alpha_bar(0));
    CHECK(ddim_step(z, 1, vec({3.0, 4.0, -5.0}), flat) == z);

    CHECK(code_of([&] { ddim_step(z, 0, zero, s); }) == ErrorCode::out_of_range);
    CHECK(code_of([&] { ddim_step(z, 51, zero, s); }) == ErrorCode::out_of_range);

    const auto c = ddim_coefficients(7, s);
    const auto eps = vec({0.3, 0.1, -0.2});
    const auto step = ddim_step(z, 7, eps, s);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(step[i] == doctest::Approx(c.latent * z[i] + c.noise * eps[i]).epsilon(1e-14));
    }
}

TEST_CASE("classifier-free guidance") {
    const std::vector<MixtureComponent> comps{{1.0, {2.0, 0.0}, 0.5}, {1.0, {-2.0, 1.0}, 0.3}};
    const AnalyticMixtureDenoiser den(comps, {{"left", {0}}, {"both", {0, 1}}});
    const auto s = build_schedule(50, 1e-4, 0.02);
    const auto z = vec({0.4, -0.3});
    const auto cond = den.predict(z, 30, ConditionId("left"), s);
    const auto uncond = den.predict(z, 30, ConditionId::null(), s);

    CHECK(cfg_predict(den, z, 30, {1.0, ConditionId("left"), ConditionId::null()}, s) == cond);
    CHECK(cfg_predict(den, z, 30, {0.0, ConditionId("left"), ConditionId::null()}, s) == uncond);
    const auto mixed = cfg_predict(den, z, 30, {7.5, ConditionId("left"), ConditionId::null()}, s);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(mixed[i] == doctest::Approx(7.5 * cond[i] - 6.5 * uncond[i]).epsilon(1e-14));
    }
    for (double w : {-3.0, 0.0, 1.0, 7.5, 100.0}) {
        CHECK(cfg_predict(den, z, 30, {w, ConditionId::null(), ConditionId::null()}, s) == uncond);
        CHECK(cfg_predict(den, z, 30, {w, ConditionId("left"), ConditionId("left")}, s) == cond);
    }
    CHECK(code_of([&] { cfg_predict(den, z, 30, {7.5, ConditionId("nope"), ConditionId::null()}, s); }) ==
          ErrorCode::unknown_condition);
}

TEST_CASE("mixture denoiser construction errors") {
    CHECK(code_of([] { AnalyticMixtureDenoiser({}, {}); }) != ErrorCode::out_of_range);
    CHECK(code_of([] { AnalyticMixtureDenoiser({{0.0, {1.0}, 1.0}}, {}); }) != ErrorCode::unknown_condition);
    CHECK(code_of([] { AnalyticMixtureDenoiser({{1.0, {1.0}, 1.0}}, {{"c", {}}}); }) == ErrorCode::invalid_config);
    CHECK(code_of([] { AnalyticMixtureDenoiser({{1.0, {1.0}, 1.0}}, {{"c", {3}}}); }) == ErrorCode::invalid_config);
}

TEST_CASE("analytic mixture: standard normal data") {
    const AnalyticMixtureDenoiser den({{1.0, {0.0, 0.0, 0.0}, 1.0}}, {});
    const auto s = build_schedule(50, 1e-4, 0.02);
    const auto z = vec({0.7, -1.1, 2.5});
    for (int t : {1, 10, 50}) {
        const auto eps = analytic_mixture_eps(den, z, t, ConditionId::null(), s);
        const double k = std::sqrt(1.0 - s.alpha_bar(t));
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(eps[i] == doctest::Approx(k * z[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("analytic mixture: single component is affine with closed-form coefficients") {
    const std::vector<double> mu{1.5, -0.5, 0.25, 3.0};
    const double var = 0.4;
    const AnalyticMixtureDenoiser den({{2.0, mu, var}}, {});
    const auto s = build_ddim_schedule(20, 1e-4, 0.02, 1000);
    const auto z = sample_standard_normal(RngStream(3, "affine"), 4);
    for (int t = 1; t <= 20; ++t) {
        const double ab = s.alpha_bar(t);
        const double v = ab * var + 1.0 - ab;
        const auto eps = den.predict(z, t, ConditionId::null(), s);
        for (std::size_t i = 0; i < 4; ++i) {
            const double expected = std::sqrt(1.0 - ab) * (z[i] - std::sqrt(ab) * mu[i]) / v;
            CHECK(eps[i] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("analytic mixture: symmetric midpoint averages the components") {
    const std::vector<double> m1{5.0, 0.0}, m2{-5.0, 0.0};
    const AnalyticMixtureDenoiser den({{1.0, m1, 0.3}, {1.0, m2, 0.3}}, {});
    const AnalyticMixtureDenoiser a({{1.0, m1, 0.3}}, {}), b({{1.0, m2, 0.3}}, {});
    const auto s = build_schedule(50, 1e-4, 0.02);
    const auto z = vec({0.0, 0.8});  // equidistant from both scaled means
    for (int t : {1, 25, 50}) {
        const auto eps = den.predict(z, t, ConditionId::null(), s);
        const auto ea = a.predict(z, t, ConditionId::null(), s);
        const auto eb = b.predict(z, t, ConditionId::null(), s);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(eps[i] == doctest::Approx(0.5 * (ea[i] + eb[i])).epsilon(1e-12));
        }
    }
}

TEST_CASE("analytic mixture survives far-away latents") {
    const AnalyticMixtureDenoiser den({{1.0, {50.0}, 0.01}, {1.0, {-50.0}, 0.01}}, {});
    const auto s = build_schedule(50, 1e-4, 0.02);
    const auto eps = den.predict(vec({1e4}), 1, ConditionId::null(), s);
    CHECK(std::isfinite(eps[0]));
}

TEST_CASE("mixture vjp matches finite differences of predict") {
    const std::vector<MixtureComponent> comps{
        {1.0, {1.0, -1.0, 0.5}, 0.3}, {2.0, {-1.0, 0.5, 0.0}, 0.5}, {0.5, {0.0, 2.0, -1.0}, 0.2}};
    const AnalyticMixtureDenoiser den(comps, {{"c", {0, 2}}});
    const auto s = build_schedule(50, 1e-4, 0.02);
    const auto z = vec({0.2, 0.3, -0.4});
    const auto u = vec({0.5, -1.0, 2.0});
    for (int t : {3, 30, 50}) {
        for (const auto& cond : {ConditionId::null(), ConditionId("c")}) {
            const auto vjp = den.predict_vjp(z, t, cond, s, u);
            REQUIRE(vjp.has_value());
            const double h = 1e-6;
            for (std::size_t j = 0; j < 3; ++j) {
                auto zp = z.vector(), zm = z.vector();
                zp[j] += h;
                zm[j] -= h;
                const auto ep = den.predict(LatentVector(zp), t, cond, s);
                const auto em = den.predict(LatentVector(zm), t, cond, s);
                double fd = 0.0;
                for (std::size_t i = 0; i < 3; ++i) fd += u[i] * (ep[i] - em[i]) / (2 * h);
                CHECK((*vjp)[j] == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("decoders") {
    const IdentityDecoder id(3);
    const auto z = vec({1.0, 2.0, 3.0});
    CHECK(id.decode(z) == z.vector());
    const std::vector<double> cot{0.1, 0.2, 0.3};
    CHECK(id.adjoint(z, cot).vector() == cot);

    const LinearDecoder lin(2, 3, {1, 2, 3, 4, 5, 6});
    const auto x = lin.decode(z);
    CHECK(x == std::vector<double>{14.0, 32.0});
    const std::vector<double> c2{1.0, -1.0};
    CHECK(lin.adjoint(z, c2).vector() == std::vector<double>{-3.0, -3.0, -3.0});
    CHECK(code_of([&] { lin.decode(vec({1.0})); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("pipeline with degenerate schedule is the decoder") {
    auto p = test::constant_pipeline(3, 0);
    const auto z = vec({0.1, 0.2, -0.3});
    const auto out = denoise_pipeline(z, p);
    CHECK(out.z0 == z);
    CHECK(out.sample == z.vector());
}

TEST_CASE("pipeline with constant eps telescopes") {
    for (int steps : {1, 10, 50}) {
        auto p = test::constant_pipeline(5, steps);
        const auto& eps = static_cast<const ConstantDenoiser&>(*p.model).value();
        const auto z = sample_standard_normal(RngStream(1, "tele"), 5);
        const auto out = denoise_pipeline(z, p);
        const double ab = p.schedule.alpha_bar(steps);
        for (std::size_t i = 0; i < 5; ++i) {
            const double expected = (z[i] - std::sqrt(1.0 - ab) * eps[i]) / std::sqrt(ab);
            CHECK(out.z0[i] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("pipeline is deterministic") {
    ExperimentConfig cfg;
    const Pipeline p = build_pipeline(cfg);
    const auto z = sample_standard_normal(RngStream(8, "det"), cfg.dim);
    const auto a = denoise_pipeline(z, p);
    const auto b = denoise_pipeline(z, p);
    CHECK(a.z0 == b.z0);
    CHECK(a.sample == b.sample);
}

TEST_CASE("constant eps jacobian is sqrt(1/alpha_bar_T) times identity") {
    auto p = test::constant_pipeline(4, 50);
    const double expected = std::sqrt(1.0 / p.schedule.alpha_bar(50));
    const auto z = sample_standard_normal(RngStream(2, "jac"), 4);
    const double h = 1e-4;
    for (std::size_t j = 0; j < 4; ++j) {
        auto zp = z.vector(), zm = z.vector();
        zp[j] += h;
        zm[j] -= h;
        const auto op = denoise_pipeline(LatentVector(zp), p).z0;
        const auto om = denoise_pipeline(LatentVector(zm), p).z0;
        for (std::size_t i = 0; i < 4; ++i) {
            const double d = (op[i] - om[i]) / (2 * h);
            if (i == j) {
                CHECK(std::abs(d - expected) <= 1e-6 * expected);
            } else {
                CHECK(std::abs(d) <= 1e-6 * expected);
            }
        }
    }
}

namespace {

/// Per-coordinate slope of the DDIM map for single-Gaussian data, by the
/// scalar recursion dz_{t-1}/dz_t = a_t + b_t sqrt(1 - ab_t) / (ab_t s^2 + 1 - ab_t).
double gaussian_ddim_slope(const NoiseSchedule& s, double var) {
    double slope = 1.0;
    for (int t = s.steps(); t >= 1; --t) {
        const double ab = s.alpha_bar(t), prev = s.alpha_bar(t - 1);
        const double a = std::sqrt(prev / ab);
        const double b = std::sqrt(1.0 - prev) - a * std::sqrt(1.0 - ab);
        slope *= a + b * std::sqrt(1.0 - ab) / (ab * var + 1.0 - ab);
    }
    return slope;
}

}  // namespace

TEST_CASE("single gaussian transport matches the data law") {
    const std::vector<double> mu{1.0, -2.0, 0.5};
    const double var = 0.5;
    Pipeline p;
    p.model = std::make_shared<AnalyticMixtureDenoiser>(std::vector<MixtureComponent>{{1.0, mu, var}},
                                                        std::map<std::string, std::vector<std::size_t>>{});
    p.schedule = build_ddim_schedule(50, 1e-4, 0.02, 1000);
    p.decoder = std::make_shared<IdentityDecoder>(3);
    // With 50 coarse steps the deterministic sampler shrinks the spread a
    // little; the oracle slope captures that exactly and tends to the data
    // variance as the step count grows.
    const double slope = gaussian_ddim_slope(p.schedule, var);
    const double fine_slope = gaussian_ddim_slope(build_ddim_schedule(1000, 1e-4, 0.02, 1000), var);
    MESSAGE("transported variance: 50 steps " << slope * slope << ", 1000 steps " << fine_slope * fine_slope
                                              << ", data " << var);
    CHECK(std::abs(fine_slope * fine_slope - var) <= 0.01 * var);

    const int n = 10000;
    std::vector<double> sum(3, 0.0), sq(3, 0.0);
    const RngStream rng(0, "transport");
    for (int k = 0; k < n; ++k) {
        const auto out = denoise_pipeline(sample_standard_normal(rng.substream(k), 3), p);
        for (std::size_t i = 0; i < 3; ++i) {
            sum[i] += out.z0[i];
            sq[i] += out.z0[i] * out.z0[i];
        }
    }
    const double expected_var = slope * slope;
    for (std::size_t i = 0; i < 3; ++i) {
        const double mean = sum[i] / n;
        const double v = (sq[i] - n * mean * mean) / (n - 1);
        const double se_mean = std::sqrt(expected_var / n);
        const double se_var = expected_var * std::sqrt(2.0 / (n - 1));
        MESSAGE("coord " << i << ": mean " << mean << " (target " << mu[i] << "), var " << v);
        CHECK(std::abs(mean - mu[i]) <= 3.0 * se_mean);
        CHECK(std::abs(v - expected_var) <= 3.0 * se_var);
    }
}
