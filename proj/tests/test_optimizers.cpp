// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <cmath>

#include "noisediff/analysis.hpp"
#include "noisediff/error.hpp"
#include "noisediff/experiment.hpp"
#include "noisediff/optimizers.hpp"
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

std::size_t brute_force_argmax(const LatentVector& grad, const LatentVector& z, double gamma,
                               const std::vector<LatentVector>& candidates, double guard) {
    std::size_t best = candidates.size();
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double gv = 0.0, vv = 0.0;
        for (std::size_t k = 0; k < z.dim(); ++k) {
            const double v = (std::sqrt(1.0 - gamma) - 1.0) * z[k] + std::sqrt(gamma) * candidates[i][k];
            gv += grad[k] * v;
            vv += v * v;
        }
        if (vv < guard) continue;
        const double r = gv / vv;
        if (best == candidates.size() || r > best_ratio) {
            best = i;
            best_ratio = r;
        }
    }
    return best;
}

/// Fails with scorer-unavailable after `budget` successful calls.
class FlakyScorer final : public Scorer {
public:
    FlakyScorer(std::shared_ptr<const Scorer> inner, int budget) : inner_(std::move(inner)), budget_(budget) {}
    double score(std::span<const double> x) const override {
        if (calls_.fetch_add(1) >= budget_) {
            fail(ErrorCode::scorer_unavailable, "injected failure");
        }
        return inner_->score(x);
    }
    std::optional<std::vector<double>> gradient(std::span<const double> x) const override {
        return inner_->gradient(x);
    }
    std::string name() const override { return "flaky"; }

private:
    std::shared_ptr<const Scorer> inner_;
    int budget_;
    mutable std::atomic<int> calls_{0};
};

bool best_monotone(const TrajectoryRecord& r) {
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        if (r.rows[i].best_score < r.rows[i - 1].best_score) return false;
    }
    return true;
}

bool same_rows(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    if (a.rows.size() != b.rows.size()) return false;
    const auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto &p = a.rows[i], &q = b.rows[i];
        if (p.epoch != q.epoch || !eq(p.score, q.score) || !eq(p.best_score, q.best_score) || !eq(p.gamma, q.gamma) ||
            !eq(p.selected_ratio, q.selected_ratio) || !eq(p.grad_norm, q.grad_norm) || !eq(p.v_norm, q.v_norm)) {
            return false;
        }
    }
    return a.best_latent == b.best_latent && a.final_latent == b.final_latent;
}

/// Smooth benchmark variant used by the optimizer examples.
ExperimentConfig quadratic_benchmark() {
    ExperimentConfig c = test::benchmark_config();
    c.scorer.type = "quadratic-sigmoid";
    c.scorer.sharpness = 1.0;
    c.scorer.offset = 2.0;
    return c;
}

}  // namespace

TEST_CASE("step_size_gamma") {
    CHECK(step_size_gamma(1.0) == 0.0);
    CHECK(step_size_gamma(0.0) == 1.0);
    CHECK(step_size_gamma(0.81) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(code_of([] { step_size_gamma(1.0001); }) == ErrorCode::invalid_score);
    CHECK(code_of([] { step_size_gamma(-0.1); }) == ErrorCode::invalid_score);
    CHECK(code_of([] { step_size_gamma(std::nan("")); }) == ErrorCode::invalid_score);
}

TEST_CASE("step_difference and apply_update") {
    const auto z = sample_standard_normal(RngStream(1, "z"), 32);
    const auto sigma = sample_standard_normal(RngStream(1, "sigma"), 32);
    for (double v : step_difference(z, 0.0, sigma)) CHECK(v == 0.0);
    const auto full = step_difference(z, 1.0, sigma);
    for (std::size_t i = 0; i < 32; ++i) CHECK(full[i] == sigma[i] - z[i]);
    CHECK(apply_update(z, 0.0, sigma) == z);
    CHECK(apply_update(z, 1.0, sigma) == sigma);
    for (std::uint64_t k = 0; k < 100; ++k) {
        const double gamma = RngStream(k, "gamma").uniform(0);
        const auto a = sample_standard_normal(RngStream(k, "a"), 16);
        const auto s = sample_standard_normal(RngStream(k, "s"), 16);
        const auto moved = apply_update(a, gamma, s);
        const auto v = step_difference(a, gamma, s);
        for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(moved[i] - a[i] - v[i]) <= 1e-12);
    }
    CHECK(code_of([&] { apply_update(z, 1.5, sigma); }) == ErrorCode::out_of_range);
    CHECK(code_of([&] { apply_update(z, 0.5, LatentVector::zeros(3)); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("apply_update preserves standard normal moments at d = 1e5") {
    const auto z = sample_standard_normal(RngStream(0, "z"), 100000);
    const auto s = sample_standard_normal(RngStream(0, "sigma"), 100000);
    const Moments m = moment_diagnostics(apply_update(z, 0.37, s));
    CHECK(std::abs(m.mean) <= 0.02);
    CHECK(std::abs(m.variance - 1.0) <= 0.02);
}

TEST_CASE("select_noise examples") {
    const auto z = sample_standard_normal(RngStream(2, "z"), 8);
    const auto grad = sample_standard_normal(RngStream(2, "g"), 8);
    const std::vector<LatentVector> one{sample_standard_normal(RngStream(2, "c"), 8)};
    CHECK(select_noise(grad, z, 0.5, one, 1e-12).index == 0);

    const auto cands = kernels::serial::draw_candidates(RngStream(3, "c"), 10, 8);
    const auto zero_grad = select_noise(LatentVector::zeros(8), z, 0.5, cands, 1e-12);
    CHECK(zero_grad.index == 0);
    CHECK(zero_grad.ratio == 0.0);

    CHECK(code_of([&] { select_noise(grad, z, 0.0, cands, 1e-12); }) == ErrorCode::degenerate_step);
    CHECK(code_of([&] { select_noise(grad, z, 0.5, {}, 1e-12); }) == ErrorCode::degenerate_step);
}

TEST_CASE("select_noise equals brute force and ignores gradient scale") {
    for (std::uint64_t k = 0; k < 200; ++k) {
        const RngStream rng(k, "instance");
        const auto z = sample_standard_normal(rng.fork("z"), 16);
        const auto grad = sample_standard_normal(rng.fork("g"), 16);
        const auto cands = kernels::serial::draw_candidates(rng.fork("c"), 50, 16);
        const double gamma = rng.uniform(7);
        const Selection s = select_noise(grad, z, gamma, cands, 1e-12);
        CHECK(s.index == brute_force_argmax(grad, z, gamma, cands, 1e-12));
        for (double scale : {1e-6, 3.0, 1e6}) {
            std::vector<double> g(16);
            for (std::size_t i = 0; i < 16; ++i) g[i] = scale * grad[i];
            CHECK(select_noise(LatentVector(g), z, gamma, cands, 1e-12).index == s.index);
        }
    }
}

TEST_CASE("noise diffusion with a perfect scorer never moves") {
    const auto p = test::constant_pipeline(8, 5);
    const ConstantScorer one(1.0);
    const auto z = sample_standard_normal(RngStream(0, "init"), 8);
    std::vector<LatentVector> seen;
    const auto rec = run_noise_diffusion(z, p, one, {5, 10}, RngStream(0, "run"),
                                         [&](int, const LatentVector& cur) { seen.push_back(cur); });
    REQUIRE(rec.rows.size() == 6);
    CHECK(rec.rows[0].best_score == 1.0);
    for (const auto& row : rec.rows) {
        CHECK(row.best_score == 1.0);
        if (row.epoch > 0) {
            CHECK(row.gamma == 0.0);
            CHECK(std::isnan(row.selected_ratio));  // every step is zero: skipped
        }
    }
    CHECK(seen.size() == 6);
    for (const auto& cur : seen) CHECK(cur == z);
    CHECK(rec.final_latent == z);
}

TEST_CASE("noise diffusion with M = 0 records the initial row only") {
    ExperimentConfig cfg;
    const Pipeline p = build_pipeline(cfg);
    const auto scorer = build_scorer(cfg, p, 0);
    const auto z = sample_standard_normal(RngStream(0, "init"), cfg.dim);
    NoiseDiffusionConfig nd;
    nd.max_epochs = 0;
    const auto rec = run_noise_diffusion(z, p, *scorer, nd, RngStream(0, "run"));
    REQUIRE(rec.rows.size() == 1);
    CHECK(rec.best_score == rec.initial_score);
    CHECK(rec.best_latent == z);
}

TEST_CASE("noise diffusion is deterministic, monotone and thread-count independent") {
    ExperimentConfig cfg;
    cfg.steps = 10;
    const Pipeline p = build_pipeline(cfg);
    const auto scorer = build_scorer(cfg, p, 3);
    const auto z = initial_latent(cfg, 3);
    NoiseDiffusionConfig nd;
    nd.max_epochs = 20;
    const auto a = run_noise_diffusion(z, p, *scorer, nd, RngStream(3, "run"));
    const auto b = run_noise_diffusion(z, p, *scorer, nd, RngStream(3, "run"));
    nd.parallel = false;
    nd.gradient.parallel = false;
    const auto c = run_noise_diffusion(z, p, *scorer, nd, RngStream(3, "run"));
    CHECK(same_rows(a, b));
    CHECK(same_rows(a, c));
    CHECK(best_monotone(a));
    CHECK(a.best_score >= a.initial_score);
    CHECK(a.rows.size() == 21);
    CHECK(std::isnan(a.rows[0].gamma));
}

TEST_CASE("strict mode skips epochs whose best ratio is negative") {
    ExperimentConfig cfg;
    cfg.steps = 10;
    const Pipeline p = build_pipeline(cfg);
    const auto scorer = build_scorer(cfg, p, 1);
    const auto z = initial_latent(cfg, 1);
    NoiseDiffusionConfig nd;
    nd.max_epochs = 40;
    nd.candidates = 1;
    nd.strict = true;
    std::vector<LatentVector> seen;
    const auto rec = run_noise_diffusion(z, p, *scorer, nd, RngStream(1, "run"),
                                         [&](int, const LatentVector& cur) { seen.push_back(cur); });
    int skipped = 0;
    for (std::size_t i = 1; i < rec.rows.size(); ++i) {
        if (rec.rows[i].selected_ratio < 0.0) {
            ++skipped;
            CHECK(seen[i] == seen[i - 1]);
            CHECK(rec.rows[i].score == rec.rows[i - 1].score);
        }
    }
    MESSAGE("strict-mode skipped epochs: " << skipped);
    CHECK(skipped > 0);
}

TEST_CASE("scorer failure mid-run yields a flagged partial trajectory") {
    ExperimentConfig cfg;
    cfg.steps = 5;
    const Pipeline p = build_pipeline(cfg);
    const auto inner = build_scorer(cfg, p, 0);
    const FlakyScorer flaky(inner, 4);
    const auto z = initial_latent(cfg, 0);
    const auto rec = run_noise_diffusion(z, p, flaky, {10, 5}, RngStream(0, "run"));
    CHECK_FALSE(rec.complete);
    CHECK(rec.rows.size() == 4);
    CHECK(rec.failure.find("injected") != std::string::npos);
    CHECK(best_monotone(rec));

    const FlakyScorer dead(inner, 0);
    const auto none = run_baseline(z, p, dead, {}, 10, RngStream(0, "run"));
    CHECK_FALSE(none.complete);
    CHECK(none.rows.empty());
}

TEST_CASE("random sampling with M = 1") {
    ExperimentConfig cfg;
    cfg.steps = 5;
    const Pipeline p = build_pipeline(cfg);
    const auto scorer = build_scorer(cfg, p, 0);
    const auto z = initial_latent(cfg, 0);
    const RngStream rng(0, "run");
    BaselineConfig b;
    b.method = BaselineMethod::random_sampling;
    const auto rec = run_baseline(z, p, *scorer, b, 1, rng);
    const auto fresh = sample_standard_normal(rng.fork("random-sampling").substream(1), cfg.dim);
    const double fresh_score = score_latent(fresh, p, *scorer);
    REQUIRE(rec.rows.size() == 2);
    CHECK(rec.best_score == std::max(rec.initial_score, fresh_score));
    CHECK(rec.rows[1].gamma == 1.0);
}

TEST_CASE("pgd") {
    ExperimentConfig cfg;
    cfg.steps = 5;
    const Pipeline p = build_pipeline(cfg);
    const auto scorer = build_scorer(cfg, p, 0);
    const auto z = initial_latent(cfg, 0);
    BaselineConfig b;
    b.method = BaselineMethod::pgd;
    b.pgd_step = 0.0;
    std::vector<LatentVector> seen;
    const auto flat = run_baseline(z, p, *scorer, b, 5, RngStream(0, "run"),
                                   [&](int, const LatentVector& cur) { seen.push_back(cur); });
    for (const auto& row : flat.rows) CHECK(row.score == flat.initial_score);
    for (const auto& cur : seen) CHECK(cur == z);

    b.pgd_step = 0.2;
    b.pgd_radius = 0.5;
    seen.clear();
    const auto moved = run_baseline(z, p, *scorer, b, 20, RngStream(0, "run"),
                                    [&](int, const LatentVector& cur) { seen.push_back(cur); });
    for (const auto& cur : seen) {
        for (std::size_t i = 0; i < cfg.dim; ++i) CHECK(std::abs(cur[i] - z[i]) <= 0.5 + 1e-15);
    }
    CHECK(best_monotone(moved));
}

TEST_CASE("mean-variance starts at the initial draw and ascends") {
    ExperimentConfig cfg;
    cfg.steps = 5;
    const Pipeline p = build_pipeline(cfg);
    const auto scorer = build_scorer(cfg, p, 2);
    const auto z = initial_latent(cfg, 2);
    BaselineConfig b;
    b.method = BaselineMethod::mean_variance;
    b.learning_rate = 0.05;
    const auto rec = run_baseline(z, p, *scorer, b, 30, RngStream(2, "run"));
    CHECK(rec.rows.size() == 31);
    CHECK(best_monotone(rec));
    CHECK(rec.best_score >= rec.initial_score);
    MESSAGE("mean-variance: " << rec.initial_score << " -> " << rec.best_score);
}

TEST_CASE("random diffusion uses the score-aware step size") {
    ExperimentConfig cfg;
    cfg.steps = 5;
    const Pipeline p = build_pipeline(cfg);
    const auto scorer = build_scorer(cfg, p, 0);
    BaselineConfig b;
    b.method = BaselineMethod::random_diffusion;
    const auto rec = run_baseline(initial_latent(cfg, 0), p, *scorer, b, 10, RngStream(0, "run"));
    for (std::size_t i = 1; i < rec.rows.size(); ++i) {
        CHECK(rec.rows[i].gamma == doctest::Approx(1.0 - std::sqrt(rec.rows[i - 1].score)).epsilon(1e-15));
    }
}

TEST_CASE("epochs_to_reach") {
    TrajectoryRecord r;
    r.rows = {{0, 0.1, 0.1}, {1, 0.95, 0.95}, {2, 0.5, 0.95}};
    CHECK(epochs_to_reach(r, 0.9) == 1);
    CHECK(epochs_to_reach(r, 0.99) == -1);
    CHECK(epochs_to_reach(r, 0.05) == 0);
}

TEST_CASE("quadratic benchmark: noise diffusion improves and beats random sampling") {
    ExperimentConfig nd = quadratic_benchmark();
    ExperimentConfig rs = nd;
    rs.method = Method::random_sampling;
    ExperimentConfig rd = nd;
    rd.method = Method::random_diffusion;
    const auto a = run_experiment(nd);
    const auto b = run_experiment(rs);
    const auto c = run_experiment(rd);
    int improved = 0, beats = 0;
    std::vector<double> init, best_nd, best_rs, best_rd;
    for (std::size_t k = 0; k < a.runs.size(); ++k) {
        const auto& x = a.runs[k].record;
        improved += x.best_score > x.initial_score ? 1 : 0;
        beats += x.best_score >= b.runs[k].record.best_score ? 1 : 0;
        init.push_back(x.initial_score);
        best_nd.push_back(x.best_score);
        best_rs.push_back(b.runs[k].record.best_score);
        best_rd.push_back(c.runs[k].record.best_score);
    }
    MESSAGE("quadratic benchmark medians: initial " << median(init) << ", noise diffusion " << median(best_nd)
                                                   << ", random diffusion " << median(best_rd)
                                                   << ", random sampling " << median(best_rs));
    MESSAGE("noise diffusion improved " << improved << "/25, >= random sampling " << beats << "/25");
    CHECK(improved >= 20);
    CHECK(beats >= 20);
    CHECK(median(best_rd) >= median(best_rs));
}
