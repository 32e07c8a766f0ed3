// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/experiment.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "noisediff/error.hpp"

namespace noisediff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

bool ExperimentResult::complete() const {
    for (const auto& r : runs) {
        if (!r.record.complete) {
            return false;
        }
    }
    return true;
}

LatentVector initial_latent(const ExperimentConfig& config, std::uint64_t seed) {
    return sample_standard_normal(RngStream(seed, "run").fork("init"), config.dim);
}

TrajectoryRecord run_seed(const ExperimentConfig& config, const Pipeline& pipeline, std::uint64_t seed) {
    const RngStream rng(seed, "run");
    const LatentVector z_T = initial_latent(config, seed);
    const auto scorer = build_scorer(config, pipeline, seed);
    if (config.method == Method::noise_diffusion) {
        return run_noise_diffusion(z_T, pipeline, *scorer, config.noise_diffusion_config(), rng);
    }
    return run_baseline(z_T, pipeline, *scorer, config.baseline_config(), config.epochs, rng);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const Pipeline pipeline = build_pipeline(config);
    ExperimentResult result;
    result.runs.resize(config.seeds.size());
    std::vector<std::exception_ptr> errors(config.seeds.size());
    const auto n = static_cast<std::ptrdiff_t>(config.seeds.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel_seeds)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            result.runs[k].seed = config.seeds[k];
            result.runs[k].record = run_seed(config, pipeline, config.seeds[k]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return result;
}

SummaryRow summarize(const ExperimentConfig& config, const SeedRun& run) {
    const auto& rec = run.record;
    SummaryRow row;
    row.method = std::string(to_string(config.method));
    row.seed = run.seed;
    row.initial_score = rec.initial_score;
    row.final_best_score = rec.best_score;
    row.epochs_to_0_9 = epochs_to_reach(rec, 0.9);
    double sum = 0.0;
    int count = 0;
    for (const auto& r : rec.rows) {
        if (std::isfinite(r.selected_ratio)) {
            sum += r.selected_ratio;
            ++count;
        }
    }
    row.mean_selected_ratio = count > 0 ? sum / count : kNaN;
    const LatentVector& last = rec.final_latent.empty() ? rec.initial_latent : rec.final_latent;
    row.final_ks_statistic = last.dim() >= 8 ? ks_normality(last.values()).statistic : kNaN;
    row.complete = rec.complete;
    return row;
}

std::string trajectory_file_name(Method method, std::uint64_t seed) {
    return std::string(to_string(method)) + "_seed" + std::to_string(seed) + ".csv";
}

std::string latent_file_name(Method method, std::uint64_t seed) {
    return std::string(to_string(method)) + "_seed" + std::to_string(seed) + "_latent.csv";
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result,
                      const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        fail(ErrorCode::invalid_config, "cannot create output directory " + dir.string() + ": " + ec.message());
    }
    std::vector<SummaryRow> summary;
    std::string incomplete;
    for (const auto& run : result.runs) {
        write_text_file(dir / trajectory_file_name(config.method, run.seed), trajectory_csv(run.record));
        if (!run.record.initial_latent.empty()) {
            write_text_file(dir / latent_file_name(config.method, run.seed), latent_csv(run.record));
        }
        summary.push_back(summarize(config, run));
        if (!run.record.complete) {
            incomplete += std::string(to_string(config.method)) + " seed " + std::to_string(run.seed) + ": " +
                          run.record.failure + "\n";
        }
    }
    write_text_file(dir / "summary.csv", summary_csv(summary));
    write_text_file(dir / "resolved_config.txt", config.to_text());
    const auto marker = dir / "INCOMPLETE";
    if (incomplete.empty()) {
        std::filesystem::remove(marker, ec);
    } else {
        write_text_file(marker, incomplete);
    }
}

SweepAxis parse_sweep_axis(std::string_view text) {
    if (text == "T") return SweepAxis::T;
    if (text == "N") return SweepAxis::N;
    if (text == "M") return SweepAxis::M;
    fail(ErrorCode::invalid_config, "unknown sweep axis '" + std::string(text) + "' (expected T, N or M)");
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::T: return "T";
        case SweepAxis::N: return "N";
        case SweepAxis::M: return "M";
    }
    return "?";
}

SweepPoint sweep_point(int value, const ExperimentResult& result) {
    SweepPoint p;
    p.value = value;
    std::vector<double> initial, best;
    std::vector<TrajectoryRecord> records;
    for (const auto& run : result.runs) {
        initial.push_back(run.record.initial_score);
        best.push_back(run.record.best_score);
        records.push_back(run.record);
        p.complete = p.complete && run.record.complete;
    }
    p.median_initial_score = initial.empty() ? kNaN : median(initial);
    p.median_final_best_score = best.empty() ? kNaN : median(best);
    try {
        p.ratio = ratio_quartiles(records);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::insufficient_sample) {
            throw;
        }
        p.ratio = {kNaN, kNaN, kNaN};
    }
    return p;
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points) {
    std::string out = std::string(kSweepHeader) + "\n";
    for (const auto& p : points) {
        out += std::string(to_string(axis)) + "," + std::to_string(p.value) + "," +
               format_number(p.median_initial_score) + "," + format_number(p.median_final_best_score) + "," +
               format_number(p.ratio.q1) + "," + format_number(p.ratio.median) + "," + format_number(p.ratio.q3) +
               "\n";
    }
    return out;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<int>& values) {
    require(!values.empty(), ErrorCode::invalid_config, "sweep needs at least one value");
    std::vector<SweepPoint> points;
    for (int v : values) {
        ExperimentConfig c = config;
        switch (axis) {
            case SweepAxis::T:
                require(v >= 1, ErrorCode::invalid_config, "T must be >= 1");
                require(c.train_steps == 0 || c.train_steps >= v, ErrorCode::invalid_config,
                        "T exceeds schedule.train_steps");
                c.steps = v;
                break;
            case SweepAxis::N:
                require(v >= 1, ErrorCode::invalid_config, "N must be >= 1");
                c.candidates = v;
                break;
            case SweepAxis::M:
                require(v >= 0, ErrorCode::invalid_config, "M must be >= 0");
                c.epochs = v;
                break;
        }
        c.output_dir = config.output_dir / (std::string(to_string(axis)) + "_" + std::to_string(v));
        const ExperimentResult result = run_experiment(c);
        write_experiment(c, result, c.output_dir);
        points.push_back(sweep_point(v, result));
    }
    write_text_file(config.output_dir / ("sweep_" + std::string(to_string(axis)) + ".csv"), sweep_csv(axis, points));
    return points;
}

}  // namespace noisediff
