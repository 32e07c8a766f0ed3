// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "noisediff/error.hpp"
#include "noisediff/experiment.hpp"
#include "noisediff/report.hpp"

namespace noisediff {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitScorer = 3;

std::vector<int> parse_values(const std::string& text) {
    std::vector<int> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            out.push_back(v);
        } catch (const std::logic_error&) {
            fail(ErrorCode::invalid_config, "bad sweep value '" + item + "'");
        }
    }
    return out;
}

ExperimentConfig load_config(const std::string& path, const std::string& out_dir, std::ostream& err) {
    ExperimentConfig cfg = ExperimentConfig::load(path);
    if (apply_seed_override(cfg, std::getenv("NOISEDIFF_SEED"))) {
        err << "NOISEDIFF_SEED overrides seeds\n";
    }
    if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
    }
    return cfg;
}

std::string fixed(double v, const char* spec = "%.4f") {
    char buf[32];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = load_config(config_path, out_dir, err);
    const ExperimentResult result = run_experiment(cfg);
    write_experiment(cfg, result, cfg.output_dir);
    for (const auto& run : result.runs) {
        const SummaryRow s = summarize(cfg, run);
        out << s.method << " seed " << s.seed << ": initial " << fixed(s.initial_score) << " best "
            << fixed(s.final_best_score) << " epochs-to-0.9 " << s.epochs_to_0_9
            << (s.complete ? "" : " INCOMPLETE") << "\n";
    }
    out << "wrote " << cfg.output_dir.string() << "\n";
    if (!result.complete()) {
        for (const auto& run : result.runs) {
            if (!run.record.complete) {
                err << "seed " << run.seed << ": " << run.record.failure << "\n";
            }
        }
        return kExitScorer;
    }
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_text, const std::string& values_text,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = load_config(config_path, out_dir, err);
    const SweepAxis axis = parse_sweep_axis(axis_text);
    const auto points = run_sweep(cfg, axis, parse_values(values_text));
    bool complete = true;
    for (const auto& p : points) {
        out << axis_text << "=" << p.value << ": median initial " << fixed(p.median_initial_score)
            << " median best " << fixed(p.median_final_best_score) << " ratio q1 " << fixed(p.ratio.q1, "%.4g")
            << (p.complete ? "" : " INCOMPLETE") << "\n";
        complete = complete && p.complete;
    }
    out << "wrote " << (cfg.output_dir / ("sweep_" + axis_text + ".csv")).string() << "\n";
    return complete ? kExitOk : kExitScorer;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& output, std::ostream& out) {
    std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
    const auto series = load_plot_series(paths);
    write_text_file(output, render_svg(series));
    out << "wrote " << output << " (" << series.size() << " series)\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Latent-noise optimization for diffusion pipelines"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis, values, plot_out = "plot.svg";
    std::vector<std::string> inputs;

    auto* run = app.add_subcommand("run", "Run one method over the configured seeds");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");

    auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of T, N or M");
    sweep->add_option("config", config_path, "Config file")->required();
    sweep->add_option("--axis", axis, "T, N or M")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    sweep->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");

    auto* plot = app.add_subcommand("plot", "Plot best score per epoch as SVG");
    plot->add_option("csv", inputs, "Trajectory or summary CSV files");
    plot->add_option("-o,--out", plot_out, "SVG output path");

    auto* diagnose = app.add_subcommand("diagnose", "Summarize a trajectory file");
    diagnose->add_option("csv", config_path, "Trajectory CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (run->parsed()) {
            return cmd_run(config_path, out_dir, out, err);
        }
        if (sweep->parsed()) {
            return cmd_sweep(config_path, axis, values, out_dir, out, err);
        }
        if (plot->parsed()) {
            return cmd_plot(inputs, plot_out, out);
        }
        if (diagnose->parsed()) {
            out << diagnose_report(config_path);
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.is_scorer_failure() ? kExitScorer : kExitConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace noisediff
