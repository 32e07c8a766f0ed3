// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "noisediff/analysis.hpp"
#include "noisediff/csv.hpp"
#include "noisediff/error.hpp"

namespace noisediff {

namespace {

std::string series_label(const std::filesystem::path& path) {
    const std::string stem = path.stem().string();
    const auto pos = stem.rfind("_seed");
    return pos == std::string::npos ? stem : stem.substr(0, pos);
}

bool is_summary(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    return !t.header.empty() && t.header.front() == "method";
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::vector<PlotSeries> load_plot_series(const std::vector<std::filesystem::path>& inputs) {
    require(!inputs.empty(), ErrorCode::invalid_config, "plot needs at least one CSV file");
    std::vector<std::filesystem::path> files;
    for (const auto& in : inputs) {
        if (is_summary(in)) {
            for (const auto& row : read_summary_csv(in)) {
                files.push_back(in.parent_path() / (row.method + "_seed" + std::to_string(row.seed) + ".csv"));
            }
        } else {
            files.push_back(in);
        }
    }

    std::map<std::string, std::vector<std::vector<TrajectoryRow>>> groups;
    std::vector<std::string> order;
    for (const auto& f : files) {
        auto rows = read_trajectory_csv(f);
        require(!rows.empty(), ErrorCode::invalid_config, f.string() + ": no trajectory rows");
        const std::string label = series_label(f);
        if (!groups.count(label)) {
            order.push_back(label);
        }
        groups[label].push_back(std::move(rows));
    }

    std::vector<PlotSeries> out;
    for (const auto& label : order) {
        const auto& runs = groups[label];
        std::size_t epochs = 0;
        for (const auto& r : runs) {
            epochs = std::max(epochs, r.size());
        }
        PlotSeries s;
        s.label = label;
        s.files = runs.size();
        s.mean_best.assign(epochs, 0.0);
        for (const auto& r : runs) {
            for (std::size_t e = 0; e < epochs; ++e) {
                // A run that stopped early keeps its last best score.
                s.mean_best[e] += r[std::min(e, r.size() - 1)].best_score;
            }
        }
        for (double& v : s.mean_best) {
            v /= static_cast<double>(runs.size());
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string render_svg(const std::vector<PlotSeries>& series) {
    constexpr double W = 640, H = 400, left = 60, right = 160, top = 20, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    std::size_t max_epoch = 1;
    for (const auto& s : series) {
        if (s.mean_best.size() > 1) {
            max_epoch = std::max(max_epoch, s.mean_best.size() - 1);
        }
    }
    const auto x_of = [&](double e) { return left + pw * e / static_cast<double>(max_epoch); };
    const auto y_of = [&](double v) { return top + ph * (1.0 - std::clamp(v, 0.0, 1.0)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
        << W << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<g class=\"axes\" stroke=\"black\">\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
        << "\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
    svg << "</g>\n";
    for (double v : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        svg << "<text class=\"ytick\" x=\"" << left - 8 << "\" y=\"" << fmt("%.1f", y_of(v) + 4)
            << "\" text-anchor=\"end\">" << fmt("%.2f", v) << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const double e = std::round(static_cast<double>(max_epoch) * k / 4.0);
        svg << "<text class=\"xtick\" x=\"" << fmt("%.1f", x_of(e)) << "\" y=\"" << top + ph + 18
            << "\" text-anchor=\"middle\">" << fmt("%.0f", e) << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">epoch</text>\n";
    svg << "<text x=\"15\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
        << top + ph / 2 << ")\">best score</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % std::size(kPalette)];
        svg << "<polyline class=\"series\" data-label=\"" << s.label << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (std::size_t e = 0; e < s.mean_best.size(); ++e) {
            svg << (e ? " " : "") << fmt("%.2f", x_of(static_cast<double>(e))) << "," << fmt("%.2f", y_of(s.mean_best[e]));
        }
        svg << "\"/>\n";
        const double ly = top + 10 + 18.0 * static_cast<double>(i);
        svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text class=\"legend\" x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << s.label
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string diagnose_report(const std::filesystem::path& trajectory_path) {
    const auto rows = read_trajectory_csv(trajectory_path);
    require(!rows.empty(), ErrorCode::invalid_config, trajectory_path.string() + ": no trajectory rows");
    std::ostringstream out;
    out << "file: " << trajectory_path.string() << "\n";
    out << "epochs: " << rows.back().epoch << "\n";
    out << "initial score: " << fmt("%.6f", rows.front().score) << "\n";
    out << "final best score: " << fmt("%.6f", rows.back().best_score) << "\n";

    bool monotone = true;
    int reached = -1, improved = 0;
    std::vector<double> ratios;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) {
            monotone = monotone && rows[i].best_score >= rows[i - 1].best_score;
            improved += rows[i].best_score > rows[i - 1].best_score ? 1 : 0;
        }
        if (reached < 0 && rows[i].best_score >= 0.9) {
            reached = rows[i].epoch;
        }
        if (std::isfinite(rows[i].selected_ratio)) {
            ratios.push_back(rows[i].selected_ratio);
        }
    }
    out << "best score monotone: " << (monotone ? "yes" : "NO") << "\n";
    out << "epochs improving best: " << improved << "\n";
    out << "epochs to 0.9: " << (reached < 0 ? std::string("not reached") : std::to_string(reached)) << "\n";
    if (ratios.empty()) {
        out << "selected ratio: n/a\n";
    } else {
        const auto negative = std::count_if(ratios.begin(), ratios.end(), [](double r) { return r < 0.0; });
        double mean = 0.0;
        for (double r : ratios) mean += r;
        mean /= static_cast<double>(ratios.size());
        out << "selected ratio: n=" << ratios.size() << " mean=" << fmt("%.6g", mean) << " negative=" << negative;
        if (ratios.size() >= 4) {
            const Quartiles q = quartiles(ratios);
            out << " q1=" << fmt("%.6g", q.q1) << " median=" << fmt("%.6g", q.median) << " q3=" << fmt("%.6g", q.q3);
        }
        out << "\n";
    }

    auto latent_path = trajectory_path;
    latent_path.replace_filename(trajectory_path.stem().string() + "_latent.csv");
    if (std::filesystem::exists(latent_path)) {
        const LatentColumns cols = read_latent_csv(latent_path);
        const auto describe = [&](const char* name, const std::vector<double>& z) {
            if (z.size() < 8) {
                out << name << " latent: dim " << z.size() << " too small for normality diagnostics\n";
                return;
            }
            const DistributionReport r = distribution_report(z);
            out << name << " latent: mean=" << fmt("%.4f", r.mean) << " var=" << fmt("%.4f", r.variance)
                << " skew=" << fmt("%.4f", r.skewness) << " kurt=" << fmt("%.4f", r.excess_kurtosis)
                << " ks=" << fmt("%.4f", r.ks_statistic) << " p=" << fmt("%.4f", r.ks_p_value) << "\n";
        };
        describe("initial", cols.initial);
        describe("best", cols.best);
        describe("final", cols.final);
    }
    return out.str();
}

}  // namespace noisediff
