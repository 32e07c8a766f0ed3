// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "noisediff/denoiser.hpp"
#include "noisediff/gradient.hpp"
#include "noisediff/optimizers.hpp"
#include "noisediff/pipeline.hpp"
#include "noisediff/scorer.hpp"

namespace noisediff {

/// Flat `key = value` text. `#` starts a comment; blank lines are ignored.
/// Keys are dotted paths such as scorer.type or denoiser.component.0.mean.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::filesystem::path& path);

    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const Entry* find(const std::string& key) const;

    /// Keys under `prefix.` (e.g. "denoiser.component") with the prefix stripped.
    std::vector<std::string> children(const std::string& prefix) const;

private:
    std::map<std::string, Entry> entries_;
};

enum class Method { noise_diffusion, pgd, mean_variance, random_sampling, random_diffusion };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct DenoiserSpec {
    std::string type = "mixture";  // mixture | constant
    // Random mixture (used when `components` is empty).
    int random_components = 4;
    std::uint64_t random_seed = 7;
    double random_scale = 1.5;
    double random_variance = 0.25;
    std::vector<MixtureComponent> components;
    std::map<std::string, std::vector<std::size_t>> conditions{{"c0", {0, 1}}};
    double constant_value = 0.0;
};

struct DecoderSpec {
    std::string type = "identity";  // identity | linear
    std::size_t rows = 0;            // 0: same as dim
    std::vector<double> matrix;      // explicit row-major matrix
    std::uint64_t seed = 11;         // random matrix when `matrix` is empty
};

struct GroupSpec {
    std::vector<std::size_t> indices;
    double radius = 1.0;
    double sharpness = 4.0;
};

struct ScorerSpec {
    std::string type = "composite";  // composite | quadratic-sigmoid | constant | remote
    /// "reachable": target = decode(Omega(z*)) with z* drawn from the
    /// target stream per seed; otherwise `target_values` is used.
    std::string target = "reachable";
    std::vector<double> target_values;
    std::uint64_t target_seed = 1000;
    int groups = 2;
    std::vector<GroupSpec> explicit_groups;
    double radius = 1.0;
    double sharpness = 4.0;
    double offset = 0.0;
    double value = 1.0;
    std::string prompt = "a lion and a monkey";
    std::string remote_endpoint = "http://127.0.0.1:8080/score";
    int remote_timeout_ms = 5000;
    int remote_retries = 2;
};

struct ExperimentConfig {
    Method method = Method::noise_diffusion;
    std::size_t dim = 16;
    int steps = 50;       // T
    int epochs = 50;      // M
    int candidates = 50;  // N
    double guidance_w = 7.5;
    std::string condition = "c0";
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int train_steps = 1000;  // 0: ramp directly over T steps
    DenoiserSpec denoiser;
    DecoderSpec decoder;
    ScorerSpec scorer;
    GradientMode gradient_mode = GradientMode::approx_constant_eps;
    double fd_step = 0.0;
    double v_norm_guard = 1e-12;
    bool strict = false;
    double pgd_step = 0.05;
    double pgd_radius = 0.5;
    double mv_lr = 0.01;
    double mv_beta1 = 0.9;
    double mv_beta2 = 0.999;
    double mv_eps = 1e-8;
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path output_dir = "out";
    bool parallel_seeds = true;

    /// Builds from parsed keys; unknown keys and bad values raise
    /// invalid_config with the offending line number.
    static ExperimentConfig from_file(const ConfigFile& file);
    static ExperimentConfig load(const std::filesystem::path& path);

    /// Fully resolved config (defaults included) in the same key = value format.
    std::string to_text() const;

    NoiseDiffusionConfig noise_diffusion_config() const;
    BaselineConfig baseline_config() const;
};

/// Replaces the seed list when NOISEDIFF_SEED holds one or more
/// comma-separated seeds. Returns true if an override was applied.
bool apply_seed_override(ExperimentConfig& config, const char* env_value);

Pipeline build_pipeline(const ExperimentConfig& config);
std::shared_ptr<const Scorer> build_scorer(const ExperimentConfig& config, const Pipeline& pipeline,
                                           std::uint64_t seed);

std::string format_number(double value);

}  // namespace noisediff
