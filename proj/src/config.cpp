// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "noisediff/error.hpp"
#include "noisediff/remote.hpp"

namespace noisediff {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void config_error(int line, const std::string& key, const std::string& message) {
    std::string where = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    if (!key.empty()) {
        where += "'" + key + "': ";
    }
    fail(ErrorCode::invalid_config, where + message);
}

double parse_double(const std::string& text, int line, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) {
            return v;
        }
    } catch (const std::logic_error&) {
    }
    config_error(line, key, "expected a finite number, got '" + text + "'");
}

long long parse_integer(const std::string& text, int line, const std::string& key) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size()) {
            return v;
        }
    } catch (const std::logic_error&) {
    }
    config_error(line, key, "expected an integer, got '" + text + "'");
}

/// Tracks which keys were consumed so leftovers can be reported.
class Reader {
public:
    explicit Reader(const ConfigFile& file) : file_(file) {}

    const ConfigFile::Entry* take(const std::string& key) {
        const auto* e = file_.find(key);
        if (e) {
            used_.insert(key);
        }
        return e;
    }

    void get(const std::string& key, std::string& out) {
        if (const auto* e = take(key)) {
            out = e->value;
        }
    }

    void get(const std::string& key, double& out) {
        if (const auto* e = take(key)) {
            out = parse_double(e->value, e->line, key);
        }
    }

    void get(const std::string& key, int& out) {
        if (const auto* e = take(key)) {
            out = static_cast<int>(parse_integer(e->value, e->line, key));
        }
    }

    template <class U>
        requires std::is_unsigned_v<U> && (!std::is_same_v<U, bool>)
    void get(const std::string& key, U& out) {
        if (const auto* e = take(key)) {
            const long long v = parse_integer(e->value, e->line, key);
            if (v < 0) {
                config_error(e->line, key, "must be >= 0");
            }
            out = static_cast<U>(v);
        }
    }

    void get(const std::string& key, bool& out) {
        if (const auto* e = take(key)) {
            if (e->value == "true" || e->value == "1") {
                out = true;
            } else if (e->value == "false" || e->value == "0") {
                out = false;
            } else {
                config_error(e->line, key, "expected true or false");
            }
        }
    }

    void get(const std::string& key, std::vector<double>& out) {
        if (const auto* e = take(key)) {
            out.clear();
            for (const auto& item : split(e->value, ',')) {
                out.push_back(parse_double(item, e->line, key));
            }
        }
    }

    /// Comma-separated indices and inclusive ranges such as "0-3,8".
    void get_indices(const std::string& key, std::vector<std::size_t>& out) {
        if (const auto* e = take(key)) {
            out.clear();
            for (const auto& item : split(e->value, ',')) {
                const auto dash = item.find('-');
                if (dash == std::string::npos) {
                    out.push_back(static_cast<std::size_t>(checked_index(item, e->line, key)));
                    continue;
                }
                const long long lo = checked_index(trim(item.substr(0, dash)), e->line, key);
                const long long hi = checked_index(trim(item.substr(dash + 1)), e->line, key);
                if (hi < lo) {
                    config_error(e->line, key, "descending range '" + item + "'");
                }
                for (long long i = lo; i <= hi; ++i) {
                    out.push_back(static_cast<std::size_t>(i));
                }
            }
        }
    }

    int line_of(const std::string& key) const {
        const auto* e = file_.find(key);
        return e ? e->line : 0;
    }

    void finish() const {
        for (const auto& [key, entry] : file_.entries()) {
            if (used_.count(key) == 0) {
                config_error(entry.line, key, "unknown key");
            }
        }
    }

private:
    static long long checked_index(const std::string& text, int line, const std::string& key) {
        const long long v = parse_integer(text, line, key);
        if (v < 0) {
            config_error(line, key, "negative index");
        }
        return v;
    }

    const ConfigFile& file_;
    std::set<std::string> used_;
};

std::string join_numbers(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_number(values[i]);
    }
    return out;
}

template <class Int>
std::string join_ints(const std::vector<Int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(values[i]);
    }
    return out;
}

/// Numeric sub-keys of `prefix` sorted by index, e.g. component.0, component.1.
std::vector<std::size_t> indexed_children(const ConfigFile& file, const std::string& prefix) {
    std::set<std::size_t> found;
    for (const auto& child : file.children(prefix)) {
        const auto dot = child.find('.');
        const std::string head = child.substr(0, dot);
        const auto* e = file.find(prefix + "." + child);
        found.insert(static_cast<std::size_t>(parse_integer(head, e ? e->line : 0, prefix + "." + child)));
    }
    return {found.begin(), found.end()};
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

// ---------------------------------------------------------------------------

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string content = trim(raw.substr(0, hash));
        if (content.empty()) {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            config_error(line, "", "expected 'key = value'");
        }
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (key.empty()) {
            config_error(line, "", "empty key");
        }
        if (cfg.entries_.count(key)) {
            config_error(line, key, "duplicate key (first set on line " +
                                        std::to_string(cfg.entries_[key].line) + ")");
        }
        cfg.entries_[key] = Entry{value, line};
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::invalid_config, "cannot open config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> ConfigFile::children(const std::string& prefix) const {
    std::vector<std::string> out;
    const std::string p = prefix + ".";
    for (auto it = entries_.lower_bound(p); it != entries_.end() && it->first.compare(0, p.size(), p) == 0; ++it) {
        out.push_back(it->first.substr(p.size()));
    }
    return out;
}

std::string_view to_string(Method method) {
    switch (method) {
        case Method::noise_diffusion: return "noise-diffusion";
        case Method::pgd: return "pgd";
        case Method::mean_variance: return "mean-variance";
        case Method::random_sampling: return "random-sampling";
        case Method::random_diffusion: return "random-diffusion";
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    for (Method m : {Method::noise_diffusion, Method::pgd, Method::mean_variance, Method::random_sampling,
                     Method::random_diffusion}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    fail(ErrorCode::invalid_config, "unknown method '" + std::string(text) + "'");
}

ExperimentConfig ExperimentConfig::from_file(const ConfigFile& file) {
    ExperimentConfig c;
    Reader r(file);

    std::string method;
    r.get("method", method);
    if (!method.empty()) {
        try {
            c.method = parse_method(method);
        } catch (const Error& e) {
            config_error(r.line_of("method"), "method", e.what());
        }
    }
    r.get("dim", c.dim);
    r.get("T", c.steps);
    r.get("M", c.epochs);
    r.get("N", c.candidates);
    r.get("guidance.w", c.guidance_w);
    r.get("guidance.condition", c.condition);
    r.get("schedule.beta_start", c.beta_start);
    r.get("schedule.beta_end", c.beta_end);
    r.get("schedule.train_steps", c.train_steps);

    // Denoiser
    auto& d = c.denoiser;
    r.get("denoiser.type", d.type);
    r.get("denoiser.constant.value", d.constant_value);
    r.get("denoiser.random.components", d.random_components);
    r.get("denoiser.random.seed", d.random_seed);
    r.get("denoiser.random.scale", d.random_scale);
    r.get("denoiser.random.variance", d.random_variance);
    for (std::size_t k : indexed_children(file, "denoiser.component")) {
        const std::string base = "denoiser.component." + std::to_string(k);
        if (k != d.components.size()) {
            config_error(r.line_of(base + ".mean"), base, "components must be numbered 0, 1, 2, ...");
        }
        MixtureComponent comp;
        r.get(base + ".weight", comp.weight);
        r.get(base + ".variance", comp.variance);
        std::vector<double> mean;
        r.get(base + ".mean", mean);
        if (mean.size() == 1) {
            mean.assign(c.dim, mean.front());
        }
        if (mean.size() != c.dim) {
            config_error(r.line_of(base + ".mean"), base + ".mean",
                         "needs 1 or dim = " + std::to_string(c.dim) + " values");
        }
        comp.mean = std::move(mean);
        d.components.push_back(std::move(comp));
    }
    const auto condition_keys = file.children("denoiser.condition");
    if (!condition_keys.empty()) {
        d.conditions.clear();
    }
    for (const auto& label : condition_keys) {
        std::vector<std::size_t> idx;
        r.get_indices("denoiser.condition." + label, idx);
        d.conditions[label] = std::move(idx);
    }

    // Decoder
    r.get("decoder.type", c.decoder.type);
    r.get("decoder.linear.rows", c.decoder.rows);
    r.get("decoder.linear.matrix", c.decoder.matrix);
    r.get("decoder.linear.seed", c.decoder.seed);

    // Scorer
    auto& s = c.scorer;
    r.get("scorer.type", s.type);
    if (const auto* e = r.take("scorer.target")) {
        if (e->value == "reachable") {
            s.target = "reachable";
        } else {
            s.target = "explicit";
            for (const auto& item : split(e->value, ',')) {
                s.target_values.push_back(parse_double(item, e->line, "scorer.target"));
            }
        }
    }
    r.get("scorer.target_seed", s.target_seed);
    r.get("scorer.groups", s.groups);
    r.get("scorer.radius", s.radius);
    r.get("scorer.sharpness", s.sharpness);
    r.get("scorer.offset", s.offset);
    r.get("scorer.value", s.value);
    r.get("scorer.prompt", s.prompt);
    r.get("scorer.remote.endpoint", s.remote_endpoint);
    r.get("scorer.remote.timeout_ms", s.remote_timeout_ms);
    r.get("scorer.remote.retries", s.remote_retries);
    for (std::size_t j : indexed_children(file, "scorer.group")) {
        const std::string base = "scorer.group." + std::to_string(j);
        if (j != s.explicit_groups.size()) {
            config_error(r.line_of(base + ".indices"), base, "groups must be numbered 0, 1, 2, ...");
        }
        GroupSpec g;
        g.radius = s.radius;
        g.sharpness = s.sharpness;
        r.get_indices(base + ".indices", g.indices);
        r.get(base + ".radius", g.radius);
        r.get(base + ".sharpness", g.sharpness);
        s.explicit_groups.push_back(std::move(g));
    }

    std::string mode;
    r.get("gradient.mode", mode);
    if (!mode.empty()) {
        try {
            c.gradient_mode = parse_gradient_mode(mode);
        } catch (const Error& e) {
            config_error(r.line_of("gradient.mode"), "gradient.mode", e.what());
        }
    }
    r.get("gradient.fd_step", c.fd_step);
    r.get("nd.v_norm_guard", c.v_norm_guard);
    r.get("nd.strict", c.strict);
    r.get("pgd.step", c.pgd_step);
    r.get("pgd.radius", c.pgd_radius);
    r.get("mv.lr", c.mv_lr);
    r.get("mv.beta1", c.mv_beta1);
    r.get("mv.beta2", c.mv_beta2);
    r.get("mv.eps", c.mv_eps);

    if (const auto* e = r.take("seeds")) {
        c.seeds.clear();
        for (const auto& item : split(e->value, ',')) {
            const long long v = parse_integer(item, e->line, "seeds");
            if (v < 0) {
                config_error(e->line, "seeds", "seeds must be >= 0");
            }
            c.seeds.push_back(static_cast<std::uint64_t>(v));
        }
    }
    if (const auto* e = r.take("seeds.count")) {
        if (file.has("seeds")) {
            config_error(e->line, "seeds.count", "give either seeds or seeds.count");
        }
        const long long n = parse_integer(e->value, e->line, "seeds.count");
        if (n < 1) {
            config_error(e->line, "seeds.count", "must be >= 1");
        }
        c.seeds.clear();
        for (long long i = 0; i < n; ++i) {
            c.seeds.push_back(static_cast<std::uint64_t>(i));
        }
    }
    std::string out_dir;
    r.get("output.dir", out_dir);
    if (!out_dir.empty()) {
        c.output_dir = out_dir;
    }
    r.get("run.parallel_seeds", c.parallel_seeds);
    r.finish();

    // Semantic checks.
    const auto check = [&](bool ok, const std::string& key, const std::string& message) {
        if (!ok) {
            config_error(r.line_of(key), key, message);
        }
    };
    check(c.dim >= 1, "dim", "must be >= 1");
    check(c.steps >= 1, "T", "must be >= 1");
    check(c.epochs >= 0, "M", "must be >= 0");
    check(c.candidates >= 1, "N", "must be >= 1");
    check(c.beta_start > 0.0 && c.beta_start <= c.beta_end && c.beta_end < 1.0, "schedule.beta_end",
          "need 0 < beta_start <= beta_end < 1");
    check(c.train_steps == 0 || c.train_steps >= c.steps, "schedule.train_steps", "must be 0 or >= T");
    check(d.type == "mixture" || d.type == "constant", "denoiser.type", "expected mixture or constant");
    check(d.random_components >= 1, "denoiser.random.components", "must be >= 1");
    check(c.decoder.type == "identity" || c.decoder.type == "linear", "decoder.type",
          "expected identity or linear");
    check(s.type == "composite" || s.type == "quadratic-sigmoid" || s.type == "constant" || s.type == "remote",
          "scorer.type", "expected composite, quadratic-sigmoid, constant or remote");
    check(s.groups >= 1, "scorer.groups", "must be >= 1");
    check(s.remote_timeout_ms >= 1, "scorer.remote.timeout_ms", "must be >= 1");
    check(s.remote_retries >= 0, "scorer.remote.retries", "must be >= 0");
    check(c.v_norm_guard > 0.0, "nd.v_norm_guard", "must be > 0");
    check(c.pgd_step >= 0.0, "pgd.step", "must be >= 0");
    check(c.pgd_radius > 0.0, "pgd.radius", "must be > 0");
    check(c.mv_lr > 0.0, "mv.lr", "must be > 0");
    check(!c.seeds.empty(), "seeds", "need at least one seed");
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    return from_file(ConfigFile::load(path));
}

std::string ExperimentConfig::to_text() const {
    std::map<std::string, std::string> kv;
    kv["method"] = std::string(to_string(method));
    kv["dim"] = std::to_string(dim);
    kv["T"] = std::to_string(steps);
    kv["M"] = std::to_string(epochs);
    kv["N"] = std::to_string(candidates);
    kv["guidance.w"] = format_number(guidance_w);
    kv["guidance.condition"] = condition;
    kv["schedule.beta_start"] = format_number(beta_start);
    kv["schedule.beta_end"] = format_number(beta_end);
    kv["schedule.train_steps"] = std::to_string(train_steps);

    kv["denoiser.type"] = denoiser.type;
    kv["denoiser.constant.value"] = format_number(denoiser.constant_value);
    if (denoiser.components.empty()) {
        kv["denoiser.random.components"] = std::to_string(denoiser.random_components);
        kv["denoiser.random.seed"] = std::to_string(denoiser.random_seed);
        kv["denoiser.random.scale"] = format_number(denoiser.random_scale);
        kv["denoiser.random.variance"] = format_number(denoiser.random_variance);
    }
    for (std::size_t k = 0; k < denoiser.components.size(); ++k) {
        const std::string base = "denoiser.component." + std::to_string(k);
        kv[base + ".weight"] = format_number(denoiser.components[k].weight);
        kv[base + ".variance"] = format_number(denoiser.components[k].variance);
        kv[base + ".mean"] = join_numbers(denoiser.components[k].mean);
    }
    for (const auto& [label, idx] : denoiser.conditions) {
        kv["denoiser.condition." + label] = join_ints(idx);
    }

    kv["decoder.type"] = decoder.type;
    kv["decoder.linear.rows"] = std::to_string(decoder.rows);
    kv["decoder.linear.seed"] = std::to_string(decoder.seed);
    if (!decoder.matrix.empty()) {
        kv["decoder.linear.matrix"] = join_numbers(decoder.matrix);
    }

    kv["scorer.type"] = scorer.type;
    kv["scorer.target"] = scorer.target == "reachable" ? std::string("reachable") : join_numbers(scorer.target_values);
    kv["scorer.target_seed"] = std::to_string(scorer.target_seed);
    kv["scorer.groups"] = std::to_string(scorer.groups);
    kv["scorer.radius"] = format_number(scorer.radius);
    kv["scorer.sharpness"] = format_number(scorer.sharpness);
    kv["scorer.offset"] = format_number(scorer.offset);
    kv["scorer.value"] = format_number(scorer.value);
    kv["scorer.prompt"] = scorer.prompt;
    kv["scorer.remote.endpoint"] = scorer.remote_endpoint;
    kv["scorer.remote.timeout_ms"] = std::to_string(scorer.remote_timeout_ms);
    kv["scorer.remote.retries"] = std::to_string(scorer.remote_retries);
    for (std::size_t j = 0; j < scorer.explicit_groups.size(); ++j) {
        const std::string base = "scorer.group." + std::to_string(j);
        kv[base + ".indices"] = join_ints(scorer.explicit_groups[j].indices);
        kv[base + ".radius"] = format_number(scorer.explicit_groups[j].radius);
        kv[base + ".sharpness"] = format_number(scorer.explicit_groups[j].sharpness);
    }

    kv["gradient.mode"] = std::string(to_string(gradient_mode));
    kv["gradient.fd_step"] = format_number(fd_step);
    kv["nd.v_norm_guard"] = format_number(v_norm_guard);
    kv["nd.strict"] = strict ? "true" : "false";
    kv["pgd.step"] = format_number(pgd_step);
    kv["pgd.radius"] = format_number(pgd_radius);
    kv["mv.lr"] = format_number(mv_lr);
    kv["mv.beta1"] = format_number(mv_beta1);
    kv["mv.beta2"] = format_number(mv_beta2);
    kv["mv.eps"] = format_number(mv_eps);
    kv["seeds"] = join_ints(seeds);
    kv["output.dir"] = output_dir.string();
    kv["run.parallel_seeds"] = parallel_seeds ? "true" : "false";

    std::string out;
    for (const auto& [k, v] : kv) {
        out += k + " = " + v + "\n";
    }
    return out;
}

NoiseDiffusionConfig ExperimentConfig::noise_diffusion_config() const {
    NoiseDiffusionConfig nd;
    nd.max_epochs = epochs;
    nd.candidates = candidates;
    nd.gradient.mode = gradient_mode;
    nd.gradient.fd_step = fd_step;
    nd.v_norm_guard = v_norm_guard;
    nd.strict = strict;
    return nd;
}

BaselineConfig ExperimentConfig::baseline_config() const {
    BaselineConfig b;
    switch (method) {
        case Method::pgd: b.method = BaselineMethod::pgd; break;
        case Method::mean_variance: b.method = BaselineMethod::mean_variance; break;
        case Method::random_sampling: b.method = BaselineMethod::random_sampling; break;
        case Method::random_diffusion: b.method = BaselineMethod::random_diffusion; break;
        case Method::noise_diffusion:
            fail(ErrorCode::invalid_config, "noise-diffusion has no baseline config");
    }
    b.pgd_step = pgd_step;
    b.pgd_radius = pgd_radius;
    b.learning_rate = mv_lr;
    b.adam_beta1 = mv_beta1;
    b.adam_beta2 = mv_beta2;
    b.adam_eps = mv_eps;
    b.gradient.mode = gradient_mode;
    b.gradient.fd_step = fd_step;
    return b;
}

bool apply_seed_override(ExperimentConfig& config, const char* env_value) {
    if (env_value == nullptr || *env_value == '\0') {
        return false;
    }
    std::vector<std::uint64_t> seeds;
    for (const auto& item : split(env_value, ',')) {
        const long long v = parse_integer(item, 0, "NOISEDIFF_SEED");
        if (v < 0) {
            config_error(0, "NOISEDIFF_SEED", "seeds must be >= 0");
        }
        seeds.push_back(static_cast<std::uint64_t>(v));
    }
    config.seeds = std::move(seeds);
    return true;
}

Pipeline build_pipeline(const ExperimentConfig& c) {
    Pipeline p;
    const auto& d = c.denoiser;
    if (d.type == "constant") {
        p.model = std::make_shared<ConstantDenoiser>(LatentVector(std::vector<double>(c.dim, d.constant_value)));
    } else {
        std::vector<MixtureComponent> comps = d.components;
        if (comps.empty()) {
            const RngStream means(d.random_seed, "mixture");
            for (int k = 0; k < d.random_components; ++k) {
                std::vector<double> m = sample_standard_normal(means.substream(static_cast<std::uint64_t>(k)), c.dim).vector();
                for (double& x : m) {
                    x *= d.random_scale;
                }
                comps.push_back({1.0, std::move(m), d.random_variance});
            }
        }
        p.model = std::make_shared<AnalyticMixtureDenoiser>(std::move(comps), d.conditions);
    }
    p.guidance = GuidanceConfig{c.guidance_w, ConditionId(c.condition), ConditionId::null()};
    p.schedule = c.train_steps == 0 ? build_schedule(c.steps, c.beta_start, c.beta_end)
                                    : build_ddim_schedule(c.steps, c.beta_start, c.beta_end, c.train_steps);
    if (c.decoder.type == "linear") {
        const std::size_t rows = c.decoder.rows == 0 ? c.dim : c.decoder.rows;
        std::vector<double> matrix = c.decoder.matrix;
        if (matrix.empty()) {
            matrix.resize(rows * c.dim);
            RngStream(c.decoder.seed, "decoder").fill_normal(matrix);
            const double scale = 1.0 / std::sqrt(static_cast<double>(c.dim));
            for (double& x : matrix) {
                x *= scale;
            }
        }
        p.decoder = std::make_shared<LinearDecoder>(rows, c.dim, std::move(matrix));
    } else {
        p.decoder = std::make_shared<IdentityDecoder>(c.dim);
    }
    // Resolve the condition early so a bad label is a config error, not a run failure.
    (void)cfg_predict(*p.model, LatentVector::zeros(c.dim), p.schedule.steps(), p.guidance, p.schedule);
    return p;
}

std::shared_ptr<const Scorer> build_scorer(const ExperimentConfig& c, const Pipeline& pipeline, std::uint64_t seed) {
    const auto& s = c.scorer;
    const std::size_t out_dim = pipeline.decoder->output_dim();
    if (s.type == "constant") {
        return std::make_shared<ConstantScorer>(s.value);
    }
    if (s.type == "remote") {
        RemoteScorerOptions opt;
        opt.endpoint = RemoteEndpoint::parse(s.remote_endpoint);
        opt.prompt = s.prompt;
        opt.timeout = std::chrono::milliseconds(s.remote_timeout_ms);
        opt.retries = s.remote_retries;
        return std::make_shared<RemoteScorer>(std::move(opt));
    }
    std::vector<double> target;
    if (s.target == "reachable") {
        const LatentVector star = sample_standard_normal(RngStream(s.target_seed, "target").substream(seed), c.dim);
        target = denoise_pipeline(star, pipeline).sample;
    } else {
        target = s.target_values;
        if (target.size() == 1) {
            target.assign(out_dim, target.front());
        }
        require(target.size() == out_dim, ErrorCode::invalid_config,
                "scorer.target needs 1 or " + std::to_string(out_dim) + " values");
    }
    if (s.type == "quadratic-sigmoid") {
        return std::make_shared<QuadraticSigmoidScorer>(std::move(target), s.sharpness, s.offset);
    }
    std::vector<AttributeGroup> groups;
    if (!s.explicit_groups.empty()) {
        for (const auto& g : s.explicit_groups) {
            AttributeGroup a;
            a.indices = g.indices;
            for (std::size_t i : g.indices) {
                require(i < out_dim, ErrorCode::invalid_config, "scorer group index out of range");
                a.target.push_back(target[i]);
            }
            a.radius = g.radius;
            a.sharpness = g.sharpness;
            groups.push_back(std::move(a));
        }
    } else {
        const auto n = static_cast<std::size_t>(s.groups);
        require(n <= out_dim, ErrorCode::invalid_config, "more scorer groups than sample coordinates");
        for (std::size_t j = 0; j < n; ++j) {
            AttributeGroup a;
            const std::size_t lo = j * out_dim / n;
            const std::size_t hi = (j + 1) * out_dim / n;
            for (std::size_t i = lo; i < hi; ++i) {
                a.indices.push_back(i);
                a.target.push_back(target[i]);
            }
            a.radius = s.radius;
            a.sharpness = s.sharpness;
            groups.push_back(std::move(a));
        }
    }
    return std::make_shared<CompositeTargetScorer>(out_dim, std::move(groups));
}

}  // namespace noisediff
