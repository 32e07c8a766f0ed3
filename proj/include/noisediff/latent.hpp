// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace noisediff {

/// A point in the d-dimensional latent space. Entries are always finite;
/// a default-constructed vector is the empty "unset" value with dim() == 0.
class LatentVector {
public:
    LatentVector() = default;
    explicit LatentVector(std::vector<double> values);

    static LatentVector zeros(std::size_t dim);

    std::size_t dim() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vector() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    friend bool operator==(const LatentVector&, const LatentVector&) = default;

private:
    std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);
double max_abs(std::span<const double> a);

void require_same_dim(std::size_t a, std::size_t b, std::string_view what);

/// Counter-based generator: Philox4x32-10 keyed by (seed, stream label).
/// Draw i of a stream is a pure function of (key, i), so draws can be
/// addressed in any order and from any thread.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    /// Independent child stream identified by a label.
    RngStream fork(std::string_view label) const;
    /// Independent child stream identified by integer coordinates, e.g. (epoch, candidate).
    RngStream substream(std::uint64_t a, std::uint64_t b = 0) const;

    double normal(std::uint64_t index) const;
    /// Uniform in the open interval (0, 1).
    double uniform(std::uint64_t index) const;
    /// Writes normal draws 0..out.size()-1.
    void fill_normal(std::span<double> out) const;

    std::uint64_t key() const noexcept { return key_; }

    using Block = std::array<std::uint32_t, 4>;
    static Block philox4x32(Block counter, std::array<std::uint32_t, 2> key);

private:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    Block block(std::uint64_t counter, std::uint32_t domain) const;

    std::uint64_t key_;
};

LatentVector sample_standard_normal(const RngStream& rng, std::size_t dim);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

struct DistributionReport {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks_statistic = 0.0;
    double ks_p_value = 1.0;
};

/// Sample moments. Skewness and kurtosis of a constant vector are reported as 0.
Moments moment_diagnostics(std::span<const double> z);
inline Moments moment_diagnostics(const LatentVector& z) { return moment_diagnostics(z.values()); }

/// One-sample Kolmogorov-Smirnov test against the standard normal CDF.
KsResult ks_normality(std::span<const double> z);
inline KsResult ks_normality(const LatentVector& z) { return ks_normality(z.values()); }

double standard_normal_cdf(double x);
/// Survival function of the limiting Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

}  // namespace noisediff
