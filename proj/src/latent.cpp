// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/latent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "noisediff/error.hpp"

namespace noisediff {

LatentVector::LatentVector(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), ErrorCode::invalid_dimension, "latent vector must have dim >= 1");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        require(std::isfinite(values_[i]), ErrorCode::out_of_range,
                "non-finite latent entry at index " + std::to_string(i));
    }
}

LatentVector LatentVector::zeros(std::size_t dim) {
    return LatentVector(std::vector<double>(dim, 0.0));
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a.size(), b.size(), "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double squared_norm(std::span<const double> a) {
    double acc = 0.0;
    for (double x : a) {
        acc += x * x;
    }
    return acc;
}

double norm(std::span<const double> a) {
    return std::sqrt(squared_norm(a));
}

double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

void require_same_dim(std::size_t a, std::size_t b, std::string_view what) {
    if (a != b) {
        fail(ErrorCode::dimension_mismatch,
             std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

// ---------------------------------------------------------------------------
// RNG

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

constexpr std::uint64_t combine(std::uint64_t key, std::uint64_t value) {
    return splitmix64(key ^ splitmix64(value + 0x632BE59BD9B4E019ull));
}

// 53 random bits mapped to the open interval (0, 1).
double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : key_(combine(splitmix64(seed), fnv1a(label))) {}

RngStream RngStream::fork(std::string_view label) const {
    return RngStream(combine(key_ ^ 0xA5A5A5A5A5A5A5A5ull, fnv1a(label)));
}

RngStream RngStream::substream(std::uint64_t a, std::uint64_t b) const {
    return RngStream(combine(combine(key_, a), b ^ 0x5851F42D4C957F2Dull));
}

RngStream::Block RngStream::philox4x32(Block ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

RngStream::Block RngStream::block(std::uint64_t counter, std::uint32_t domain) const {
    return philox4x32({static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                       domain, 0u},
                      {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
}

double RngStream::normal(std::uint64_t index) const {
    // Box-Muller: each Philox block yields the pair (2k, 2k+1).
    const Block b = block(index >> 1, 0u);
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return (index & 1u) == 0 ? r * std::cos(theta) : r * std::sin(theta);
}

double RngStream::uniform(std::uint64_t index) const {
    const Block b = block(index, 1u);
    return to_open_unit(b[0], b[1]);
}

void RngStream::fill_normal(std::span<double> out) const {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i + 1 < n; i += 2) {
        const Block b = block(i >> 1, 0u);
        const double r = std::sqrt(-2.0 * std::log(to_open_unit(b[0], b[1])));
        const double theta = 2.0 * std::numbers::pi * to_open_unit(b[2], b[3]);
        out[i] = r * std::cos(theta);
        out[i + 1] = r * std::sin(theta);
    }
    if (n % 2 == 1) {
        out[n - 1] = normal(n - 1);
    }
}

LatentVector sample_standard_normal(const RngStream& rng, std::size_t dim) {
    require(dim >= 1, ErrorCode::invalid_dimension, "sample_standard_normal: dim must be >= 1");
    std::vector<double> values(dim);
    rng.fill_normal(values);
    return LatentVector(std::move(values));
}

// ---------------------------------------------------------------------------
// Diagnostics

Moments moment_diagnostics(std::span<const double> z) {
    const std::size_t n = z.size();
    require(n >= 2, ErrorCode::insufficient_sample, "moment_diagnostics needs at least 2 entries");
    double mean = 0.0;
    for (double x : z) {
        mean += x;
    }
    mean /= static_cast<double>(n);
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double x : z) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const double nn = static_cast<double>(n);
    Moments out;
    out.mean = mean;
    out.variance = m2 / (nn - 1.0);
    m2 /= nn;
    m3 /= nn;
    m4 /= nn;
    if (m2 > 0.0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return out;
}

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) {
        return 1.0;
    }
    double p = 0.0;
    if (lambda < 1.18) {
        // Jacobi-theta form converges fast for small lambda.
        const double scale = std::sqrt(2.0 * std::numbers::pi) / lambda;
        const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            sum += std::exp(-odd * odd * c);
        }
        p = 1.0 - scale * sum;
    } else {
        double sum = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * lambda * lambda);
            sum += (k % 2 == 1 ? term : -term);
            if (term < 1e-18) {
                break;
            }
        }
        p = 2.0 * sum;
    }
    return std::clamp(p, 0.0, 1.0);
}

KsResult ks_normality(std::span<const double> z) {
    const std::size_t n = z.size();
    require(n >= 8, ErrorCode::insufficient_sample, "ks_normality needs at least 8 entries");
    std::vector<double> sorted(z.begin(), z.end());
    std::sort(sorted.begin(), sorted.end());
    const double nn = static_cast<double>(n);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = standard_normal_cdf(sorted[i]);
        const double above = static_cast<double>(i + 1) / nn - f;
        const double below = f - static_cast<double>(i) / nn;
        d = std::max({d, above, below});
    }
    KsResult out;
    out.statistic = std::clamp(d, 0.0, 1.0);
    out.p_value = kolmogorov_survival(std::sqrt(nn) * out.statistic);
    return out;
}

}  // namespace noisediff
