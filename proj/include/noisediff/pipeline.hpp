// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "noisediff/denoiser.hpp"
#include "noisediff/latent.hpp"
#include "noisediff/schedule.hpp"

namespace noisediff {

/// Decoded output handed to a scorer.
using Sample = std::vector<double>;

class Decoder {
public:
    virtual ~Decoder() = default;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual Sample decode(const LatentVector& z0) const = 0;
    /// (dD/dz0)^T * cotangent, evaluated at z0.
    virtual LatentVector adjoint(const LatentVector& z0, std::span<const double> cotangent) const = 0;
};

class IdentityDecoder final : public Decoder {
public:
    explicit IdentityDecoder(std::size_t dim) : dim_(dim) {}
    std::size_t input_dim() const override { return dim_; }
    std::size_t output_dim() const override { return dim_; }
    Sample decode(const LatentVector& z0) const override;
    LatentVector adjoint(const LatentVector& z0, std::span<const double> cotangent) const override;

private:
    std::size_t dim_;
};

/// sample = A * z0 with A stored row-major (rows x cols).
class LinearDecoder final : public Decoder {
public:
    LinearDecoder(std::size_t rows, std::size_t cols, std::vector<double> matrix);
    std::size_t input_dim() const override { return cols_; }
    std::size_t output_dim() const override { return rows_; }
    Sample decode(const LatentVector& z0) const override;
    LatentVector adjoint(const LatentVector& z0, std::span<const double> cotangent) const override;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> matrix_;
};

/// Everything needed to map an initial latent z_T to a scored sample.
struct Pipeline {
    std::shared_ptr<const DenoiserModel> model;
    GuidanceConfig guidance;
    NoiseSchedule schedule = NoiseSchedule::degenerate();
    std::shared_ptr<const Decoder> decoder;

    std::size_t dim() const { return model->dim(); }
};

struct PipelineOutput {
    LatentVector z0;
    Sample sample;
};

/// T guided DDIM steps from z_T followed by decoding. Pure and reentrant.
PipelineOutput denoise_pipeline(const LatentVector& z_T, const DenoiserModel& model,
                                const GuidanceConfig& guidance, const NoiseSchedule& schedule,
                                const Decoder& decoder);
PipelineOutput denoise_pipeline(const LatentVector& z_T, const Pipeline& pipeline);

}  // namespace noisediff
