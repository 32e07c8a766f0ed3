// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/pipeline.hpp"

#include "noisediff/error.hpp"

namespace noisediff {

Sample IdentityDecoder::decode(const LatentVector& z0) const {
    require_same_dim(z0.dim(), dim_, "IdentityDecoder::decode");
    return z0.vector();
}

LatentVector IdentityDecoder::adjoint(const LatentVector& z0, std::span<const double> cotangent) const {
    require_same_dim(z0.dim(), dim_, "IdentityDecoder::adjoint");
    require_same_dim(cotangent.size(), dim_, "IdentityDecoder::adjoint");
    return LatentVector(std::vector<double>(cotangent.begin(), cotangent.end()));
}

LinearDecoder::LinearDecoder(std::size_t rows, std::size_t cols, std::vector<double> matrix)
    : rows_(rows), cols_(cols), matrix_(std::move(matrix)) {
    require(rows_ >= 1 && cols_ >= 1, ErrorCode::invalid_dimension, "linear decoder needs rows, cols >= 1");
    require_same_dim(matrix_.size(), rows_ * cols_, "LinearDecoder matrix");
}

Sample LinearDecoder::decode(const LatentVector& z0) const {
    require_same_dim(z0.dim(), cols_, "LinearDecoder::decode");
    Sample out(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) {
            acc += matrix_[r * cols_ + c] * z0[c];
        }
        out[r] = acc;
    }
    return out;
}

LatentVector LinearDecoder::adjoint(const LatentVector& z0, std::span<const double> cotangent) const {
    require_same_dim(z0.dim(), cols_, "LinearDecoder::adjoint");
    require_same_dim(cotangent.size(), rows_, "LinearDecoder::adjoint");
    std::vector<double> out(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out[c] += matrix_[r * cols_ + c] * cotangent[r];
        }
    }
    return LatentVector(std::move(out));
}

PipelineOutput denoise_pipeline(const LatentVector& z_T, const DenoiserModel& model,
                                const GuidanceConfig& guidance, const NoiseSchedule& schedule,
                                const Decoder& decoder) {
    require_same_dim(z_T.dim(), model.dim(), "denoise_pipeline latent");
    require_same_dim(decoder.input_dim(), model.dim(), "denoise_pipeline decoder");
    LatentVector z = z_T;
    for (int t = schedule.steps(); t >= 1; --t) {
        const LatentVector eps = cfg_predict(model, z, t, guidance, schedule);
        z = ddim_step(z, t, eps, schedule);
    }
    Sample sample = decoder.decode(z);
    return {std::move(z), std::move(sample)};
}

PipelineOutput denoise_pipeline(const LatentVector& z_T, const Pipeline& pipeline) {
    return denoise_pipeline(z_T, *pipeline.model, pipeline.guidance, pipeline.schedule, *pipeline.decoder);
}

}  // namespace noisediff
