// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/error.hpp"

namespace noisediff {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_dimension: return "invalid-dimension";
        case ErrorCode::insufficient_sample: return "insufficient-sample";
        case ErrorCode::invalid_schedule: return "invalid-schedule";
        case ErrorCode::out_of_range: return "out-of-range";
        case ErrorCode::dimension_mismatch: return "dimension-mismatch";
        case ErrorCode::unknown_condition: return "unknown-condition";
        case ErrorCode::invalid_score: return "invalid-score";
        case ErrorCode::degenerate_step: return "degenerate-step";
        case ErrorCode::gradient_unavailable: return "gradient-unavailable";
        case ErrorCode::scorer_contract: return "scorer-contract-violation";
        case ErrorCode::scorer_unavailable: return "scorer-unavailable";
        case ErrorCode::invalid_prompt: return "invalid-prompt";
        case ErrorCode::invalid_config: return "invalid-config";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace noisediff
