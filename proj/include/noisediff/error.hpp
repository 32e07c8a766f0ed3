// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noisediff {

enum class ErrorCode {
    invalid_dimension,
    insufficient_sample,
    invalid_schedule,
    out_of_range,
    dimension_mismatch,
    unknown_condition,
    invalid_score,
    degenerate_step,
    gradient_unavailable,
    scorer_contract,
    scorer_unavailable,
    invalid_prompt,
    invalid_config,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the optimizer loop, the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

    /// Scorer failures abort an optimizer run but leave partial results usable.
    bool is_scorer_failure() const noexcept {
        return code_ == ErrorCode::scorer_unavailable || code_ == ErrorCode::scorer_contract;
    }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        fail(code, message);
    }
}

}  // namespace noisediff
