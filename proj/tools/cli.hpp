// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace noisediff {

/// Exit codes: 0 success, 1 unexpected failure, 2 bad config or input,
/// 3 scorer failure (artifacts written but marked incomplete).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace noisediff
