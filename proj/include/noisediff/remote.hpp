// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <span>
#include <string>
#include <string_view>

#include "noisediff/scorer.hpp"

namespace noisediff {

/// Does this figure show '{prompt}'? Please answer yes or no.
std::string format_vqa_question(std::string_view prompt);

struct RemoteEndpoint {
    std::string host;
    int port = 80;
    std::string path = "/";

    /// Accepts http://host[:port][/path].
    static RemoteEndpoint parse(std::string_view url);
};

struct RemoteScorerOptions {
    RemoteEndpoint endpoint;
    std::string prompt;
    std::chrono::milliseconds timeout{5000};
    int retries = 2;  // extra attempts after the first failure
};

/// POSTs {"sample": [...], "prompt": ..., "question": ...} and returns the
/// "score" field of the JSON reply. Transport failures, non-200 replies and
/// malformed bodies raise scorer_unavailable; a score outside [0, 1] raises
/// scorer_contract. Both are retried up to `retries` extra times.
double remote_score(const RemoteEndpoint& endpoint, std::span<const double> sample, std::string_view prompt,
                    std::chrono::milliseconds timeout, int retries = 0);

/// Score-only scorer backed by a remote service; exposes no gradient.
class RemoteScorer final : public Scorer {
public:
    explicit RemoteScorer(RemoteScorerOptions options);

    double score(std::span<const double> sample) const override;
    std::string name() const override { return "remote"; }

    const RemoteScorerOptions& options() const noexcept { return options_; }

private:
    RemoteScorerOptions options_;
};

}  // namespace noisediff
