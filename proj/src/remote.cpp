// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include "noisediff/remote.hpp"

#include <httplib.h>

#include <json.hpp>
#include <optional>

#include "noisediff/error.hpp"

namespace noisediff {

std::string format_vqa_question(std::string_view prompt) {
    require(!prompt.empty(), ErrorCode::invalid_prompt, "prompt must be non-empty");
    std::string q = "Does this figure show '";
    q.append(prompt);
    q.append("'? Please answer yes or no.");
    return q;
}

RemoteEndpoint RemoteEndpoint::parse(std::string_view url) {
    constexpr std::string_view scheme = "http://";
    require(url.substr(0, scheme.size()) == scheme, ErrorCode::invalid_config,
            "remote endpoint must start with http://");
    std::string_view rest = url.substr(scheme.size());
    RemoteEndpoint ep;
    const auto slash = rest.find('/');
    std::string_view authority = rest.substr(0, slash);
    if (slash != std::string_view::npos) {
        ep.path = std::string(rest.substr(slash));
    }
    const auto colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
        const std::string port(authority.substr(colon + 1));
        try {
            std::size_t used = 0;
            ep.port = std::stoi(port, &used);
            require(used == port.size(), ErrorCode::invalid_config, "bad port");
        } catch (const std::logic_error&) {
            fail(ErrorCode::invalid_config, "bad port in remote endpoint '" + std::string(url) + "'");
        }
        authority = authority.substr(0, colon);
    }
    require(!authority.empty(), ErrorCode::invalid_config, "remote endpoint has no host");
    require(ep.port > 0 && ep.port < 65536, ErrorCode::invalid_config, "remote endpoint port out of range");
    ep.host = std::string(authority);
    return ep;
}

namespace {

double remote_score_once(const RemoteEndpoint& endpoint, const std::string& body,
                         std::chrono::milliseconds timeout) {
    httplib::Client client(endpoint.host, endpoint.port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    const auto res = client.Post(endpoint.path, body, "application/json");
    if (!res) {
        fail(ErrorCode::scorer_unavailable, "request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        fail(ErrorCode::scorer_unavailable, "service replied with status " + std::to_string(res->status));
    }
    const auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("score") || !reply["score"].is_number()) {
        fail(ErrorCode::scorer_unavailable, "malformed reply body");
    }
    const double s = reply["score"].get<double>();
    if (!(s >= 0.0 && s <= 1.0)) {
        fail(ErrorCode::scorer_contract, "remote score " + std::to_string(s) + " outside [0, 1]");
    }
    return s;
}

}  // namespace

double remote_score(const RemoteEndpoint& endpoint, std::span<const double> sample, std::string_view prompt,
                    std::chrono::milliseconds timeout, int retries) {
    nlohmann::json request;
    request["sample"] = std::vector<double>(sample.begin(), sample.end());
    request["prompt"] = std::string(prompt);
    request["question"] = format_vqa_question(prompt);
    const std::string body = request.dump();

    std::optional<Error> last;
    for (int attempt = 0; attempt <= std::max(retries, 0); ++attempt) {
        try {
            return remote_score_once(endpoint, body, timeout);
        } catch (const Error& e) {
            if (!e.is_scorer_failure()) {
                throw;
            }
            last = e;
        }
    }
    throw *last;
}

RemoteScorer::RemoteScorer(RemoteScorerOptions options) : options_(std::move(options)) {
    require(!options_.prompt.empty(), ErrorCode::invalid_prompt, "remote scorer needs a prompt");
    require(options_.timeout.count() > 0, ErrorCode::invalid_config, "remote timeout must be > 0 ms");
}

double RemoteScorer::score(std::span<const double> sample) const {
    return remote_score(options_.endpoint, sample, options_.prompt, options_.timeout, options_.retries);
}

}  // namespace noisediff
