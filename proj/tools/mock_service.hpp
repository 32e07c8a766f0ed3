// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

// In-process stand-in for a remote scoring service. Used by the mock_scorer
// tool and by the tests.

#pragma once

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>

namespace noisediff::mock {

enum class Mode {
    fixed,      // always `score`
    gaussian,   // exp(-mean(x^2) / 2), a smooth score in (0, 1]
    status500,  // HTTP 500
    malformed,  // 200 with a body that is not JSON
};

struct Options {
    Mode mode = Mode::fixed;
    double score = 0.7;
    int delay_ms = 0;
    /// Requests answered normally before `after_mode` / `after_delay_ms` take over; -1 never.
    int switch_after = -1;
    Mode after_mode = Mode::fixed;
    double after_score = 0.7;
    int after_delay_ms = 0;
};

class Service {
public:
    explicit Service(Options options) : options_(options) {
        server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
    }

    ~Service() { stop(); }

    /// Binds to 127.0.0.1 on `port` (0 picks a free port) and serves on a thread.
    int start(int port = 0) {
        port_ = port == 0 ? server_.bind_to_any_port("127.0.0.1") : (server_.bind_to_port("127.0.0.1", port) ? port : -1);
        if (port_ <= 0) {
            return -1;
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) {
            thread_.join();
        }
    }

    /// Blocks serving requests on the calling thread.
    bool listen(int port) { return server_.listen("127.0.0.1", port); }

    int requests() const { return requests_.load(); }
    std::string last_question() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return last_question_;
    }
    int port() const { return port_; }

private:
    void handle(const httplib::Request& req, httplib::Response& res) {
        const int n = requests_.fetch_add(1);
        const bool switched = options_.switch_after >= 0 && n >= options_.switch_after;
        const Mode mode = switched ? options_.after_mode : options_.mode;
        const double fixed_score = switched ? options_.after_score : options_.score;
        const int delay = switched ? options_.after_delay_ms : options_.delay_ms;
        if (delay > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            res.status = 400;
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            last_question_ = body.value("question", std::string());
        }
        switch (mode) {
            case Mode::status500:
                res.status = 500;
                return;
            case Mode::malformed:
                res.set_content("not json", "text/plain");
                return;
            case Mode::fixed:
                res.set_content(nlohmann::json{{"score", fixed_score}}.dump(), "application/json");
                return;
            case Mode::gaussian: {
                const auto sample = body.at("sample").get<std::vector<double>>();
                double ms = 0.0;
                for (double x : sample) ms += x * x;
                ms /= sample.empty() ? 1.0 : static_cast<double>(sample.size());
                res.set_content(nlohmann::json{{"score", std::exp(-0.5 * ms)}}.dump(), "application/json");
                return;
            }
        }
    }

    Options options_;
    httplib::Server server_;
    std::thread thread_;
    std::atomic<int> requests_{0};
    mutable std::mutex mutex_;
    std::string last_question_;
    int port_ = 0;
};

}  // namespace noisediff::mock
