// Copyright (C) 2026 The noisediff Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "mock_service.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Local scoring service for trying out scorer.type = remote"};
    noisediff::mock::Options opt;
    int port = 8080;
    const std::map<std::string, noisediff::mock::Mode> modes{{"fixed", noisediff::mock::Mode::fixed},
                                                             {"gaussian", noisediff::mock::Mode::gaussian},
                                                             {"500", noisediff::mock::Mode::status500},
                                                             {"malformed", noisediff::mock::Mode::malformed}};
    app.add_option("--port", port, "Port on 127.0.0.1");
    app.add_option("--mode", opt.mode, "fixed, gaussian, 500 or malformed")
        ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
    app.add_option("--score", opt.score, "Score returned in fixed mode");
    app.add_option("--delay-ms", opt.delay_ms, "Delay before every reply");
    CLI11_PARSE(app, argc, argv);

    noisediff::mock::Service service(opt);
    std::cout << "listening on http://127.0.0.1:" << port << "/score" << std::endl;
    return service.listen(port) ? 0 : 1;
}
