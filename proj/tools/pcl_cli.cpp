/*
==================================================================================
   Copyright (c) 2026 The pcl-slicing Authors.

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
==================================================================================
*/

// pcl: command-line harness for the predictive closed-loop slicing emulator.
//
//   pcl generate --config scenarios/default.json
//   pcl train    --config scenarios/default.json
//   pcl run      --config scenarios/default.json --mode dynamic
//   pcl compare  --config scenarios/default.json --out out/seed7 --seed 7
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pcl/pcl.hpp"

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::string mode;
    bool no_build = false;
};

void common_flags(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the scenario seed");
    sub->add_option("--out", o.out, "Output directory (overrides output_dir)");
    sub->add_flag("--no-build", o.no_build, "Fail instead of building missing prerequisites");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Predictive closed-loop RAN slicing emulator"};
    app.require_subcommand(1);
    Options o;
    auto* gen = app.add_subcommand("generate", "Write the KPI dataset CSV");
    auto* train = app.add_subcommand("train", "Train LSTM, ARIMA and seasonal-naive models and print test accuracy");
    auto* run = app.add_subcommand("run", "Run one provisioning mode over the test hours");
    auto* cmp = app.add_subcommand("compare", "Run both modes and write the comparison and plot");
    for (auto* s : {gen, train, run, cmp}) common_flags(s, o);
    run->add_option("--mode", o.mode, "static or dynamic")->required()->check(CLI::IsMember({"static", "dynamic"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        auto cfg = pcl::load_scenario(o.config);
        if (o.seed) cfg.seed = *o.seed;
        if (o.out) cfg.output_dir = *o.out;
        pcl::Experiment ex(std::move(cfg), std::cout, !o.no_build, o.config);
        if (gen->parsed()) ex.cmd_generate();
        else if (train->parsed()) ex.cmd_train();
        else if (run->parsed()) ex.cmd_run(o.mode);
        else ex.cmd_compare();
        return 0;
    } catch (const pcl::ConfigError& e) {
        std::cerr << "pcl: config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "pcl: error: " << e.what() << '\n';
        return 3;
    }
}
