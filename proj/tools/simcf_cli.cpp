// SPDX-License-Identifier: Apache-2.0
//
// simcf: SIM-aided cell-free massive MIMO downlink simulator and trainer
// Copyright (C) 2026 The simcf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "simcf/simcf.h"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace
{
    struct Common
    {
        std::string config;
        std::string preset = "desk";
        std::string out;
        long long seed = -1;
        std::vector<std::string> overrides;
    };

    void add_common(CLI::App *cmd, Common &c)
    {
        cmd->add_option("-c,--config", c.config, "JSON config file; absent fields take desk preset values");
        cmd->add_option("--preset", c.preset, "Base preset when no config file is given")
            ->check(CLI::IsMember({"desk", "paper"}));
        cmd->add_option("-o,--out", c.out, "Output directory (default: output_dir from the config)");
        cmd->add_option("-s,--seed", c.seed, "Run seed")->check(CLI::NonNegativeNumber);
        cmd->add_option("--set", c.overrides, "Override, key=value with a dotted key, e.g. marl.episodes=50");
    }

    int fail(const char *what)
    {
        std::cerr << "error: " << what << ": " << simcf_last_error() << '\n';
        return 2;
    }

    // Builds the config handle from a file or preset, then applies --seed and --set.
    simcf_config *make_config(const Common &c, std::string &out_dir)
    {
        simcf_config *cfg = nullptr;
        simcf_status st = c.config.empty() ? simcf_config_from_preset(c.preset.c_str(), &cfg)
                                           : simcf_config_load(c.config.c_str(), &cfg);
        if (st != SIMCF_OK)
        {
            fail("config");
            return nullptr;
        }
        if (c.seed >= 0 && simcf_config_set(cfg, "seed", std::to_string(c.seed).c_str()) != SIMCF_OK)
        {
            fail("--seed");
            simcf_config_free(cfg);
            return nullptr;
        }
        for (const auto &o : c.overrides)
        {
            const auto eq = o.find('=');
            if (eq == std::string::npos)
            {
                std::cerr << "error: --set expects key=value, got '" << o << "'\n";
                simcf_config_free(cfg);
                return nullptr;
            }
            if (simcf_config_set(cfg, o.substr(0, eq).c_str(), o.substr(eq + 1).c_str()) != SIMCF_OK)
            {
                fail(("--set " + o).c_str());
                simcf_config_free(cfg);
                return nullptr;
            }
        }
        if (!c.out.empty() && simcf_config_set(cfg, "output_dir", c.out.c_str()) != SIMCF_OK)
        {
            fail("--out");
            simcf_config_free(cfg);
            return nullptr;
        }
        std::size_t n = 0;
        simcf_config_output_dir(cfg, nullptr, 0, &n);
        out_dir.assign(n, '\0');
        simcf_config_output_dir(cfg, out_dir.data(), n, &n);
        out_dir.resize(n - 1);
        return cfg;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"simcf: SIM-aided cell-free downlink simulator, NVR-MAPPO trainer and codebook baseline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", simcf_version());

    Common train_opts, base_opts, sweep_opts, eval_opts;
    bool verbose = false;
    auto *train = app.add_subcommand("train", "Train NVR-MAPPO and write config, metrics, checkpoint and summary");
    add_common(train, train_opts);
    train->add_flag("-v,--verbose", verbose, "Print progress every 10 episodes");

    auto *baseline = app.add_subcommand("baseline", "Codebook + water-filling baseline on held-out channels");
    add_common(baseline, base_opts);

    std::string axis;
    std::vector<std::size_t> values;
    std::string methods = "codebook_wf,nvr_mappo";
    std::size_t seeds = 3;
    auto *sweep = app.add_subcommand("sweep", "Sweep the number of layers or atoms per layer");
    add_common(sweep, sweep_opts);
    sweep->add_option("--axis", axis, "layers or atoms")->required()->check(CLI::IsMember({"layers", "atoms"}));
    sweep->add_option("--values", values, "Axis values, e.g. --values 1 2 4")->required();
    sweep->add_option("--methods", methods, "Comma-separated: codebook_wf, nvr_mappo, mappo");
    sweep->add_option("--seeds", seeds, "Number of seeds, starting at --seed");

    std::string checkpoint;
    std::size_t episodes = 20;
    auto *eval = app.add_subcommand("eval", "Evaluate a checkpoint with mean actions on held-out channels");
    add_common(eval, eval_opts);
    eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
    eval->add_option("-e,--episodes", episodes, "Number of evaluation channels");

    CLI11_PARSE(app, argc, argv);

    std::string out_dir;
    if (*train)
    {
        simcf_config *cfg = make_config(train_opts, out_dir);
        if (!cfg)
            return 2;
        const simcf_status st = simcf_train(cfg, out_dir.c_str(), verbose ? 1 : 0);
        simcf_config_free(cfg);
        if (st != SIMCF_OK)
            return fail("train");
        std::cout << "wrote " << out_dir << "/{config.json,metrics.csv,checkpoint.txt,summary.json}\n";
    }
    else if (*baseline)
    {
        simcf_config *cfg = make_config(base_opts, out_dir);
        if (!cfg)
            return 2;
        double mean = 0.0;
        const simcf_status st = simcf_baseline(cfg, out_dir.c_str(), &mean);
        simcf_config_free(cfg);
        if (st != SIMCF_OK)
            return fail("baseline");
        std::printf("codebook_wf mean sum SE %.6f bit/s/Hz\n", mean);
    }
    else if (*sweep)
    {
        simcf_config *cfg = make_config(sweep_opts, out_dir);
        if (!cfg)
            return 2;
        const simcf_status st =
            simcf_sweep(cfg, axis.c_str(), values.data(), values.size(), methods.c_str(), seeds, out_dir.c_str());
        simcf_config_free(cfg);
        if (st != SIMCF_OK)
            return fail("sweep");
        std::cout << "wrote " << out_dir << "/sweep.csv\n";
    }
    else if (*eval)
    {
        simcf_config *cfg = make_config(eval_opts, out_dir);
        if (!cfg)
            return 2;
        if (episodes == 0)
            std::cerr << "warning: zero evaluation episodes requested, result will be empty\n";
        double mean = 0.0;
        const simcf_status st = simcf_eval(cfg, checkpoint.c_str(), episodes, out_dir.c_str(), &mean);
        simcf_config_free(cfg);
        if (st != SIMCF_OK)
            return fail("eval");
        std::printf("nvr_mappo mean sum SE %.6f bit/s/Hz over %zu episodes\n", mean, episodes);
    }
    return 0;
}
