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

#pragma once

#include "simcf/baselines.hpp"
#include "simcf/env.hpp"
#include "simcf/marl.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace simcf
{
    struct BaselineConfig
    {
        std::size_t codebook_size = 100;
        std::size_t eval_channels = 20; // held-out channels shared by baseline and policy evaluation
    };

    struct ExperimentConfig
    {
        std::uint64_t seed = 1;
        std::string output_dir = "runs/default";
        EnvConfig env;
        Hyperparams marl;
        BaselineConfig baseline;

        void validate() const;
    };

    // Full-scale geometry and powers; L = 8, K = 4, M = 4, N = 64, M_AP = 2, 250 episodes.
    ExperimentConfig paper_preset();
    // L = 2, K = 2, M = 2, N = 9, M_AP = 2, T = 20, 200 episodes, codebook of 100.
    ExperimentConfig desk_preset();
    ExperimentConfig preset(const std::string &name);

    nlohmann::ordered_json config_to_json(const ExperimentConfig &cfg);
    // Fields absent from j keep the value from base; unknown keys and out-of-range values throw
    // std::invalid_argument naming the offending field.
    ExperimentConfig config_from_json(const nlohmann::json &j, const ExperimentConfig &base = desk_preset());
    ExperimentConfig load_config(const std::string &path, const ExperimentConfig &base = desk_preset());
    void save_config(const ExperimentConfig &cfg, const std::string &path);

    // Dotted-path override, e.g. ("marl.episodes", "50"); the value is parsed as JSON, falling back to a string.
    void apply_override(ExperimentConfig &cfg, const std::string &key, const std::string &value);

    // Fixed CSV headers.
    inline constexpr const char *kMetricsHeader =
        "method,episode,mean_reward,sum_se_eval,actor_loss,critic_loss,entropy,ratio_clip_fraction";
    inline constexpr const char *kSweepHeader = "axis,axis_value,method,seed,sum_se";

    std::string format_double(double v);
    std::string metrics_csv_row(const std::string &method, const MetricsRow &row);

    struct TrainSummary
    {
        std::size_t episodes = 0;
        double first_window_mean_reward = 0.0;
        double last_window_mean_reward = 0.0;
        double held_out_sum_se = 0.0;
        std::vector<double> held_out_per_channel;
    };

    // Writes config.json, metrics.csv, checkpoint.txt and summary.json into out_dir.
    TrainSummary run_train(const ExperimentConfig &cfg, const std::string &out_dir, bool verbose = false);

    struct BaselineSummary
    {
        std::vector<double> per_channel;
        double mean = 0.0;
    };

    BaselineSummary evaluate_baseline(const ExperimentConfig &cfg);
    // Writes baseline.csv (metrics schema, method=codebook_wf, one row per channel) and baseline.json.
    BaselineSummary run_baseline(const ExperimentConfig &cfg, const std::string &out_dir);

    enum class SweepAxis
    {
        Layers,
        Atoms
    };
    SweepAxis parse_axis(const std::string &name);

    struct SweepRow
    {
        std::string axis;
        std::size_t axis_value = 0;
        std::string method;
        std::uint64_t seed = 0;
        double sum_se = 0.0;
    };

    // Methods: codebook_wf, nvr_mappo, mappo. Seeds are cfg.seed, cfg.seed + 1, ...
    std::vector<SweepRow> run_sweep(const ExperimentConfig &cfg, SweepAxis axis, const std::vector<std::size_t> &values,
                                    const std::vector<std::string> &methods, std::size_t seeds,
                                    const std::string &out_dir);

    struct EvalSummary
    {
        std::vector<double> per_episode;
        double mean = 0.0;
        double std = 0.0;
        std::uint64_t noise_banks_created = 0;
    };

    // Actor-only execution on held-out channels. Checkpoint dimensions must match cfg.
    EvalSummary evaluate_checkpoint(const ExperimentConfig &cfg, const std::string &checkpoint_path,
                                    std::size_t episodes);
    EvalSummary run_eval(const ExperimentConfig &cfg, const std::string &checkpoint_path, std::size_t episodes,
                         const std::string &out_dir);

    EnvConfig env_for_seed(const ExperimentConfig &cfg, std::uint64_t seed);

} // namespace simcf
