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

#include "simcf/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace simcf;
namespace fs = std::filesystem;

namespace
{
    fs::path scratch(const std::string &name)
    {
        const fs::path p = fs::temp_directory_path() / ("simcf_harness_" + name);
        fs::remove_all(p);
        return p;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream is(p);
        std::stringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    std::vector<std::vector<std::string>> read_csv(const fs::path &p)
    {
        std::ifstream is(p);
        std::vector<std::vector<std::string>> rows;
        std::string line;
        while (std::getline(is, line))
        {
            std::vector<std::string> cells;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ','))
                cells.push_back(cell);
            rows.push_back(cells);
        }
        return rows;
    }

    ExperimentConfig tiny()
    {
        ExperimentConfig c = desk_preset();
        c.env.steps = 4;
        c.marl.episodes = 3;
        c.marl.actor_hidden = 8;
        c.marl.critic_hidden = 16;
        c.marl.eval_channels = 2;
        c.baseline.codebook_size = 5;
        c.baseline.eval_channels = 3;
        return c;
    }
} // namespace

TEST_CASE("config round trip and validation")
{
    const auto dir = scratch("config");
    fs::create_directories(dir);
    ExperimentConfig c = desk_preset();
    c.seed = 99;
    c.marl.clip = 0.15;
    c.env.channel_mode = ChannelMode::AsWritten;
    save_config(c, (dir / "c.json").string());
    const ExperimentConfig back = load_config((dir / "c.json").string());
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(back.env.layout_seed == 99);

    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), std::invalid_argument);

    std::ofstream(dir / "unknown.json") << R"({"marl": {"clipp": 0.1}})";
    try
    {
        load_config((dir / "unknown.json").string());
        FAIL("expected rejection");
    }
    catch (const std::invalid_argument &e)
    {
        CHECK(std::string(e.what()).find("marl.clipp") != std::string::npos);
    }

    std::ofstream(dir / "bad.json") << R"({"marl": {"clip": 1.5}})";
    CHECK_THROWS_AS(load_config((dir / "bad.json").string()), std::invalid_argument);
    std::ofstream(dir / "type.json") << R"({"geometry": {"layers": "two"}})";
    CHECK_THROWS_AS(load_config((dir / "type.json").string()), std::invalid_argument);

    std::ofstream(dir / "partial.json") << R"({"seed": 5, "geometry": {"layers": 3}})";
    const auto partial = load_config((dir / "partial.json").string());
    CHECK(partial.seed == 5);
    CHECK(partial.env.geometry.layer_count == 3);
    CHECK(partial.env.geometry.atoms_per_layer == desk_preset().env.geometry.atoms_per_layer);
}

TEST_CASE("overrides and presets")
{
    ExperimentConfig c = desk_preset();
    apply_override(c, "seed", "12");
    apply_override(c, "marl.episodes", "7");
    apply_override(c, "network.channel_mode", "as-written");
    apply_override(c, "output_dir", "somewhere");
    CHECK(c.seed == 12);
    CHECK(c.env.layout_seed == 12);
    CHECK(c.marl.episodes == 7);
    CHECK(c.env.channel_mode == ChannelMode::AsWritten);
    CHECK(c.output_dir == "somewhere");
    CHECK_THROWS_AS(apply_override(c, "marl.nope", "1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "marl.episodes", "-3"), std::invalid_argument);

    const auto p = paper_preset();
    CHECK(p.env.placement.aps == 8);
    CHECK(p.env.placement.ues == 4);
    CHECK(p.env.geometry.layer_count == 4);
    CHECK(p.env.geometry.atoms_per_layer == 64);
    CHECK(p.marl.episodes == 250);
    const auto d = desk_preset();
    CHECK(d.env.placement.aps == 2);
    CHECK(d.env.geometry.atoms_per_layer == 9);
    CHECK(d.marl.episodes == 200);
    CHECK(d.baseline.codebook_size == 100);
    CHECK(preset("paper").env.placement.aps == 8);
    CHECK_THROWS_AS(preset("huge"), std::invalid_argument);
}

TEST_CASE("CSV formatting")
{
    CHECK(format_double(0.1) == "0.10000000000000001");
    MetricsRow r;
    r.episode = 4;
    r.mean_reward = 1.5;
    CHECK(metrics_csv_row("nvr_mappo", r).rfind("nvr_mappo,4,1.5,", 0) == 0);
}

TEST_CASE("train writes artifacts with the fixed schema")
{
    const auto dir = scratch("train");
    const auto c = tiny();
    const auto s = run_train(c, dir.string());
    CHECK(s.episodes == 3);
    CHECK(s.held_out_per_channel.size() == 3);
    for (const char *f : {"config.json", "metrics.csv", "checkpoint.txt", "summary.json"})
        CHECK(fs::exists(dir / f));
    const auto rows = read_csv(dir / "metrics.csv");
    REQUIRE(rows.size() == 4);
    std::string header;
    for (std::size_t i = 0; i < rows[0].size(); ++i)
        header += (i ? "," : "") + rows[0][i];
    CHECK(header == kMetricsHeader);
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        REQUIRE(rows[i].size() == rows[0].size());
        CHECK(rows[i][0] == "nvr_mappo");
        CHECK(std::stoul(rows[i][1]) == i - 1);
        CHECK(std::isfinite(std::stod(rows[i][2])));
    }
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["held_out_sum_se"].get<double>() == doctest::Approx(s.held_out_sum_se));
    const auto snap = load_config((dir / "config.json").string());
    CHECK(config_to_json(snap) == config_to_json(c));
}

TEST_CASE("baseline")
{
    const auto dir = scratch("baseline");
    auto c = tiny();
    const auto s = run_baseline(c, dir.string());
    REQUIRE(s.per_channel.size() == 3);
    const auto rows = read_csv(dir / "baseline.csv");
    REQUIRE(rows.size() == 4);
    double total = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        CHECK(rows[i][0] == "codebook_wf");
        total += std::stod(rows[i][3]);
    }
    CHECK(total / 3.0 == doctest::Approx(s.mean).epsilon(1e-12));
    const auto j = nlohmann::json::parse(slurp(dir / "baseline.json"));
    CHECK(j["mean_sum_se"].get<double>() == doctest::Approx(s.mean));

    c.baseline.codebook_size = 1;
    const auto one = evaluate_baseline(c);
    c.baseline.codebook_size = 50;
    const auto many = evaluate_baseline(c);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(many.per_channel[i] >= one.per_channel[i]);
}

TEST_CASE("sweep")
{
    const auto dir = scratch("sweep");
    auto c = tiny();
    c.marl.episodes = 2;
    const auto rows = run_sweep(c, SweepAxis::Layers, {1, 2}, {"codebook_wf", "mappo"}, 2, dir.string());
    CHECK(rows.size() == 2 * 2 * 2);
    const auto csv = read_csv(dir / "sweep.csv");
    CHECK(csv.size() == rows.size() + 1);
    CHECK(csv[1][0] == "layers");
    CHECK(parse_axis("atoms") == SweepAxis::Atoms);
    CHECK_THROWS_AS(parse_axis("depth"), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(c, SweepAxis::Layers, {2, 0}, {"codebook_wf"}, 1, dir.string()), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(c, SweepAxis::Layers, {2}, {"dqn"}, 1, dir.string()), std::invalid_argument);
}

TEST_CASE("eval")
{
    const auto train_dir = scratch("eval_train");
    const auto c = tiny();
    run_train(c, train_dir.string());
    const std::string ck = (train_dir / "checkpoint.txt").string();

    const auto a = scratch("eval_a"), b = scratch("eval_b");
    const auto sa = run_eval(c, ck, 4, a.string());
    run_eval(c, ck, 4, b.string());
    CHECK(sa.per_episode.size() == 4);
    CHECK(sa.noise_banks_created == 0);
    CHECK(slurp(a / "eval.json") == slurp(b / "eval.json"));

    const auto z = scratch("eval_zero");
    const auto sz = run_eval(c, ck, 0, z.string());
    CHECK(sz.per_episode.empty());
    CHECK(nlohmann::json::parse(slurp(z / "eval.json")).contains("warning"));

    auto other = c;
    other.env.geometry.atoms_per_layer = 4;
    try
    {
        evaluate_checkpoint(other, ck, 1);
        FAIL("expected a dimension mismatch");
    }
    catch (const std::invalid_argument &e)
    {
        CHECK(std::string(e.what()).find("obs_dim") != std::string::npos);
    }
    CHECK_THROWS(evaluate_checkpoint(c, (train_dir / "nothing.txt").string(), 1));
}
