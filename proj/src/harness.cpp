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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace simcf
{
    using nlohmann::json;
    using nlohmann::ordered_json;
    namespace fs = std::filesystem;

    void ExperimentConfig::validate() const
    {
        auto fail = [](const std::string &field, const std::string &msg) {
            throw std::invalid_argument("config field '" + field + "': " + msg);
        };
        const auto &g = env.geometry;
        if (!(g.wavelength_m > 0.0) || !std::isfinite(g.wavelength_m))
            fail("geometry.wavelength_m", "must be positive");
        if (!(g.sim_thickness_m > 0.0) || !std::isfinite(g.sim_thickness_m))
            fail("geometry.sim_thickness_wavelengths", "must be positive");
        if (g.layer_count < 1)
            fail("geometry.layers", "must be >= 1");
        if (g.atoms_per_layer < 1)
            fail("geometry.atoms_per_layer", "must be >= 1");
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(g.atoms_per_layer))));
        if (side * side != g.atoms_per_layer)
            fail("geometry.atoms_per_layer", "must be a perfect square, got " + std::to_string(g.atoms_per_layer));
        if (g.ap_antenna_count < 1)
            fail("geometry.ap_antennas", "must be >= 1");
        if (g.atom_size_x_m < 0.0 || g.atom_size_y_m < 0.0)
            fail("geometry.atom_size_m", "must be >= 0 (0 selects half a wavelength)");
        const auto &p = env.placement;
        if (p.aps < 1)
            fail("network.aps", "must be >= 1");
        if (p.ues < 1)
            fail("network.ues", "must be >= 1");
        if (!(p.area_m > 0.0) || !std::isfinite(p.area_m))
            fail("network.area_m", "must be positive");
        if (!(p.ap_height_m >= 0.0) || !(p.ue_height_m >= 0.0))
            fail("network.ap_height_m", "heights must be >= 0");
        if (p.ap_height_m == p.ue_height_m)
            fail("network.ue_height_m", "AP and UE heights must differ so every AP-UE distance is positive");
        if (!std::isfinite(env.pathloss.intercept_db) || !(env.pathloss.slope_db > 0.0))
            fail("network.pathloss_slope_db", "must be positive");
        if (!std::isfinite(env.p_max_dbm))
            fail("network.p_max_dbm", "must be finite");
        if (!std::isfinite(env.noise_dbm))
            fail("network.noise_dbm", "must be finite");
        if (env.steps < 1)
            fail("env.steps", "must be >= 1");
        try
        {
            marl.validate();
        }
        catch (const std::invalid_argument &e)
        {
            fail("marl", e.what());
        }
        if (baseline.codebook_size < 1)
            fail("baseline.codebook_size", "must be >= 1");
    }

    ExperimentConfig paper_preset()
    {
        ExperimentConfig cfg;
        cfg.output_dir = "runs/paper";
        cfg.env.geometry.wavelength_m = 0.0108;
        cfg.env.geometry.sim_thickness_m = 5.0 * 0.0108;
        cfg.env.geometry.layer_count = 4;
        cfg.env.geometry.atoms_per_layer = 64;
        cfg.env.geometry.ap_antenna_count = 2;
        cfg.env.placement = PlacementParams{8, 4, 100.0, 10.0, 1.7};
        cfg.env.p_max_dbm = 3.0;
        cfg.env.noise_dbm = -96.0;
        cfg.env.steps = 20;
        cfg.marl.episodes = 250;
        cfg.baseline.codebook_size = 100;
        return cfg;
    }

    ExperimentConfig desk_preset()
    {
        ExperimentConfig cfg;
        cfg.output_dir = "runs/desk";
        cfg.env.geometry.wavelength_m = 0.0108;
        cfg.env.geometry.sim_thickness_m = 5.0 * 0.0108;
        cfg.env.geometry.layer_count = 2;
        cfg.env.geometry.atoms_per_layer = 9;
        cfg.env.geometry.ap_antenna_count = 2;
        cfg.env.placement = PlacementParams{2, 2, 100.0, 10.0, 1.7};
        cfg.env.p_max_dbm = 3.0;
        cfg.env.noise_dbm = -96.0;
        cfg.env.steps = 20;
        cfg.marl.episodes = 200;
        cfg.marl.discount = 0.1;
        cfg.marl.gae_lambda = 0.0;
        cfg.marl.actor_lr = 0.002;
        cfg.marl.epochs = 20;
        cfg.marl.eval_interval = 50;
        cfg.baseline.codebook_size = 100;
        cfg.baseline.eval_channels = 20;
        return cfg;
    }

    ExperimentConfig preset(const std::string &name)
    {
        if (name == "desk")
            return desk_preset();
        if (name == "paper")
            return paper_preset();
        throw std::invalid_argument("unknown preset '" + name + "' (expected desk or paper)");
    }

    ordered_json config_to_json(const ExperimentConfig &cfg)
    {
        const auto &g = cfg.env.geometry;
        const auto &p = cfg.env.placement;
        const auto &h = cfg.marl;
        ordered_json j;
        j["seed"] = cfg.seed;
        j["output_dir"] = cfg.output_dir;
        j["geometry"] = {{"wavelength_m", g.wavelength_m},
                         {"sim_thickness_wavelengths", g.sim_thickness_m / g.wavelength_m},
                         {"layers", g.layer_count},
                         {"atoms_per_layer", g.atoms_per_layer},
                         {"ap_antennas", g.ap_antenna_count},
                         {"atom_size_m", g.atom_size_x_m}};
        j["network"] = {{"aps", p.aps},
                        {"ues", p.ues},
                        {"area_m", p.area_m},
                        {"ap_height_m", p.ap_height_m},
                        {"ue_height_m", p.ue_height_m},
                        {"fixed_layout", cfg.env.fixed_layout},
                        {"pathloss_intercept_db", cfg.env.pathloss.intercept_db},
                        {"pathloss_slope_db", cfg.env.pathloss.slope_db},
                        {"channel_mode", to_string(cfg.env.channel_mode)},
                        {"p_max_dbm", cfg.env.p_max_dbm},
                        {"noise_dbm", cfg.env.noise_dbm}};
        j["env"] = {{"steps", cfg.env.steps}, {"critic_transmission_context", cfg.env.critic_transmission_context}};
        j["marl"] = {{"episodes", h.episodes},
                     {"clip", h.clip},
                     {"entropy_weight", h.entropy_weight},
                     {"noise_weight", h.noise_weight},
                     {"noise_dim", h.noise_dim},
                     {"discount", h.discount},
                     {"gae_lambda", h.gae_lambda},
                     {"batch_episodes", h.batch_episodes},
                     {"chunk_length", h.chunk_length},
                     {"epochs", h.epochs},
                     {"minibatches", h.minibatches},
                     {"shuffle_interval", h.shuffle_interval},
                     {"actor_lr", h.actor_lr},
                     {"critic_lr", h.critic_lr},
                     {"max_grad_norm", h.max_grad_norm},
                     {"recurrent", h.recurrent},
                     {"normalize_advantages", h.normalize_advantages},
                     {"refresh_hidden", h.refresh_hidden},
                     {"actor_hidden", h.actor_hidden},
                     {"critic_hidden", h.critic_hidden},
                     {"init_log_std", h.init_log_std},
                     {"eval_channels", h.eval_channels},
                     {"eval_interval", h.eval_interval}};
        j["baseline"] = {{"codebook_size", cfg.baseline.codebook_size},
                         {"eval_channels", cfg.baseline.eval_channels}};
        return j;
    }

    namespace
    {
        using Setter = std::function<void(const json &)>;

        template <typename T>
        Setter bind(T &target)
        {
            return [&target](const json &v) {
                if constexpr (std::is_same_v<T, bool>)
                {
                    if (!v.is_boolean())
                        throw std::invalid_argument("expected a boolean");
                    target = v.get<bool>();
                }
                else if constexpr (std::is_integral_v<T>)
                {
                    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
                        throw std::invalid_argument("expected a nonnegative integer");
                    target = v.get<T>();
                }
                else if constexpr (std::is_floating_point_v<T>)
                {
                    if (!v.is_number())
                        throw std::invalid_argument("expected a number");
                    target = v.get<T>();
                }
                else
                {
                    if (!v.is_string())
                        throw std::invalid_argument("expected a string");
                    target = v.get<T>();
                }
            };
        }

        void apply_section(const json &section, const std::string &name, const std::map<std::string, Setter> &setters)
        {
            if (!section.is_object())
                throw std::invalid_argument("config section '" + name + "' must be an object");
            for (const auto &[key, value] : section.items())
            {
                auto it = setters.find(key);
                if (it == setters.end())
                    throw std::invalid_argument("unknown config key '" + name + "." + key + "'");
                try
                {
                    it->second(value);
                }
                catch (const std::exception &e)
                {
                    throw std::invalid_argument("config field '" + name + "." + key + "': " + e.what());
                }
            }
        }
    } // namespace

    ExperimentConfig config_from_json(const json &j, const ExperimentConfig &base)
    {
        if (!j.is_object())
            throw std::invalid_argument("config root must be a JSON object");
        ExperimentConfig cfg = base;
        auto &g = cfg.env.geometry;
        auto &p = cfg.env.placement;
        auto &h = cfg.marl;

        double thickness_wl = g.sim_thickness_m / g.wavelength_m;
        double atom_size = g.atom_size_x_m;
        std::string channel_mode = to_string(cfg.env.channel_mode);

        const std::map<std::string, std::map<std::string, Setter>> sections = {
            {"geometry",
             {{"wavelength_m", bind(g.wavelength_m)},
              {"sim_thickness_wavelengths", bind(thickness_wl)},
              {"layers", bind(g.layer_count)},
              {"atoms_per_layer", bind(g.atoms_per_layer)},
              {"ap_antennas", bind(g.ap_antenna_count)},
              {"atom_size_m", bind(atom_size)}}},
            {"network",
             {{"aps", bind(p.aps)},
              {"ues", bind(p.ues)},
              {"area_m", bind(p.area_m)},
              {"ap_height_m", bind(p.ap_height_m)},
              {"ue_height_m", bind(p.ue_height_m)},
              {"fixed_layout", bind(cfg.env.fixed_layout)},
              {"pathloss_intercept_db", bind(cfg.env.pathloss.intercept_db)},
              {"pathloss_slope_db", bind(cfg.env.pathloss.slope_db)},
              {"channel_mode", bind(channel_mode)},
              {"p_max_dbm", bind(cfg.env.p_max_dbm)},
              {"noise_dbm", bind(cfg.env.noise_dbm)}}},
            {"env", {{"steps", bind(cfg.env.steps)}, {"critic_transmission_context", bind(cfg.env.critic_transmission_context)}}},
            {"marl",
             {{"episodes", bind(h.episodes)},
              {"clip", bind(h.clip)},
              {"entropy_weight", bind(h.entropy_weight)},
              {"noise_weight", bind(h.noise_weight)},
              {"noise_dim", bind(h.noise_dim)},
              {"discount", bind(h.discount)},
              {"gae_lambda", bind(h.gae_lambda)},
              {"batch_episodes", bind(h.batch_episodes)},
              {"chunk_length", bind(h.chunk_length)},
              {"epochs", bind(h.epochs)},
              {"minibatches", bind(h.minibatches)},
              {"shuffle_interval", bind(h.shuffle_interval)},
              {"actor_lr", bind(h.actor_lr)},
              {"critic_lr", bind(h.critic_lr)},
              {"max_grad_norm", bind(h.max_grad_norm)},
              {"recurrent", bind(h.recurrent)},
              {"normalize_advantages", bind(h.normalize_advantages)},
              {"refresh_hidden", bind(h.refresh_hidden)},
              {"actor_hidden", bind(h.actor_hidden)},
              {"critic_hidden", bind(h.critic_hidden)},
              {"init_log_std", bind(h.init_log_std)},
              {"eval_channels", bind(h.eval_channels)},
              {"eval_interval", bind(h.eval_interval)}}},
            {"baseline",
             {{"codebook_size", bind(cfg.baseline.codebook_size)}, {"eval_channels", bind(cfg.baseline.eval_channels)}}},
        };

        for (const auto &[key, value] : j.items())
        {
            if (key == "seed")
            {
                try
                {
                    bind(cfg.seed)(value);
                }
                catch (const std::exception &e)
                {
                    throw std::invalid_argument(std::string("config field 'seed': ") + e.what());
                }
                continue;
            }
            if (key == "output_dir")
            {
                try
                {
                    bind(cfg.output_dir)(value);
                }
                catch (const std::exception &e)
                {
                    throw std::invalid_argument(std::string("config field 'output_dir': ") + e.what());
                }
                continue;
            }
            auto it = sections.find(key);
            if (it == sections.end())
                throw std::invalid_argument("unknown config key '" + key + "'");
            apply_section(value, key, it->second);
        }

        g.sim_thickness_m = thickness_wl * g.wavelength_m;
        g.atom_size_x_m = g.atom_size_y_m = atom_size;
        try
        {
            cfg.env.channel_mode = parse_channel_mode(channel_mode);
        }
        catch (const std::invalid_argument &e)
        {
            throw std::invalid_argument(std::string("config field 'network.channel_mode': ") + e.what());
        }
        cfg.env.layout_seed = cfg.seed;
        cfg.validate();
        return cfg;
    }

    ExperimentConfig load_config(const std::string &path, const ExperimentConfig &base)
    {
        std::ifstream is(path);
        if (!is)
            throw std::invalid_argument("config file not found or unreadable: " + path);
        json j;
        try
        {
            j = json::parse(is, nullptr, true, true);
        }
        catch (const json::parse_error &e)
        {
            throw std::invalid_argument("config file " + path + " is not valid JSON: " + e.what());
        }
        return config_from_json(j, base);
    }

    void save_config(const ExperimentConfig &cfg, const std::string &path)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot write config snapshot: " + path);
        os << config_to_json(cfg).dump(2) << '\n';
    }

    void apply_override(ExperimentConfig &cfg, const std::string &key, const std::string &value)
    {
        json parsed;
        try
        {
            parsed = json::parse(value);
        }
        catch (const json::parse_error &)
        {
            parsed = value;
        }
        json patch = json::object();
        json *cursor = &patch;
        std::stringstream ss(key);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.'))
            parts.push_back(part);
        if (parts.empty())
            throw std::invalid_argument("empty override key");
        for (std::size_t i = 0; i + 1 < parts.size(); ++i)
            cursor = &(*cursor)[parts[i]];
        (*cursor)[parts.back()] = parsed;
        cfg = config_from_json(patch, cfg);
    }

    std::string format_double(double v)
    {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }

    std::string metrics_csv_row(const std::string &method, const MetricsRow &row)
    {
        std::ostringstream os;
        os << method << ',' << row.episode << ',' << format_double(row.mean_reward) << ','
           << format_double(row.sum_se_eval) << ',' << format_double(row.actor_loss) << ','
           << format_double(row.critic_loss) << ',' << format_double(row.entropy) << ','
           << format_double(row.ratio_clip_fraction);
        return os.str();
    }

    EnvConfig env_for_seed(const ExperimentConfig &cfg, std::uint64_t seed)
    {
        EnvConfig e = cfg.env;
        e.layout_seed = seed;
        return e;
    }

    namespace
    {
        void ensure_dir(const std::string &dir)
        {
            std::error_code ec;
            fs::create_directories(dir, ec);
            if (ec)
                throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
        }

        double window_mean(const std::vector<MetricsRow> &rows, std::size_t begin, std::size_t end)
        {
            if (end <= begin)
                return 0.0;
            double s = 0.0;
            for (std::size_t i = begin; i < end; ++i)
                s += rows[i].mean_reward;
            return s / static_cast<double>(end - begin);
        }

        double mean_of(const std::vector<double> &v)
        {
            return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        }
    } // namespace

    TrainSummary run_train(const ExperimentConfig &cfg, const std::string &out_dir, bool verbose)
    {
        cfg.validate();
        ensure_dir(out_dir);
        save_config(cfg, (fs::path(out_dir) / "config.json").string());

        Trainer trainer(env_for_seed(cfg, cfg.seed), cfg.marl, cfg.seed);
        std::ofstream csv(fs::path(out_dir) / "metrics.csv");
        if (!csv)
            throw std::runtime_error("cannot write metrics.csv in " + out_dir);
        csv << kMetricsHeader << '\n';

        std::vector<MetricsRow> rows;
        try
        {
            rows = trainer.train([&](const MetricsRow &r) {
                csv << metrics_csv_row("nvr_mappo", r) << '\n';
                if (verbose && (r.episode % 10 == 0 || r.episode + 1 == cfg.marl.episodes))
                    std::cerr << "episode " << r.episode << " mean_reward " << r.mean_reward << " sum_se_eval "
                              << r.sum_se_eval << '\n';
            });
        }
        catch (const TrainingDiverged &e)
        {
            std::ofstream dump(fs::path(out_dir) / "divergence.json");
            dump << e.dump() << '\n';
            throw;
        }
        csv.flush();

        nn::save_checkpoint(trainer.checkpoint(), (fs::path(out_dir) / "checkpoint.txt").string());

        TrainSummary s;
        s.episodes = rows.size();
        const std::size_t w = std::min<std::size_t>(20, rows.size());
        s.first_window_mean_reward = window_mean(rows, 0, w);
        s.last_window_mean_reward = window_mean(rows, rows.size() - w, rows.size());
        s.held_out_per_channel =
            evaluate_policy(trainer.actor(), trainer.env(), held_out_seeds(cfg.seed, cfg.baseline.eval_channels));
        s.held_out_sum_se = mean_of(s.held_out_per_channel);

        ordered_json j;
        j["seed"] = cfg.seed;
        j["episodes"] = s.episodes;
        j["first_window_mean_reward"] = s.first_window_mean_reward;
        j["last_window_mean_reward"] = s.last_window_mean_reward;
        j["window_ratio"] = s.first_window_mean_reward > 0.0 ? s.last_window_mean_reward / s.first_window_mean_reward : 0.0;
        j["final_sum_se_eval"] = rows.empty() ? 0.0 : rows.back().sum_se_eval;
        j["held_out_channels"] = cfg.baseline.eval_channels;
        j["held_out_sum_se"] = s.held_out_sum_se;
        j["held_out_per_channel"] = s.held_out_per_channel;
        std::ofstream(fs::path(out_dir) / "summary.json") << j.dump(2) << '\n';
        return s;
    }

    BaselineSummary evaluate_baseline(const ExperimentConfig &cfg)
    {
        cfg.validate();
        Env env(env_for_seed(cfg, cfg.seed));
        const Codebook cb(cfg.baseline.codebook_size, env.agents(), env.layers(), env.atoms(),
                          derive_seed(cfg.seed, kCodebookStream, 0));
        const PropagationSet ps[1] = {env.propagation()};
        BaselineSummary s;
        for (std::uint64_t seed : held_out_seeds(cfg.seed, cfg.baseline.eval_channels))
        {
            env.reset(seed);
            s.per_channel.push_back(
                codebook_search(env.channel(), cb, ps, env.noise().sigma2_w, env.p_max_w()).best_sum_se);
        }
        s.mean = mean_of(s.per_channel);
        return s;
    }

    BaselineSummary run_baseline(const ExperimentConfig &cfg, const std::string &out_dir)
    {
        ensure_dir(out_dir);
        BaselineSummary s = evaluate_baseline(cfg);
        std::ofstream csv(fs::path(out_dir) / "baseline.csv");
        if (!csv)
            throw std::runtime_error("cannot write baseline.csv in " + out_dir);
        csv << kMetricsHeader << '\n';
        for (std::size_t i = 0; i < s.per_channel.size(); ++i)
        {
            MetricsRow r;
            r.episode = i;
            r.mean_reward = s.per_channel[i];
            r.sum_se_eval = s.per_channel[i];
            csv << metrics_csv_row("codebook_wf", r) << '\n';
        }
        ordered_json j;
        j["method"] = "codebook_wf";
        j["seed"] = cfg.seed;
        j["codebook_size"] = cfg.baseline.codebook_size;
        j["channels"] = s.per_channel.size();
        j["mean_sum_se"] = s.mean;
        j["per_channel"] = s.per_channel;
        std::ofstream(fs::path(out_dir) / "baseline.json") << j.dump(2) << '\n';
        return s;
    }

    SweepAxis parse_axis(const std::string &name)
    {
        if (name == "layers" || name == "M")
            return SweepAxis::Layers;
        if (name == "atoms" || name == "N")
            return SweepAxis::Atoms;
        throw std::invalid_argument("unknown sweep axis '" + name + "' (expected layers or atoms)");
    }

    std::vector<SweepRow> run_sweep(const ExperimentConfig &cfg, SweepAxis axis, const std::vector<std::size_t> &values,
                                    const std::vector<std::string> &methods, std::size_t seeds,
                                    const std::string &out_dir)
    {
        if (values.empty())
            throw std::invalid_argument("sweep: no axis values given");
        if (seeds < 1)
            throw std::invalid_argument("sweep: need at least one seed");
        for (const auto &m : methods)
            if (m != "codebook_wf" && m != "nvr_mappo" && m != "mappo")
                throw std::invalid_argument("sweep: unknown method '" + m + "'");
        const std::string axis_name = axis == SweepAxis::Layers ? "layers" : "atoms";

        // Every point is validated before anything runs.
        std::vector<ExperimentConfig> points;
        for (std::size_t v : values)
        {
            ExperimentConfig c = cfg;
            if (axis == SweepAxis::Layers)
                c.env.geometry.layer_count = v;
            else
                c.env.geometry.atoms_per_layer = v;
            try
            {
                c.validate();
            }
            catch (const std::invalid_argument &e)
            {
                throw std::invalid_argument("sweep: invalid " + axis_name + " value " + std::to_string(v) + ": " +
                                            e.what());
            }
            points.push_back(std::move(c));
        }

        ensure_dir(out_dir);
        std::ofstream csv(fs::path(out_dir) / "sweep.csv");
        if (!csv)
            throw std::runtime_error("cannot write sweep.csv in " + out_dir);
        csv << kSweepHeader << '\n';

        std::vector<SweepRow> rows;
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t s = 0; s < seeds; ++s)
            {
                ExperimentConfig c = points[i];
                c.seed = cfg.seed + s;
                c.env.layout_seed = c.seed;
                for (const auto &method : methods)
                {
                    double se = 0.0;
                    if (method == "codebook_wf")
                        se = evaluate_baseline(c).mean;
                    else
                    {
                        Hyperparams hp = c.marl;
                        if (method == "mappo")
                        {
                            hp.noise_weight = 0.0;
                            hp.recurrent = false;
                        }
                        Trainer trainer(env_for_seed(c, c.seed), hp, c.seed);
                        trainer.train();
                        se = mean_of(evaluate_policy(trainer.actor(), trainer.env(),
                                                     held_out_seeds(c.seed, c.baseline.eval_channels)));
                    }
                    SweepRow r{axis_name, values[i], method, c.seed, se};
                    csv << r.axis << ',' << r.axis_value << ',' << r.method << ',' << r.seed << ','
                        << format_double(r.sum_se) << '\n';
                    rows.push_back(std::move(r));
                }
            }
        return rows;
    }

    EvalSummary evaluate_checkpoint(const ExperimentConfig &cfg, const std::string &checkpoint_path,
                                    std::size_t episodes)
    {
        cfg.validate();
        const std::uint64_t banks_before = NoiseBank::instances();
        const nn::Checkpoint ck = nn::load_checkpoint(checkpoint_path);
        Env env(env_for_seed(cfg, cfg.seed));
        const nn::ActorSpec spec = actor_spec_for(env, cfg.marl);

        auto expect = [&](const std::string &key, const std::string &expected) {
            auto it = ck.meta.find(key);
            const std::string found = it == ck.meta.end() ? "<missing>" : it->second;
            if (found != expected)
                throw std::invalid_argument("checkpoint dimension mismatch for " + key + ": expected " + expected +
                                            ", found " + found);
        };
        expect("obs_dim", std::to_string(spec.obs_dim));
        expect("action_dim", std::to_string(spec.action_dim));
        expect("actor_hidden", std::to_string(spec.hidden));
        expect("recurrent", spec.recurrent ? "1" : "0");

        nn::Actor actor(spec, 0);
        nn::import_params(actor.params(), "", ck);

        EvalSummary s;
        s.per_episode = evaluate_policy(actor, env, held_out_seeds(cfg.seed, episodes));
        s.mean = mean_of(s.per_episode);
        if (!s.per_episode.empty())
        {
            double var = 0.0;
            for (double v : s.per_episode)
                var += (v - s.mean) * (v - s.mean);
            s.std = std::sqrt(var / static_cast<double>(s.per_episode.size()));
        }
        s.noise_banks_created = NoiseBank::instances() - banks_before;
        return s;
    }

    EvalSummary run_eval(const ExperimentConfig &cfg, const std::string &checkpoint_path, std::size_t episodes,
                         const std::string &out_dir)
    {
        EvalSummary s = evaluate_checkpoint(cfg, checkpoint_path, episodes);
        ensure_dir(out_dir);
        ordered_json j;
        j["checkpoint"] = checkpoint_path;
        j["seed"] = cfg.seed;
        j["episodes"] = episodes;
        j["mean_sum_se"] = s.mean;
        j["std_sum_se"] = s.std;
        j["per_episode"] = s.per_episode;
        j["noise_banks_created"] = s.noise_banks_created;
        if (episodes == 0)
            j["warning"] = "zero evaluation episodes requested";
        std::ofstream(fs::path(out_dir) / "eval.json") << j.dump(2) << '\n';
        return s;
    }

} // namespace simcf
