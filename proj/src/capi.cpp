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

#include "simcf/harness.hpp"

#include <cstring>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>

struct simcf_config
{
    simcf::ExperimentConfig cfg;
};

struct simcf_env
{
    std::unique_ptr<simcf::Env> env;
};

namespace
{
    thread_local std::string last_error;

    template <typename F>
    simcf_status guarded(F &&f)
    {
        last_error.clear();
        try
        {
            f();
            return SIMCF_OK;
        }
        catch (const simcf::TrainingDiverged &e)
        {
            last_error = e.what();
            return SIMCF_NUMERIC;
        }
        catch (const std::invalid_argument &e)
        {
            last_error = e.what();
            return SIMCF_INVALID_ARGUMENT;
        }
        catch (const std::domain_error &e)
        {
            last_error = e.what();
            return SIMCF_NUMERIC;
        }
        catch (const std::logic_error &e)
        {
            last_error = e.what();
            return SIMCF_STATE;
        }
        catch (const std::filesystem::filesystem_error &e)
        {
            last_error = e.what();
            return SIMCF_IO;
        }
        catch (const std::runtime_error &e)
        {
            last_error = e.what();
            const std::string msg = e.what();
            if (msg.find("non-finite") != std::string::npos)
                return SIMCF_NUMERIC;
            if (msg.find("cannot") != std::string::npos || msg.find("checkpoint") != std::string::npos)
                return SIMCF_IO;
            return SIMCF_INTERNAL;
        }
        catch (const std::exception &e)
        {
            last_error = e.what();
            return SIMCF_INTERNAL;
        }
        catch (...)
        {
            last_error = "unknown error";
            return SIMCF_INTERNAL;
        }
    }

    simcf_status null_arg(const char *name)
    {
        last_error = std::string("null argument: ") + name;
        return SIMCF_INVALID_ARGUMENT;
    }
} // namespace

extern "C" {

const char *simcf_version(void) { return "0.1.0"; }

const char *simcf_last_error(void) { return last_error.c_str(); }

simcf_status simcf_config_from_preset(const char *name, simcf_config **out)
{
    if (!name)
        return null_arg("name");
    if (!out)
        return null_arg("out");
    return guarded([&] { *out = new simcf_config{simcf::preset(name)}; });
}

simcf_status simcf_config_load(const char *path, simcf_config **out)
{
    if (!path)
        return null_arg("path");
    if (!out)
        return null_arg("out");
    return guarded([&] { *out = new simcf_config{simcf::load_config(path)}; });
}

simcf_status simcf_config_set(simcf_config *cfg, const char *key, const char *value)
{
    if (!cfg)
        return null_arg("cfg");
    if (!key)
        return null_arg("key");
    if (!value)
        return null_arg("value");
    return guarded([&] { simcf::apply_override(cfg->cfg, key, value); });
}

namespace
{
    void copy_string(const std::string &s, char *buf, size_t buf_size, size_t *needed)
    {
        if (needed)
            *needed = s.size() + 1;
        if (buf && buf_size > 0)
        {
            if (buf_size < s.size() + 1)
                throw std::invalid_argument("buffer too small: need " + std::to_string(s.size() + 1) + " bytes");
            std::memcpy(buf, s.c_str(), s.size() + 1);
        }
    }
} // namespace

simcf_status simcf_config_output_dir(const simcf_config *cfg, char *buf, size_t buf_size, size_t *needed)
{
    if (!cfg)
        return null_arg("cfg");
    return guarded([&] { copy_string(cfg->cfg.output_dir, buf, buf_size, needed); });
}

simcf_status simcf_config_to_json(const simcf_config *cfg, char *buf, size_t buf_size, size_t *needed)
{
    if (!cfg)
        return null_arg("cfg");
    return guarded([&] {
        copy_string(simcf::config_to_json(cfg->cfg).dump(2), buf, buf_size, needed);
    });
}

void simcf_config_free(simcf_config *cfg) { delete cfg; }

simcf_status simcf_train(const simcf_config *cfg, const char *out_dir, int verbose)
{
    if (!cfg)
        return null_arg("cfg");
    if (!out_dir)
        return null_arg("out_dir");
    return guarded([&] { simcf::run_train(cfg->cfg, out_dir, verbose != 0); });
}

simcf_status simcf_baseline(const simcf_config *cfg, const char *out_dir, double *mean_sum_se)
{
    if (!cfg)
        return null_arg("cfg");
    if (!out_dir)
        return null_arg("out_dir");
    return guarded([&] {
        const auto s = simcf::run_baseline(cfg->cfg, out_dir);
        if (mean_sum_se)
            *mean_sum_se = s.mean;
    });
}

simcf_status simcf_sweep(const simcf_config *cfg, const char *axis, const size_t *values, size_t n_values,
                         const char *methods, size_t seeds, const char *out_dir)
{
    if (!cfg)
        return null_arg("cfg");
    if (!axis)
        return null_arg("axis");
    if (!values && n_values > 0)
        return null_arg("values");
    if (!methods)
        return null_arg("methods");
    if (!out_dir)
        return null_arg("out_dir");
    return guarded([&] {
        std::vector<std::size_t> v(values, values + n_values);
        std::vector<std::string> m;
        std::stringstream ss(methods);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty())
                m.push_back(item);
        if (m.empty())
            throw std::invalid_argument("sweep: no methods given");
        simcf::run_sweep(cfg->cfg, simcf::parse_axis(axis), v, m, seeds, out_dir);
    });
}

simcf_status simcf_eval(const simcf_config *cfg, const char *checkpoint, size_t episodes, const char *out_dir,
                        double *mean_sum_se)
{
    if (!cfg)
        return null_arg("cfg");
    if (!checkpoint)
        return null_arg("checkpoint");
    if (!out_dir)
        return null_arg("out_dir");
    return guarded([&] {
        const auto s = simcf::run_eval(cfg->cfg, checkpoint, episodes, out_dir);
        if (mean_sum_se)
            *mean_sum_se = s.mean;
    });
}

simcf_status simcf_env_create(const simcf_config *cfg, simcf_env **out)
{
    if (!cfg)
        return null_arg("cfg");
    if (!out)
        return null_arg("out");
    return guarded([&] {
        cfg->cfg.validate();
        auto e = std::make_unique<simcf::Env>(simcf::env_for_seed(cfg->cfg, cfg->cfg.seed));
        *out = new simcf_env{std::move(e)};
    });
}

simcf_status simcf_env_dims(const simcf_env *env, size_t *agents, size_t *obs_dim, size_t *action_dim)
{
    if (!env)
        return null_arg("env");
    if (agents)
        *agents = env->env->agents();
    if (obs_dim)
        *obs_dim = env->env->observation_dim();
    if (action_dim)
        *action_dim = env->env->action_dim();
    return SIMCF_OK;
}

namespace
{
    void copy_obs(const simcf::Env &env, double *obs)
    {
        const std::size_t d = env.observation_dim();
        for (std::size_t l = 0; l < env.agents(); ++l)
        {
            const Eigen::VectorXd o = env.observation(l);
            std::memcpy(obs + l * d, o.data(), d * sizeof(double));
        }
    }
} // namespace

simcf_status simcf_env_reset(simcf_env *env, uint64_t seed, double *obs)
{
    if (!env)
        return null_arg("env");
    return guarded([&] {
        env->env->reset(seed);
        if (obs)
            copy_obs(*env->env, obs);
    });
}

simcf_status simcf_env_observation(const simcf_env *env, double *obs)
{
    if (!env)
        return null_arg("env");
    if (!obs)
        return null_arg("obs");
    return guarded([&] { copy_obs(*env->env, obs); });
}

simcf_status simcf_env_step(simcf_env *env, const double *actions, double *obs, double *reward, int *done)
{
    if (!env)
        return null_arg("env");
    if (!actions)
        return null_arg("actions");
    return guarded([&] {
        const std::size_t a = env->env->action_dim();
        simcf::JointAction joint(env->env->agents());
        for (std::size_t l = 0; l < joint.size(); ++l)
            joint[l] = Eigen::Map<const Eigen::VectorXd>(actions + l * a, static_cast<Eigen::Index>(a));
        const simcf::StepResult r = env->env->step(joint);
        if (obs)
            copy_obs(*env->env, obs);
        if (reward)
            *reward = r.shared_reward;
        if (done)
            *done = r.done ? 1 : 0;
    });
}

void simcf_env_free(simcf_env *env) { delete env; }

} // extern "C"
