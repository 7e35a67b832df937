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

#include "simcf/autograd.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace simcf::nn
{
    // Orthogonal rows/columns scaled by gain (Gaussian draw followed by QR).
    Matrix orthogonal_init(Eigen::Index rows, Eigen::Index cols, double gain, std::mt19937_64 &rng);

    class Dense
    {
      public:
        Dense() = default;
        Dense(ParameterSet &params, const std::string &name, Eigen::Index in, Eigen::Index out, double gain,
              std::mt19937_64 &rng);

        Var forward(Tape &tape, Var x) const;

        Eigen::Index in() const { return in_; }
        Eigen::Index out() const { return out_; }

      private:
        Parameter *weight_ = nullptr;
        Parameter *bias_ = nullptr;
        Eigen::Index in_ = 0, out_ = 0;
    };

    // Gated recurrent cell:
    //   z = sig(x Wz + h Uz + bz), r = sig(x Wr + h Ur + br)
    //   n = tanh(x Wn + bn + r * (h Un + bhn)),  h' = (1 - z) * n + z * h
    class GruCell
    {
      public:
        GruCell() = default;
        GruCell(ParameterSet &params, const std::string &name, Eigen::Index in, Eigen::Index hidden,
                std::mt19937_64 &rng);

        Var forward(Tape &tape, Var x, Var h) const;

        Eigen::Index hidden() const { return hidden_; }

      private:
        Parameter *wz_ = nullptr, *wr_ = nullptr, *wn_ = nullptr;
        Parameter *uz_ = nullptr, *ur_ = nullptr, *un_ = nullptr;
        Parameter *bz_ = nullptr, *br_ = nullptr, *bn_ = nullptr, *bhn_ = nullptr;
        Eigen::Index hidden_ = 0;
    };

    // Per-row log density of a diagonal Gaussian: returns rows x 1.
    Var gaussian_log_prob(Var actions, Var mean, Var log_std);
    // Differential entropy of the diagonal Gaussian, 1 x 1.
    Var gaussian_entropy(Var log_std);

    struct ActorSpec
    {
        Eigen::Index obs_dim = 0;
        Eigen::Index action_dim = 0;
        Eigen::Index hidden = 64;
        bool recurrent = true;
        double init_log_std = -0.5;
        double output_gain = 0.01;
    };

    struct PolicyOutput
    {
        std::vector<Var> means; // one batch x action_dim entry per time step
        Var log_std;            // 1 x action_dim
        Var hidden;             // batch x hidden after the last step
    };

    // dense -> tanh -> gated recurrent cell -> dense mean head; log std is a free parameter vector.
    class Actor
    {
      public:
        Actor() = default;
        Actor(const ActorSpec &spec, std::uint64_t seed);

        Actor(const Actor &) = delete;
        Actor &operator=(const Actor &) = delete;
        Actor(Actor &&) = delete;

        PolicyOutput forward_sequence(Tape &tape, const std::vector<Matrix> &obs_seq, const Matrix &h0);

        // Single step without gradient bookkeeping beyond one throwaway tape.
        void step(const Matrix &obs, Matrix &hidden, Matrix &mean_out);

        Matrix initial_hidden(Eigen::Index batch) const { return Matrix::Zero(batch, spec_.hidden); }

        const ActorSpec &spec() const { return spec_; }
        ParameterSet &params() { return params_; }
        const ParameterSet &params() const { return params_; }

      private:
        ActorSpec spec_;
        ParameterSet params_;
        Dense encoder_;
        GruCell cell_;
        Dense head_;
        Parameter *log_std_ = nullptr;
    };

    struct CriticSpec
    {
        Eigen::Index input_dim = 0;
        Eigen::Index hidden = 128;
    };

    // dense -> tanh -> dense -> tanh -> scalar.
    class Critic
    {
      public:
        Critic(const CriticSpec &spec, std::uint64_t seed);

        Critic(const Critic &) = delete;
        Critic &operator=(const Critic &) = delete;

        Var forward(Tape &tape, Var input) const;
        Matrix evaluate(const Matrix &input) const;

        const CriticSpec &spec() const { return spec_; }
        ParameterSet &params() { return params_; }
        const ParameterSet &params() const { return params_; }

      private:
        CriticSpec spec_;
        ParameterSet params_;
        Dense l1_, l2_, out_;
    };

    struct AdamState
    {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        std::int64_t step = 0;
        Eigen::VectorXd m, v;
    };

    // Bias-corrected Adam on the flat parameter view, using Parameter::grad.
    void adam_step(ParameterSet &params, AdamState &state);

    // Rescales all gradients so their joint L2 norm is at most max_norm; returns the norm before clipping.
    double clip_grad_norm(ParameterSet &params, double max_norm);

    // Text container of named tensors:
    //   simcf-checkpoint 1
    //   meta <key> <value>          (zero or more)
    //   tensor <name> <rows> <cols> (followed by rows lines of cols values, %.17g)
    //   end
    struct Checkpoint
    {
        std::map<std::string, std::string> meta;
        std::map<std::string, Matrix> tensors;
    };

    void save_checkpoint(const Checkpoint &ckpt, const std::string &path);
    Checkpoint load_checkpoint(const std::string &path);

    void export_params(const ParameterSet &params, const std::string &prefix, Checkpoint &ckpt);
    // Copies tensors into params; throws std::invalid_argument listing expected vs found shapes.
    void import_params(ParameterSet &params, const std::string &prefix, const Checkpoint &ckpt);

} // namespace simcf::nn
