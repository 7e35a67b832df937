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

#include "simcf/neural.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace simcf::nn
{
    Matrix orthogonal_init(Eigen::Index rows, Eigen::Index cols, double gain, std::mt19937_64 &rng)
    {
        std::normal_distribution<double> gauss(0.0, 1.0);
        const Eigen::Index big = std::max(rows, cols), small = std::min(rows, cols);
        Matrix a(big, small);
        for (Eigen::Index j = 0; j < small; ++j)
            for (Eigen::Index i = 0; i < big; ++i)
                a(i, j) = gauss(rng);
        Eigen::HouseholderQR<Matrix> qr(a);
        Matrix q = qr.householderQ() * Matrix::Identity(big, small);
        // Sign fix for a uniform (Haar) draw.
        const Matrix r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
        for (Eigen::Index j = 0; j < small; ++j)
            if (r(j, j) < 0.0)
                q.col(j) *= -1.0;
        Matrix out = rows >= cols ? q : Matrix(q.transpose());
        return gain * out;
    }

    Dense::Dense(ParameterSet &params, const std::string &name, Eigen::Index in, Eigen::Index out, double gain,
                 std::mt19937_64 &rng)
        : in_(in), out_(out)
    {
        weight_ = &params.add(name + ".weight", orthogonal_init(in, out, gain, rng));
        bias_ = &params.add(name + ".bias", Matrix::Zero(1, out));
    }

    Var Dense::forward(Tape &tape, Var x) const
    {
        if (x.cols() != in_)
            throw std::invalid_argument("Dense: expected " + std::to_string(in_) + " input features, got " +
                                        std::to_string(x.cols()));
        return add(matmul(x, tape.parameter(*weight_)), tape.parameter(*bias_));
    }

    GruCell::GruCell(ParameterSet &params, const std::string &name, Eigen::Index in, Eigen::Index hidden,
                     std::mt19937_64 &rng)
        : hidden_(hidden)
    {
        wz_ = &params.add(name + ".wz", orthogonal_init(in, hidden, 1.0, rng));
        wr_ = &params.add(name + ".wr", orthogonal_init(in, hidden, 1.0, rng));
        wn_ = &params.add(name + ".wn", orthogonal_init(in, hidden, 1.0, rng));
        uz_ = &params.add(name + ".uz", orthogonal_init(hidden, hidden, 1.0, rng));
        ur_ = &params.add(name + ".ur", orthogonal_init(hidden, hidden, 1.0, rng));
        un_ = &params.add(name + ".un", orthogonal_init(hidden, hidden, 1.0, rng));
        bz_ = &params.add(name + ".bz", Matrix::Zero(1, hidden));
        br_ = &params.add(name + ".br", Matrix::Zero(1, hidden));
        bn_ = &params.add(name + ".bn", Matrix::Zero(1, hidden));
        bhn_ = &params.add(name + ".bhn", Matrix::Zero(1, hidden));
    }

    Var GruCell::forward(Tape &tape, Var x, Var h) const
    {
        if (h.cols() != hidden_ || h.rows() != x.rows())
            throw std::invalid_argument("GruCell: hidden state shape mismatch");
        Var z = sigmoid(add(add(matmul(x, tape.parameter(*wz_)), matmul(h, tape.parameter(*uz_))),
                            tape.parameter(*bz_)));
        Var r = sigmoid(add(add(matmul(x, tape.parameter(*wr_)), matmul(h, tape.parameter(*ur_))),
                            tape.parameter(*br_)));
        Var hn = add(matmul(h, tape.parameter(*un_)), tape.parameter(*bhn_));
        Var n = tanh(add(add(matmul(x, tape.parameter(*wn_)), tape.parameter(*bn_)), mul(r, hn)));
        // (1 - z) * n + z * h  ==  n + z * (h - n)
        return add(n, mul(z, sub(h, n)));
    }

    Var gaussian_log_prob(Var actions, Var mean, Var log_std)
    {
        if (actions.rows() != mean.rows() || actions.cols() != mean.cols() || log_std.cols() != mean.cols())
            throw std::invalid_argument("gaussian_log_prob: shape mismatch");
        static const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
        Var z = mul(sub(actions, mean), exp(neg(log_std)));
        Var per_dim = add(scale(square(z), -0.5), neg(log_std));
        return add_scalar(row_sum(per_dim), -half_log_two_pi * static_cast<double>(mean.cols()));
    }

    Var gaussian_entropy(Var log_std)
    {
        static const double half_log_two_pi_e = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
        return add_scalar(sum(log_std), half_log_two_pi_e * static_cast<double>(log_std.cols()));
    }

    Actor::Actor(const ActorSpec &spec, std::uint64_t seed) : spec_(spec)
    {
        if (spec.obs_dim < 1 || spec.action_dim < 1 || spec.hidden < 1)
            throw std::invalid_argument("Actor: dimensions must be positive");
        std::mt19937_64 rng(seed);
        encoder_ = Dense(params_, "actor.encoder", spec.obs_dim, spec.hidden, std::sqrt(2.0), rng);
        cell_ = GruCell(params_, "actor.gru", spec.hidden, spec.hidden, rng);
        head_ = Dense(params_, "actor.mean", spec.hidden, spec.action_dim, spec.output_gain, rng);
        log_std_ = &params_.add("actor.log_std", Matrix::Constant(1, spec.action_dim, spec.init_log_std));
    }

    PolicyOutput Actor::forward_sequence(Tape &tape, const std::vector<Matrix> &obs_seq, const Matrix &h0)
    {
        if (h0.cols() != spec_.hidden)
            throw std::invalid_argument("Actor: hidden state has " + std::to_string(h0.cols()) + " columns, expected " +
                                        std::to_string(spec_.hidden));
        PolicyOutput out;
        Var h = tape.constant(h0);
        for (const Matrix &obs : obs_seq)
        {
            if (obs.cols() != spec_.obs_dim || obs.rows() != h0.rows())
                throw std::invalid_argument("Actor: observation shape mismatch (expected " +
                                            std::to_string(h0.rows()) + "x" + std::to_string(spec_.obs_dim) +
                                            ", got " + std::to_string(obs.rows()) + "x" + std::to_string(obs.cols()) +
                                            ")");
            Var x = tanh(encoder_.forward(tape, tape.constant(obs)));
            Var feat = x;
            if (spec_.recurrent)
            {
                h = cell_.forward(tape, x, h);
                feat = h;
            }
            out.means.push_back(head_.forward(tape, feat));
        }
        out.log_std = tape.parameter(*log_std_);
        out.hidden = h;
        return out;
    }

    void Actor::step(const Matrix &obs, Matrix &hidden, Matrix &mean_out)
    {
        Tape tape;
        PolicyOutput o = forward_sequence(tape, {obs}, hidden);
        hidden = o.hidden.value();
        mean_out = o.means.front().value();
    }

    Critic::Critic(const CriticSpec &spec, std::uint64_t seed) : spec_(spec)
    {
        if (spec.input_dim < 1 || spec.hidden < 1)
            throw std::invalid_argument("Critic: dimensions must be positive");
        std::mt19937_64 rng(seed);
        l1_ = Dense(params_, "critic.l1", spec.input_dim, spec.hidden, std::sqrt(2.0), rng);
        l2_ = Dense(params_, "critic.l2", spec.hidden, spec.hidden, std::sqrt(2.0), rng);
        out_ = Dense(params_, "critic.out", spec.hidden, 1, 1.0, rng);
    }

    Var Critic::forward(Tape &tape, Var input) const
    {
        return out_.forward(tape, tanh(l2_.forward(tape, tanh(l1_.forward(tape, input)))));
    }

    Matrix Critic::evaluate(const Matrix &input) const
    {
        Tape tape;
        return forward(tape, tape.constant(input)).value();
    }

    void adam_step(ParameterSet &params, AdamState &st)
    {
        const auto n = static_cast<Eigen::Index>(params.scalar_count());
        if (st.m.size() != n)
        {
            st.m = Eigen::VectorXd::Zero(n);
            st.v = Eigen::VectorXd::Zero(n);
            st.step = 0;
        }
        const Eigen::VectorXd g = params.flat_grad();
        ++st.step;
        st.m = st.beta1 * st.m + (1.0 - st.beta1) * g;
        st.v = st.beta2 * st.v + (1.0 - st.beta2) * g.cwiseProduct(g);
        const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
        const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
        const Eigen::VectorXd m_hat = st.m / bc1;
        const Eigen::VectorXd v_hat = st.v / bc2;
        Eigen::VectorXd theta = params.flat();
        theta.array() -= st.lr * m_hat.array() / (v_hat.array().sqrt() + st.eps);
        params.set_flat(theta);
    }

    double clip_grad_norm(ParameterSet &params, double max_norm)
    {
        double sq = 0.0;
        for (const auto &p : params.items())
            sq += p.grad.squaredNorm();
        const double norm = std::sqrt(sq);
        if (max_norm > 0.0 && norm > max_norm)
        {
            const double s = max_norm / (norm + 1e-12);
            for (auto &p : params.items())
                p.grad *= s;
        }
        return norm;
    }

    void save_checkpoint(const Checkpoint &ckpt, const std::string &path)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot open checkpoint for writing: " + path);
        os << "simcf-checkpoint 1\n";
        for (const auto &[k, v] : ckpt.meta)
        {
            if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
                throw std::invalid_argument("checkpoint meta keys may not contain whitespace: " + k);
            os << "meta " << k << ' ' << v << '\n';
        }
        os << std::setprecision(17);
        for (const auto &[name, m] : ckpt.tensors)
        {
            os << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    os << (j ? " " : "") << m(i, j);
                os << '\n';
            }
        }
        os << "end\n";
        if (!os)
            throw std::runtime_error("failed writing checkpoint: " + path);
    }

    Checkpoint load_checkpoint(const std::string &path)
    {
        std::ifstream is(path);
        if (!is)
            throw std::runtime_error("cannot open checkpoint: " + path);
        std::string magic;
        int version = 0;
        is >> magic >> version;
        if (magic != "simcf-checkpoint" || version != 1)
            throw std::runtime_error("not a simcf checkpoint (version 1): " + path);
        Checkpoint ckpt;
        std::string tag;
        while (is >> tag)
        {
            if (tag == "end")
                return ckpt;
            if (tag == "meta")
            {
                std::string key, value;
                is >> key;
                std::getline(is, value);
                if (!value.empty() && value.front() == ' ')
                    value.erase(0, 1);
                ckpt.meta[key] = value;
            }
            else if (tag == "tensor")
            {
                std::string name;
                Eigen::Index rows = 0, cols = 0;
                is >> name >> rows >> cols;
                if (!is || rows < 0 || cols < 0)
                    throw std::runtime_error("corrupt tensor header in checkpoint: " + path);
                Matrix m(rows, cols);
                for (Eigen::Index i = 0; i < rows; ++i)
                    for (Eigen::Index j = 0; j < cols; ++j)
                        is >> m(i, j);
                if (!is)
                    throw std::runtime_error("truncated tensor '" + name + "' in checkpoint: " + path);
                ckpt.tensors[name] = std::move(m);
            }
            else
                throw std::runtime_error("unexpected record '" + tag + "' in checkpoint: " + path);
        }
        throw std::runtime_error("checkpoint missing end marker: " + path);
    }

    void export_params(const ParameterSet &params, const std::string &prefix, Checkpoint &ckpt)
    {
        for (const auto &p : params.items())
            ckpt.tensors[prefix + p.name] = p.value;
    }

    void import_params(ParameterSet &params, const std::string &prefix, const Checkpoint &ckpt)
    {
        for (auto &p : params.items())
        {
            auto it = ckpt.tensors.find(prefix + p.name);
            if (it == ckpt.tensors.end())
                throw std::invalid_argument("checkpoint lacks tensor '" + prefix + p.name + "'");
            if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols())
                throw std::invalid_argument("checkpoint tensor '" + p.name + "': expected " +
                                            std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()) +
                                            ", found " + std::to_string(it->second.rows()) + "x" +
                                            std::to_string(it->second.cols()));
            p.value = it->second;
        }
    }

} // namespace simcf::nn
