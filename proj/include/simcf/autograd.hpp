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

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace simcf::nn
{
    using Matrix = Eigen::MatrixXd;

    struct Parameter
    {
        std::string name;
        Matrix value;
        Matrix grad;
    };

    // Named tensors of one network. Addresses stay valid as parameters are added.
    class ParameterSet
    {
      public:
        Parameter &add(std::string name, Matrix init);
        Parameter &get(const std::string &name);
        const Parameter &get(const std::string &name) const;
        bool contains(const std::string &name) const;

        std::deque<Parameter> &items() { return params_; }
        const std::deque<Parameter> &items() const { return params_; }

        std::size_t scalar_count() const;
        Eigen::VectorXd flat() const;
        Eigen::VectorXd flat_grad() const;
        void set_flat(const Eigen::VectorXd &values);
        void zero_grad();
        bool all_finite() const;

      private:
        std::deque<Parameter> params_;
    };

    class Tape;

    struct Var
    {
        Tape *tape = nullptr;
        int id = -1;

        const Matrix &value() const;
        Eigen::Index rows() const { return value().rows(); }
        Eigen::Index cols() const { return value().cols(); }
    };

    // Records operations in creation order; backward() walks the records in reverse. A tape is
    // single-use per loss: build, call backward once, discard.
    class Tape
    {
      public:
        using BackwardFn = std::function<void(Tape &, const Matrix &out_grad)>;

        Var constant(Matrix value);
        Var parameter(Parameter &p);

        Var record(Matrix value, std::vector<int> parents, BackwardFn backward);

        const Matrix &value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
        const Matrix &grad(Var v) const;
        bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

        // Adds g into the gradient of node id if it participates in differentiation.
        void accumulate(int id, const Matrix &g);

        // Seeds d loss / d loss = 1 and propagates. Parameter gradients are added to Parameter::grad.
        void backward(Var loss);

        std::size_t size() const { return nodes_.size(); }

      private:
        struct Node
        {
            Matrix value;
            Matrix grad;
            bool requires_grad = false;
            bool has_grad = false;
            std::vector<int> parents;
            BackwardFn backward;
            Parameter *param = nullptr;
        };

        std::vector<Node> nodes_;
    };

    // Binary elementwise ops accept b with the shape of a, a 1 x cols row (broadcast over rows), or 1 x 1.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var matmul(Var a, Var b);
    Var scale(Var a, double s);
    Var add_scalar(Var a, double s);
    Var neg(Var a);
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var exp(Var a);
    Var square(Var a);
    Var minimum(Var a, Var b);
    // Gradient passes where lo <= a <= hi and is zero outside.
    Var clamp(Var a, double lo, double hi);
    Var sum(Var a);
    Var mean(Var a);
    Var row_sum(Var a);
    Var concat_cols(const std::vector<Var> &parts);
    Var concat_rows(const std::vector<Var> &parts);
    Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
    Var gather_rows(Var a, const std::vector<Eigen::Index> &rows);
    Var detach(Var a);

    inline Var operator+(Var a, Var b) { return add(a, b); }
    inline Var operator-(Var a, Var b) { return sub(a, b); }
    inline Var operator*(Var a, Var b) { return mul(a, b); }

} // namespace simcf::nn
