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

#include "simcf/autograd.hpp"

#include <cmath>
#include <stdexcept>

namespace simcf::nn
{
    Parameter &ParameterSet::add(std::string name, Matrix init)
    {
        if (contains(name))
            throw std::invalid_argument("ParameterSet: duplicate parameter '" + name + "'");
        Matrix zero = Matrix::Zero(init.rows(), init.cols());
        params_.push_back(Parameter{std::move(name), std::move(init), std::move(zero)});
        return params_.back();
    }

    Parameter &ParameterSet::get(const std::string &name)
    {
        for (auto &p : params_)
            if (p.name == name)
                return p;
        throw std::out_of_range("ParameterSet: no parameter '" + name + "'");
    }

    const Parameter &ParameterSet::get(const std::string &name) const
    {
        for (const auto &p : params_)
            if (p.name == name)
                return p;
        throw std::out_of_range("ParameterSet: no parameter '" + name + "'");
    }

    bool ParameterSet::contains(const std::string &name) const
    {
        for (const auto &p : params_)
            if (p.name == name)
                return true;
        return false;
    }

    std::size_t ParameterSet::scalar_count() const
    {
        std::size_t n = 0;
        for (const auto &p : params_)
            n += static_cast<std::size_t>(p.value.size());
        return n;
    }

    Eigen::VectorXd ParameterSet::flat() const
    {
        Eigen::VectorXd out(static_cast<Eigen::Index>(scalar_count()));
        Eigen::Index off = 0;
        for (const auto &p : params_)
        {
            out.segment(off, p.value.size()) = p.value.reshaped();
            off += p.value.size();
        }
        return out;
    }

    Eigen::VectorXd ParameterSet::flat_grad() const
    {
        Eigen::VectorXd out(static_cast<Eigen::Index>(scalar_count()));
        Eigen::Index off = 0;
        for (const auto &p : params_)
        {
            out.segment(off, p.grad.size()) = p.grad.reshaped();
            off += p.grad.size();
        }
        return out;
    }

    void ParameterSet::set_flat(const Eigen::VectorXd &values)
    {
        if (values.size() != static_cast<Eigen::Index>(scalar_count()))
            throw std::invalid_argument("ParameterSet::set_flat: size mismatch");
        Eigen::Index off = 0;
        for (auto &p : params_)
        {
            p.value.reshaped() = values.segment(off, p.value.size());
            off += p.value.size();
        }
    }

    void ParameterSet::zero_grad()
    {
        for (auto &p : params_)
            p.grad.setZero();
    }

    bool ParameterSet::all_finite() const
    {
        for (const auto &p : params_)
            if (!p.value.allFinite())
                return false;
        return true;
    }

    const Matrix &Var::value() const
    {
        return tape->value(id);
    }

    Var Tape::constant(Matrix value)
    {
        Node n;
        n.value = std::move(value);
        nodes_.push_back(std::move(n));
        return Var{this, static_cast<int>(nodes_.size() - 1)};
    }

    Var Tape::parameter(Parameter &p)
    {
        Node n;
        n.value = p.value;
        n.requires_grad = true;
        n.param = &p;
        nodes_.push_back(std::move(n));
        return Var{this, static_cast<int>(nodes_.size() - 1)};
    }

    Var Tape::record(Matrix value, std::vector<int> parents, BackwardFn backward)
    {
        Node n;
        n.value = std::move(value);
        for (int p : parents)
            n.requires_grad = n.requires_grad || requires_grad(p);
        n.parents = std::move(parents);
        if (n.requires_grad)
            n.backward = std::move(backward);
        nodes_.push_back(std::move(n));
        return Var{this, static_cast<int>(nodes_.size() - 1)};
    }

    const Matrix &Tape::grad(Var v) const
    {
        const Node &n = nodes_[static_cast<std::size_t>(v.id)];
        if (!n.has_grad)
            throw std::logic_error("Tape::grad: node has no gradient");
        return n.grad;
    }

    void Tape::accumulate(int id, const Matrix &g)
    {
        Node &n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad)
            return;
        if (!n.has_grad)
        {
            n.grad = g;
            n.has_grad = true;
        }
        else
            n.grad += g;
    }

    void Tape::backward(Var loss)
    {
        if (loss.tape != this)
            throw std::invalid_argument("Tape::backward: variable belongs to another tape");
        const Matrix &lv = value(loss.id);
        if (lv.rows() != 1 || lv.cols() != 1)
            throw std::invalid_argument("Tape::backward: loss must be a scalar (1x1), got " +
                                        std::to_string(lv.rows()) + "x" + std::to_string(lv.cols()));
        accumulate(loss.id, Matrix::Ones(1, 1));
        for (int i = loss.id; i >= 0; --i)
        {
            Node &n = nodes_[static_cast<std::size_t>(i)];
            if (!n.has_grad)
                continue;
            if (n.backward)
            {
                const Matrix g = n.grad; // copy: backward may resize nodes' grads, not ours
                n.backward(*this, g);
            }
            if (n.param)
                n.param->grad += n.grad;
        }
    }

    namespace
    {
        enum class Broadcast
        {
            Same,
            Row,
            Scalar
        };

        Broadcast broadcast_kind(const Matrix &a, const Matrix &b, const char *op)
        {
            if (a.rows() == b.rows() && a.cols() == b.cols())
                return Broadcast::Same;
            if (b.rows() == 1 && b.cols() == a.cols())
                return Broadcast::Row;
            if (b.rows() == 1 && b.cols() == 1)
                return Broadcast::Scalar;
            throw std::invalid_argument(std::string(op) + ": incompatible shapes " + std::to_string(a.rows()) + "x" +
                                        std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                                        std::to_string(b.cols()));
        }

        Matrix expand(const Matrix &b, Broadcast kind, Eigen::Index rows, Eigen::Index cols)
        {
            switch (kind)
            {
            case Broadcast::Same:
                return b;
            case Broadcast::Row:
                return b.replicate(rows, 1);
            case Broadcast::Scalar:
                return Matrix::Constant(rows, cols, b(0, 0));
            }
            return b;
        }

        Matrix reduce(const Matrix &g, Broadcast kind)
        {
            switch (kind)
            {
            case Broadcast::Same:
                return g;
            case Broadcast::Row:
                return g.colwise().sum();
            case Broadcast::Scalar:
                return Matrix::Constant(1, 1, g.sum());
            }
            return g;
        }

        Tape &tape_of(Var a, Var b)
        {
            if (a.tape == nullptr || a.tape != b.tape)
                throw std::invalid_argument("autograd: operands live on different tapes");
            return *a.tape;
        }
    } // namespace

    Var add(Var a, Var b)
    {
        Tape &t = tape_of(a, b);
        const Matrix &av = a.value();
        const Broadcast kind = broadcast_kind(av, b.value(), "add");
        Matrix out = av + expand(b.value(), kind, av.rows(), av.cols());
        return t.record(std::move(out), {a.id, b.id}, [ai = a.id, bi = b.id, kind](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, g);
            tp.accumulate(bi, reduce(g, kind));
        });
    }

    Var sub(Var a, Var b)
    {
        Tape &t = tape_of(a, b);
        const Matrix &av = a.value();
        const Broadcast kind = broadcast_kind(av, b.value(), "sub");
        Matrix out = av - expand(b.value(), kind, av.rows(), av.cols());
        return t.record(std::move(out), {a.id, b.id}, [ai = a.id, bi = b.id, kind](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, g);
            tp.accumulate(bi, -reduce(g, kind));
        });
    }

    Var mul(Var a, Var b)
    {
        Tape &t = tape_of(a, b);
        const Matrix &av = a.value();
        const Broadcast kind = broadcast_kind(av, b.value(), "mul");
        Matrix bx = expand(b.value(), kind, av.rows(), av.cols());
        Matrix out = av.cwiseProduct(bx);
        return t.record(std::move(out), {a.id, b.id},
                        [ai = a.id, bi = b.id, kind, bx = std::move(bx)](Tape &tp, const Matrix &g) {
                            tp.accumulate(ai, g.cwiseProduct(bx));
                            if (tp.requires_grad(bi))
                                tp.accumulate(bi, reduce(g.cwiseProduct(tp.value(ai)), kind));
                        });
    }

    Var matmul(Var a, Var b)
    {
        Tape &t = tape_of(a, b);
        if (a.cols() != b.rows())
            throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                                        std::to_string(b.rows()) + ")");
        Matrix out = a.value() * b.value();
        return t.record(std::move(out), {a.id, b.id}, [ai = a.id, bi = b.id](Tape &tp, const Matrix &g) {
            if (tp.requires_grad(ai))
                tp.accumulate(ai, g * tp.value(bi).transpose());
            if (tp.requires_grad(bi))
                tp.accumulate(bi, tp.value(ai).transpose() * g);
        });
    }

    Var scale(Var a, double s)
    {
        return a.tape->record(a.value() * s, {a.id},
                              [ai = a.id, s](Tape &tp, const Matrix &g) { tp.accumulate(ai, g * s); });
    }

    Var add_scalar(Var a, double s)
    {
        Matrix out = a.value().array() + s;
        return a.tape->record(std::move(out), {a.id}, [ai = a.id](Tape &tp, const Matrix &g) { tp.accumulate(ai, g); });
    }

    Var neg(Var a) { return scale(a, -1.0); }

    Var tanh(Var a)
    {
        Matrix y = a.value().array().tanh();
        Matrix dy = 1.0 - y.array().square();
        return a.tape->record(std::move(y), {a.id}, [ai = a.id, dy = std::move(dy)](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, g.cwiseProduct(dy));
        });
    }

    Var sigmoid(Var a)
    {
        Matrix y = a.value().unaryExpr([](double x) {
            // Split by sign; exp never overflows.
            if (x >= 0.0)
                return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        });
        Matrix dy = y.array() * (1.0 - y.array());
        return a.tape->record(std::move(y), {a.id}, [ai = a.id, dy = std::move(dy)](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, g.cwiseProduct(dy));
        });
    }

    Var exp(Var a)
    {
        Matrix y = a.value().array().exp();
        Matrix dy = y;
        return a.tape->record(std::move(y), {a.id}, [ai = a.id, dy = std::move(dy)](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, g.cwiseProduct(dy));
        });
    }

    Var square(Var a)
    {
        Matrix y = a.value().array().square();
        return a.tape->record(std::move(y), {a.id}, [ai = a.id](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, 2.0 * g.cwiseProduct(tp.value(ai)));
        });
    }

    Var minimum(Var a, Var b)
    {
        Tape &t = tape_of(a, b);
        if (a.rows() != b.rows() || a.cols() != b.cols())
            throw std::invalid_argument("minimum: shape mismatch");
        // Ties send the gradient to a.
        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> pick_a = a.value().array() <= b.value().array();
        Matrix out = pick_a.select(a.value(), b.value());
        return t.record(std::move(out), {a.id, b.id},
                        [ai = a.id, bi = b.id, pick_a = std::move(pick_a)](Tape &tp, const Matrix &g) {
                            const Matrix zero = Matrix::Zero(g.rows(), g.cols());
                            tp.accumulate(ai, pick_a.select(g, zero));
                            tp.accumulate(bi, pick_a.select(zero, g));
                        });
    }

    Var clamp(Var a, double lo, double hi)
    {
        const Matrix &av = a.value();
        Matrix out = av.cwiseMax(lo).cwiseMin(hi);
        Matrix pass = ((av.array() >= lo) && (av.array() <= hi)).cast<double>();
        return a.tape->record(std::move(out), {a.id}, [ai = a.id, pass = std::move(pass)](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, g.cwiseProduct(pass));
        });
    }

    Var sum(Var a)
    {
        Matrix out = Matrix::Constant(1, 1, a.value().sum());
        return a.tape->record(std::move(out), {a.id}, [ai = a.id, r = a.rows(), c = a.cols()](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, Matrix::Constant(r, c, g(0, 0)));
        });
    }

    Var mean(Var a)
    {
        const double n = static_cast<double>(a.value().size());
        if (n == 0.0)
            throw std::invalid_argument("mean: empty tensor");
        return scale(sum(a), 1.0 / n);
    }

    Var row_sum(Var a)
    {
        Matrix out = a.value().rowwise().sum();
        return a.tape->record(std::move(out), {a.id}, [ai = a.id, c = a.cols()](Tape &tp, const Matrix &g) {
            tp.accumulate(ai, g.replicate(1, c));
        });
    }

    Var concat_cols(const std::vector<Var> &parts)
    {
        if (parts.empty())
            throw std::invalid_argument("concat_cols: nothing to concatenate");
        Tape &t = *parts.front().tape;
        const Eigen::Index rows = parts.front().rows();
        Eigen::Index cols = 0;
        std::vector<int> ids;
        std::vector<Eigen::Index> widths;
        for (const Var &p : parts)
        {
            if (p.tape != &t || p.rows() != rows)
                throw std::invalid_argument("concat_cols: operands disagree in tape or row count");
            cols += p.cols();
            ids.push_back(p.id);
            widths.push_back(p.cols());
        }
        Matrix out(rows, cols);
        Eigen::Index off = 0;
        for (const Var &p : parts)
        {
            out.middleCols(off, p.cols()) = p.value();
            off += p.cols();
        }
        return t.record(std::move(out), ids, [ids, widths](Tape &tp, const Matrix &g) {
            Eigen::Index o = 0;
            for (std::size_t i = 0; i < ids.size(); ++i)
            {
                tp.accumulate(ids[i], g.middleCols(o, widths[i]));
                o += widths[i];
            }
        });
    }

    Var concat_rows(const std::vector<Var> &parts)
    {
        if (parts.empty())
            throw std::invalid_argument("concat_rows: nothing to concatenate");
        Tape &t = *parts.front().tape;
        const Eigen::Index cols = parts.front().cols();
        Eigen::Index rows = 0;
        std::vector<int> ids;
        std::vector<Eigen::Index> heights;
        for (const Var &p : parts)
        {
            if (p.tape != &t || p.cols() != cols)
                throw std::invalid_argument("concat_rows: operands disagree in tape or column count");
            rows += p.rows();
            ids.push_back(p.id);
            heights.push_back(p.rows());
        }
        Matrix out(rows, cols);
        Eigen::Index off = 0;
        for (const Var &p : parts)
        {
            out.middleRows(off, p.rows()) = p.value();
            off += p.rows();
        }
        return t.record(std::move(out), ids, [ids, heights](Tape &tp, const Matrix &g) {
            Eigen::Index o = 0;
            for (std::size_t i = 0; i < ids.size(); ++i)
            {
                tp.accumulate(ids[i], g.middleRows(o, heights[i]));
                o += heights[i];
            }
        });
    }

    Var slice_cols(Var a, Eigen::Index start, Eigen::Index count)
    {
        if (start < 0 || count < 0 || start + count > a.cols())
            throw std::invalid_argument("slice_cols: range out of bounds");
        Matrix out = a.value().middleCols(start, count);
        return a.tape->record(std::move(out), {a.id},
                              [ai = a.id, start, count, r = a.rows(), c = a.cols()](Tape &tp, const Matrix &g) {
                                  Matrix full = Matrix::Zero(r, c);
                                  full.middleCols(start, count) = g;
                                  tp.accumulate(ai, full);
                              });
    }

    Var gather_rows(Var a, const std::vector<Eigen::Index> &rows)
    {
        Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            if (rows[i] < 0 || rows[i] >= a.rows())
                throw std::invalid_argument("gather_rows: row index out of range");
            out.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
        }
        return a.tape->record(std::move(out), {a.id}, [ai = a.id, rows, r = a.rows(), c = a.cols()](Tape &tp, const Matrix &g) {
            Matrix full = Matrix::Zero(r, c);
            for (std::size_t i = 0; i < rows.size(); ++i)
                full.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
            tp.accumulate(ai, full);
        });
    }

    Var detach(Var a)
    {
        return a.tape->constant(a.value());
    }

} // namespace simcf::nn
