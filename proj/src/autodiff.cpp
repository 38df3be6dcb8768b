/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/autodiff.cpp
 *
 * Copyright 2026 The facetex Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "facetex/autodiff.hpp"

#include "facetex/rotation.hpp"

namespace facetex {
namespace ad {

const MatrixXd& Var::value() const
{
    if (!valid()) {
        throw std::invalid_argument("Var: not attached to a tape");
    }
    return tape_->nodes_.at(static_cast<std::size_t>(id_)).value;
}

double Var::scalar() const
{
    const auto& v = value();
    if (v.rows() != 1 || v.cols() != 1) {
        throw std::invalid_argument("Var::scalar: node is not 1 x 1");
    }
    return v(0, 0);
}

const MatrixXd& GradStore::operator[](const Var& leaf) const
{
    const auto it = grads_.find(leaf.id());
    if (it == grads_.end()) {
        throw std::invalid_argument("GradStore: no gradient recorded for this node");
    }
    return it->second;
}

Var Tape::leaf(MatrixXd value, std::string name)
{
    Node n;
    n.value = std::move(value);
    n.is_leaf = true;
    n.requires_grad = true;
    n.name = std::move(name);
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(MatrixXd value)
{
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::scalar_constant(double value)
{
    return constant(MatrixXd::Constant(1, 1, value));
}

void Tape::check_owned(const Var& v) const
{
    if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
        throw std::invalid_argument("Tape: variable is not recorded on this tape");
    }
}

Var Tape::record(MatrixXd value, std::vector<Var> inputs, BackwardFn backward)
{
    Node n;
    n.value = std::move(value);
    for (const auto& in : inputs) {
        check_owned(in);
        n.inputs.push_back(in.id_);
        n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(in.id_)].requires_grad;
    }
    if (n.requires_grad) {
        n.backward = std::move(backward);
    }
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

const std::string& Tape::name(const Var& v) const
{
    check_owned(v);
    return nodes_[static_cast<std::size_t>(v.id_)].name;
}

bool Tape::requires_grad(const Var& v) const
{
    check_owned(v);
    return nodes_[static_cast<std::size_t>(v.id_)].requires_grad;
}

GradStore Tape::backward(const Var& loss) const
{
    check_owned(loss);
    const auto root = static_cast<std::size_t>(loss.id_);
    if (nodes_[root].value.rows() != 1 || nodes_[root].value.cols() != 1) {
        throw std::invalid_argument("Tape::backward: loss must be a 1 x 1 node");
    }
    std::vector<MatrixXd> grads(root + 1);
    grads[root] = MatrixXd::Ones(1, 1);
    std::vector<MatrixXd*> slots;
    for (std::size_t id = root + 1; id-- > 0;) {
        const Node& node = nodes_[id];
        if (!node.requires_grad || !node.backward || grads[id].size() == 0) {
            continue;
        }
        slots.assign(node.inputs.size(), nullptr);
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
            const auto in = static_cast<std::size_t>(node.inputs[k]);
            if (!nodes_[in].requires_grad) {
                continue;
            }
            if (grads[in].size() == 0) {
                grads[in] = MatrixXd::Zero(nodes_[in].value.rows(), nodes_[in].value.cols());
            }
            slots[k] = &grads[in];
        }
        node.backward(grads[id], slots);
    }
    GradStore store;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const Node& node = nodes_[id];
        if (!node.is_leaf || !node.requires_grad) {
            continue;
        }
        if (id <= root && grads[id].size() != 0) {
            store.grads_.emplace(static_cast<int>(id), std::move(grads[id]));
        } else {
            store.grads_.emplace(static_cast<int>(id), MatrixXd::Zero(node.value.rows(), node.value.cols()));
        }
    }
    return store;
}

// -- operations -----------------------------------------------------------------

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
}

Tape& tape_of(const Var& a)
{
    if (!a.valid()) {
        throw std::invalid_argument("operation on a detached variable");
    }
    return *a.tape();
}

} // namespace

Var add(const Var& a, const Var& b)
{
    require_same_shape(a, b, "add");
    return tape_of(a).record(a.value() + b.value(), {a, b}, [](const MatrixXd& g, std::span<MatrixXd* const> in) {
        if (in[0]) *in[0] += g;
        if (in[1]) *in[1] += g;
    });
}

Var sub(const Var& a, const Var& b)
{
    require_same_shape(a, b, "sub");
    return tape_of(a).record(a.value() - b.value(), {a, b}, [](const MatrixXd& g, std::span<MatrixXd* const> in) {
        if (in[0]) *in[0] += g;
        if (in[1]) *in[1] -= g;
    });
}

Var mul(const Var& a, const Var& b)
{
    require_same_shape(a, b, "mul");
    const MatrixXd* av = &a.value();
    const MatrixXd* bv = &b.value();
    return tape_of(a).record(av->cwiseProduct(*bv), {a, b},
                             [av, bv](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                 if (in[0]) *in[0] += g.cwiseProduct(*bv);
                                 if (in[1]) *in[1] += g.cwiseProduct(*av);
                             });
}

Var scale(const Var& a, double k)
{
    return tape_of(a).record(k * a.value(), {a}, [k](const MatrixXd& g, std::span<MatrixXd* const> in) {
        if (in[0]) *in[0] += k * g;
    });
}

Var matmul(const Var& a, const Var& b)
{
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimensions differ");
    }
    const MatrixXd* av = &a.value();
    const MatrixXd* bv = &b.value();
    return tape_of(a).record((*av) * (*bv), {a, b}, [av, bv](const MatrixXd& g, std::span<MatrixXd* const> in) {
        if (in[0]) in[0]->noalias() += g * bv->transpose();
        if (in[1]) in[1]->noalias() += av->transpose() * g;
    });
}

Var transpose(const Var& a)
{
    return tape_of(a).record(a.value().transpose(), {a}, [](const MatrixXd& g, std::span<MatrixXd* const> in) {
        if (in[0]) *in[0] += g.transpose();
    });
}

Var sum(const Var& a)
{
    return tape_of(a).record(MatrixXd::Constant(1, 1, a.value().sum()), {a},
                             [](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                 if (in[0]) in[0]->array() += g(0, 0);
                             });
}

Var weighted_sum(std::span<const Var> parts, std::span<const double> weights)
{
    if (parts.empty() || parts.size() != weights.size()) {
        throw std::invalid_argument("weighted_sum: need one weight per part");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        total += weights[i] * parts[i].scalar();
    }
    std::vector<double> w(weights.begin(), weights.end());
    return tape_of(parts[0]).record(MatrixXd::Constant(1, 1, total), {parts.begin(), parts.end()},
                                    [w](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                        for (std::size_t i = 0; i < in.size(); ++i) {
                                            if (in[i]) (*in[i])(0, 0) += w[i] * g(0, 0);
                                        }
                                    });
}

Var square_norm(const Var& a)
{
    const MatrixXd* av = &a.value();
    return tape_of(a).record(MatrixXd::Constant(1, 1, av->squaredNorm()), {a},
                             [av](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                 if (in[0]) *in[0] += 2.0 * g(0, 0) * (*av);
                             });
}

Var block(const Var& a, Eigen::Index row, Eigen::Index col, Eigen::Index rows, Eigen::Index cols)
{
    if (row < 0 || col < 0 || row + rows > a.rows() || col + cols > a.cols()) {
        throw std::invalid_argument("block: out of range");
    }
    return tape_of(a).record(a.value().block(row, col, rows, cols), {a},
                             [row, col, rows, cols](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                 if (in[0]) in[0]->block(row, col, rows, cols) += g;
                             });
}

Var gather_rows(const Var& a, const std::vector<int>& rows)
{
    MatrixXd out(static_cast<Eigen::Index>(rows.size()), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= a.rows()) {
            throw std::invalid_argument("gather_rows: index out of range");
        }
        out.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
    }
    return tape_of(a).record(std::move(out), {a}, [rows](const MatrixXd& g, std::span<MatrixXd* const> in) {
        if (!in[0]) return;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            in[0]->row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
        }
    });
}

Var softmax_rows(const Var& a)
{
    const MatrixXd& x = a.value();
    MatrixXd y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double m = x.row(r).maxCoeff();
        y.row(r) = (x.row(r).array() - m).exp().matrix();
        y.row(r) /= y.row(r).sum();
    }
    MatrixXd y_saved = y;
    return tape_of(a).record(std::move(y), {a}, [y = std::move(y_saved)](const MatrixXd& g, std::span<MatrixXd* const> in) {
        if (!in[0]) return;
        const Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
        *in[0] += (y.array() * (g.colwise() - dots).array()).matrix();
    });
}

Var rodrigues(const Var& axis_angle)
{
    if (axis_angle.rows() != 3 || axis_angle.cols() != 1) {
        throw std::invalid_argument("rodrigues: expects a 3 x 1 axis-angle vector");
    }
    const Vector3d w = axis_angle.value();
    const auto jac = facetex::rodrigues_jacobian(w);
    return tape_of(axis_angle).record(facetex::rodrigues(w), {axis_angle},
                                      [jac](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                          if (!in[0]) return;
                                          for (int k = 0; k < 3; ++k) {
                                              (*in[0])(k, 0) += g.cwiseProduct(jac[k]).sum();
                                          }
                                      });
}

} // namespace ad
} // namespace facetex
