/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/autodiff.hpp
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
#pragma once

#ifndef FACETEX_AUTODIFF_HPP_
#define FACETEX_AUTODIFF_HPP_

#include "facetex/common.hpp"

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace facetex {
namespace ad {

class Tape;

/// Handle to a matrix-valued node on a Tape.
class Var
{
public:
    Var() = default;

    const MatrixXd& value() const;
    double scalar() const; ///< value of a 1 x 1 node
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    int id() const { return id_; }
    Tape* tape() const { return tape_; }
    bool valid() const { return tape_ != nullptr && id_ >= 0; }

private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

/**
 * Backward rule of a recorded operation. Receives the gradient of the loss w.r.t. the
 * node's value and accumulates into the gradients of its inputs. An input's slot is
 * null when that input does not need a gradient.
 */
using BackwardFn = std::function<void(const MatrixXd& upstream, std::span<MatrixXd* const> input_grads)>;

/// d loss / d leaf for every trainable leaf of a tape.
class GradStore
{
public:
    bool contains(const Var& leaf) const { return grads_.count(leaf.id()) != 0; }
    /// Throws std::invalid_argument if \p leaf has no entry.
    const MatrixXd& operator[](const Var& leaf) const;
    std::size_t size() const { return grads_.size(); }

private:
    friend class Tape;
    std::unordered_map<int, MatrixXd> grads_;
};

/**
 * An append-only record of matrix operations. Nodes are stored in creation order, which
 * is a topological order since every operation's inputs already exist when it is
 * recorded.
 */
class Tape
{
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// A trainable input. Gets an entry in every GradStore produced by backward().
    Var leaf(MatrixXd value, std::string name = {});
    Var constant(MatrixXd value);
    Var scalar_constant(double value);

    /// Records an operation result. Inputs must belong to this tape.
    Var record(MatrixXd value, std::vector<Var> inputs, BackwardFn backward);

    /**
     * Reverse sweep from a 1 x 1 loss node. Throws std::invalid_argument if \p loss is not
     * a scalar recorded on this tape.
     */
    GradStore backward(const Var& loss) const;

    std::size_t size() const { return nodes_.size(); }
    const std::string& name(const Var& v) const;
    bool requires_grad(const Var& v) const;

private:
    friend class Var;

    struct Node
    {
        MatrixXd value;
        std::vector<int> inputs;
        BackwardFn backward;
        bool is_leaf = false;
        bool requires_grad = false;
        std::string name;
    };

    void check_owned(const Var& v) const;

    std::deque<Node> nodes_; // deque: references to values stay valid as the tape grows
};

// -- generic operations -------------------------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b); ///< elementwise
Var scale(const Var& a, double k);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var sum(const Var& a);                                  ///< 1 x 1
Var weighted_sum(std::span<const Var> parts, std::span<const double> weights); ///< of 1 x 1 nodes
Var square_norm(const Var& a);                          ///< sum of squares, 1 x 1
Var block(const Var& a, Eigen::Index row, Eigen::Index col, Eigen::Index rows, Eigen::Index cols);
Var gather_rows(const Var& a, const std::vector<int>& rows);
Var softmax_rows(const Var& a); ///< numerically stable, row-wise
Var rodrigues(const Var& axis_angle); ///< 3 x 1 -> 3 x 3

} // namespace ad
} // namespace facetex

#endif /* FACETEX_AUTODIFF_HPP_ */
