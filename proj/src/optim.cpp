/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/optim.cpp
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
#include "facetex/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace facetex {
namespace optim {

void adam_step(std::span<MatrixXd* const> leaves, std::span<const MatrixXd> grads, AdamState& state, double lr)
{
    if (leaves.size() != grads.size()) {
        throw std::invalid_argument("adam_step: one gradient per leaf required");
    }
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i]->rows() != grads[i].rows() || leaves[i]->cols() != grads[i].cols()) {
            throw std::invalid_argument("adam_step: gradient shape does not match its leaf");
        }
    }
    if (state.m.empty()) {
        for (const auto* leaf : leaves) {
            state.m.push_back(MatrixXd::Zero(leaf->rows(), leaf->cols()));
            state.v.push_back(MatrixXd::Zero(leaf->rows(), leaf->cols()));
        }
    }
    if (state.m.size() != leaves.size()) {
        throw std::invalid_argument("adam_step: leaf count changed between steps");
    }
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (state.m[i].rows() != leaves[i]->rows() || state.m[i].cols() != leaves[i]->cols()) {
            throw std::invalid_argument("adam_step: leaf shape changed between steps");
        }
    }

    const auto& c = state.config;
    const double rate = lr > 0.0 ? lr : c.lr;
    ++state.step;
    const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        auto m = state.m[i].array();
        auto v = state.v[i].array();
        const auto g = grads[i].array();
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.square();
        leaves[i]->array() -= rate * (m / bias1) / ((v / bias2).sqrt() + c.eps);
    }
}

double lr_schedule(long step, double base_lr, long decay_every, double factor)
{
    if (decay_every <= 0 || !(factor > 0.0 && factor <= 1.0)) {
        throw std::invalid_argument("lr_schedule: need decay_every > 0 and factor in (0, 1]");
    }
    return base_lr * std::pow(factor, static_cast<double>(step / decay_every));
}

ParamTensors ParamTensors::from(const model::FaceParams& p)
{
    ParamTensors t;
    t.shape = p.shape;
    t.expression = p.expression;
    t.pose = p.pose;
    t.cam_scale = MatrixXd::Constant(1, 1, p.cam_scale);
    t.cam_rot = p.cam_rot;
    t.cam_trans = p.cam_trans;
    t.light = p.light;
    return t;
}

model::FaceParams ParamTensors::to_params() const
{
    model::FaceParams p;
    p.shape = shape;
    p.expression = expression;
    p.pose = pose;
    p.cam_scale = cam_scale(0, 0);
    p.cam_rot = cam_rot;
    p.cam_trans = cam_trans;
    p.light = light;
    return p;
}

void ParamTensors::project()
{
    cam_scale(0, 0) = std::max(cam_scale(0, 0), min_cam_scale);
    for (Eigen::Index first : {0, 3}) {
        auto w = pose.block(first, 0, 3, 1);
        const double angle = w.norm();
        if (angle >= std::numbers::pi && std::isfinite(angle)) {
            w *= 1.0 - 2.0 * std::numbers::pi / angle;
        }
    }
}

} // namespace optim
} // namespace facetex
