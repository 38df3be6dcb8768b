/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/optim.hpp
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

#ifndef FACETEX_OPTIM_HPP_
#define FACETEX_OPTIM_HPP_

#include "facetex/common.hpp"
#include "facetex/morphable_model.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace facetex {
namespace optim {

struct AdamConfig
{
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moment estimates for a list of parameter tensors.
struct AdamState
{
    AdamConfig config;
    std::vector<MatrixXd> m;
    std::vector<MatrixXd> v;
    long step = 0;

    AdamState() = default;
    explicit AdamState(const AdamConfig& cfg) : config(cfg) {}
};

/**
 * One bias-corrected Adam update of every tensor in \p leaves, in place. Moments are
 * created on the first call; later calls must pass the same shapes. \p lr overrides the
 * configured rate when positive (used with lr_schedule()).
 */
void adam_step(std::span<MatrixXd* const> leaves, std::span<const MatrixXd> grads, AdamState& state,
               double lr = -1.0);

/// base_lr * factor^floor(step / decay_every).
double lr_schedule(long step, double base_lr, long decay_every, double factor);

/// Raised when a loss turns non-finite; carries the last finite parameters.
class OptimizationFailure : public std::runtime_error
{
public:
    OptimizationFailure(const std::string& what, model::FaceParams last_finite)
        : std::runtime_error(what), last_finite_(std::move(last_finite))
    {
    }
    const model::FaceParams& last_finite() const { return last_finite_; }

private:
    model::FaceParams last_finite_;
};

/// Smallest admissible camera scale after an update.
inline constexpr double min_cam_scale = 1e-6;

/**
 * Mirror of FaceParams as individually optimisable tensors. Which fields are trainable
 * is decided by the caller; unused fields still round-trip.
 */
struct ParamTensors
{
    MatrixXd shape, expression, pose, cam_scale, cam_rot, cam_trans, light;

    static ParamTensors from(const model::FaceParams& p);
    model::FaceParams to_params() const;
    /**
     * Re-imposes cam_scale >= min_cam_scale and rewrites a pose rotation whose angle
     * reached pi as the equivalent rotation with a smaller angle.
     */
    void project();
};

} // namespace optim
} // namespace facetex

#endif /* FACETEX_OPTIM_HPP_ */
