/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/refinement.cpp
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
#include "facetex/refinement.hpp"

#include "facetex/graph_ops.hpp"
#include "facetex/losses.hpp"
#include "facetex/optim.hpp"
#include "facetex/rotation.hpp"

#include <cmath>
#include <limits>

namespace facetex {
namespace refine {

PoseSample sample_pose(Rng& rng)
{
    PoseSample p;
    p.yaw = rng.uniform(-max_yaw, max_yaw);
    p.pitch = rng.uniform(-max_pitch, max_pitch);
    p.roll = rng.uniform(-max_roll, max_roll);
    return p;
}

PoseSample sample_pose(std::uint64_t seed)
{
    Rng rng(seed);
    return sample_pose(rng);
}

Vector3d pose_axis_angle(const PoseSample& pose)
{
    return rotation_log(euler_yaw_pitch_roll(pose.yaw, pose.pitch, pose.roll));
}

AugmentedView augment_render(const model::BlendshapeBasis& basis, const model::FaceParams& params,
                             const UvTexture& texture, const PoseSample& pose,
                             const render::RenderOptions& options)
{
    AugmentedView view;
    view.params = params;
    view.params.pose.head<3>() = pose_axis_angle(pose);
    auto out = render::render(basis, view.params, texture, options);
    view.image = std::move(out.image);
    view.coverage = std::move(out.proj_mask);
    view.landmarks = model::landmark_projections(basis, view.params);
    return view;
}

RefineResult refine_pose_camera(const MatrixXd& target_landmarks, const model::BlendshapeBasis& basis,
                                const model::FaceParams& params, int steps, double lr, double w_reg)
{
    if (steps < 1) {
        throw std::invalid_argument("refine_pose_camera: steps must be >= 1");
    }
    if (!(lr > 0.0)) {
        throw std::invalid_argument("refine_pose_camera: learning rate must be positive");
    }
    params.validate(basis);
    auto t = optim::ParamTensors::from(params);
    optim::AdamState adam(optim::AdamConfig{lr});
    const double reg = losses::reg_loss(params.shape, params.expression);

    RefineResult result;
    result.params = params;
    double best = std::numeric_limits<double>::infinity();
    for (int step = 0; step <= steps; ++step) {
        ad::Tape tape;
        const auto vars = ad::attach(tape, t, {.pose = true, .camera = true});
        const ad::Var target = tape.constant(target_landmarks);
        const ad::Var lmk = ad::landmark_loss(ad::landmarks_2d(basis, vars), target);
        const double loss = lmk.scalar() + w_reg * reg;
        if (!std::isfinite(loss)) {
            throw optim::OptimizationFailure("refine_pose_camera: non-finite loss", result.params);
        }
        result.curve.push_back(loss);
        if (step == 0) {
            result.initial_loss = loss;
        }
        if (loss < best || step == 0) {
            best = loss;
            result.params = t.to_params();
        }
        if (step == steps) {
            break;
        }
        const auto grads = tape.backward(lmk);
        MatrixXd* leaves[] = {&t.pose, &t.cam_scale, &t.cam_rot, &t.cam_trans};
        const MatrixXd g[] = {grads[vars.pose], grads[vars.cam_scale], grads[vars.cam_rot], grads[vars.cam_trans]};
        optim::adam_step(leaves, g, adam);
        t.project();
    }
    result.final_loss = best;
    return result;
}

} // namespace refine
} // namespace facetex
