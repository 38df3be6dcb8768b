/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/refinement.hpp
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

#ifndef FACETEX_REFINEMENT_HPP_
#define FACETEX_REFINEMENT_HPP_

#include "facetex/common.hpp"
#include "facetex/morphable_model.hpp"
#include "facetex/render.hpp"

#include <cstdint>
#include <numbers>
#include <vector>

namespace facetex {
namespace refine {

/// Head rotation in radians: yaw about y, pitch about x, roll about z.
struct PoseSample
{
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
};

inline constexpr double max_yaw = std::numbers::pi / 2.0;
inline constexpr double max_pitch = std::numbers::pi / 4.0;
inline constexpr double max_roll = std::numbers::pi / 2.0;

/// Each angle uniform in its symmetric range.
PoseSample sample_pose(std::uint64_t seed);
PoseSample sample_pose(Rng& rng);

/// Axis-angle of Rz(roll) Rx(pitch) Ry(yaw).
Vector3d pose_axis_angle(const PoseSample& pose);

struct AugmentedView
{
    model::FaceParams params; // the input with its global rotation replaced
    Image image;
    BinaryMask coverage;
    MatrixXd landmarks; // 68 x 2 projections of the re-posed mesh
};

/// Re-renders the state with its global rotation replaced by \p pose.
AugmentedView augment_render(const model::BlendshapeBasis& basis, const model::FaceParams& params,
                             const UvTexture& texture, const PoseSample& pose,
                             const render::RenderOptions& options);

struct RefineResult
{
    model::FaceParams params; // lowest-loss iterate
    double initial_loss = 0.0;
    double final_loss = 0.0;  // loss of params
    std::vector<double> curve; // loss of every evaluated iterate
};

/**
 * Adam on pose and camera against 68 target landmarks, minimising
 * L_lmk + w_reg L_reg with shape and expression frozen. Returns the best iterate seen,
 * so final_loss <= initial_loss. Throws optim::OptimizationFailure if the loss becomes
 * non-finite.
 */
RefineResult refine_pose_camera(const MatrixXd& target_landmarks, const model::BlendshapeBasis& basis,
                                const model::FaceParams& params, int steps, double lr, double w_reg = 1.0);

} // namespace refine
} // namespace facetex

#endif /* FACETEX_REFINEMENT_HPP_ */
