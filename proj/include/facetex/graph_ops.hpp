/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/graph_ops.hpp
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

#ifndef FACETEX_GRAPH_OPS_HPP_
#define FACETEX_GRAPH_OPS_HPP_

#include "facetex/autodiff.hpp"
#include "facetex/morphable_model.hpp"
#include "facetex/optim.hpp"
#include "facetex/render.hpp"

#include <vector>

/**
 * @file graph_ops.hpp
 * Tape operations for the face model and the renderer.
 *
 * Forward values are computed with the same arithmetic as the plain functions in
 * morphable_model.hpp and render.hpp, so a tape evaluation reproduces them bit for bit.
 * Operations that take a basis keep a pointer to it: the basis must outlive the tape.
 */

namespace facetex {
namespace ad {

/// Template plus basis offsets; s and e are column vectors.
Var reconstruct_mesh(const model::BlendshapeBasis& basis, const Var& shape, const Var& expression);

/// Rotates the listed rows (all if empty) about \p pivot. An exact identity leaves values untouched.
Var rotate_about(const Var& points, const Var& rotation, const Vector3d& pivot, const std::vector<int>& rows);

/// Jaw then global articulation, as model::apply_pose.
Var apply_pose(const model::BlendshapeBasis& basis, const Var& vertices, const Var& pose);

/// Weak-perspective image points N x 2; depth is not differentiated.
Var weak_perspective(const Var& vertices, const Var& cam_scale, const Var& cam_rot, const Var& cam_trans);

/// Bilinear texture lookups at fixed UVs: (R*R) x 3 texture -> K x 3 colours.
Var bilinear_sample(const Var& texture, int resolution, const MatrixXd& uv);

/// Per-row SH shading, clamped below at zero.
Var sh_shade(const Var& albedo, const Var& normals, const Var& light);

/// Scatters K shaded colours into a width*height image, clamping above at one.
Var compose_image(const Var& colors, const std::vector<int>& pixels, int width, int height,
                  const Vector3d& background);

/// Texture lookup, shading and compositing of a prepared view with frozen coverage.
Var render_view(const render::ViewGeometry& view, const Var& texture, int resolution, const Var& light,
                const Vector3d& background);

/// Which parameter groups become trainable leaves.
struct Trainable
{
    bool shape = false;
    bool expression = false;
    bool pose = false;
    bool camera = false;
    bool light = false;
};

/// FaceParams fields as tape nodes.
struct ParamVars
{
    Var shape, expression, pose, cam_scale, cam_rot, cam_trans, light;
};

/// Records every field of \p p, as a leaf when selected by \p which, otherwise as a constant.
ParamVars attach(Tape& tape, const optim::ParamTensors& p, const Trainable& which);

/// The 68 projected landmarks, 68 x 2.
Var landmarks_2d(const model::BlendshapeBasis& basis, const ParamVars& p);

} // namespace ad
} // namespace facetex

#endif /* FACETEX_GRAPH_OPS_HPP_ */
