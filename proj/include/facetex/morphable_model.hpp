/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/morphable_model.hpp
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

#ifndef FACETEX_MORPHABLE_MODEL_HPP_
#define FACETEX_MORPHABLE_MODEL_HPP_

#include "facetex/common.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace facetex {
namespace model {

inline constexpr int num_landmarks = 68;

using Face = std::array<int, 3>;

/**
 * A linear blendshape head model: template, shape and expression offsets, mesh
 * topology, a per-vertex UV chart, the 68 landmark vertices and the jaw region.
 *
 * The bases are stored as (3 * N_v) x n matrices where row 3 * v + k holds coordinate k
 * of vertex v. That is the row-major layout of an N_v x 3 x n tensor, which is also the
 * on-disk layout.
 */
struct BlendshapeBasis
{
    MatrixXd template_vertices; // N_v x 3
    MatrixXd shape_basis;       // 3 N_v x n_s
    MatrixXd expr_basis;        // 3 N_v x n_e
    std::vector<Face> faces;
    MatrixXd uv_coords; // N_v x 2, in [0, 1]
    std::vector<int> landmark_indices;
    std::vector<int> jaw_region;
    Vector3d jaw_pivot = Vector3d::Zero();

    int num_vertices() const { return static_cast<int>(template_vertices.rows()); }
    int num_shape() const { return static_cast<int>(shape_basis.cols()); }
    int num_expr() const { return static_cast<int>(expr_basis.cols()); }

    Vector3d template_centroid() const;

    /// Throws std::invalid_argument if any structural invariant is violated.
    void validate() const;
};

/**
 * Everything that places and lights a face: blendshape coefficients, global and jaw
 * rotations, the weak-perspective camera and order-2 SH lighting (one column per channel).
 */
struct FaceParams
{
    VectorXd shape;
    VectorXd expression;
    Vector6d pose = Vector6d::Zero(); // global axis-angle (0..2), jaw axis-angle (3..5)
    double cam_scale = 1.0;
    Vector3d cam_rot = Vector3d::Zero();
    Vector3d cam_trans = Vector3d::Zero();
    SHCoefficients light = SHCoefficients::Zero();

    Vector3d global_rotation() const { return pose.head<3>(); }
    Vector3d jaw_rotation() const { return pose.tail<3>(); }

    /// Zero coefficients and pose, unit camera, DC-only white light.
    static FaceParams neutral(const BlendshapeBasis& basis);

    void validate(const BlendshapeBasis& basis) const;
};

/// Template plus weighted shape and expression offsets, N_v x 3.
MatrixXd reconstruct_mesh(const BlendshapeBasis& basis, const VectorXd& shape, const VectorXd& expression);

/**
 * Articulates a mesh: the jaw region is rotated rigidly about the jaw pivot, then every
 * vertex is rotated about the template centroid by the global rotation.
 */
MatrixXd apply_pose(const MatrixXd& vertices, const Vector6d& pose, const BlendshapeBasis& basis);

/// Rotates the listed rows (all rows if \p rows is empty) of \p points about \p pivot.
MatrixXd rotate_about(const MatrixXd& points, const Matrix3d& rotation, const Vector3d& pivot,
                      const std::vector<int>& rows);

struct Projection
{
    MatrixXd points; // N x 2, image pixels
    VectorXd depth;  // camera-space z, smaller is closer
};

/// Weak perspective: q = scale * (R(rot) v + trans)_xy, depth = (R(rot) v + trans)_z.
Projection project(const MatrixXd& vertices, double cam_scale, const Vector3d& cam_rot, const Vector3d& cam_trans);

/// Rows of \p vertices at the basis landmark indices, in order.
MatrixXd select_landmarks(const MatrixXd& vertices, const BlendshapeBasis& basis);

MatrixXd select_rows(const MatrixXd& m, const std::vector<int>& rows);

/// The full chain: mesh, pose, projection.
struct PosedGeometry
{
    MatrixXd vertices; // posed, model frame
    Projection projection;
};

PosedGeometry pose_and_project(const BlendshapeBasis& basis, const FaceParams& params);

/// 2D landmark positions of a parameter set.
MatrixXd landmark_projections(const BlendshapeBasis& basis, const FaceParams& params);

/**
 * Basis assets: a directory of raw little-endian float64 row-major arrays, faces as
 * uint32 triples, and JSON for shapes, landmarks and the jaw.
 */
void save_basis(const BlendshapeBasis& basis, const std::filesystem::path& dir);
BlendshapeBasis load_basis(const std::filesystem::path& dir);

} // namespace model
} // namespace facetex

#endif /* FACETEX_MORPHABLE_MODEL_HPP_ */
