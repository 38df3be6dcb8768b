/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/shading.hpp
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

#ifndef FACETEX_SHADING_HPP_
#define FACETEX_SHADING_HPP_

#include "facetex/common.hpp"

#include <array>
#include <vector>

namespace facetex {
namespace render {

/**
 * Real spherical harmonics of orders 0-2, evaluated at a unit normal n = (x, y, z):
 *
 *   H1 = sqrt(1/(4 pi))
 *   H2 = sqrt(3/(4 pi)) y      H3 = sqrt(3/(4 pi)) z      H4 = sqrt(3/(4 pi)) x
 *   H5 = sqrt(15/(4 pi)) xy    H6 = sqrt(15/(4 pi)) yz    H7 = sqrt(5/(16 pi)) (3z^2 - 1)
 *   H8 = sqrt(15/(4 pi)) xz    H9 = sqrt(15/(16 pi)) (x^2 - y^2)
 *
 * Normals are expressed in the camera frame (x right, y down, z away from the viewer).
 */
namespace sh {
inline const double c0 = 0.28209479177387814; // sqrt(1/(4 pi))
inline const double c1 = 0.4886025119029199;  // sqrt(3/(4 pi))
inline const double c2 = 1.0925484305920792;  // sqrt(15/(4 pi))
inline const double c3 = 0.31539156525252005; // sqrt(5/(16 pi))
inline const double c4 = 0.5462742152960396;  // sqrt(15/(16 pi))
} // namespace sh

using ShBasis = Eigen::Matrix<double, 9, 1>;

ShBasis sh_basis(const Vector3d& n);

/// d H_b / d n, one row per basis function.
Eigen::Matrix<double, 9, 3> sh_basis_jacobian(const Vector3d& n);

/// DC-only white light with unit irradiance: L(0, c) = 1 / H1, all other bands zero.
SHCoefficients neutral_light();

/**
 * out_c = albedo_c * sum_b L(b, c) H_b(n), clamped below at zero. Clamping to [0, 1]
 * is left to image assembly.
 */
Vector3d sh_shade(const Vector3d& albedo, const Vector3d& normal, const SHCoefficients& light);

/**
 * Bilinear texture lookup with edge-clamp addressing. Texel centers sit at
 * ((j + 0.5) / R, (i + 0.5) / R); \p uv is clamped into [0, 1]^2 first.
 */
Vector3d uv_sample(const UvTexture& texture, const Vector2d& uv);

/// The four texel taps and weights used by uv_sample.
struct BilinearTaps
{
    std::array<int, 4> texel;
    std::array<double, 4> weight;
};
BilinearTaps bilinear_taps(int resolution, const Vector2d& uv);

/**
 * Area-weighted vertex normals: the unnormalised face cross products are summed per
 * vertex and normalised. Vertices with a zero sum get (0, 0, 1).
 */
MatrixXd vertex_normals(const MatrixXd& vertices, const std::vector<std::array<int, 3>>& faces);

} // namespace render
} // namespace facetex

#endif /* FACETEX_SHADING_HPP_ */
