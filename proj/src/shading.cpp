/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/shading.cpp
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
#include "facetex/shading.hpp"

#include "Eigen/Geometry"

#include <algorithm>
#include <cmath>

namespace facetex {
namespace render {

ShBasis sh_basis(const Vector3d& n)
{
    const double x = n.x(), y = n.y(), z = n.z();
    ShBasis h;
    h << sh::c0, sh::c1 * y, sh::c1 * z, sh::c1 * x, sh::c2 * x * y, sh::c2 * y * z, sh::c3 * (3.0 * z * z - 1.0),
        sh::c2 * x * z, sh::c4 * (x * x - y * y);
    return h;
}

Eigen::Matrix<double, 9, 3> sh_basis_jacobian(const Vector3d& n)
{
    const double x = n.x(), y = n.y(), z = n.z();
    Eigen::Matrix<double, 9, 3> j;
    j << 0.0, 0.0, 0.0,                        //
        0.0, sh::c1, 0.0,                      //
        0.0, 0.0, sh::c1,                      //
        sh::c1, 0.0, 0.0,                      //
        sh::c2 * y, sh::c2 * x, 0.0,           //
        0.0, sh::c2 * z, sh::c2 * y,           //
        0.0, 0.0, 6.0 * sh::c3 * z,            //
        sh::c2 * z, 0.0, sh::c2 * x,           //
        2.0 * sh::c4 * x, -2.0 * sh::c4 * y, 0.0;
    return j;
}

SHCoefficients neutral_light()
{
    SHCoefficients l = SHCoefficients::Zero();
    l.row(0).setConstant(1.0 / sh::c0);
    return l;
}

Vector3d sh_shade(const Vector3d& albedo, const Vector3d& normal, const SHCoefficients& light)
{
    const Vector3d irradiance = light.transpose() * sh_basis(normal);
    return albedo.cwiseProduct(irradiance).cwiseMax(0.0);
}

BilinearTaps bilinear_taps(int resolution, const Vector2d& uv)
{
    const double u = std::clamp(uv.x(), 0.0, 1.0);
    const double v = std::clamp(uv.y(), 0.0, 1.0);
    const double x = u * resolution - 0.5;
    const double y = v * resolution - 0.5;
    const double x0 = std::floor(x);
    const double y0 = std::floor(y);
    const double fx = x - x0;
    const double fy = y - y0;
    auto clamp_index = [resolution](double i) { return std::clamp(static_cast<int>(i), 0, resolution - 1); };
    const int j0 = clamp_index(x0), j1 = clamp_index(x0 + 1.0);
    const int i0 = clamp_index(y0), i1 = clamp_index(y0 + 1.0);
    BilinearTaps taps;
    taps.texel = {i0 * resolution + j0, i0 * resolution + j1, i1 * resolution + j0, i1 * resolution + j1};
    taps.weight = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
    return taps;
}

Vector3d uv_sample(const UvTexture& texture, const Vector2d& uv)
{
    const auto taps = bilinear_taps(texture.resolution, uv);
    Vector3d out = Vector3d::Zero();
    for (int k = 0; k < 4; ++k) {
        out += taps.weight[k] * texture.rgb.row(taps.texel[k]).transpose();
    }
    return out;
}

MatrixXd vertex_normals(const MatrixXd& vertices, const std::vector<std::array<int, 3>>& faces)
{
    MatrixXd acc = MatrixXd::Zero(vertices.rows(), 3);
    for (const auto& f : faces) {
        const Vector3d a = vertices.row(f[0]);
        const Vector3d b = vertices.row(f[1]);
        const Vector3d c = vertices.row(f[2]);
        const Eigen::RowVector3d n = (b - a).cross(c - a).transpose(); // |n| = 2 * area
        for (int i : f) {
            acc.row(i) += n;
        }
    }
    for (Eigen::Index i = 0; i < acc.rows(); ++i) {
        const double len = acc.row(i).norm();
        if (len > 0.0) {
            acc.row(i) /= len;
        } else {
            acc.row(i) << 0.0, 0.0, 1.0;
        }
    }
    return acc;
}

} // namespace render
} // namespace facetex
