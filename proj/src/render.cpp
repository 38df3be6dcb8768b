/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/render.cpp
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
#include "facetex/render.hpp"

#include "facetex/rotation.hpp"
#include "facetex/shading.hpp"

namespace facetex {
namespace render {

ViewGeometry prepare_view(const model::BlendshapeBasis& basis, const model::FaceParams& params,
                          const RenderOptions& options)
{
    ViewGeometry view;
    view.geometry = model::pose_and_project(basis, params);
    const auto& proj = view.geometry.projection;
    view.fragments = rasterize(proj.points, proj.depth, basis.faces, options.width, options.height, options.bands);

    const MatrixXd normals = vertex_normals(view.geometry.vertices, basis.faces) * rodrigues(params.cam_rot).transpose();
    const auto& frags = view.fragments;
    auto& sh = view.shading;
    const auto covered = static_cast<Eigen::Index>(frags.covered_count());
    sh.pixels.reserve(static_cast<std::size_t>(covered));
    sh.uv.resize(covered, 2);
    sh.normals.resize(covered, 3);
    Eigen::Index k = 0;
    for (int i = 0; i < frags.num_pixels(); ++i) {
        if (!frags.coverage[i]) {
            continue;
        }
        const auto& face = basis.faces[static_cast<std::size_t>(frags.face_id[i])];
        const Vector3d& b = frags.bary[i];
        Vector2d uv = Vector2d::Zero();
        Vector3d n = Vector3d::Zero();
        for (int c = 0; c < 3; ++c) {
            uv += b[c] * basis.uv_coords.row(face[c]).transpose();
            n += b[c] * normals.row(face[c]).transpose();
        }
        const double len = n.norm();
        n = len > 0.0 ? Vector3d(n / len) : Vector3d(0.0, 0.0, 1.0);
        sh.pixels.push_back(i);
        sh.uv.row(k) = uv.transpose();
        sh.normals.row(k) = n.transpose();
        ++k;
    }
    return view;
}

Image shade_view(const ViewGeometry& view, const UvTexture& texture, const SHCoefficients& light,
                 const Vector3d& background)
{
    const auto& frags = view.fragments;
    Image image(frags.width, frags.height, background);
    const auto& sh = view.shading;
    for (std::size_t k = 0; k < sh.pixels.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        const Vector3d albedo = uv_sample(texture, sh.uv.row(row).transpose());
        const Vector3d color = sh_shade(albedo, sh.normals.row(row).transpose(), light).cwiseMin(1.0);
        image.rgb.row(sh.pixels[k]) = color.transpose();
    }
    return image;
}

BinaryMask coverage_mask(const FragmentBuffer& fragments)
{
    BinaryMask mask(fragments.width, fragments.height, 0, MaskKind::projection);
    mask.bits = fragments.coverage;
    return mask;
}

RenderOutput render(const model::BlendshapeBasis& basis, const model::FaceParams& params, const UvTexture& texture,
                    const RenderOptions& options)
{
    params.validate(basis);
    const auto view = prepare_view(basis, params, options);
    RenderOutput out;
    out.image = shade_view(view, texture, params.light, options.background);
    out.proj_mask = coverage_mask(view.fragments);
    out.fragments = view.fragments;
    return out;
}

} // namespace render
} // namespace facetex
