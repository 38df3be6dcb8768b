/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/render.hpp
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

#ifndef FACETEX_RENDER_HPP_
#define FACETEX_RENDER_HPP_

#include "facetex/common.hpp"
#include "facetex/morphable_model.hpp"
#include "facetex/raster.hpp"

#include <vector>

namespace facetex {
namespace render {

struct RenderOptions
{
    int width = 64;
    int height = 64;
    Vector3d background = Vector3d::Zero();
    int bands = 1;
};

/// Per covered pixel: the interpolated UV and the unit camera-space normal.
struct ShadingInputs
{
    std::vector<int> pixels; // covered pixel indices, ascending
    MatrixXd uv;             // K x 2
    MatrixXd normals;        // K x 3
};

/**
 * Everything about a view that depends only on geometry and camera. Coverage is
 * piecewise constant in the parameters, so this is what gets frozen while texture and
 * light are optimised.
 */
struct ViewGeometry
{
    model::PosedGeometry geometry;
    FragmentBuffer fragments;
    ShadingInputs shading;
};

ViewGeometry prepare_view(const model::BlendshapeBasis& basis, const model::FaceParams& params,
                          const RenderOptions& options);

/// Texture lookup and SH shading of every covered pixel; the rest gets the background.
Image shade_view(const ViewGeometry& view, const UvTexture& texture, const SHCoefficients& light,
                 const Vector3d& background);

struct RenderOutput
{
    Image image;
    BinaryMask proj_mask; // coverage of the z-buffer
    FragmentBuffer fragments;
};

/// mesh -> pose -> projection -> rasterization -> texture lookup -> SH shading.
RenderOutput render(const model::BlendshapeBasis& basis, const model::FaceParams& params, const UvTexture& texture,
                    const RenderOptions& options);

BinaryMask coverage_mask(const FragmentBuffer& fragments);

} // namespace render
} // namespace facetex

#endif /* FACETEX_RENDER_HPP_ */
