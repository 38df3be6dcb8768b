/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/visibility.hpp
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

#ifndef FACETEX_VISIBILITY_HPP_
#define FACETEX_VISIBILITY_HPP_

#include "facetex/autodiff.hpp"
#include "facetex/common.hpp"
#include "facetex/morphable_model.hpp"
#include "facetex/raster.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace facetex {
namespace visibility {

/**
 * Random occlusion mask: the image is tiled by patch x patch blocks (partial blocks at
 * the right and bottom edges included) and each block, in row-major order, is dropped
 * to 0 with probability \p rho.
 */
BinaryMask make_patch_mask(int width, int height, int patch, double rho, std::uint64_t seed);

/// Elementwise product of a skin mask and a patch mask.
BinaryMask combine_mask(const BinaryMask& skin, const BinaryMask& patches);

/// Fraction of views in which each texel was seen; same layout as UvTexture rows.
struct UvVisibility
{
    int resolution = 0;
    std::vector<double> values;

    double operator()(int i, int j) const { return values[static_cast<std::size_t>(i * resolution + j)]; }
};

/// Texels whose visibility is below this count as unseen.
inline constexpr double invisible_threshold = 0.5;

/// A texel is seen in a view if some covered pixel's interpolated UV falls inside it.
UvVisibility uv_visibility(std::span<const render::FragmentBuffer> views, const model::BlendshapeBasis& basis,
                           int resolution);

/**
 * Weighted total variation over horizontal and vertical texel neighbours:
 * sum (1 - min(vis_a, vis_b)) |T_a - T_b|_1. Unnormalised.
 */
double completion_prior(const UvTexture& texture, const UvVisibility& vis);

} // namespace visibility

namespace ad {

/// \p vis must outlive the tape.
Var completion_prior(const Var& texture, const visibility::UvVisibility& vis);

} // namespace ad
} // namespace facetex

#endif /* FACETEX_VISIBILITY_HPP_ */
