/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/raster.hpp
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

#ifndef FACETEX_RASTER_HPP_
#define FACETEX_RASTER_HPP_

#include "facetex/common.hpp"

#include <array>
#include <vector>

namespace facetex {
namespace render {

/**
 * Per-pixel z-buffer result. Uncovered pixels have face id -1, zero barycentrics and
 * infinite depth.
 */
struct FragmentBuffer
{
    int width = 0;
    int height = 0;
    std::vector<int> face_id;
    std::vector<Vector3d> bary;
    std::vector<double> depth;
    std::vector<std::uint8_t> coverage;

    FragmentBuffer() = default;
    FragmentBuffer(int w, int h);

    int num_pixels() const { return width * height; }
    std::size_t covered_count() const;
    bool operator==(const FragmentBuffer& other) const = default;
};

/**
 * Z-buffered rasterization of a triangle soup.
 *
 * Samples are taken at pixel centers (x + 0.5, y + 0.5). A sample exactly on a shared
 * edge belongs to the triangle for which that edge is a top or left edge. The smallest
 * depth wins and equal depths go to the lower face index. Triangles with zero signed
 * area never cover anything. No back-face culling.
 *
 * Rows are split into \p bands horizontal bands processed concurrently; each pixel is
 * owned by one band, so the result does not depend on the band count. bands <= 0 picks
 * the hardware concurrency.
 */
FragmentBuffer rasterize(const MatrixXd& points, const VectorXd& depth, const std::vector<std::array<int, 3>>& faces,
                         int width, int height, int bands = 1);

} // namespace render
} // namespace facetex

#endif /* FACETEX_RASTER_HPP_ */
