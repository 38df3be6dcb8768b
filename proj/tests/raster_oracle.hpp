/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: tests/raster_oracle.hpp
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

#ifndef FACETEX_TESTS_RASTER_ORACLE_HPP_
#define FACETEX_TESTS_RASTER_ORACLE_HPP_

#include "facetex/common.hpp"
#include "facetex/raster.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace facetex::testing {

/// A triangle soup with vertices on a 1/8 pixel grid, so every inside test is exact.
struct TriangleSoup
{
    MatrixXd points;
    VectorXd depth;
    std::vector<std::array<int, 3>> faces;
};

inline TriangleSoup random_soup(Rng& rng, int width, int height, int triangles)
{
    TriangleSoup s;
    s.points.resize(3 * triangles, 2);
    s.depth.resize(3 * triangles);
    for (int t = 0; t < triangles; ++t) {
        // A centre and a spread, so that both slivers and large triangles show up.
        const double cx = rng.uniform(-4.0, width + 4.0);
        const double cy = rng.uniform(-4.0, height + 4.0);
        const double spread = rng.uniform(1.0, 0.6 * width);
        for (int k = 0; k < 3; ++k) {
            const int v = 3 * t + k;
            s.points(v, 0) = std::round(8.0 * (cx + rng.uniform(-spread, spread))) / 8.0;
            s.points(v, 1) = std::round(8.0 * (cy + rng.uniform(-spread, spread))) / 8.0;
            s.depth[v] = rng.uniform(1.0, 10.0);
        }
        s.faces.push_back({3 * t, 3 * t + 1, 3 * t + 2});
    }
    return s;
}

/// Brute-force rasterization: exact integer point-in-triangle tests on a 1/16 grid, the
/// top-left rule written in terms of interior normals, and a depth sort per pixel.
inline render::FragmentBuffer oracle_rasterize(const MatrixXd& points, const VectorXd& depth,
                                               const std::vector<std::array<int, 3>>& faces, int width,
                                               int height)
{
    using I = std::int64_t;
    auto grid = [](double v) { return static_cast<I>(std::llround(v * 16.0)); };
    render::FragmentBuffer out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const I px = 16 * x + 8, py = 16 * y + 8;
            long double best = std::numeric_limits<long double>::infinity();
            for (std::size_t f = 0; f < faces.size(); ++f) {
                I vx[3], vy[3];
                for (int k = 0; k < 3; ++k) {
                    vx[k] = grid(points(faces[f][k], 0));
                    vy[k] = grid(points(faces[f][k], 1));
                }
                const I area2 = (vx[1] - vx[0]) * (vy[2] - vy[0]) - (vy[1] - vy[0]) * (vx[2] - vx[0]);
                if (area2 == 0) {
                    continue;
                }
                bool inside = true;
                I lambda[3];
                for (int k = 0; k < 3 && inside; ++k) {
                    const int a = (k + 1) % 3, b = (k + 2) % 3;
                    // Edge a-b, opposite vertex k. Interior normal: perpendicular to the edge,
                    // pointing towards vertex k.
                    I nx = -(vy[b] - vy[a]), ny = vx[b] - vx[a];
                    if (nx * (vx[k] - vx[a]) + ny * (vy[k] - vy[a]) < 0) {
                        nx = -nx;
                        ny = -ny;
                    }
                    const I side = nx * (px - vx[a]) + ny * (py - vy[a]);
                    lambda[k] = side;
                    if (side < 0) {
                        inside = false;
                    } else if (side == 0) {
                        // Screen y points down; the top-left rule is stated in those axes.
                        inside = nx > 0 || (nx == 0 && ny > 0);
                    }
                }
                if (!inside) {
                    continue;
                }
                const long double total = static_cast<long double>(lambda[0] + lambda[1] + lambda[2]);
                long double z = 0.0L;
                Vector3d bary;
                for (int k = 0; k < 3; ++k) {
                    const long double w = static_cast<long double>(lambda[k]) / total;
                    bary[k] = static_cast<double>(w);
                    z += w * static_cast<long double>(depth[faces[f][k]]);
                }
                if (z < best) { // strict: the lower face index keeps ties
                    best = z;
                    const auto idx = static_cast<std::size_t>(y * width + x);
                    out.face_id[idx] = static_cast<int>(f);
                    out.coverage[idx] = 1;
                    out.bary[idx] = bary;
                    out.depth[idx] = static_cast<double>(z);
                }
            }
        }
    }
    return out;
}

struct RasterComparison
{
    bool coverage_equal = true;
    bool face_id_equal = true;
    double max_bary_error = 0.0;
};

inline RasterComparison compare_fragments(const render::FragmentBuffer& a, const render::FragmentBuffer& b)
{
    RasterComparison c;
    for (std::size_t i = 0; i < a.coverage.size(); ++i) {
        c.coverage_equal = c.coverage_equal && a.coverage[i] == b.coverage[i];
        c.face_id_equal = c.face_id_equal && a.face_id[i] == b.face_id[i];
        if (a.coverage[i] && b.coverage[i] && a.face_id[i] == b.face_id[i]) {
            c.max_bary_error = std::max(c.max_bary_error, (a.bary[i] - b.bary[i]).cwiseAbs().maxCoeff());
        }
    }
    return c;
}

} // namespace facetex::testing

#endif /* FACETEX_TESTS_RASTER_ORACLE_HPP_ */
