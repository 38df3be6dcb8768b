/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/raster.cpp
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
#include "facetex/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace facetex {
namespace render {

FragmentBuffer::FragmentBuffer(int w, int h)
    : width(w), height(h), face_id(static_cast<std::size_t>(w * h), -1),
      bary(static_cast<std::size_t>(w * h), Vector3d::Zero()),
      depth(static_cast<std::size_t>(w * h), std::numeric_limits<double>::infinity()),
      coverage(static_cast<std::size_t>(w * h), 0)
{
}

std::size_t FragmentBuffer::covered_count() const
{
    return static_cast<std::size_t>(std::count(coverage.begin(), coverage.end(), std::uint8_t{1}));
}

namespace {

/// A triangle prepared for scan conversion, wound so that its signed area is positive.
struct SetupTriangle
{
    int face;
    std::array<Vector2d, 3> p;
    std::array<double, 3> z;
    std::array<int, 3> slot; // position of each wound vertex in the original face
    double area;
    std::array<bool, 3> owns_edge; // edge opposite vertex k includes samples exactly on it
    int y_min, y_max, x_min, x_max;
};

double edge_function(const Vector2d& a, const Vector2d& b, double px, double py)
{
    return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

// The interior lies along the gradient of the edge function; the edge is a left edge if
// that direction points to +x, a top edge if it is vertical and points to +y (y down).
bool is_top_left(const Vector2d& a, const Vector2d& b)
{
    const double nx = -(b.y() - a.y());
    const double ny = b.x() - a.x();
    return nx > 0.0 || (nx == 0.0 && ny > 0.0);
}

std::vector<SetupTriangle> setup(const MatrixXd& points, const VectorXd& depth,
                                 const std::vector<std::array<int, 3>>& faces, int width, int height)
{
    std::vector<SetupTriangle> tris;
    tris.reserve(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        SetupTriangle t;
        t.face = static_cast<int>(f);
        t.slot = {0, 1, 2};
        bool finite = true;
        for (int k = 0; k < 3; ++k) {
            const int v = faces[f][k];
            t.p[k] = points.row(v).transpose();
            t.z[k] = depth[v];
            finite = finite && t.p[k].allFinite() && std::isfinite(t.z[k]);
        }
        if (!finite) {
            continue;
        }
        double area = edge_function(t.p[0], t.p[1], t.p[2].x(), t.p[2].y());
        if (area == 0.0) {
            continue;
        }
        if (area < 0.0) {
            std::swap(t.p[1], t.p[2]);
            std::swap(t.z[1], t.z[2]);
            std::swap(t.slot[1], t.slot[2]);
            area = -area;
        }
        t.area = area;
        t.owns_edge = {is_top_left(t.p[1], t.p[2]), is_top_left(t.p[2], t.p[0]), is_top_left(t.p[0], t.p[1])};
        const double min_x = std::min({t.p[0].x(), t.p[1].x(), t.p[2].x()});
        const double max_x = std::max({t.p[0].x(), t.p[1].x(), t.p[2].x()});
        const double min_y = std::min({t.p[0].y(), t.p[1].y(), t.p[2].y()});
        const double max_y = std::max({t.p[0].y(), t.p[1].y(), t.p[2].y()});
        // Pixel x is sampled at x + 0.5.
        const double lo_x = std::ceil(min_x - 0.5), hi_x = std::floor(max_x - 0.5);
        const double lo_y = std::ceil(min_y - 0.5), hi_y = std::floor(max_y - 0.5);
        if (hi_x < 0.0 || hi_y < 0.0 || lo_x > width - 1 || lo_y > height - 1) {
            continue;
        }
        t.x_min = static_cast<int>(std::max(lo_x, 0.0));
        t.x_max = static_cast<int>(std::min(hi_x, static_cast<double>(width - 1)));
        t.y_min = static_cast<int>(std::max(lo_y, 0.0));
        t.y_max = static_cast<int>(std::min(hi_y, static_cast<double>(height - 1)));
        tris.push_back(t);
    }
    return tris;
}

void raster_band(const std::vector<SetupTriangle>& tris, int row_begin, int row_end, FragmentBuffer& out)
{
    for (const auto& t : tris) {
        const int y0 = std::max(t.y_min, row_begin);
        const int y1 = std::min(t.y_max, row_end - 1);
        for (int y = y0; y <= y1; ++y) {
            const double py = y + 0.5;
            for (int x = t.x_min; x <= t.x_max; ++x) {
                const double px = x + 0.5;
                const double w0 = edge_function(t.p[1], t.p[2], px, py);
                const double w1 = edge_function(t.p[2], t.p[0], px, py);
                const double w2 = edge_function(t.p[0], t.p[1], px, py);
                const bool inside = (w0 > 0.0 || (w0 == 0.0 && t.owns_edge[0])) &&
                                    (w1 > 0.0 || (w1 == 0.0 && t.owns_edge[1])) &&
                                    (w2 > 0.0 || (w2 == 0.0 && t.owns_edge[2]));
                if (!inside) {
                    continue;
                }
                const double b0 = w0 / t.area, b1 = w1 / t.area, b2 = w2 / t.area;
                const double z = b0 * t.z[0] + b1 * t.z[1] + b2 * t.z[2];
                const auto idx = static_cast<std::size_t>(y * out.width + x);
                if (!(z < out.depth[idx])) {
                    continue; // ties keep the earlier (lower) face
                }
                out.depth[idx] = z;
                out.face_id[idx] = t.face;
                out.coverage[idx] = 1;
                Vector3d b;
                b[t.slot[0]] = b0;
                b[t.slot[1]] = b1;
                b[t.slot[2]] = b2;
                out.bary[idx] = b;
            }
        }
    }
}

} // namespace

FragmentBuffer rasterize(const MatrixXd& points, const VectorXd& depth, const std::vector<std::array<int, 3>>& faces,
                         int width, int height, int bands)
{
    if (width < 1 || height < 1) {
        throw std::invalid_argument("rasterize: image dimensions must be at least 1");
    }
    if (points.cols() != 2 || depth.size() != points.rows()) {
        throw std::invalid_argument("rasterize: points must be N x 2 with N depths");
    }
    for (const auto& f : faces) {
        for (int i : f) {
            if (i < 0 || i >= points.rows()) {
                throw std::invalid_argument("rasterize: face index out of range");
            }
        }
    }
    FragmentBuffer out(width, height);
    const auto tris = setup(points, depth, faces, width, height);
    if (bands <= 0) {
        bands = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    bands = std::min(bands, height);
    if (bands == 1) {
        raster_band(tris, 0, height, out);
        return out;
    }
    {
        std::vector<std::jthread> workers;
        workers.reserve(static_cast<std::size_t>(bands));
        for (int b = 0; b < bands; ++b) {
            const int begin = height * b / bands;
            const int end = height * (b + 1) / bands;
            workers.emplace_back([&tris, &out, begin, end] { raster_band(tris, begin, end, out); });
        }
    }
    return out;
}

} // namespace render
} // namespace facetex
