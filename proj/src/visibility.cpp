/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/visibility.cpp
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
#include "facetex/visibility.hpp"

#include <algorithm>
#include <cmath>

namespace facetex {
namespace visibility {

BinaryMask make_patch_mask(int width, int height, int patch, double rho, std::uint64_t seed)
{
    if (width < 1 || height < 1 || patch < 1 || !(rho >= 0.0 && rho <= 1.0)) {
        throw std::invalid_argument("make_patch_mask: need positive sizes and rho in [0, 1]");
    }
    BinaryMask mask(width, height, 1, MaskKind::random);
    Rng rng(seed);
    const int bx = (width + patch - 1) / patch;
    const int by = (height + patch - 1) / patch;
    for (int j = 0; j < by; ++j) {
        for (int i = 0; i < bx; ++i) {
            if (rng.uniform() >= rho) {
                continue;
            }
            for (int y = j * patch; y < std::min(height, (j + 1) * patch); ++y) {
                for (int x = i * patch; x < std::min(width, (i + 1) * patch); ++x) {
                    mask.bits[static_cast<std::size_t>(y * width + x)] = 0;
                }
            }
        }
    }
    return mask;
}

BinaryMask combine_mask(const BinaryMask& skin, const BinaryMask& patches)
{
    if (skin.width != patches.width || skin.height != patches.height) {
        throw std::invalid_argument("combine_mask: dimension mismatch");
    }
    BinaryMask out(skin.width, skin.height, 0, MaskKind::combined);
    for (std::size_t i = 0; i < out.bits.size(); ++i) {
        out.bits[i] = (skin.bits[i] != 0 && patches.bits[i] != 0) ? 1 : 0;
    }
    return out;
}

UvVisibility uv_visibility(std::span<const render::FragmentBuffer> views, const model::BlendshapeBasis& basis,
                           int resolution)
{
    if (views.empty() || resolution < 1) {
        throw std::invalid_argument("uv_visibility: need at least one view and a positive resolution");
    }
    UvVisibility vis;
    vis.resolution = resolution;
    const auto texels = static_cast<std::size_t>(resolution) * resolution;
    vis.values.assign(texels, 0.0);
    std::vector<std::uint8_t> seen(texels);
    for (const auto& frags : views) {
        std::fill(seen.begin(), seen.end(), 0);
        for (int p = 0; p < frags.num_pixels(); ++p) {
            if (!frags.coverage[static_cast<std::size_t>(p)]) {
                continue;
            }
            const auto& face = basis.faces.at(static_cast<std::size_t>(frags.face_id[static_cast<std::size_t>(p)]));
            const Vector3d& b = frags.bary[static_cast<std::size_t>(p)];
            Vector2d uv = Vector2d::Zero();
            for (int c = 0; c < 3; ++c) {
                uv += b[c] * basis.uv_coords.row(face[c]).transpose();
            }
            const int j = std::clamp(static_cast<int>(std::floor(uv.x() * resolution)), 0, resolution - 1);
            const int i = std::clamp(static_cast<int>(std::floor(uv.y() * resolution)), 0, resolution - 1);
            seen[static_cast<std::size_t>(i * resolution + j)] = 1;
        }
        for (std::size_t t = 0; t < texels; ++t) {
            vis.values[t] += seen[t];
        }
    }
    for (double& v : vis.values) {
        v /= static_cast<double>(views.size());
    }
    return vis;
}

namespace {

void check(const MatrixXd& texture, const UvVisibility& vis)
{
    const auto n = static_cast<Eigen::Index>(vis.resolution) * vis.resolution;
    if (texture.rows() != n || texture.cols() != 3 || vis.values.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("completion_prior: texture and visibility shapes differ");
    }
}

template <typename EdgeFn>
void for_each_edge(int r, EdgeFn&& fn)
{
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            if (j + 1 < r) fn(i * r + j, i * r + j + 1);
            if (i + 1 < r) fn(i * r + j, (i + 1) * r + j);
        }
    }
}

double prior_value(const MatrixXd& t, const UvVisibility& vis)
{
    check(t, vis);
    double total = 0.0;
    for_each_edge(vis.resolution, [&](int a, int b) {
        const double w = 1.0 - std::min(vis.values[static_cast<std::size_t>(a)], vis.values[static_cast<std::size_t>(b)]);
        if (w == 0.0) return;
        total += w * (t.row(a) - t.row(b)).cwiseAbs().sum();
    });
    return total;
}

} // namespace

double completion_prior(const UvTexture& texture, const UvVisibility& vis)
{
    if (texture.resolution != vis.resolution) {
        throw std::invalid_argument("completion_prior: texture and visibility shapes differ");
    }
    return prior_value(texture.rgb, vis);
}

} // namespace visibility

namespace ad {

Var completion_prior(const Var& texture, const visibility::UvVisibility& vis)
{
    if (!texture.valid()) {
        throw std::invalid_argument("operation on a detached variable");
    }
    const MatrixXd* tv = &texture.value();
    const double value = visibility::prior_value(*tv, vis);
    return texture.tape()->record(MatrixXd::Constant(1, 1, value), {texture},
                                  [tv, &vis](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                      if (!in[0]) return;
                                      visibility::for_each_edge(vis.resolution, [&](int a, int b) {
                                          const double w = 1.0 - std::min(vis.values[static_cast<std::size_t>(a)],
                                                                          vis.values[static_cast<std::size_t>(b)]);
                                          if (w == 0.0) return;
                                          for (int c = 0; c < 3; ++c) {
                                              const double d = (*tv)(a, c) - (*tv)(b, c);
                                              const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                                              (*in[0])(a, c) += g(0, 0) * w * s;
                                              (*in[0])(b, c) -= g(0, 0) * w * s;
                                          }
                                      });
                                  });
}

} // namespace ad
} // namespace facetex
