/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/attention.hpp
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

#ifndef FACETEX_ATTENTION_HPP_
#define FACETEX_ATTENTION_HPP_

#include "facetex/autodiff.hpp"
#include "facetex/common.hpp"
#include "facetex/render.hpp"

#include <cstdint>

namespace facetex {
namespace attention {

/// Result of one cross-attention pass.
struct Attended
{
    MatrixXd scores;  // n x n, f_T f_G^T / sqrt(d_T)
    MatrixXd weights; // row-wise softmax of scores
    MatrixXd output;  // n x d
};

/**
 * f_A = softmax(f_T f_G^T / sqrt(d_T)) V with V = f_T, or V = f_G when
 * \p values_from_geometry is set. Texture and geometry tokens must both be n x d.
 */
Attended cross_attend(const MatrixXd& f_tex, const MatrixXd& f_geo, double d_t, bool values_from_geometry = false);

/// The usual scale: the channel count of the tokens.
inline double default_scale(const MatrixXd& tokens)
{
    return static_cast<double>(tokens.cols());
}

struct AttentionGrads
{
    MatrixXd d_tex;
    MatrixXd d_geo;
};

/// Reverse-mode derivatives of cross_attend given d loss / d f_A.
AttentionGrads attention_backward(const MatrixXd& f_tex, const MatrixXd& f_geo, double d_t,
                                  const MatrixXd& upstream, bool values_from_geometry = false);

/**
 * Patch tokens of an image: the raw RGB of every patch x patch block, mapped to \p dim
 * channels by a fixed Gaussian projection drawn from \p seed. Image sides must be
 * multiples of \p patch.
 */
MatrixXd texture_tokens(const Image& image, int patch, int dim, std::uint64_t seed);

/**
 * Geometry tokens from a prepared view: per pixel the camera-space position (scaled to
 * the image), unit normal and coverage, averaged over each patch and projected like
 * texture_tokens().
 */
MatrixXd geometry_tokens(const render::ViewGeometry& view, int patch, int dim, std::uint64_t seed);

} // namespace attention

namespace ad {

/// Tape form of attention::cross_attend.
Var cross_attend(const Var& f_tex, const Var& f_geo, double d_t, bool values_from_geometry = false);

} // namespace ad
} // namespace facetex

#endif /* FACETEX_ATTENTION_HPP_ */
