/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/losses.hpp
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

#ifndef FACETEX_LOSSES_HPP_
#define FACETEX_LOSSES_HPP_

#include "facetex/autodiff.hpp"
#include "facetex/common.hpp"
#include "facetex/embedding.hpp"
#include "facetex/morphable_model.hpp"
#include "facetex/render.hpp"

#include <array>
#include <span>
#include <vector>

namespace facetex {
namespace losses {

/// Index of each term in a parts array.
enum Term { lmk = 0, tex, vis_tex, id, reg, vis, num_terms };

struct LossWeights
{
    double w_lmk = 1.0;
    double w_tex = 1.0;
    double w_vis_tex = 1.0;
    double w_id = 1.0;
    double w_reg = 1.0;
    double w_vis = 1.0;

    std::array<double, num_terms> as_array() const { return {w_lmk, w_tex, w_vis_tex, w_id, w_reg, w_vis}; }
    /// Throws std::invalid_argument on a negative or non-finite weight.
    void validate() const;
};

/// (1/68) sum_i |P_i - Q_i|_1 over two 68 x 2 point sets.
double landmark_loss(const MatrixXd& p, const MatrixXd& q);

double reg_loss(const VectorXd& shape, const VectorXd& expression);

/// Masked L1 over RGB, divided by 3 * (number of mask-on pixels); 0 for an empty mask.
double texture_loss(const MatrixXd& a, const MatrixXd& b, const std::vector<std::uint8_t>& mask);
double texture_loss(const Image& a, const Image& b, const BinaryMask& mask);

/// Mean of per-view texture losses. Identical views reproduce the single-view value exactly.
double vis_texture_loss(std::span<const Image> targets, std::span<const Image> renders,
                        std::span<const BinaryMask> masks);

/**
 * Renders the state under each global rotation in \p poses (replacing the base global
 * rotation) and compares against the matching target with the matching mask.
 */
double vis_texture_loss(const model::BlendshapeBasis& basis, const model::FaceParams& params,
                        const UvTexture& texture, std::span<const Image> targets, std::span<const Vector3d> poses,
                        std::span<const BinaryMask> masks, const render::RenderOptions& options);

/// a.b / (|a| |b|). Throws DegenerateInput if either norm is zero.
double cosine_similarity(const VectorXd& a, const VectorXd& b);

/// 1 - cos(F(a), F(b)).
double identity_loss(const SurrogateEmbedding& embed, const MatrixXd& a, const MatrixXd& b);
double identity_loss(const SurrogateEmbedding& embed, const Image& a, const Image& b);

/// Mean absolute difference of two masks.
double visibility_loss(const BinaryMask& proj, const BinaryMask& skin);

/// sum_k w_k L_k in Term order.
double total_loss(const std::array<double, num_terms>& parts, const LossWeights& weights);

/// Image rows with mask on, else zero.
MatrixXd apply_mask(const MatrixXd& image, const std::vector<std::uint8_t>& mask);

} // namespace losses

namespace ad {

Var landmark_loss(const Var& p, const Var& q);
Var reg_loss(const Var& shape, const Var& expression);
Var texture_loss(const Var& a, const Var& b, const std::vector<std::uint8_t>& mask);
/// One mask per view, shared targets/renders ordering.
Var vis_texture_loss(std::span<const Var> targets, std::span<const Var> renders,
                     std::span<const std::vector<std::uint8_t>> masks);
Var identity_loss(const losses::SurrogateEmbedding& embed, const Var& a, const Var& b);
/// Mean absolute difference; accepts continuous masks as (width*height) x 1 nodes.
Var visibility_loss(const Var& proj, const Var& skin);
Var total_loss(std::span<const Var> parts, const losses::LossWeights& weights);
Var apply_mask(const Var& image, const std::vector<std::uint8_t>& mask);

} // namespace ad
} // namespace facetex

#endif /* FACETEX_LOSSES_HPP_ */
