/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/losses.cpp
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
#include "facetex/losses.hpp"

#include <cmath>

namespace facetex {
namespace losses {

namespace {

void check_landmarks(const MatrixXd& m)
{
    if (m.rows() != model::num_landmarks || m.cols() != 2) {
        throw std::invalid_argument("landmark_loss: expected 68 x 2 point sets");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument("landmark_loss: non-finite landmark coordinates");
    }
}

void check_pair(const MatrixXd& a, const MatrixXd& b, const std::vector<std::uint8_t>& mask)
{
    if (a.rows() != b.rows() || a.cols() != 3 || b.cols() != 3 ||
        static_cast<std::size_t>(a.rows()) != mask.size()) {
        throw std::invalid_argument("texture_loss: images and mask must have matching sizes");
    }
}

// Running mean: exact when all values are equal.
double mean_of(const std::vector<double>& values)
{
    double m = values.front();
    for (std::size_t i = 1; i < values.size(); ++i) {
        m += (values[i] - m) / static_cast<double>(i + 1);
    }
    return m;
}

// Embedding of an image; a flat image leaves only round-off, which counts as zero.
VectorXd checked_embedding(const SurrogateEmbedding& embed, const MatrixXd& image)
{
    VectorXd f = embed.embed(image);
    const double scale = image.size() ? image.cwiseAbs().maxCoeff() : 0.0;
    if (!(f.norm() > 1e-12 * std::max(scale, 1.0))) {
        throw DegenerateInput("identity loss of an image with no contrast");
    }
    return f;
}

} // namespace

void LossWeights::validate() const
{
    for (double w : as_array()) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("loss weights must be finite and nonnegative");
        }
    }
}

double landmark_loss(const MatrixXd& p, const MatrixXd& q)
{
    check_landmarks(p);
    check_landmarks(q);
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        total += std::abs(p(i, 0) - q(i, 0)) + std::abs(p(i, 1) - q(i, 1));
    }
    return total / model::num_landmarks;
}

double reg_loss(const VectorXd& shape, const VectorXd& expression)
{
    if (!shape.allFinite() || !expression.allFinite()) {
        throw std::invalid_argument("reg_loss: non-finite coefficients");
    }
    return shape.squaredNorm() + expression.squaredNorm();
}

double texture_loss(const MatrixXd& a, const MatrixXd& b, const std::vector<std::uint8_t>& mask)
{
    check_pair(a, b, mask);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (!mask[p]) {
            continue;
        }
        ++count;
        const auto r = static_cast<Eigen::Index>(p);
        total += std::abs(a(r, 0) - b(r, 0)) + std::abs(a(r, 1) - b(r, 1)) + std::abs(a(r, 2) - b(r, 2));
    }
    return count == 0 ? 0.0 : total / (3.0 * static_cast<double>(count));
}

double texture_loss(const Image& a, const Image& b, const BinaryMask& mask)
{
    if (a.width != b.width || a.height != b.height || mask.width != a.width || mask.height != a.height) {
        throw std::invalid_argument("texture_loss: images and mask must have equal dimensions");
    }
    return texture_loss(a.rgb, b.rgb, mask.bits);
}

double vis_texture_loss(std::span<const Image> targets, std::span<const Image> renders,
                        std::span<const BinaryMask> masks)
{
    if (targets.empty() || targets.size() != renders.size() || targets.size() != masks.size()) {
        throw std::invalid_argument("vis_texture_loss: need k >= 1 views with one target, render and mask each");
    }
    std::vector<double> per_view;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        per_view.push_back(texture_loss(targets[i], renders[i], masks[i]));
    }
    return mean_of(per_view);
}

double vis_texture_loss(const model::BlendshapeBasis& basis, const model::FaceParams& params,
                        const UvTexture& texture, std::span<const Image> targets, std::span<const Vector3d> poses,
                        std::span<const BinaryMask> masks, const render::RenderOptions& options)
{
    if (poses.size() != targets.size()) {
        throw std::invalid_argument("vis_texture_loss: one pose per target required");
    }
    std::vector<Image> renders;
    for (const auto& pose : poses) {
        model::FaceParams view = params;
        view.pose.head<3>() = pose;
        renders.push_back(render::render(basis, view, texture, options).image);
    }
    return vis_texture_loss(targets, renders, masks);
}

double cosine_similarity(const VectorXd& a, const VectorXd& b)
{
    const double aa = a.dot(a);
    const double bb = b.dot(b);
    if (!(aa > 0.0) || !(bb > 0.0)) {
        throw DegenerateInput("cosine similarity of a zero-norm embedding");
    }
    // Exactly 1 for a vector against itself.
    return a.dot(b) / std::sqrt(aa * bb);
}

double identity_loss(const SurrogateEmbedding& embed, const MatrixXd& a, const MatrixXd& b)
{
    return 1.0 - cosine_similarity(checked_embedding(embed, a), checked_embedding(embed, b));
}

double identity_loss(const SurrogateEmbedding& embed, const Image& a, const Image& b)
{
    return identity_loss(embed, a.rgb, b.rgb);
}

double visibility_loss(const BinaryMask& proj, const BinaryMask& skin)
{
    if (proj.width != skin.width || proj.height != skin.height || proj.num_pixels() == 0) {
        throw std::invalid_argument("visibility_loss: masks must be non-empty with equal dimensions");
    }
    std::size_t differ = 0;
    for (std::size_t i = 0; i < proj.bits.size(); ++i) {
        differ += (proj.bits[i] != 0) != (skin.bits[i] != 0) ? 1 : 0;
    }
    return static_cast<double>(differ) / static_cast<double>(proj.bits.size());
}

double total_loss(const std::array<double, num_terms>& parts, const LossWeights& weights)
{
    weights.validate();
    const auto w = weights.as_array();
    double total = 0.0;
    for (int k = 0; k < num_terms; ++k) {
        if (!std::isfinite(parts[static_cast<std::size_t>(k)])) {
            throw std::invalid_argument("total_loss: non-finite loss term");
        }
        total += w[static_cast<std::size_t>(k)] * parts[static_cast<std::size_t>(k)];
    }
    return total;
}

MatrixXd apply_mask(const MatrixXd& image, const std::vector<std::uint8_t>& mask)
{
    if (static_cast<std::size_t>(image.rows()) != mask.size()) {
        throw std::invalid_argument("apply_mask: size mismatch");
    }
    MatrixXd out = image;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (!mask[p]) out.row(static_cast<Eigen::Index>(p)).setZero();
    }
    return out;
}

} // namespace losses

namespace ad {

namespace {

double sign(double x)
{
    return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}

Tape& tape_of(const Var& v)
{
    if (!v.valid()) {
        throw std::invalid_argument("operation on a detached variable");
    }
    return *v.tape();
}

} // namespace

Var landmark_loss(const Var& p, const Var& q)
{
    const MatrixXd* pv = &p.value();
    const MatrixXd* qv = &q.value();
    const double value = losses::landmark_loss(*pv, *qv);
    return tape_of(p).record(MatrixXd::Constant(1, 1, value), {p, q},
                             [pv, qv](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                 const MatrixXd d = ((*pv) - (*qv)).unaryExpr(&sign) * (g(0, 0) / model::num_landmarks);
                                 if (in[0]) *in[0] += d;
                                 if (in[1]) *in[1] -= d;
                             });
}

Var reg_loss(const Var& shape, const Var& expression)
{
    return add(square_norm(shape), square_norm(expression));
}

Var texture_loss(const Var& a, const Var& b, const std::vector<std::uint8_t>& mask)
{
    const MatrixXd* av = &a.value();
    const MatrixXd* bv = &b.value();
    const double value = losses::texture_loss(*av, *bv, mask);
    std::size_t count = 0;
    for (auto m : mask) count += m ? 1 : 0;
    return tape_of(a).record(MatrixXd::Constant(1, 1, value), {a, b},
                             [av, bv, mask, count](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                 if (count == 0) return;
                                 const double k = g(0, 0) / (3.0 * static_cast<double>(count));
                                 for (std::size_t p = 0; p < mask.size(); ++p) {
                                     if (!mask[p]) continue;
                                     const auto r = static_cast<Eigen::Index>(p);
                                     for (int c = 0; c < 3; ++c) {
                                         const double d = k * sign((*av)(r, c) - (*bv)(r, c));
                                         if (in[0]) (*in[0])(r, c) += d;
                                         if (in[1]) (*in[1])(r, c) -= d;
                                     }
                                 }
                             });
}

Var vis_texture_loss(std::span<const Var> targets, std::span<const Var> renders,
                     std::span<const std::vector<std::uint8_t>> masks)
{
    if (targets.empty() || targets.size() != renders.size() || targets.size() != masks.size()) {
        throw std::invalid_argument("vis_texture_loss: need k >= 1 views with one target, render and mask each");
    }
    std::vector<Var> parts;
    std::vector<double> values;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        parts.push_back(texture_loss(targets[i], renders[i], masks[i]));
        values.push_back(parts.back().scalar());
    }
    double m = values.front();
    for (std::size_t i = 1; i < values.size(); ++i) {
        m += (values[i] - m) / static_cast<double>(i + 1);
    }
    const double w = 1.0 / static_cast<double>(parts.size());
    return tape_of(parts[0]).record(MatrixXd::Constant(1, 1, m), parts,
                                    [w](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                        for (auto* slot : in) {
                                            if (slot) (*slot)(0, 0) += w * g(0, 0);
                                        }
                                    });
}

Var identity_loss(const losses::SurrogateEmbedding& embed, const Var& a, const Var& b)
{
    const VectorXd ea = losses::checked_embedding(embed, a.value());
    const VectorXd eb = losses::checked_embedding(embed, b.value());
    const double c = losses::cosine_similarity(ea, eb);
    const losses::SurrogateEmbedding* e = &embed;
    return tape_of(a).record(MatrixXd::Constant(1, 1, 1.0 - c), {a, b},
                             [e, ea, eb, c](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                 const double na = ea.norm();
                                 const double nb = eb.norm();
                                 if (in[0]) {
                                     const VectorXd dc = eb / (na * nb) - c * ea / (na * na);
                                     *in[0] += e->adjoint(-g(0, 0) * dc);
                                 }
                                 if (in[1]) {
                                     const VectorXd dc = ea / (na * nb) - c * eb / (nb * nb);
                                     *in[1] += e->adjoint(-g(0, 0) * dc);
                                 }
                             });
}

Var visibility_loss(const Var& proj, const Var& skin)
{
    if (proj.rows() != skin.rows() || proj.cols() != skin.cols() || proj.value().size() == 0) {
        throw std::invalid_argument("visibility_loss: masks must be non-empty with equal dimensions");
    }
    const MatrixXd* pv = &proj.value();
    const MatrixXd* sv = &skin.value();
    const double n = static_cast<double>(pv->size());
    const double value = ((*pv) - (*sv)).cwiseAbs().sum() / n;
    return tape_of(proj).record(MatrixXd::Constant(1, 1, value), {proj, skin},
                                [pv, sv, n](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                    const MatrixXd d = ((*pv) - (*sv)).unaryExpr(&sign) * (g(0, 0) / n);
                                    if (in[0]) *in[0] += d;
                                    if (in[1]) *in[1] -= d;
                                });
}

Var total_loss(std::span<const Var> parts, const losses::LossWeights& weights)
{
    weights.validate();
    if (parts.size() != losses::num_terms) {
        throw std::invalid_argument("total_loss: expected one part per loss term");
    }
    const auto w = weights.as_array();
    return weighted_sum(parts, w);
}

Var apply_mask(const Var& image, const std::vector<std::uint8_t>& mask)
{
    if (static_cast<std::size_t>(image.rows()) != mask.size()) {
        throw std::invalid_argument("apply_mask: size mismatch");
    }
    MatrixXd m = MatrixXd::Zero(image.rows(), image.cols());
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (mask[p]) m.row(static_cast<Eigen::Index>(p)).setOnes();
    }
    return mul(image, tape_of(image).constant(std::move(m)));
}

} // namespace ad
} // namespace facetex
