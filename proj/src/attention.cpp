/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/attention.cpp
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
#include "facetex/attention.hpp"

#include <cmath>

namespace facetex {
namespace attention {

namespace {

void check_tokens(const MatrixXd& f_tex, const MatrixXd& f_geo, double d_t)
{
    if (f_tex.rows() < 1 || f_tex.cols() < 1 || f_tex.rows() != f_geo.rows() || f_tex.cols() != f_geo.cols()) {
        throw std::invalid_argument("cross_attend: token matrices must both be n x d with n, d >= 1");
    }
    if (!(d_t > 0.0) || !std::isfinite(d_t)) {
        throw std::invalid_argument("cross_attend: scale must be positive");
    }
    if (!f_tex.allFinite() || !f_geo.allFinite()) {
        throw std::invalid_argument("cross_attend: non-finite tokens");
    }
}

MatrixXd softmax_rows(const MatrixXd& x)
{
    MatrixXd y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double m = x.row(r).maxCoeff();
        y.row(r) = (x.row(r).array() - m).exp().matrix();
        y.row(r) /= y.row(r).sum();
    }
    return y;
}

MatrixXd gaussian_projection(Eigen::Index in, int dim, std::uint64_t seed)
{
    Rng rng(seed);
    MatrixXd p(in, dim);
    const double k = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index i = 0; i < in; ++i) {
        for (int j = 0; j < dim; ++j) {
            p(i, j) = k * rng.normal();
        }
    }
    return p;
}

void check_patch(int width, int height, int patch, int dim)
{
    if (patch < 1 || dim < 1 || width % patch != 0 || height % patch != 0) {
        throw std::invalid_argument("tokens: image sides must be multiples of the patch size");
    }
}

} // namespace

Attended cross_attend(const MatrixXd& f_tex, const MatrixXd& f_geo, double d_t, bool values_from_geometry)
{
    check_tokens(f_tex, f_geo, d_t);
    Attended a;
    a.scores = f_tex * f_geo.transpose() / std::sqrt(d_t);
    a.weights = softmax_rows(a.scores);
    a.output = a.weights * (values_from_geometry ? f_geo : f_tex);
    return a;
}

AttentionGrads attention_backward(const MatrixXd& f_tex, const MatrixXd& f_geo, double d_t,
                                  const MatrixXd& upstream, bool values_from_geometry)
{
    check_tokens(f_tex, f_geo, d_t);
    if (upstream.rows() != f_tex.rows() || upstream.cols() != f_tex.cols()) {
        throw std::invalid_argument("attention_backward: upstream gradient must be n x d");
    }
    const double inv = 1.0 / std::sqrt(d_t);
    const MatrixXd w = softmax_rows(f_tex * f_geo.transpose() * inv);
    const MatrixXd& values = values_from_geometry ? f_geo : f_tex;
    const MatrixXd dw = upstream * values.transpose();
    const VectorXd dots = dw.cwiseProduct(w).rowwise().sum();
    const MatrixXd ds = w.cwiseProduct(dw.colwise() - dots);
    AttentionGrads g;
    g.d_tex = ds * f_geo * inv;
    g.d_geo = ds.transpose() * f_tex * inv;
    (values_from_geometry ? g.d_geo : g.d_tex).noalias() += w.transpose() * upstream;
    return g;
}

MatrixXd texture_tokens(const Image& image, int patch, int dim, std::uint64_t seed)
{
    check_patch(image.width, image.height, patch, dim);
    const int px = image.width / patch;
    const int py = image.height / patch;
    const Eigen::Index features = 3 * static_cast<Eigen::Index>(patch) * patch;
    MatrixXd raw(static_cast<Eigen::Index>(px) * py, features);
    for (int by = 0; by < py; ++by) {
        for (int bx = 0; bx < px; ++bx) {
            Eigen::Index f = 0;
            for (int y = 0; y < patch; ++y) {
                for (int x = 0; x < patch; ++x) {
                    const auto rgb = image.pixel(bx * patch + x, by * patch + y);
                    for (int c = 0; c < 3; ++c) {
                        raw(by * px + bx, f++) = rgb[c];
                    }
                }
            }
        }
    }
    return raw * gaussian_projection(features, dim, seed);
}

MatrixXd geometry_tokens(const render::ViewGeometry& view, int patch, int dim, std::uint64_t seed)
{
    const auto& frags = view.fragments;
    check_patch(frags.width, frags.height, patch, dim);
    const int px = frags.width / patch;
    const int py = frags.height / patch;
    constexpr int features = 7; // x, y, depth, normal, coverage
    MatrixXd raw = MatrixXd::Zero(static_cast<Eigen::Index>(px) * py, features);
    const auto& sh = view.shading;
    for (std::size_t k = 0; k < sh.pixels.size(); ++k) {
        const int p = sh.pixels[k];
        const int x = p % frags.width;
        const int y = p / frags.width;
        const Eigen::Index t = (y / patch) * px + (x / patch);
        Eigen::Matrix<double, 1, features> f;
        f << (x + 0.5) / frags.width, (y + 0.5) / frags.height, frags.depth[static_cast<std::size_t>(p)] / frags.width,
            sh.normals(static_cast<Eigen::Index>(k), 0), sh.normals(static_cast<Eigen::Index>(k), 1),
            sh.normals(static_cast<Eigen::Index>(k), 2), 1.0;
        raw.row(t) += f;
    }
    raw /= static_cast<double>(patch * patch);
    return raw * gaussian_projection(features, dim, seed);
}

} // namespace attention

namespace ad {

Var cross_attend(const Var& f_tex, const Var& f_geo, double d_t, bool values_from_geometry)
{
    if (!f_tex.valid()) {
        throw std::invalid_argument("operation on a detached variable");
    }
    const MatrixXd* tv = &f_tex.value();
    const MatrixXd* gv = &f_geo.value();
    auto fwd = attention::cross_attend(*tv, *gv, d_t, values_from_geometry);
    return f_tex.tape()->record(std::move(fwd.output), {f_tex, f_geo},
                                [tv, gv, d_t, values_from_geometry](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                    const auto grads = attention::attention_backward(*tv, *gv, d_t, g, values_from_geometry);
                                    if (in[0]) *in[0] += grads.d_tex;
                                    if (in[1]) *in[1] += grads.d_geo;
                                });
}

} // namespace ad
} // namespace facetex
