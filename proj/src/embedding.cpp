/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/embedding.cpp
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
#include "facetex/embedding.hpp"

#include <cmath>
#include <numbers>

namespace facetex {
namespace losses {

SurrogateEmbedding::SurrogateEmbedding(int width, int height) : width_(width), height_(height)
{
    if (width < grid || height < grid) {
        throw std::invalid_argument("SurrogateEmbedding: image must be at least 16 x 16");
    }
    dct_.resize(grid, grid);
    for (int k = 0; k < grid; ++k) {
        const double alpha = std::sqrt((k == 0 ? 1.0 : 2.0) / grid);
        for (int n = 0; n < grid; ++n) {
            dct_(k, n) = alpha * std::cos(std::numbers::pi * (2.0 * n + 1.0) * k / (2.0 * grid));
        }
    }
    cell_.resize(static_cast<std::size_t>(width) * height);
    cell_size_.assign(grid * grid, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int c = (y * grid / height) * grid + (x * grid / width);
            cell_[static_cast<std::size_t>(y * width + x)] = c;
            cell_size_[static_cast<std::size_t>(c)] += 1.0;
        }
    }
}

VectorXd SurrogateEmbedding::embed(const MatrixXd& image) const
{
    if (image.rows() != static_cast<Eigen::Index>(cell_.size()) || image.cols() != 3) {
        throw std::invalid_argument("SurrogateEmbedding::embed: image size mismatch");
    }
    MatrixXd cells = MatrixXd::Zero(grid, grid);
    for (std::size_t p = 0; p < cell_.size(); ++p) {
        const int c = cell_[p];
        cells(c / grid, c % grid) += image.row(static_cast<Eigen::Index>(p)).sum();
    }
    for (int c = 0; c < grid * grid; ++c) {
        cells(c / grid, c % grid) /= 3.0 * cell_size_[static_cast<std::size_t>(c)];
    }
    const MatrixXd coeffs = dct_ * cells * dct_.transpose();
    VectorXd out(dims);
    for (int c = 1; c < grid * grid; ++c) {
        out[c - 1] = coeffs(c / grid, c % grid);
    }
    return out;
}

MatrixXd SurrogateEmbedding::adjoint(const VectorXd& g) const
{
    if (g.size() != dims) {
        throw std::invalid_argument("SurrogateEmbedding::adjoint: gradient size mismatch");
    }
    MatrixXd coeffs = MatrixXd::Zero(grid, grid);
    for (int c = 1; c < grid * grid; ++c) {
        coeffs(c / grid, c % grid) = g[c - 1];
    }
    const MatrixXd cells = dct_.transpose() * coeffs * dct_;
    MatrixXd out(static_cast<Eigen::Index>(cell_.size()), 3);
    for (std::size_t p = 0; p < cell_.size(); ++p) {
        const int c = cell_[p];
        out.row(static_cast<Eigen::Index>(p)).setConstant(cells(c / grid, c % grid) /
                                                         (3.0 * cell_size_[static_cast<std::size_t>(c)]));
    }
    return out;
}

} // namespace losses
} // namespace facetex
