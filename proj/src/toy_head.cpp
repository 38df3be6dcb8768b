/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/toy_head.cpp
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
#include "facetex/toy_head.hpp"

#include <Eigen/Geometry>
#include <Eigen/Householder>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

namespace facetex {
namespace model {

namespace {

struct Icosphere
{
    std::vector<Vector3d> dirs; // unit directions
    std::vector<Face> faces;    // counter-clockwise seen from outside
};

Icosphere make_icosphere(int subdivisions)
{
    const double t = std::numbers::phi;
    Icosphere s;
    const double raw[12][3] = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                               {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (const auto& r : raw) {
        s.dirs.push_back(Vector3d(r[0], r[1], r[2]).normalized());
    }
    s.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
               {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) {
                return it->second;
            }
            s.dirs.push_back((s.dirs[static_cast<std::size_t>(a)] + s.dirs[static_cast<std::size_t>(b)]).normalized());
            const int id = static_cast<int>(s.dirs.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(s.faces.size() * 4);
        for (const auto& f : s.faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        s.faces = std::move(next);
    }
    return s;
}

// Equal-area azimuthal chart around +z. The back pole maps to the bottom edge.
Vector2d chart(const Vector3d& d)
{
    if (d.z() <= -1.0 + 1e-12) {
        return {0.5, 1.0};
    }
    const double k = std::sqrt(2.0 / (1.0 + d.z()));
    const double u = std::clamp(0.5 + k * d.x() / 4.0, 0.0, 1.0);
    const double v = std::clamp(0.5 - k * d.y() / 4.0, 0.0, 1.0);
    return {u, v};
}

// A 68-point facial layout in [-1,1]^2 (x right, y up), in the usual annotation order.
std::vector<Vector2d> landmark_layout()
{
    const double pi = std::numbers::pi;
    std::vector<Vector2d> pts;
    for (int i = 0; i < 17; ++i) { // jaw line
        const double phi = pi + pi * i / 16.0;
        pts.emplace_back(0.85 * std::cos(phi), 0.1 + 0.9 * std::sin(phi));
    }
    for (int side = -1; side <= 1; side += 2) { // brows, left then right
        for (int i = 0; i < 5; ++i) {
            const double s = i / 4.0;
            const double x = side < 0 ? -0.7 + 0.55 * s : 0.15 + 0.55 * s;
            pts.emplace_back(x, 0.45 + 0.08 * std::sin(pi * s));
        }
    }
    for (int i = 0; i < 4; ++i) { // nose bridge
        pts.emplace_back(0.0, 0.3 - 0.1 * i);
    }
    for (int i = 0; i < 5; ++i) { // nostrils
        pts.emplace_back(-0.2 + 0.1 * i, -0.1 - 0.04 * std::sin(pi * i / 4.0));
    }
    for (int side = -1; side <= 1; side += 2) { // eyes
        for (int i = 0; i < 6; ++i) {
            const double a = pi - 2.0 * pi * i / 6.0;
            pts.emplace_back(0.4 * side + 0.15 * std::cos(a), 0.28 + 0.06 * std::sin(a));
        }
    }
    for (int i = 0; i < 12; ++i) { // outer lips
        const double a = pi - 2.0 * pi * i / 12.0;
        pts.emplace_back(0.35 * std::cos(a), -0.4 + 0.14 * std::sin(a));
    }
    for (int i = 0; i < 8; ++i) { // inner lips
        const double a = pi - 2.0 * pi * i / 8.0;
        pts.emplace_back(0.2 * std::cos(a), -0.4 + 0.06 * std::sin(a));
    }
    return pts;
}

Vector3d layout_direction(const Vector2d& p)
{
    return Vector3d(0.8 * p.x(), 0.8 * p.y(), 1.0).normalized();
}

// Real spherical-harmonic-like polynomials of degree 0..3 (unnormalised).
double shape_function(int k, const Vector3d& d)
{
    const double x = d.x(), y = d.y(), z = d.z();
    switch (k) {
    case 0: return 1.0;
    case 1: return y;
    case 2: return z;
    case 3: return x;
    case 4: return x * y;
    case 5: return y * z;
    case 6: return 3.0 * z * z - 1.0;
    case 7: return x * z;
    case 8: return x * x - y * y;
    case 9: return y * (3.0 * x * x - y * y);
    case 10: return x * y * z;
    case 11: return y * (5.0 * z * z - 1.0);
    case 12: return z * (5.0 * z * z - 3.0);
    case 13: return x * (5.0 * z * z - 1.0);
    case 14: return z * (x * x - y * y);
    default: return x * (x * x - 3.0 * y * y);
    }
}

struct Bump
{
    Vector2d centre;    // layout coordinates
    Vector3d direction; // displacement direction, model frame
};

// Removes the first-order similarity motions (translation, rotation and scale about the
// template centroid) from every column, as Procrustes alignment before PCA would, so that
// no coefficient can stand in for the pose or the camera.
void remove_similarity(MatrixXd& basis, const MatrixXd& vertices)
{
    const Eigen::Index nv = vertices.rows();
    const Eigen::RowVector3d centroid = vertices.colwise().mean();
    MatrixXd gen = MatrixXd::Zero(3 * nv, 7);
    for (Eigen::Index i = 0; i < nv; ++i) {
        const Vector3d r = (vertices.row(i) - centroid).transpose();
        for (int k = 0; k < 3; ++k) {
            gen(3 * i + k, k) = 1.0;
            gen.block(3 * i, 3 + k, 3, 1) = Vector3d::Unit(k).cross(r);
        }
        gen.block(3 * i, 6, 3, 1) = r;
    }
    const Eigen::HouseholderQR<MatrixXd> qr(gen);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(3 * nv, 7);
    basis -= q * (q.transpose() * basis);
}

// Scales each column so that its largest vertex displacement equals amplitude.
void normalize_peaks(MatrixXd& basis, double amplitude)
{
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        const Eigen::Map<const Eigen::Matrix<double, 3, Eigen::Dynamic>> d(basis.col(k).data(), 3, basis.rows() / 3);
        const double peak = d.colwise().norm().maxCoeff();
        if (peak > 0.0) {
            basis.col(k) *= amplitude / peak;
        }
    }
}

} // namespace

BlendshapeBasis make_toy_head(const ToyHeadOptions& options)
{
    if (options.subdivisions < 0 || options.subdivisions > 6) {
        throw std::invalid_argument("make_toy_head: subdivisions must be in [0, 6]");
    }
    if (options.num_shape < 1 || options.num_shape > 16 || options.num_expr < 1 || options.num_expr > 8) {
        throw std::invalid_argument("make_toy_head: need 1..16 shape and 1..8 expression components");
    }
    if (!(options.radius > 0.0)) {
        throw std::invalid_argument("make_toy_head: radius must be positive");
    }
    const Icosphere sphere = make_icosphere(options.subdivisions);
    const auto nv = static_cast<Eigen::Index>(sphere.dirs.size());
    const Vector3d axes = options.radius * Vector3d(0.85, 1.05, 0.95);

    const Vector3d nose_dir = layout_direction({0.0, 0.05});
    const double nose_height = 0.18 * options.radius;

    BlendshapeBasis b;
    b.faces = sphere.faces;
    b.template_vertices.resize(nv, 3);
    b.uv_coords.resize(nv, 2);
    for (Eigen::Index i = 0; i < nv; ++i) {
        const Vector3d& d = sphere.dirs[static_cast<std::size_t>(i)];
        const double nose = std::exp(-(1.0 - d.dot(nose_dir)) / 0.012);
        b.template_vertices.row(i) = (axes.cwiseProduct(d) + nose_height * nose * Vector3d::UnitZ()).transpose();
        b.uv_coords.row(i) = chart(d).transpose();
    }

    const double shape_amp = 0.12 * options.radius;
    b.shape_basis = MatrixXd::Zero(3 * nv, options.num_shape);
    for (int k = 0; k < options.num_shape; ++k) {
        for (Eigen::Index i = 0; i < nv; ++i) {
            const Vector3d& d = sphere.dirs[static_cast<std::size_t>(i)];
            b.shape_basis.block(3 * i, k, 3, 1) = shape_function(k, d) * d;
        }
    }
    remove_similarity(b.shape_basis, b.template_vertices);
    normalize_peaks(b.shape_basis, shape_amp);

    const Bump bumps[8] = {
        {{-0.35, -0.4}, Vector3d(-1.0, 0.3, 0.0)}, {{0.35, -0.4}, Vector3d(1.0, 0.3, 0.0)},
        {{0.0, -0.28}, Vector3d(0.0, 1.0, 0.3)},   {{0.0, -0.55}, Vector3d(0.0, -1.0, 0.3)},
        {{-0.4, 0.45}, Vector3d(0.0, 1.0, 0.0)},   {{0.4, 0.45}, Vector3d(0.0, 1.0, 0.0)},
        {{0.0, -0.8}, Vector3d(0.0, -1.0, 0.2)},   {{0.0, -0.05}, Vector3d(0.0, 0.0, 1.0)}};
    const double expr_amp = 0.1 * options.radius;
    const double width2 = 0.02;
    b.expr_basis = MatrixXd::Zero(3 * nv, options.num_expr);
    for (int k = 0; k < options.num_expr; ++k) {
        const Vector3d c = layout_direction(bumps[k].centre);
        const Vector3d dir = bumps[k].direction.normalized();
        for (Eigen::Index i = 0; i < nv; ++i) {
            const double w = std::exp(-(1.0 - sphere.dirs[static_cast<std::size_t>(i)].dot(c)) / width2);
            b.expr_basis.block(3 * i, k, 3, 1) = w * dir;
        }
    }
    remove_similarity(b.expr_basis, b.template_vertices);
    normalize_peaks(b.expr_basis, expr_amp);

    std::vector<char> used(static_cast<std::size_t>(nv), 0);
    for (const auto& p : landmark_layout()) {
        const Vector3d target = layout_direction(p);
        int best = -1;
        double best_dot = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < nv; ++i) {
            const double dot = sphere.dirs[static_cast<std::size_t>(i)].dot(target);
            if (!used[static_cast<std::size_t>(i)] && dot > best_dot) {
                best_dot = dot;
                best = static_cast<int>(i);
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        b.landmark_indices.push_back(best);
    }

    for (Eigen::Index i = 0; i < nv; ++i) {
        const Vector3d& d = sphere.dirs[static_cast<std::size_t>(i)];
        if (d.y() < -0.3 && d.z() > -0.2) {
            b.jaw_region.push_back(static_cast<int>(i));
        }
    }
    b.jaw_pivot = Vector3d(0.0, -0.15 * axes.y(), -0.4 * axes.z());
    b.validate();
    return b;
}

} // namespace model
} // namespace facetex
