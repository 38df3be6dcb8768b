/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/morphable_model.cpp
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
#include "facetex/morphable_model.hpp"

#include "facetex/raw_io.hpp"
#include "facetex/rotation.hpp"
#include "facetex/shading.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace facetex {
namespace model {

Vector3d BlendshapeBasis::template_centroid() const
{
    return template_vertices.colwise().mean().transpose();
}

void BlendshapeBasis::validate() const
{
    const Eigen::Index nv = template_vertices.rows();
    if (nv < 1 || template_vertices.cols() != 3) {
        throw std::invalid_argument("basis: template must be N_v x 3 with N_v >= 1");
    }
    if (shape_basis.rows() != 3 * nv || expr_basis.rows() != 3 * nv) {
        throw std::invalid_argument("basis: shape/expression bases must have 3 * N_v rows");
    }
    if (shape_basis.cols() < 1 || expr_basis.cols() < 1) {
        throw std::invalid_argument("basis: need at least one shape and one expression component");
    }
    if (!template_vertices.allFinite() || !shape_basis.allFinite() || !expr_basis.allFinite()) {
        throw std::invalid_argument("basis: non-finite entries");
    }
    for (const auto& f : faces) {
        for (int i : f) {
            if (i < 0 || i >= nv) {
                throw std::invalid_argument("basis: face index out of range");
            }
        }
    }
    if (uv_coords.rows() != nv || uv_coords.cols() != 2) {
        throw std::invalid_argument("basis: uv_coords must be N_v x 2");
    }
    if (!uv_coords.allFinite() || uv_coords.minCoeff() < 0.0 || uv_coords.maxCoeff() > 1.0) {
        throw std::invalid_argument("basis: uv_coords outside [0,1]");
    }
    if (static_cast<int>(landmark_indices.size()) != num_landmarks) {
        throw std::invalid_argument("basis: expected 68 landmark indices");
    }
    std::set<int> seen;
    for (int i : landmark_indices) {
        if (i < 0 || i >= nv) {
            throw std::invalid_argument("basis: landmark index out of range");
        }
        if (!seen.insert(i).second) {
            throw std::invalid_argument("basis: landmark indices must be distinct");
        }
    }
    for (int i : jaw_region) {
        if (i < 0 || i >= nv) {
            throw std::invalid_argument("basis: jaw region index out of range");
        }
    }
    if (!jaw_pivot.allFinite()) {
        throw std::invalid_argument("basis: jaw pivot not finite");
    }
}

FaceParams FaceParams::neutral(const BlendshapeBasis& basis)
{
    FaceParams p;
    p.shape = VectorXd::Zero(basis.num_shape());
    p.expression = VectorXd::Zero(basis.num_expr());
    p.light = render::neutral_light();
    return p;
}

void FaceParams::validate(const BlendshapeBasis& basis) const
{
    if (shape.size() != basis.num_shape() || expression.size() != basis.num_expr()) {
        throw std::invalid_argument("params: coefficient dimensions do not match the basis");
    }
    if (!(cam_scale > 0.0)) {
        throw std::invalid_argument("params: camera scale must be positive");
    }
    if (!shape.allFinite() || !expression.allFinite() || !pose.allFinite() || !std::isfinite(cam_scale) ||
        !cam_rot.allFinite() || !cam_trans.allFinite() || !light.allFinite()) {
        throw std::invalid_argument("params: non-finite entries");
    }
    if (global_rotation().norm() >= std::numbers::pi || jaw_rotation().norm() >= std::numbers::pi) {
        throw std::invalid_argument("params: pose rotation angles must be below pi");
    }
}

MatrixXd reconstruct_mesh(const BlendshapeBasis& basis, const VectorXd& shape, const VectorXd& expression)
{
    if (shape.size() != basis.num_shape() || expression.size() != basis.num_expr()) {
        throw std::invalid_argument("reconstruct_mesh: coefficient dimensions do not match the basis");
    }
    const VectorXd offsets = basis.shape_basis * shape + basis.expr_basis * expression;
    MatrixXd mesh = basis.template_vertices;
    mesh += Eigen::Map<const RowMatrixXd>(offsets.data(), basis.num_vertices(), 3);
    return mesh;
}

MatrixXd rotate_about(const MatrixXd& points, const Matrix3d& rotation, const Vector3d& pivot,
                      const std::vector<int>& rows)
{
    MatrixXd out = points;
    auto rotate_row = [&](Eigen::Index i) {
        const Vector3d p = points.row(i).transpose() - pivot;
        out.row(i) = (rotation * p + pivot).transpose();
    };
    if (rows.empty()) {
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            rotate_row(i);
        }
    } else {
        for (int i : rows) {
            rotate_row(i);
        }
    }
    return out;
}

MatrixXd apply_pose(const MatrixXd& vertices, const Vector6d& pose, const BlendshapeBasis& basis)
{
    if (!pose.allFinite()) {
        throw std::invalid_argument("apply_pose: pose must be finite");
    }
    MatrixXd out = vertices;
    const Vector3d jaw = pose.tail<3>();
    if (!basis.jaw_region.empty() && !jaw.isZero(0.0)) {
        out = rotate_about(out, rodrigues(jaw), basis.jaw_pivot, basis.jaw_region);
    }
    const Vector3d global = pose.head<3>();
    if (!global.isZero(0.0)) {
        out = rotate_about(out, rodrigues(global), basis.template_centroid(), {});
    }
    return out;
}

Projection project(const MatrixXd& vertices, double cam_scale, const Vector3d& cam_rot, const Vector3d& cam_trans)
{
    if (!(cam_scale > 0.0)) {
        throw std::invalid_argument("project: camera scale must be positive");
    }
    const Matrix3d r = rodrigues(cam_rot);
    const MatrixXd cam = (vertices * r.transpose()).rowwise() + cam_trans.transpose();
    return {cam_scale * cam.leftCols<2>(), cam.col(2)};
}

MatrixXd select_rows(const MatrixXd& m, const std::vector<int>& rows)
{
    MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= m.rows()) {
            throw std::invalid_argument("select_rows: index out of range");
        }
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    return out;
}

MatrixXd select_landmarks(const MatrixXd& vertices, const BlendshapeBasis& basis)
{
    return select_rows(vertices, basis.landmark_indices);
}

PosedGeometry pose_and_project(const BlendshapeBasis& basis, const FaceParams& params)
{
    PosedGeometry g;
    g.vertices = apply_pose(reconstruct_mesh(basis, params.shape, params.expression), params.pose, basis);
    g.projection = project(g.vertices, params.cam_scale, params.cam_rot, params.cam_trans);
    return g;
}

MatrixXd landmark_projections(const BlendshapeBasis& basis, const FaceParams& params)
{
    return select_landmarks(pose_and_project(basis, params).projection.points, basis);
}

// -- asset files --------------------------------------------------------------

void save_basis(const BlendshapeBasis& basis, const std::filesystem::path& dir)
{
    basis.validate();
    std::filesystem::create_directories(dir);
    io::write_f64(dir / "template.bin", io::to_row_major(basis.template_vertices));
    io::write_f64(dir / "shape_basis.bin", io::to_row_major(basis.shape_basis));
    io::write_f64(dir / "expr_basis.bin", io::to_row_major(basis.expr_basis));
    io::write_f64(dir / "uv.bin", io::to_row_major(basis.uv_coords));
    std::vector<std::uint32_t> faces;
    faces.reserve(basis.faces.size() * 3);
    for (const auto& f : basis.faces) {
        for (int i : f) {
            faces.push_back(static_cast<std::uint32_t>(i));
        }
    }
    io::write_u32(dir / "faces.bin", faces);
    io::write_json(dir / "landmarks.json", basis.landmark_indices);
    nlohmann::json jaw;
    jaw["region"] = basis.jaw_region;
    jaw["pivot"] = {basis.jaw_pivot.x(), basis.jaw_pivot.y(), basis.jaw_pivot.z()};
    io::write_json(dir / "jaw.json", jaw);

    nlohmann::json manifest;
    const auto nv = basis.num_vertices();
    manifest["template"] = {nv, 3};
    manifest["shape_basis"] = {nv, 3, basis.num_shape()};
    manifest["expr_basis"] = {nv, 3, basis.num_expr()};
    manifest["faces"] = {basis.faces.size(), 3};
    manifest["uv"] = {nv, 2};
    io::write_json(dir / "manifest.json", manifest);
}

BlendshapeBasis load_basis(const std::filesystem::path& dir)
{
    const auto manifest = io::read_json(dir / "manifest.json");
    BlendshapeBasis basis;
    try {
        const auto t = manifest.at("template").get<std::vector<Eigen::Index>>();
        const auto s = manifest.at("shape_basis").get<std::vector<Eigen::Index>>();
        const auto e = manifest.at("expr_basis").get<std::vector<Eigen::Index>>();
        const auto f = manifest.at("faces").get<std::vector<Eigen::Index>>();
        const auto uv = manifest.at("uv").get<std::vector<Eigen::Index>>();
        if (t.size() != 2 || s.size() != 3 || e.size() != 3 || f.size() != 2 || uv.size() != 2) {
            throw IoError("manifest: unexpected array ranks");
        }
        basis.template_vertices = io::from_row_major(io::read_f64(dir / "template.bin"), t[0], t[1]);
        basis.shape_basis = io::from_row_major(io::read_f64(dir / "shape_basis.bin"), s[0] * s[1], s[2]);
        basis.expr_basis = io::from_row_major(io::read_f64(dir / "expr_basis.bin"), e[0] * e[1], e[2]);
        basis.uv_coords = io::from_row_major(io::read_f64(dir / "uv.bin"), uv[0], uv[1]);
        const auto faces = io::read_u32(dir / "faces.bin");
        if (static_cast<Eigen::Index>(faces.size()) != f[0] * f[1] || f[1] != 3) {
            throw IoError("faces.bin does not match the manifest");
        }
        basis.faces.resize(static_cast<std::size_t>(f[0]));
        for (std::size_t i = 0; i < basis.faces.size(); ++i) {
            for (std::size_t k = 0; k < 3; ++k) {
                basis.faces[i][k] = static_cast<int>(faces[3 * i + k]);
            }
        }
        basis.landmark_indices = io::read_json(dir / "landmarks.json").get<std::vector<int>>();
        const auto jaw = io::read_json(dir / "jaw.json");
        basis.jaw_region = jaw.at("region").get<std::vector<int>>();
        const auto pivot = jaw.at("pivot").get<std::vector<double>>();
        if (pivot.size() != 3) {
            throw IoError("jaw.json: pivot must have 3 entries");
        }
        basis.jaw_pivot = Vector3d(pivot[0], pivot[1], pivot[2]);
    } catch (const nlohmann::json::exception& ex) {
        throw IoError(std::string("basis manifest: ") + ex.what());
    }
    basis.validate();
    return basis;
}

} // namespace model
} // namespace facetex
