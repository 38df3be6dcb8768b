/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/graph_ops.cpp
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
#include "facetex/graph_ops.hpp"

#include "facetex/rotation.hpp"
#include "facetex/shading.hpp"

#include <algorithm>

namespace facetex {
namespace ad {

namespace {

Tape& tape_of(const Var& v)
{
    if (!v.valid()) {
        throw std::invalid_argument("operation on a detached variable");
    }
    return *v.tape();
}

void require_shape(const Var& v, Eigen::Index rows, Eigen::Index cols, const char* what)
{
    if (v.rows() != rows || v.cols() != cols) {
        throw std::invalid_argument(std::string(what) + ": unexpected shape");
    }
}

} // namespace

Var reconstruct_mesh(const model::BlendshapeBasis& basis, const Var& shape, const Var& expression)
{
    require_shape(shape, basis.num_shape(), 1, "reconstruct_mesh(shape)");
    require_shape(expression, basis.num_expr(), 1, "reconstruct_mesh(expression)");
    MatrixXd value = model::reconstruct_mesh(basis, shape.value(), expression.value());
    const model::BlendshapeBasis* b = &basis;
    return tape_of(shape).record(std::move(value), {shape, expression},
                                 [b](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                     const RowMatrixXd rm = g;
                                     const Eigen::Map<const VectorXd> flat(rm.data(), rm.size());
                                     if (in[0]) in[0]->noalias() += b->shape_basis.transpose() * flat;
                                     if (in[1]) in[1]->noalias() += b->expr_basis.transpose() * flat;
                                 });
}

Var rotate_about(const Var& points, const Var& rotation, const Vector3d& pivot, const std::vector<int>& rows)
{
    require_shape(rotation, 3, 3, "rotate_about(rotation)");
    if (points.cols() != 3) {
        throw std::invalid_argument("rotate_about: points must be N x 3");
    }
    for (int r : rows) {
        if (r < 0 || r >= points.rows()) {
            throw std::invalid_argument("rotate_about: row index out of range");
        }
    }
    const Matrix3d rot = rotation.value();
    MatrixXd value = rot == Matrix3d::Identity() ? points.value() : model::rotate_about(points.value(), rot, pivot, rows);
    const MatrixXd* pv = &points.value();
    return tape_of(points).record(
        std::move(value), {points, rotation}, [pv, rot, pivot, rows](const MatrixXd& g, std::span<MatrixXd* const> in) {
            auto each = [&](auto&& fn) {
                if (rows.empty()) {
                    for (Eigen::Index i = 0; i < pv->rows(); ++i) fn(i);
                } else {
                    for (int i : rows) fn(static_cast<Eigen::Index>(i));
                }
            };
            if (in[0]) {
                MatrixXd& dp = *in[0];
                if (rows.empty()) {
                    dp.noalias() += g * rot;
                } else {
                    MatrixXd gi = g;
                    each([&](Eigen::Index i) { gi.row(i) = g.row(i) * rot; });
                    dp += gi;
                }
            }
            if (in[1]) {
                Matrix3d dr = Matrix3d::Zero();
                each([&](Eigen::Index i) {
                    dr.noalias() += g.row(i).transpose() * (pv->row(i).transpose() - pivot).transpose();
                });
                *in[1] += dr;
            }
        });
}

Var apply_pose(const model::BlendshapeBasis& basis, const Var& vertices, const Var& pose)
{
    require_shape(pose, 6, 1, "apply_pose(pose)");
    Var out = vertices;
    if (!basis.jaw_region.empty()) {
        out = rotate_about(out, rodrigues(block(pose, 3, 0, 3, 1)), basis.jaw_pivot, basis.jaw_region);
    }
    return rotate_about(out, rodrigues(block(pose, 0, 0, 3, 1)), basis.template_centroid(), {});
}

Var weak_perspective(const Var& vertices, const Var& cam_scale, const Var& cam_rot, const Var& cam_trans)
{
    require_shape(cam_scale, 1, 1, "weak_perspective(scale)");
    require_shape(cam_rot, 3, 1, "weak_perspective(rotation)");
    require_shape(cam_trans, 3, 1, "weak_perspective(translation)");
    if (vertices.cols() != 3) {
        throw std::invalid_argument("weak_perspective: vertices must be N x 3");
    }
    const double s = cam_scale.scalar();
    const Vector3d w = cam_rot.value();
    const Vector3d t = cam_trans.value();
    auto proj = model::project(vertices.value(), s, w, t);
    const Matrix3d r = facetex::rodrigues(w);
    const auto jac = rodrigues_jacobian(w);
    const MatrixXd* pv = &vertices.value();
    MatrixXd cam_xy = ((*pv) * r.transpose()).rowwise() + t.transpose();
    return tape_of(vertices).record(
        std::move(proj.points), {vertices, cam_scale, cam_rot, cam_trans},
        [pv, s, r, jac, cam = std::move(cam_xy)](const MatrixXd& g, std::span<MatrixXd* const> in) {
            MatrixXd dcam = MatrixXd::Zero(g.rows(), 3); // d loss / d (R v + t)
            dcam.leftCols<2>() = s * g;
            if (in[0]) in[0]->noalias() += dcam * r;
            if (in[1]) (*in[1])(0, 0) += g.cwiseProduct(cam.leftCols<2>()).sum();
            if (in[2]) {
                const Matrix3d dr = dcam.transpose() * (*pv);
                for (int k = 0; k < 3; ++k) {
                    (*in[2])(k, 0) += dr.cwiseProduct(jac[k]).sum();
                }
            }
            if (in[3]) *in[3] += dcam.colwise().sum().transpose();
        });
}

Var bilinear_sample(const Var& texture, int resolution, const MatrixXd& uv)
{
    require_shape(texture, static_cast<Eigen::Index>(resolution) * resolution, 3, "bilinear_sample(texture)");
    if (uv.cols() != 2) {
        throw std::invalid_argument("bilinear_sample: uv must be K x 2");
    }
    std::vector<render::BilinearTaps> taps(static_cast<std::size_t>(uv.rows()));
    const MatrixXd& tex = texture.value();
    MatrixXd value(uv.rows(), 3);
    for (Eigen::Index k = 0; k < uv.rows(); ++k) {
        auto& t = taps[static_cast<std::size_t>(k)];
        t = render::bilinear_taps(resolution, uv.row(k).transpose());
        Vector3d c = Vector3d::Zero();
        for (int q = 0; q < 4; ++q) {
            c += t.weight[q] * tex.row(t.texel[q]).transpose();
        }
        value.row(k) = c.transpose();
    }
    return tape_of(texture).record(std::move(value), {texture},
                                   [taps = std::move(taps)](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                       if (!in[0]) return;
                                       for (std::size_t k = 0; k < taps.size(); ++k) {
                                           for (int q = 0; q < 4; ++q) {
                                               in[0]->row(taps[k].texel[q]) +=
                                                   taps[k].weight[q] * g.row(static_cast<Eigen::Index>(k));
                                           }
                                       }
                                   });
}

Var sh_shade(const Var& albedo, const Var& normals, const Var& light)
{
    if (albedo.cols() != 3 || normals.rows() != albedo.rows() || normals.cols() != 3) {
        throw std::invalid_argument("sh_shade: albedo and normals must both be K x 3");
    }
    require_shape(light, 9, 3, "sh_shade(light)");
    const MatrixXd* av = &albedo.value();
    const MatrixXd* nv = &normals.value();
    const SHCoefficients l = light.value();
    MatrixXd value(av->rows(), 3);
    for (Eigen::Index k = 0; k < av->rows(); ++k) {
        value.row(k) = render::sh_shade(av->row(k).transpose(), nv->row(k).transpose(), l).transpose();
    }
    return tape_of(albedo).record(
        std::move(value), {albedo, normals, light}, [av, nv, l](const MatrixXd& g, std::span<MatrixXd* const> in) {
            for (Eigen::Index k = 0; k < av->rows(); ++k) {
                const Vector3d n = nv->row(k).transpose();
                const auto h = render::sh_basis(n);
                const Vector3d irr = l.transpose() * h;
                Vector3d gk = g.row(k).transpose();
                for (int c = 0; c < 3; ++c) {
                    if ((*av)(k, c) * irr[c] < 0.0) gk[c] = 0.0; // clamped at zero
                }
                const Vector3d a = av->row(k).transpose();
                if (in[0]) in[0]->row(k) += gk.cwiseProduct(irr).transpose();
                const Vector3d ga = gk.cwiseProduct(a); // d loss / d irradiance
                if (in[2]) in[2]->noalias() += h * ga.transpose();
                if (in[1]) {
                    const auto dh = render::sh_basis_jacobian(n);
                    in[1]->row(k) += (ga.transpose() * l.transpose() * dh);
                }
            }
        });
}

Var compose_image(const Var& colors, const std::vector<int>& pixels, int width, int height,
                  const Vector3d& background)
{
    if (colors.cols() != 3 || colors.rows() != static_cast<Eigen::Index>(pixels.size())) {
        throw std::invalid_argument("compose_image: need one colour row per pixel");
    }
    const int n = width * height;
    for (int p : pixels) {
        if (p < 0 || p >= n) {
            throw std::invalid_argument("compose_image: pixel index out of range");
        }
    }
    const MatrixXd* cv = &colors.value();
    MatrixXd value(n, 3);
    value.rowwise() = background.transpose();
    for (std::size_t k = 0; k < pixels.size(); ++k) {
        value.row(pixels[k]) = cv->row(static_cast<Eigen::Index>(k)).cwiseMin(1.0);
    }
    return tape_of(colors).record(std::move(value), {colors},
                                  [cv, pixels](const MatrixXd& g, std::span<MatrixXd* const> in) {
                                      if (!in[0]) return;
                                      for (std::size_t k = 0; k < pixels.size(); ++k) {
                                          const auto row = static_cast<Eigen::Index>(k);
                                          for (int c = 0; c < 3; ++c) {
                                              if ((*cv)(row, c) <= 1.0) (*in[0])(row, c) += g(pixels[k], c);
                                          }
                                      }
                                  });
}

Var render_view(const render::ViewGeometry& view, const Var& texture, int resolution, const Var& light,
                const Vector3d& background)
{
    Tape& tape = tape_of(texture);
    const Var albedo = bilinear_sample(texture, resolution, view.shading.uv);
    const Var normals = tape.constant(view.shading.normals);
    const Var shaded = sh_shade(albedo, normals, light);
    return compose_image(shaded, view.shading.pixels, view.fragments.width, view.fragments.height, background);
}

ParamVars attach(Tape& tape, const optim::ParamTensors& p, const Trainable& which)
{
    auto make = [&tape](bool trainable, const MatrixXd& v, const char* name) {
        return trainable ? tape.leaf(v, name) : tape.constant(v);
    };
    ParamVars out;
    out.shape = make(which.shape, p.shape, "shape");
    out.expression = make(which.expression, p.expression, "expression");
    out.pose = make(which.pose, p.pose, "pose");
    out.cam_scale = make(which.camera, p.cam_scale, "cam_scale");
    out.cam_rot = make(which.camera, p.cam_rot, "cam_rot");
    out.cam_trans = make(which.camera, p.cam_trans, "cam_trans");
    out.light = make(which.light, p.light, "light");
    return out;
}

Var landmarks_2d(const model::BlendshapeBasis& basis, const ParamVars& p)
{
    const Var mesh = reconstruct_mesh(basis, p.shape, p.expression);
    const Var posed = apply_pose(basis, mesh, p.pose);
    const Var lmk = gather_rows(posed, basis.landmark_indices);
    return weak_perspective(lmk, p.cam_scale, p.cam_rot, p.cam_trans);
}

} // namespace ad
} // namespace facetex
