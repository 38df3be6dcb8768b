/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: tests/test_morphable_model.cpp
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
#include "facetex/rotation.hpp"
#include "facetex/toy_head.hpp"

#include "test_util.hpp"

#include "doctest.h"

#include <Eigen/Geometry>

#include <numbers>

using namespace facetex;
using namespace facetex::testing;

namespace {

const model::BlendshapeBasis& head()
{
    static const auto basis = model::make_toy_head();
    return basis;
}

// A 68-vertex strip mesh whose landmarks are its vertices in order.
model::BlendshapeBasis strip_basis()
{
    model::BlendshapeBasis b;
    b.template_vertices.resize(68, 3);
    b.uv_coords.resize(68, 2);
    for (int i = 0; i < 68; ++i) {
        b.template_vertices.row(i) << i, (i % 2) * 1.5, 0.25 * i;
        b.uv_coords.row(i) << i / 67.0, (i % 2);
        b.landmark_indices.push_back(i);
    }
    for (int i = 0; i + 2 < 68; ++i) {
        b.faces.push_back({i, i + 1, i + 2});
    }
    Rng rng(3);
    b.shape_basis = random_matrix(rng, 3 * 68, 2);
    b.expr_basis = random_matrix(rng, 3 * 68, 1);
    return b;
}

} // namespace

TEST_CASE("toy head has the documented size and passes validation")
{
    const auto& b = head();
    CHECK(b.num_vertices() == 642);
    CHECK(b.faces.size() == 1280);
    CHECK(b.num_shape() == 16);
    CHECK(b.num_expr() == 8);
    CHECK(b.landmark_indices.size() == 68);
    CHECK_FALSE(b.jaw_region.empty());
    CHECK_NOTHROW(b.validate());
}

TEST_CASE("toy head bases carry no first-order similarity motion")
{
    const auto& b = head();
    const Eigen::RowVector3d c = b.template_vertices.colwise().mean();
    const Eigen::Index nv = b.num_vertices();
    MatrixXd gen = MatrixXd::Zero(3 * nv, 7);
    for (Eigen::Index i = 0; i < nv; ++i) {
        const Vector3d r = (b.template_vertices.row(i) - c).transpose();
        for (int k = 0; k < 3; ++k) {
            gen(3 * i + k, k) = 1.0;
            gen.block(3 * i, 3 + k, 3, 1) = Vector3d::Unit(k).cross(r);
        }
        gen.block(3 * i, 6, 3, 1) = r;
    }
    for (const MatrixXd* basis : {&b.shape_basis, &b.expr_basis}) {
        const MatrixXd proj = gen.transpose() * *basis;
        for (Eigen::Index k = 0; k < basis->cols(); ++k) {
            CHECK(proj.col(k).norm() < 1e-9 * gen.norm() * basis->col(k).norm());
        }
    }
}

TEST_CASE("basis validation rejects broken invariants")
{
    auto b = strip_basis();
    CHECK_NOTHROW(b.validate());
    SUBCASE("face index out of range")
    {
        b.faces.push_back({0, 1, 68});
    }
    SUBCASE("uv outside the unit square")
    {
        b.uv_coords(3, 0) = 1.5;
    }
    SUBCASE("repeated landmark")
    {
        b.landmark_indices[5] = b.landmark_indices[6];
    }
    SUBCASE("non-finite basis column")
    {
        b.shape_basis(0, 1) = std::numeric_limits<double>::quiet_NaN();
    }
    SUBCASE("no expression components")
    {
        b.expr_basis.resize(3 * 68, 0);
    }
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

TEST_CASE("reconstruct_mesh with zero coefficients is the template")
{
    const auto& b = head();
    const MatrixXd m = model::reconstruct_mesh(b, VectorXd::Zero(b.num_shape()), VectorXd::Zero(b.num_expr()));
    CHECK(bitwise_equal(m, b.template_vertices));
}

TEST_CASE("reconstruct_mesh matches a per-vertex loop")
{
    const auto& b = head();
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const VectorXd s = trial == 0 ? VectorXd(VectorXd::Unit(b.num_shape(), 0)) : VectorXd(random_matrix(rng, b.num_shape(), 1));
        const VectorXd e = trial == 0 ? VectorXd(VectorXd::Zero(b.num_expr())) : VectorXd(random_matrix(rng, b.num_expr(), 1));
        MatrixXd oracle = b.template_vertices;
        for (int v = 0; v < b.num_vertices(); ++v) {
            for (int k = 0; k < 3; ++k) {
                for (int i = 0; i < b.num_shape(); ++i) oracle(v, k) += s[i] * b.shape_basis(3 * v + k, i);
                for (int j = 0; j < b.num_expr(); ++j) oracle(v, k) += e[j] * b.expr_basis(3 * v + k, j);
            }
        }
        CHECK(max_abs_diff(model::reconstruct_mesh(b, s, e), oracle) < 1e-12);
    }
}

TEST_CASE("reconstruct_mesh is linear in the coefficients")
{
    const auto& b = head();
    Rng rng(6);
    const VectorXd u = random_matrix(rng, b.num_shape(), 1);
    const VectorXd s2 = random_matrix(rng, b.num_shape(), 1);
    const VectorXd e = random_matrix(rng, b.num_expr(), 1);
    const MatrixXd diff = model::reconstruct_mesh(b, 2.0 * u, e) - model::reconstruct_mesh(b, u, e);
    MatrixXd expected = MatrixXd::Zero(b.num_vertices(), 3);
    for (int v = 0; v < b.num_vertices(); ++v) {
        for (int k = 0; k < 3; ++k) expected(v, k) = b.shape_basis.row(3 * v + k).dot(u);
    }
    CHECK(max_abs_diff(diff, expected) < 1e-12);

    const double alpha = 0.3, beta = -1.7;
    const MatrixXd lhs = model::reconstruct_mesh(b, alpha * u + beta * s2, e);
    const MatrixXd rhs = alpha * model::reconstruct_mesh(b, u, e) + beta * model::reconstruct_mesh(b, s2, e) -
                         (alpha + beta - 1.0) * model::reconstruct_mesh(b, VectorXd::Zero(b.num_shape()), e);
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("reconstruct_mesh rejects mismatched coefficient vectors")
{
    const auto& b = head();
    CHECK_THROWS_AS(model::reconstruct_mesh(b, VectorXd::Zero(3), VectorXd::Zero(b.num_expr())), std::invalid_argument);
    CHECK_THROWS_AS(model::reconstruct_mesh(b, VectorXd::Zero(b.num_shape()), VectorXd::Zero(9)), std::invalid_argument);
}

TEST_CASE("apply_pose with zero pose is the identity")
{
    const auto& b = head();
    CHECK(bitwise_equal(model::apply_pose(b.template_vertices, Vector6d::Zero(), b), b.template_vertices));
}

TEST_CASE("a global half turn about z negates x and y about the centroid")
{
    const auto& b = head();
    Vector6d pose = Vector6d::Zero();
    pose[2] = std::numbers::pi;
    const MatrixXd posed = model::apply_pose(b.template_vertices, pose, b);
    const Vector3d c = b.template_centroid();
    for (int v = 0; v < b.num_vertices(); ++v) {
        const Vector3d before = b.template_vertices.row(v).transpose() - c;
        const Vector3d after = posed.row(v).transpose() - c;
        CHECK(std::abs(after.x() + before.x()) < 1e-12);
        CHECK(std::abs(after.y() + before.y()) < 1e-12);
        CHECK(std::abs(after.z() - before.z()) < 1e-12);
    }
}

TEST_CASE("jaw rotation leaves every vertex outside the jaw region untouched")
{
    const auto& b = head();
    Vector6d pose = Vector6d::Zero();
    pose.tail<3>() = Vector3d(0.3, 0.05, -0.02);
    const MatrixXd posed = model::apply_pose(b.template_vertices, pose, b);
    std::vector<char> in_jaw(static_cast<std::size_t>(b.num_vertices()), 0);
    for (int v : b.jaw_region) in_jaw[static_cast<std::size_t>(v)] = 1;
    int moved = 0;
    for (int v = 0; v < b.num_vertices(); ++v) {
        if (in_jaw[static_cast<std::size_t>(v)]) {
            moved += (posed.row(v) - b.template_vertices.row(v)).norm() > 0.0;
        } else {
            CHECK(bitwise_equal(posed.row(v), b.template_vertices.row(v)));
        }
    }
    CHECK(moved == static_cast<int>(b.jaw_region.size()));
}

TEST_CASE("a global rotation preserves pairwise distances")
{
    const auto& b = head();
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Vector6d pose = Vector6d::Zero();
        pose.head<3>() = random_vector(rng, -1.5, 1.5);
        const MatrixXd posed = model::apply_pose(b.template_vertices, pose, b);
        for (int k = 0; k < 50; ++k) {
            const int i = static_cast<int>(rng.uniform(0.0, b.num_vertices()));
            const int j = static_cast<int>(rng.uniform(0.0, b.num_vertices()));
            const double d0 = (b.template_vertices.row(i) - b.template_vertices.row(j)).norm();
            const double d1 = (posed.row(i) - posed.row(j)).norm();
            CHECK(std::abs(d0 - d1) < 1e-9);
        }
    }
}

TEST_CASE("apply_pose rejects a non-finite pose")
{
    Vector6d pose = Vector6d::Zero();
    pose[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(model::apply_pose(head().template_vertices, pose, head()), std::invalid_argument);
}

TEST_CASE("project by hand")
{
    MatrixXd v(1, 3);
    v << 0.5, -2.0, 7.0;
    auto p = model::project(v, 1.0, Vector3d::Zero(), Vector3d::Zero());
    CHECK(p.points(0, 0) == 0.5);
    CHECK(p.points(0, 1) == -2.0);
    CHECK(p.depth[0] == 7.0);

    v << 1.0, 1.0, 0.0;
    p = model::project(v, 2.0, Vector3d::Zero(), Vector3d(1.0, 0.0, 0.0));
    CHECK(p.points(0, 0) == 4.0);
    CHECK(p.points(0, 1) == 2.0);
}

TEST_CASE("project agrees with a homogeneous 4x4 pipeline")
{
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXd v = random_matrix(rng, 40, 3, -20.0, 20.0);
        const double s = rng.uniform(0.1, 3.0);
        const Vector3d w = random_vector(rng, -2.0, 2.0);
        const Vector3d t = random_vector(rng, -30.0, 30.0);
        Eigen::Matrix4d rigid = Eigen::Matrix4d::Identity();
        rigid.topLeftCorner<3, 3>() = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
        rigid.topRightCorner<3, 1>() = t;
        Eigen::Matrix4d ortho = Eigen::Matrix4d::Zero();
        ortho(0, 0) = s;
        ortho(1, 1) = s;
        ortho(2, 2) = 1.0;
        ortho(3, 3) = 1.0;
        const auto p = model::project(v, s, w, t);
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            const Eigen::Vector4d h = ortho * rigid * Eigen::Vector4d(v(i, 0), v(i, 1), v(i, 2), 1.0);
            CHECK(std::abs(p.points(i, 0) - h[0]) <= 1e-12 * (1.0 + std::abs(h[0])));
            CHECK(std::abs(p.points(i, 1) - h[1]) <= 1e-12 * (1.0 + std::abs(h[1])));
            CHECK(std::abs(p.depth[i] - h[2]) <= 1e-12 * (1.0 + std::abs(h[2])));
        }
    }
}

TEST_CASE("project depth ignores the camera scale")
{
    Rng rng(9);
    const MatrixXd v = random_matrix(rng, 30, 3);
    const Vector3d w = random_vector(rng), t = random_vector(rng);
    CHECK(bitwise_equal(model::project(v, 0.5, w, t).depth, model::project(v, 4.0, w, t).depth));
}

TEST_CASE("project rejects a non-positive scale")
{
    const MatrixXd v = MatrixXd::Zero(2, 3);
    CHECK_THROWS_AS(model::project(v, 0.0, Vector3d::Zero(), Vector3d::Zero()), std::invalid_argument);
    CHECK_THROWS_AS(model::project(v, -1.0, Vector3d::Zero(), Vector3d::Zero()), std::invalid_argument);
}

TEST_CASE("select_landmarks")
{
    const auto strip = strip_basis();
    CHECK(bitwise_equal(model::select_landmarks(strip.template_vertices, strip), strip.template_vertices));

    const auto& b = head();
    const MatrixXd t = model::select_landmarks(b.template_vertices, b);
    for (int i = 0; i < 68; ++i) {
        CHECK(bitwise_equal(t.row(i), b.template_vertices.row(b.landmark_indices[static_cast<std::size_t>(i)])));
    }

    Rng rng(10);
    const MatrixXd m = model::reconstruct_mesh(b, random_matrix(rng, b.num_shape(), 1), random_matrix(rng, b.num_expr(), 1));
    const MatrixXd sel = model::select_landmarks(m, b);
    MatrixXd oracle(68, 3);
    for (int i = 0; i < 68; ++i) {
        for (int k = 0; k < 3; ++k) oracle(i, k) = m(b.landmark_indices[static_cast<std::size_t>(i)], k);
    }
    CHECK(bitwise_equal(sel, oracle));

    auto broken = strip;
    broken.landmark_indices[0] = 500;
    CHECK_THROWS_AS(model::select_landmarks(strip.template_vertices, broken), std::invalid_argument);
}

TEST_CASE("projection commutes with landmark selection")
{
    const auto& b = head();
    Rng rng(14);
    const auto v = b.template_vertices;
    const Vector3d w = random_vector(rng), t = random_vector(rng);
    const MatrixXd a = model::project(model::select_landmarks(v, b), 1.3, w, t).points;
    const MatrixXd c = model::select_rows(model::project(v, 1.3, w, t).points, b.landmark_indices);
    CHECK(bitwise_equal(a, c));
}

TEST_CASE("face params validation")
{
    const auto& b = head();
    auto p = model::FaceParams::neutral(b);
    CHECK_NOTHROW(p.validate(b));
    SUBCASE("scale") { p.cam_scale = 0.0; }
    SUBCASE("nan") { p.cam_trans[1] = std::numeric_limits<double>::quiet_NaN(); }
    SUBCASE("half turn") { p.pose[0] = std::numbers::pi; }
    SUBCASE("jaw half turn") { p.pose[4] = -3.5; }
    SUBCASE("dimension") { p.shape = VectorXd::Zero(3); }
    CHECK_THROWS_AS(p.validate(b), std::invalid_argument);
}

TEST_CASE("basis assets round-trip exactly")
{
    TempDir dir("basis");
    const auto& b = head();
    model::save_basis(b, dir.path());
    for (const char* name : {"template.bin", "shape_basis.bin", "expr_basis.bin", "faces.bin", "uv.bin",
                             "landmarks.json", "jaw.json", "manifest.json"}) {
        CHECK(std::filesystem::exists(dir.path() / name));
    }
    const auto loaded = model::load_basis(dir.path());
    CHECK(bitwise_equal(loaded.template_vertices, b.template_vertices));
    CHECK(bitwise_equal(loaded.shape_basis, b.shape_basis));
    CHECK(bitwise_equal(loaded.expr_basis, b.expr_basis));
    CHECK(bitwise_equal(loaded.uv_coords, b.uv_coords));
    CHECK(loaded.faces == b.faces);
    CHECK(loaded.landmark_indices == b.landmark_indices);
    CHECK(loaded.jaw_region == b.jaw_region);
    CHECK(loaded.jaw_pivot == b.jaw_pivot);
}

TEST_CASE("loading a missing or truncated basis is an I/O error")
{
    TempDir dir("basis_bad");
    CHECK_THROWS_AS(model::load_basis(dir.path() / "nope"), IoError);
    model::save_basis(head(), dir.path());
    std::filesystem::resize_file(dir.path() / "faces.bin", 10);
    CHECK_THROWS_AS(model::load_basis(dir.path()), IoError);
}
