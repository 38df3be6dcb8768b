/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: tests/test_rotation.cpp
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
#include "facetex/rotation.hpp"

#include "test_util.hpp"

#include "doctest.h"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

using namespace facetex;
using facetex::testing::random_vector;

TEST_CASE("rodrigues matches the angle-axis matrix")
{
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Vector3d w = random_vector(rng, -2.0, 2.0);
        const Matrix3d expected = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
        CHECK((rodrigues(w) - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("rodrigues of zero is exactly the identity")
{
    CHECK(rodrigues(Vector3d::Zero()) == Matrix3d::Identity());
}

TEST_CASE("rodrigues stays accurate for tiny angles")
{
    const Vector3d w(1e-5, -2e-5, 3e-6);
    const Matrix3d expected = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
    CHECK((rodrigues(w) - expected).cwiseAbs().maxCoeff() < 1e-16);
    CHECK((rodrigues(w) * rodrigues(w).transpose() - Matrix3d::Identity()).norm() < 1e-15);
}

TEST_CASE("rodrigues jacobian agrees with central differences")
{
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector3d w = trial % 5 == 0 ? Vector3d(random_vector(rng) * 1e-4) : random_vector(rng, -2.0, 2.0);
        const auto jac = rodrigues_jacobian(w);
        const double h = 1e-6;
        for (int k = 0; k < 3; ++k) {
            Vector3d wp = w, wm = w;
            wp[k] += h;
            wm[k] -= h;
            const Matrix3d fd = (rodrigues(wp) - rodrigues(wm)) / (2.0 * h);
            CHECK((jac[static_cast<std::size_t>(k)] - fd).norm() < 1e-8);
        }
    }
}

TEST_CASE("skew reproduces the cross product")
{
    const Vector3d a(1.0, -2.0, 0.5);
    const Vector3d b(0.3, 4.0, -1.0);
    CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
    CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
}

TEST_CASE("rotation_log inverts rodrigues below a half turn")
{
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        Vector3d w = random_vector(rng);
        w *= rng.uniform(0.0, 3.0) / w.norm();
        CHECK((rotation_log(rodrigues(w)) - w).norm() < 1e-10);
    }
    CHECK(rotation_log(Matrix3d::Identity()).norm() == 0.0);
}

TEST_CASE("euler angles compose roll, pitch and yaw in that order")
{
    const double yaw = 0.3, pitch = -0.2, roll = 0.7;
    const Matrix3d expected = (Eigen::AngleAxisd(roll, Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Vector3d::UnitX()) *
                               Eigen::AngleAxisd(yaw, Vector3d::UnitY()))
                                  .toRotationMatrix();
    CHECK((euler_yaw_pitch_roll(yaw, pitch, roll) - expected).norm() < 1e-15);
    CHECK(euler_yaw_pitch_roll(0.0, 0.0, 0.0).isIdentity(0.0));
}
