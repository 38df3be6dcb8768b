/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: src/rotation.cpp
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

#include "Eigen/Geometry"

#include <cmath>

namespace facetex {

namespace {

struct RodriguesCoefficients
{
    double a; // sin(t)/t
    double b; // (1 - cos(t))/t^2
    double c; // a'(t)/t
    double d; // b'(t)/t
};

RodriguesCoefficients coefficients(double t)
{
    const double t2 = t * t;
    if (t < 1e-3) {
        const double t4 = t2 * t2;
        return {1.0 - t2 / 6.0 + t4 / 120.0, 0.5 - t2 / 24.0 + t4 / 720.0, -1.0 / 3.0 + t2 / 30.0 - t4 / 840.0,
                -1.0 / 12.0 + t2 / 180.0 - t4 / 6720.0};
    }
    const double s = std::sin(t);
    const double co = std::cos(t);
    return {s / t, (1.0 - co) / t2, (t * co - s) / (t2 * t), (t * s - 2.0 * (1.0 - co)) / (t2 * t2)};
}

} // namespace

Matrix3d skew(const Vector3d& w)
{
    Matrix3d k;
    k << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return k;
}

Matrix3d rodrigues(const Vector3d& axis_angle)
{
    const auto co = coefficients(axis_angle.norm());
    const Matrix3d k = skew(axis_angle);
    return Matrix3d::Identity() + co.a * k + co.b * k * k;
}

std::array<Matrix3d, 3> rodrigues_jacobian(const Vector3d& axis_angle)
{
    const auto co = coefficients(axis_angle.norm());
    const Matrix3d k = skew(axis_angle);
    const Matrix3d k2 = k * k;
    std::array<Matrix3d, 3> jac;
    for (int i = 0; i < 3; ++i) {
        const Matrix3d ei = skew(Vector3d::Unit(i));
        jac[i] = co.a * ei + co.b * (ei * k + k * ei) + axis_angle[i] * (co.c * k + co.d * k2);
    }
    return jac;
}

Vector3d rotation_log(const Matrix3d& rotation)
{
    const Eigen::AngleAxisd aa(rotation);
    return aa.angle() * aa.axis();
}

Matrix3d euler_yaw_pitch_roll(double yaw, double pitch, double roll)
{
    const Matrix3d ry = Eigen::AngleAxisd(yaw, Vector3d::UnitY()).toRotationMatrix();
    const Matrix3d rx = Eigen::AngleAxisd(pitch, Vector3d::UnitX()).toRotationMatrix();
    const Matrix3d rz = Eigen::AngleAxisd(roll, Vector3d::UnitZ()).toRotationMatrix();
    return rz * rx * ry;
}

} // namespace facetex
