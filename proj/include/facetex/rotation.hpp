/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/rotation.hpp
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

#ifndef FACETEX_ROTATION_HPP_
#define FACETEX_ROTATION_HPP_

#include "facetex/common.hpp"

#include <array>

namespace facetex {

/**
 * Rotation matrix of an axis-angle vector (Rodrigues' formula).
 *
 * R = I + a(t) [w]x + b(t) [w]x^2 with t = |w|, a = sin(t)/t, b = (1 - cos(t))/t^2.
 * Below t = 1e-3 the coefficients switch to their Taylor series, so the result and
 * its derivative are accurate down to w = 0.
 */
Matrix3d rodrigues(const Vector3d& axis_angle);

/// dR/dw_k for k = 0, 1, 2.
std::array<Matrix3d, 3> rodrigues_jacobian(const Vector3d& axis_angle);

/// Skew-symmetric cross-product matrix [w]x.
Matrix3d skew(const Vector3d& w);

/// Inverse of rodrigues() for rotation angles in [0, pi].
Vector3d rotation_log(const Matrix3d& rotation);

/**
 * Head rotation from yaw (about y), pitch (about x) and roll (about z), applied in that
 * order: R = Rz(roll) * Rx(pitch) * Ry(yaw).
 */
Matrix3d euler_yaw_pitch_roll(double yaw, double pitch, double roll);

} // namespace facetex

#endif /* FACETEX_ROTATION_HPP_ */
