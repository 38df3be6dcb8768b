/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: include/facetex/gradcheck.hpp
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

#ifndef FACETEX_GRADCHECK_HPP_
#define FACETEX_GRADCHECK_HPP_

#include "facetex/autodiff.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace facetex {
namespace gradcheck {

/// Builds a scalar loss from leaves recorded on \p tape.
using Builder = std::function<ad::Var(ad::Tape& tape, const std::vector<ad::Var>& leaves)>;

struct Comparison
{
    double normwise = 0.0;    // |g_ad - g_fd| / max(|g_ad|, |g_fd|)
    double elementwise = 0.0; // max_i |d_i| / max(|g_ad,i|, |g_fd,i|, floor)
};

/**
 * Central differences with step \p h on every entry of every input, compared with the
 * tape gradient. The elementwise floor is \p floor_ratio times the largest gradient
 * magnitude, which keeps near-zero entries from dominating.
 */
Comparison compare(const Builder& loss, std::vector<MatrixXd> inputs, double h = 1e-6, double floor_ratio = 1e-3);

struct CheckResult
{
    std::string name;
    int trials = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool elementwise = false;
    bool passed() const { return max_error <= tolerance; }
};

struct SuiteOptions
{
    int trials = 200;
    std::uint64_t seed = 1;
};

/// Names of the individual checks, in run order.
std::vector<std::string> check_names();

/// One named check. Throws std::invalid_argument for an unknown name.
CheckResult run_check(const std::string& name, const SuiteOptions& options = {});

/// "all" or a single check name.
std::vector<CheckResult> run_suite(const std::string& suite, const SuiteOptions& options = {});

} // namespace gradcheck
} // namespace facetex

#endif /* FACETEX_GRADCHECK_HPP_ */
