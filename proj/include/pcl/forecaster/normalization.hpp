/*
==================================================================================
   Copyright (c) 2026 The pcl-slicing Authors.

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
==================================================================================
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pcl/error.hpp"

namespace pcl {

// Min-max scaling to [0, 1]; a constant series maps to 0 with unit scale.
struct Normalization {
    double min = 0.0;
    double max = 1.0;

    static Normalization fit(std::span<const double> xs) {
        if (xs.empty()) throw ContractError("cannot normalize an empty series");
        auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
        return {*lo, *hi};
    }

    double scale() const noexcept { return max > min ? max - min : 1.0; }
    double normalize(double x) const noexcept { return (x - min) / scale(); }
    double denormalize(double z) const noexcept { return z * scale() + min; }

    std::vector<double> normalize(std::span<const double> xs) const {
        std::vector<double> out(xs.size());
        std::transform(xs.begin(), xs.end(), out.begin(), [this](double x) { return normalize(x); });
        return out;
    }

    friend bool operator==(const Normalization&, const Normalization&) = default;
};

inline void require_finite(std::span<const double> xs, const char* what) {
    for (double x : xs)
        if (!std::isfinite(x)) throw ContractError(std::string(what) + " contains a non-finite value");
}

}  // namespace pcl
