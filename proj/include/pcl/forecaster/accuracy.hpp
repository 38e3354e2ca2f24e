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
#include <optional>
#include <span>
#include <vector>

#include "pcl/error.hpp"

namespace pcl {

struct AccuracyReport {
    double tolerance_abs = 0.0;
    long n_points = 0;
    long n_within = 0;
    double accuracy_pct = 0.0;
};

inline AccuracyReport accuracy_with_tolerance(std::span<const double> predictions, std::span<const double> actuals,
                                              double tolerance_abs) {
    if (predictions.empty() || predictions.size() != actuals.size())
        throw ContractError("accuracy needs equal, non-zero lengths");
    if (!(tolerance_abs >= 0.0)) throw ContractError("tolerance must be >= 0");
    AccuracyReport r;
    r.tolerance_abs = tolerance_abs;
    r.n_points = static_cast<long>(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (std::abs(predictions[i] - actuals[i]) <= tolerance_abs) ++r.n_within;
    r.accuracy_pct = 100.0 * static_cast<double>(r.n_within) / static_cast<double>(r.n_points);
    return r;
}

// Within-tolerance fraction, tolerance = 1% of the reference series maximum.
// `reference_max` defaults to the maximum of `actuals`.
inline AccuracyReport accuracy(std::span<const double> predictions, std::span<const double> actuals,
                               std::optional<double> reference_max = std::nullopt) {
    if (actuals.empty()) throw ContractError("accuracy needs at least one point");
    const double ref = reference_max ? *reference_max : *std::max_element(actuals.begin(), actuals.end());
    return accuracy_with_tolerance(predictions, actuals, 0.01 * std::abs(ref));
}

}  // namespace pcl
