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

// Per-cell slice configuration held by an E2 node and mirrored by the rApp.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>

#include "pcl/error.hpp"
#include "pcl/types.hpp"

namespace pcl {

inline constexpr double kCellCapacityPct = 100.0;

struct SliceParams {
    long max_active_ues = 0;
    double prb_quota_pct = 0.0;

    friend bool operator==(const SliceParams&, const SliceParams&) = default;
};

inline void validate(const SliceParams& p, const std::string& what) {
    if (p.max_active_ues < 0) throw ContractError(what + ": max_active_ues must be >= 0");
    if (!(p.prb_quota_pct >= 0.0 && p.prb_quota_pct <= kCellCapacityPct))
        throw ContractError(what + ": prb_quota_pct must lie in [0,100]");
}

struct CellSliceConfig {
    std::map<std::string, SliceParams> slices;
    long version = 0;  // last applied sequence number

    double quota_sum() const {
        double s = 0.0;
        for (const auto& kv : slices) s += kv.second.prb_quota_pct;
        return s;
    }

    friend bool operator==(const CellSliceConfig&, const CellSliceConfig&) = default;
};

struct NodeSliceConfig {
    std::map<CellId, CellSliceConfig> cells;

    std::optional<SliceParams> get(const CellId& c, const std::string& slice) const {
        auto it = cells.find(c);
        if (it == cells.end()) return std::nullopt;
        auto s = it->second.slices.find(slice);
        if (s == it->second.slices.end()) return std::nullopt;
        return s->second;
    }

    // Unconfigured slices behave as paused.
    SliceParams get_or_zero(const CellId& c, const std::string& slice) const {
        return get(c, slice).value_or(SliceParams{});
    }

    long version(const CellId& c) const {
        auto it = cells.find(c);
        return it == cells.end() ? 0 : it->second.version;
    }

    friend bool operator==(const NodeSliceConfig&, const NodeSliceConfig&) = default;
};

// Scales `quotas` proportionally so they sum to at most `cap`. Returns true
// when a rescale happened.
inline bool rescale_to_cap(std::span<double> quotas, double cap = kCellCapacityPct) {
    double sum = std::accumulate(quotas.begin(), quotas.end(), 0.0);
    if (sum <= cap) return false;
    for (double& q : quotas) q = q * cap / sum;
    // Rounding can leave the sum a few ulps above the cap.
    while ((sum = std::accumulate(quotas.begin(), quotas.end(), 0.0)) > cap) {
        auto it = std::max_element(quotas.begin(), quotas.end());
        *it = std::max(0.0, std::nextafter(*it - (sum - cap), 0.0));
    }
    return true;
}

}  // namespace pcl
