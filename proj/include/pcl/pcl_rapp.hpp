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

// Non-RT RIC predictive closed loop rApp: forecasts to adaptive UE limits,
// PRB quotas, RAN slice descriptors and O-Cloud scaling directives.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcl/error.hpp"
#include "pcl/forecaster/model.hpp"
#include "pcl/kpi_pipeline.hpp"
#include "pcl/slice_config.hpp"
#include "pcl/types.hpp"

namespace pcl {

struct AdaptiveLimit {
    std::string slice_id;
    CellId cell;
    long hour = 0;  // the hour the limit governs
    long max_active_ues = 0;
    double prb_quota_pct = 0.0;

    SliceParams params() const { return {max_active_ues, prb_quota_pct}; }

    void validate() const {
        pcl::validate(params(), "adaptive limit " + slice_id + "/" + to_string(cell));
        if (max_active_ues == 0 && prb_quota_pct != 0.0)
            throw ContractError("adaptive limit with zero UEs must have zero PRB quota");
    }

    friend bool operator==(const AdaptiveLimit&, const AdaptiveLimit&) = default;
};

struct SliceState {
    std::string slice_id;
    CellId cell;
    SliceParams params;
};

enum class SchedulerLayer { MacScheduler };
enum class SliceParameter { MaxActiveUes, PrbQuotaPct };
enum class ScaleDirection { ScaleUp, ScaleDown, Hold };

inline const char* layer_name(SchedulerLayer) { return "MAC_SCHEDULER"; }

inline const char* parameter_name(SliceParameter p) {
    return p == SliceParameter::MaxActiveUes ? "MAX_ACTIVE_UES" : "PRB_QUOTA_PCT";
}

inline const char* direction_name(ScaleDirection d) {
    switch (d) {
        case ScaleDirection::ScaleUp: return "SCALE_UP";
        case ScaleDirection::ScaleDown: return "SCALE_DOWN";
        case ScaleDirection::Hold: return "HOLD";
    }
    return "?";
}

inline SchedulerLayer layer_from_name(std::string_view s) {
    if (s == "MAC_SCHEDULER") return SchedulerLayer::MacScheduler;
    throw ParseError("unknown layer '" + std::string(s) + "'");
}

inline SliceParameter parameter_from_name(std::string_view s) {
    if (s == "MAX_ACTIVE_UES") return SliceParameter::MaxActiveUes;
    if (s == "PRB_QUOTA_PCT") return SliceParameter::PrbQuotaPct;
    throw ParseError("unknown parameter '" + std::string(s) + "'");
}

inline ScaleDirection direction_from_name(std::string_view s) {
    if (s == "SCALE_UP") return ScaleDirection::ScaleUp;
    if (s == "SCALE_DOWN") return ScaleDirection::ScaleDown;
    if (s == "HOLD") return ScaleDirection::Hold;
    throw ParseError("unknown direction '" + std::string(s) + "'");
}

struct LayerDescriptor {
    SchedulerLayer layer = SchedulerLayer::MacScheduler;
    SliceParameter parameter = SliceParameter::MaxActiveUes;
    double value = 0.0;
    ScaleDirection direction = ScaleDirection::Hold;

    friend bool operator==(const LayerDescriptor&, const LayerDescriptor&) = default;
};

inline bool valid_plmn(std::string_view plmn) {
    return (plmn.size() == 5 || plmn.size() == 6) &&
           std::all_of(plmn.begin(), plmn.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct RanSliceDescriptor {
    std::string slice_id;
    std::string plmn_id;
    std::vector<LayerDescriptor> layer_descriptors;
    long timestamp_hour = 0;

    void validate() const {
        if (slice_id.empty()) throw ContractError("descriptor slice id is empty");
        if (!valid_plmn(plmn_id)) throw ContractError("PLMN id '" + plmn_id + "' is not 5 or 6 digits");
        if (layer_descriptors.empty()) throw ContractError("descriptor has no layer descriptors");
        for (const auto& d : layer_descriptors) {
            if (d.parameter == SliceParameter::MaxActiveUes) {
                if (!(d.value >= 0.0) || d.value != std::floor(d.value) || d.value > 1e15)
                    throw ContractError("MAX_ACTIVE_UES must be a non-negative integer");
            } else if (!(d.value >= 0.0 && d.value <= kCellCapacityPct)) {
                throw ContractError("PRB_QUOTA_PCT must lie in [0,100]");
            }
        }
    }

    friend bool operator==(const RanSliceDescriptor&, const RanSliceDescriptor&) = default;
};

// A descriptor together with the cells it addresses.
struct A1Policy {
    RanSliceDescriptor descriptor;
    std::vector<CellId> scope;

    friend bool operator==(const A1Policy&, const A1Policy&) = default;
};

enum class SlicePriority { High, Low };

inline SlicePriority priority_from_name(std::string_view s) {
    if (s == "high") return SlicePriority::High;
    if (s == "low") return SlicePriority::Low;
    throw ConfigError("priority must be 'high' or 'low', got '" + std::string(s) + "'");
}

inline const char* priority_name(SlicePriority p) { return p == SlicePriority::High ? "high" : "low"; }

struct CloudScalingDirective {
    std::string slice_id;
    long target_vm_count = 0;
    long target_cpu_units = 0;
    long target_mem_units = 0;
    bool activate = true;
    long timestamp_hour = 0;

    void validate() const {
        if (slice_id.empty()) throw ContractError("directive slice id is empty");
        if (target_vm_count < 0 || target_cpu_units < 0 || target_mem_units < 0)
            throw ContractError("directive targets must be >= 0");
        if (!activate && (target_vm_count != 0 || target_cpu_units != 0 || target_mem_units != 0))
            throw ContractError("deactivation directive must have zero targets");
    }

    friend bool operator==(const CloudScalingDirective&, const CloudScalingDirective&) = default;
};

// VMs are provisioned in blocks of `ues_per_vm` admitted UEs.
struct CloudSizing {
    long ues_per_vm = 10;
    long cpu_per_vm = 2;
    long mem_per_vm = 4;

    void validate() const {
        if (ues_per_vm < 1) throw ConfigError("ues_per_vm must be >= 1");
        if (cpu_per_vm < 0 || mem_per_vm < 0) throw ConfigError("cpu/mem per VM must be >= 0");
    }
};

// ceil(forecast * (1 + margin)). The relative slack keeps products such as
// 10 * 1.1 from rounding up past the intended integer.
inline long compute_adaptive_limit(double forecast_ues, double margin = 0.0) {
    if (!(forecast_ues >= 0.0) || !(margin >= 0.0) || !std::isfinite(forecast_ues) || !std::isfinite(margin))
        throw ContractError("compute_adaptive_limit needs finite non-negative forecast and margin");
    const double x = forecast_ues * (1.0 + margin);
    return static_cast<long>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

inline double derive_prb_quota(long limit_ues, double prb_per_ue_pct, double cell_cap_pct = kCellCapacityPct) {
    if (limit_ues < 0) throw ContractError("limit must be >= 0");
    if (!(prb_per_ue_pct > 0.0) || !std::isfinite(prb_per_ue_pct))
        throw ContractError("prb_per_ue_pct must be positive");
    if (!(cell_cap_pct > 0.0 && cell_cap_pct <= kCellCapacityPct))
        throw ContractError("cell_cap_pct must lie in (0,100]");
    return std::min(static_cast<double>(limit_ues) * prb_per_ue_pct, cell_cap_pct);
}

// Mean of prb_share_pct / active_ues over hours with active UEs, pooled over
// the cells of each slice. A slice that never had users gets the whole cell
// per UE; its limit is zero whenever its forecast is.
inline std::map<std::string, double> estimate_prb_per_ue(std::span<const SliceSeries> train) {
    std::map<std::string, std::pair<double, long>> acc;
    for (const auto& s : train) {
        auto& [sum, n] = acc[s.slice_id];
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s.active_ues[i] > 0.0) {
                sum += s.prb_share_pct[i] / s.active_ues[i];
                ++n;
            }
    }
    std::map<std::string, double> out;
    for (const auto& [id, a] : acc) out[id] = a.second > 0 && a.first > 0.0 ? a.first / static_cast<double>(a.second) : kCellCapacityPct;
    return out;
}

inline RanSliceDescriptor build_slice_descriptor(const std::string& slice_id, const std::string& plmn_id,
                                                 const SliceState& current, const AdaptiveLimit& target) {
    if (current.slice_id != slice_id || target.slice_id != slice_id || current.cell != target.cell)
        throw ContractError("descriptor current/target refer to different slices");
    target.validate();
    RanSliceDescriptor d{slice_id, plmn_id, {}, target.hour};
    auto emit = [&](SliceParameter p, double cur, double tgt) {
        if (tgt == cur) return;
        d.layer_descriptors.push_back({SchedulerLayer::MacScheduler, p, tgt,
                                       tgt > cur ? ScaleDirection::ScaleUp : ScaleDirection::ScaleDown});
    };
    emit(SliceParameter::MaxActiveUes, static_cast<double>(current.params.max_active_ues),
         static_cast<double>(target.max_active_ues));
    emit(SliceParameter::PrbQuotaPct, current.params.prb_quota_pct, target.prb_quota_pct);
    if (d.layer_descriptors.empty())
        d.layer_descriptors.push_back({SchedulerLayer::MacScheduler, SliceParameter::MaxActiveUes,
                                       static_cast<double>(target.max_active_ues), ScaleDirection::Hold});
    d.validate();
    return d;
}

inline CloudScalingDirective infer_cloud_scaling(const std::string& slice_id, double forecast_ues,
                                                 const CloudSizing& sizing, SlicePriority priority, long hour,
                                                 double margin = 0.0) {
    sizing.validate();
    const long limit = compute_adaptive_limit(forecast_ues, margin);
    CloudScalingDirective d{slice_id, 0, 0, 0, true, hour};
    if (priority == SlicePriority::Low && forecast_ues == 0.0) {
        d.activate = false;
        return d;
    }
    d.target_vm_count = (limit + sizing.ues_per_vm - 1) / sizing.ues_per_vm;
    d.target_cpu_units = d.target_vm_count * sizing.cpu_per_vm;
    d.target_mem_units = d.target_vm_count * sizing.mem_per_vm;
    return d;
}

struct LoopConfig {
    std::string plmn_id = "40486";
    double margin = 0.0;
    double cell_cap_pct = kCellCapacityPct;
    std::map<std::string, double> prb_per_ue;  // by slice id
    std::map<std::string, SlicePriority> priority;  // absent means high
    CloudSizing sizing;

    void validate() const {
        if (!valid_plmn(plmn_id)) throw ConfigError("plmn_id must be 5 or 6 digits");
        if (!(margin >= 0.0) || !std::isfinite(margin)) throw ConfigError("margin must be >= 0");
        if (!(cell_cap_pct > 0.0 && cell_cap_pct <= kCellCapacityPct)) throw ConfigError("cell_cap_pct must lie in (0,100]");
        for (const auto& [id, v] : prb_per_ue)
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("prb_per_ue for slice " + id + " must be positive");
        sizing.validate();
    }
};

struct LoopOutput {
    std::vector<AdaptiveLimit> limits;  // in history order
    std::vector<A1Policy> policies;     // per cell, quota decreases first
    std::vector<CloudScalingDirective> directives;  // by slice id

    friend bool operator==(const LoopOutput&, const LoopOutput&) = default;
};

// Forecast of series' value at `hour` from the values strictly before it.
inline double forecast_at(const ForecastModel& m, const SliceSeries& s, long hour) {
    const long have = std::min(hour, s.end_hour()) - s.start_hour;
    const auto need = static_cast<long>(required_window(m));
    if (hour > s.end_hour() || have < need)
        throw LoopError("insufficient history for " + s.key() + " at hour " + std::to_string(hour) + ": have " +
                        std::to_string(std::max(have, 0L)) + " of " + std::to_string(need) + " hours ending at " +
                        std::to_string(hour - 1));
    std::span<const double> all(s.active_ues.data(), static_cast<std::size_t>(have));
    const auto window = m.kind == ModelKind::Lstm ? all.last(static_cast<std::size_t>(need)) : all;
    return predict_next(m, window).front();
}

// Fills each limit's PRB quota from its UE limit, then rescales any cell
// whose quotas oversubscribe it.
inline void assign_quotas(std::vector<AdaptiveLimit>& limits, const LoopConfig& cfg) {
    std::map<CellId, std::vector<std::size_t>> by_cell;
    for (std::size_t i = 0; i < limits.size(); ++i) {
        auto ppu = cfg.prb_per_ue.find(limits[i].slice_id);
        if (ppu == cfg.prb_per_ue.end()) throw LoopError("no PRB-per-UE estimate for slice " + limits[i].slice_id);
        limits[i].prb_quota_pct = derive_prb_quota(limits[i].max_active_ues, ppu->second, cfg.cell_cap_pct);
        by_cell[limits[i].cell].push_back(i);
    }
    for (const auto& [cell, idx] : by_cell) {
        std::vector<double> q;
        for (auto i : idx) q.push_back(limits[i].prb_quota_pct);
        if (rescale_to_cap(q))
            for (std::size_t k = 0; k < idx.size(); ++k) limits[idx[k]].prb_quota_pct = q[k];
    }
}

// Descriptors and directives that move `current` to `limits`. `demand` is
// the expected UE count per slice, summed over cells.
inline LoopOutput plan_actions(long hour, std::vector<AdaptiveLimit> limits, const std::map<std::string, double>& demand,
                               const NodeSliceConfig& current, const LoopConfig& cfg) {
    LoopOutput out;
    out.limits = std::move(limits);
    std::map<CellId, std::vector<std::size_t>> by_cell;
    for (std::size_t i = 0; i < out.limits.size(); ++i) by_cell[out.limits[i].cell].push_back(i);
    for (auto& [cell, idx] : by_cell) {
        // Quota decreases go first so the node never sees a transient sum > 100.
        auto down = [&](std::size_t i) {
            return out.limits[i].prb_quota_pct < current.get_or_zero(cell, out.limits[i].slice_id).prb_quota_pct;
        };
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const bool da = down(a), db = down(b);
            if (da != db) return da;
            return out.limits[a].slice_id < out.limits[b].slice_id;
        });
        for (auto i : idx) {
            const auto& lim = out.limits[i];
            SliceState cur{lim.slice_id, cell, current.get_or_zero(cell, lim.slice_id)};
            out.policies.push_back({build_slice_descriptor(lim.slice_id, cfg.plmn_id, cur, lim), {cell}});
        }
    }
    for (const auto& [id, f] : demand) {
        auto p = cfg.priority.find(id);
        out.directives.push_back(infer_cloud_scaling(id, f, cfg.sizing,
                                                     p == cfg.priority.end() ? SlicePriority::High : p->second, hour,
                                                     cfg.margin));
    }
    return out;
}

// One pass of the loop for `hour`. Pure: everything it reads is passed in.
inline LoopOutput closed_loop_step(long hour, std::span<const SliceSeries> history,
                                   const std::map<std::string, ForecastModel>& models,
                                   const NodeSliceConfig& current, const LoopConfig& cfg) {
    cfg.validate();
    std::vector<AdaptiveLimit> limits;
    std::map<std::string, double> demand;
    for (const auto& s : history) {
        auto it = models.find(s.key());
        if (it == models.end()) throw LoopError("no model for " + s.key());
        const double f = forecast_at(it->second, s, hour);
        demand[s.slice_id] += f;
        limits.push_back({s.slice_id, s.cell, hour, compute_adaptive_limit(f, cfg.margin), 0.0});
    }
    assign_quotas(limits, cfg);
    return plan_actions(hour, std::move(limits), demand, current, cfg);
}

// What the loop does when it cannot forecast: re-assert the static limits,
// keyed by series key.
inline LoopOutput static_fallback_step(long hour, std::span<const SliceSeries> history,
                                       const std::map<std::string, long>& static_limits,
                                       const NodeSliceConfig& current, const LoopConfig& cfg) {
    cfg.validate();
    std::vector<AdaptiveLimit> limits;
    std::map<std::string, double> demand;
    for (const auto& s : history) {
        auto it = static_limits.find(s.key());
        if (it == static_limits.end()) throw LoopError("no static limit for " + s.key());
        demand[s.slice_id] += static_cast<double>(it->second);
        limits.push_back({s.slice_id, s.cell, hour, it->second, 0.0});
    }
    assign_quotas(limits, cfg);
    return plan_actions(hour, std::move(limits), demand, current, cfg);
}

// ceil of the train-period mean of active UEs, keyed by series key. Entries
// in `per_slice` override the default for every cell of that slice.
inline std::map<std::string, long> static_limits(std::span<const SliceSeries> train,
                                                 const std::map<std::string, long>& per_slice = {}) {
    std::map<std::string, long> out;
    for (const auto& s : train) {
        if (auto o = per_slice.find(s.slice_id); o != per_slice.end()) {
            if (o->second < 0) throw ConfigError("static limit for slice " + s.slice_id + " must be >= 0");
            out[s.key()] = o->second;
            continue;
        }
        if (s.size() == 0) throw ContractError("empty training series " + s.key());
        double sum = 0.0;
        for (double v : s.active_ues) sum += v;
        out[s.key()] = compute_adaptive_limit(sum / static_cast<double>(s.size()));
    }
    return out;
}

}  // namespace pcl
