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

// Slice-aware cell emulation: enforces the node's slice configuration against
// the hour's demand, scores it, and reports served KPIs back over O1.

#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcl/control_plane.hpp"
#include "pcl/error.hpp"
#include "pcl/forecaster/model.hpp"
#include "pcl/kpi_pipeline.hpp"
#include "pcl/pcl_rapp.hpp"
#include "pcl/slice_config.hpp"
#include "pcl/traffic_model.hpp"

namespace pcl {

struct ServiceCounts {
    long under_served = 0;
    long over_served = 0;
    long non_optimal = 0;

    friend bool operator==(const ServiceCounts&, const ServiceCounts&) = default;
};

inline ServiceCounts compute_service_metrics(long actual_ues, long limit_ues) {
    if (actual_ues < 0 || limit_ues < 0) throw ContractError("service metrics need non-negative counts");
    const long under = std::max(actual_ues - limit_ues, 0L);
    const long over = std::max(limit_ues - actual_ues, 0L);
    return {under, over, under + over};
}

struct ServiceMetrics {
    long hour = 0;
    std::string slice_id;
    CellId cell;
    double actual_raw = 0.0;  // demand before rounding, kept for audit
    long actual_ues = 0;
    long limit_ues = 0;
    long under_served = 0;
    long over_served = 0;
    long non_optimal = 0;
    double prb_quota_pct = 0.0;
    double prb_demand_pct = 0.0;
    double prb_served_pct = 0.0;

    friend bool operator==(const ServiceMetrics&, const ServiceMetrics&) = default;
};

// How the O1 report counts active UEs. Starved UEs stay attached, so the
// observed count includes them; Admitted caps the count at the slice limit.
enum class UeFeedback { Observed, Admitted };

inline UeFeedback ue_feedback_from_name(std::string_view s) {
    if (s == "observed") return UeFeedback::Observed;
    if (s == "admitted") return UeFeedback::Admitted;
    throw ConfigError("ue_feedback must be 'observed' or 'admitted', got '" + std::string(s) + "'");
}

struct StepResult {
    std::vector<ServiceMetrics> metrics;  // by (cell, slice)
    std::vector<VesEvent> events;         // one per cell
};

// `at_hour` holds the raw per-QCI demand of every cell for `hour`.
inline StepResult step_hour(long hour, const NodeSliceConfig& node, std::span<const KpiSample> at_hour,
                            const SliceMapping& mapping, PrbAllocator allocator = PrbAllocator::VolumeProportional,
                            UeFeedback feedback = UeFeedback::Observed) {
    if (at_hour.size() % kAllQcis.size() != 0) throw SimulationError("demand is not cells x 4 QCIs");
    StepResult r;
    std::set<CellId> seen;
    const auto ids = mapping.slice_ids();
    for (std::size_t i = 0; i < at_hour.size(); i += kAllQcis.size()) {
        std::span<const KpiSample> group(at_hour.data() + i, kAllQcis.size());
        const CellId cell = group[0].cell;
        for (const auto& s : group)
            if (s.hour != hour || s.cell != cell) throw SimulationError("demand rows do not match hour " + std::to_string(hour));
        seen.insert(cell);
        const auto share = per_bearer_prb_share(group, allocator);

        VesEvent ev{to_string(cell), hour, {}};
        double cell_prb = 0.0;
        for (const auto& id : ids) {
            double ues = 0.0, prb = 0.0;
            for (const auto& s : group)
                if (mapping.slice_of(s.qci) == id) {
                    ues += s.active_ues;
                    prb += share[qci_index(s.qci)];
                }
            prb = std::min(prb, kCellCapacityPct);
            const SliceParams cfg = node.get_or_zero(cell, id);
            ServiceMetrics m{hour, id, cell, ues, std::llround(ues), cfg.max_active_ues, 0, 0, 0,
                             cfg.prb_quota_pct, prb, std::min(prb, cfg.prb_quota_pct)};
            const auto c = compute_service_metrics(m.actual_ues, m.limit_ues);
            m.under_served = c.under_served;
            m.over_served = c.over_served;
            m.non_optimal = c.non_optimal;
            cell_prb += m.prb_served_pct;

            // Served KPIs, split back over the slice's QCIs by the demand mix.
            const double vol_frac = prb > 0.0 ? m.prb_served_pct / prb : 1.0;
            const double ue_frac =
                feedback == UeFeedback::Admitted && ues > 0.0 ? std::min(1.0, static_cast<double>(m.limit_ues) / ues) : 1.0;
            for (const auto& s : group)
                if (mapping.slice_of(s.qci) == id) {
                    ev.measurement_fields[ues_key(s.qci)] = s.active_ues * ue_frac;
                    ev.measurement_fields[volume_key(s.qci)] = s.volume_gb * vol_frac;
                }
            r.metrics.push_back(std::move(m));
        }
        ev.measurement_fields[kPrbKey] = std::min(cell_prb, kCellCapacityPct);
        r.events.push_back(std::move(ev));
    }
    for (const auto& [cell, _] : node.cells)
        if (!seen.contains(cell))
            throw SimulationError("no demand for configured cell " + to_string(cell) + " at hour " + std::to_string(hour));
    return r;
}

// ---- run reports -----------------------------------------------------------

struct SliceTotals {
    long under_served = 0;
    long over_served = 0;
    long non_optimal = 0;
    long entries = 0;

    friend bool operator==(const SliceTotals&, const SliceTotals&) = default;
};

struct LoopStats {
    long fallback_hours = 0;
    long policies = 0;
    long e2_applied = 0;
    long e2_stale = 0;
    long e2_rescaled = 0;
    long o2_directives = 0;
    long ves_events = 0;
    long dead_letters = 0;

    friend bool operator==(const LoopStats&, const LoopStats&) = default;
};

struct RunReport {
    std::string mode;
    std::vector<ServiceMetrics> hourly;  // by (hour, cell, slice)
    LoopStats stats;
    CloudState final_cloud;

    std::map<std::string, SliceTotals> per_slice() const {
        std::map<std::string, SliceTotals> t;
        for (const auto& m : hourly) {
            auto& s = t[m.slice_id];
            s.under_served += m.under_served;
            s.over_served += m.over_served;
            s.non_optimal += m.non_optimal;
            ++s.entries;
        }
        return t;
    }

    SliceTotals totals() const {
        SliceTotals g;
        for (const auto& [_, s] : per_slice()) {
            g.under_served += s.under_served;
            g.over_served += s.over_served;
            g.non_optimal += s.non_optimal;
            g.entries += s.entries;
        }
        return g;
    }
};

inline constexpr std::string_view kReportCsvHeader = "hour,slice,enb,cell,actual,limit,under,over,non_optimal";
inline constexpr std::string_view kAuditCsvHeader =
    "hour,slice,enb,cell,actual_raw,prb_quota_pct,prb_demand_pct,prb_served_pct";

inline void write_report_csv(std::ostream& out, const RunReport& r) {
    out << kReportCsvHeader << '\n';
    for (const auto& m : r.hourly)
        out << m.hour << ',' << m.slice_id << ',' << m.cell.enb_index << ',' << m.cell.cell_index << ','
            << m.actual_ues << ',' << m.limit_ues << ',' << m.under_served << ',' << m.over_served << ','
            << m.non_optimal << '\n';
}

inline void write_audit_csv(std::ostream& out, const RunReport& r) {
    out << kAuditCsvHeader << '\n';
    for (const auto& m : r.hourly)
        out << m.hour << ',' << m.slice_id << ',' << m.cell.enb_index << ',' << m.cell.cell_index << ','
            << format_double(m.actual_raw) << ',' << format_double(m.prb_quota_pct) << ','
            << format_double(m.prb_demand_pct) << ',' << format_double(m.prb_served_pct) << '\n';
}

inline nlohmann::ordered_json to_json(const SliceTotals& t) {
    return {{"under_served", t.under_served},
            {"over_served", t.over_served},
            {"non_optimal", t.non_optimal},
            {"entries", t.entries}};
}

inline nlohmann::ordered_json totals_json(const RunReport& r) {
    nlohmann::ordered_json slices = nlohmann::ordered_json::object();
    for (const auto& [id, t] : r.per_slice()) slices[id] = to_json(t);
    nlohmann::ordered_json j{{"mode", r.mode}, {"slices", std::move(slices)}, {"total", to_json(r.totals())}};
    if (r.mode == "dynamic") {
        const auto& s = r.stats;
        j["loop"] = {{"fallback_hours", s.fallback_hours}, {"policies", s.policies},
                     {"e2_applied", s.e2_applied},         {"e2_stale", s.e2_stale},
                     {"e2_rescaled", s.e2_rescaled},       {"o2_directives", s.o2_directives},
                     {"ves_events", s.ves_events},         {"dead_letters", s.dead_letters}};
        nlohmann::ordered_json cloud = nlohmann::ordered_json::object();
        for (const auto& [id, c] : r.final_cloud.slices)
            cloud[id] = {{"vm_count", c.vm_count}, {"cpu_units", c.cpu_units}, {"mem_units", c.mem_units},
                         {"active", c.active}};
        j["cloud"] = std::move(cloud);
    }
    return j;
}

// Reads back a report CSV written by write_report_csv.
inline std::vector<ServiceMetrics> parse_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kReportCsvHeader) throw ParseError("report CSV header mismatch", 1);
    std::vector<ServiceMetrics> out;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 9) throw ParseError("expected 9 columns", row);
        ServiceMetrics m;
        std::array<long, 8> v{};
        const std::array<std::size_t, 8> cols{0, 2, 3, 4, 5, 6, 7, 8};
        for (std::size_t k = 0; k < cols.size(); ++k) {
            auto x = parse_long(f[cols[k]]);
            if (!x) throw ParseError("non-integer field '" + std::string(f[cols[k]]) + "'", row);
            v[k] = *x;
        }
        m.hour = v[0];
        m.slice_id = std::string(f[1]);
        m.cell = {static_cast<int>(v[1]), static_cast<int>(v[2])};
        m.actual_ues = v[3];
        m.actual_raw = static_cast<double>(v[3]);
        m.limit_ues = v[4];
        m.under_served = v[5];
        m.over_served = v[6];
        m.non_optimal = v[7];
        out.push_back(std::move(m));
    }
    return out;
}

// ---- runs ------------------------------------------------------------------

struct RunSetup {
    SliceMapping mapping = SliceMapping::default_mapping();
    PrbAllocator allocator = PrbAllocator::VolumeProportional;
    LoopConfig loop;
    std::map<std::string, long> static_limits;  // by series key
};

// Node configuration enforcing the static limits.
inline NodeSliceConfig static_node_config(std::span<const SliceSeries> train, const RunSetup& setup) {
    std::vector<AdaptiveLimit> limits;
    for (const auto& s : train) {
        auto it = setup.static_limits.find(s.key());
        if (it == setup.static_limits.end()) throw ConfigError("no static limit for " + s.key());
        limits.push_back({s.slice_id, s.cell, 0, it->second, 0.0});
    }
    assign_quotas(limits, setup.loop);
    NodeSliceConfig node;
    for (const auto& l : limits) node.cells[l.cell].slices[l.slice_id] = l.params();
    return node;
}

inline std::span<const KpiSample> samples_at(const Dataset& ds, long hour) {
    const std::size_t per_hour = ds.cells().size() * kAllQcis.size();
    return std::span<const KpiSample>(ds.samples()).subspan(static_cast<std::size_t>(hour - ds.start_hour()) * per_hour,
                                                            per_hour);
}

inline RunReport run_static(const Dataset& train, const Dataset& test, const RunSetup& setup) {
    const auto series = tag_and_aggregate(train, setup.mapping, setup.allocator);
    const NodeSliceConfig node = static_node_config(series, setup);
    RunReport r{"static", {}, {}, {}};
    for (long h = test.start_hour(); h < test.end_hour(); ++h) {
        auto step = step_hour(h, node, samples_at(test, h), setup.mapping, setup.allocator);
        r.hourly.insert(r.hourly.end(), step.metrics.begin(), step.metrics.end());
    }
    return r;
}

struct DynamicOptions {
    TransportMode transport = TransportMode::InProcess;
    std::uint16_t base_port = 0;  // 0 picks ephemeral ports
    UeFeedback feedback = UeFeedback::Observed;
    bool warm_start = true;  // seed the loop's history with the training data
};

// Replays the full loop each test hour:
// O1 history -> rApp -> A1 -> xApp -> E2 -> node, and rApp -> O2 -> O-Cloud.
inline RunReport run_dynamic(const Dataset& train, const Dataset& test, const RunSetup& setup,
                             const std::map<std::string, ForecastModel>& models, const DynamicOptions& opt = {}) {
    const auto train_series = tag_and_aggregate(train, setup.mapping, setup.allocator);
    std::vector<SliceSeries> history = train_series;
    if (!opt.warm_start)
        for (auto& s : history) s = SliceSeries{s.slice_id, s.cell, test.start_hour(), {}, {}, {}};

    NodeSliceConfig node = static_node_config(train_series, setup);
    CloudState cloud;
    const auto ids = setup.mapping.slice_ids();
    XApp xapp(std::set<std::string>(ids.begin(), ids.end()));

    auto port = [&](int k) -> std::uint16_t { return opt.base_port == 0 ? 0 : static_cast<std::uint16_t>(opt.base_port + k); };
    auto a1 = make_link(opt.transport, port(0));
    auto e2 = make_link(opt.transport, port(1));
    auto o2 = make_link(opt.transport, port(2));
    auto o1 = make_link(opt.transport, port(3));

    RunReport r{"dynamic", {}, {}, {}};
    for (long h = test.start_hour(); h < test.end_hour(); ++h) {
        LoopOutput plan;
        try {
            plan = closed_loop_step(h, history, models, node, setup.loop);
        } catch (const LoopError&) {
            ++r.stats.fallback_hours;
            plan = static_fallback_step(h, history, setup.static_limits, node, setup.loop);
        }
        for (const auto& p : plan.policies) a1_publish(p, *a1);
        for (const auto& d : plan.directives) o2_request(d, *o2);
        r.stats.policies += static_cast<long>(plan.policies.size());

        // Fixed drain order keeps the run deterministic in either transport.
        xapp.drain(*a1, node, *e2);
        const auto e2s = e2_drain(*e2, node);
        r.stats.e2_applied += static_cast<long>(e2s.applied);
        r.stats.e2_stale += static_cast<long>(e2s.stale);
        r.stats.e2_rescaled += static_cast<long>(e2s.rescaled);
        r.stats.o2_directives += static_cast<long>(o2_drain(*o2, cloud));

        auto step = step_hour(h, node, samples_at(test, h), setup.mapping, setup.allocator, opt.feedback);
        r.hourly.insert(r.hourly.end(), step.metrics.begin(), step.metrics.end());
        for (const auto& ev : step.events) o1->send(encode(ev));

        VesCollector collector;
        while (auto frame = o1->receive()) {
            ++r.stats.ves_events;
            if (!collector.try_ingest(decode_ves(*frame))) ++r.stats.dead_letters;
        }
        if (collector.size() == 0) throw SimulationError("no O1 reports collected for hour " + std::to_string(h));
        const auto fed = tag_and_aggregate(collector.take_dataset(), setup.mapping, setup.allocator);
        if (fed.size() != history.size()) throw SimulationError("O1 reports do not cover every slice series");
        for (std::size_t i = 0; i < fed.size(); ++i) {
            if (fed[i].key() != history[i].key()) throw SimulationError("O1 series order mismatch");
            history[i].append(h, fed[i].active_ues[0], fed[i].volume_gb[0], fed[i].prb_share_pct[0]);
        }
    }
    r.final_cloud = cloud;
    return r;
}

}  // namespace pcl
