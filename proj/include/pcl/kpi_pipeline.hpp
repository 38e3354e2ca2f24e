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

// SMO data-collector emulation: VES event ingestion, per-bearer PRB
// attribution and slice tagging.

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcl/error.hpp"
#include "pcl/traffic_model.hpp"
#include "pcl/types.hpp"

namespace pcl {

struct VesEvent {
    std::string source_name;
    long start_epoch_hour = 0;
    std::map<std::string, double> measurement_fields;

    friend bool operator==(const VesEvent&, const VesEvent&) = default;
};

class IngestionError : public Error {
public:
    IngestionError(const std::string& what, VesEvent event)
        : Error("ingestion: " + what), event_(std::move(event)) {}
    const VesEvent& event() const noexcept { return event_; }

private:
    VesEvent event_;
};

inline std::string ues_key(Qci q) { return "active_ues_qci" + std::to_string(qci_number(q)); }
inline std::string volume_key(Qci q) { return "volume_gb_qci" + std::to_string(qci_number(q)); }
inline constexpr const char* kPrbKey = "dl_prb_util_pct";

// Parses "enb<i>-cell<j>".
inline std::optional<CellId> parse_source_name(std::string_view name) {
    constexpr std::string_view enb = "enb";
    constexpr std::string_view cell = "-cell";
    if (name.substr(0, enb.size()) != enb) return std::nullopt;
    auto dash = name.find(cell);
    if (dash == std::string_view::npos) return std::nullopt;
    auto e = parse_long(name.substr(enb.size(), dash - enb.size()));
    auto c = parse_long(name.substr(dash + cell.size()));
    if (!e || !c || *e < 0 || *c < 0) return std::nullopt;
    return CellId{static_cast<int>(*e), static_cast<int>(*c)};
}

inline std::vector<KpiSample> ingest_ves_event(const VesEvent& ev) {
    auto cell = parse_source_name(ev.source_name);
    if (!cell) throw IngestionError("malformed sourceName '" + ev.source_name + "'", ev);
    auto field = [&](const std::string& key) {
        auto it = ev.measurement_fields.find(key);
        if (it == ev.measurement_fields.end()) throw IngestionError("missing measurement '" + key + "'", ev);
        if (!std::isfinite(it->second) || it->second < 0.0)
            throw IngestionError("measurement '" + key + "' must be finite and >= 0", ev);
        return it->second;
    };
    const double prb = field(kPrbKey);
    if (prb > 100.0) throw IngestionError("dl_prb_util_pct must be in [0,100]", ev);
    std::vector<KpiSample> out;
    out.reserve(kAllQcis.size());
    for (Qci q : kAllQcis) out.push_back({ev.start_epoch_hour, *cell, q, field(ues_key(q)), field(volume_key(q)), prb});
    return out;
}

// One event per (hour, cell) of the dataset.
inline std::vector<VesEvent> dataset_to_events(const Dataset& ds) {
    std::vector<VesEvent> out;
    const auto& s = ds.samples();
    for (std::size_t i = 0; i < s.size(); i += kAllQcis.size()) {
        VesEvent ev{to_string(s[i].cell), s[i].hour, {}};
        for (std::size_t k = 0; k < kAllQcis.size(); ++k) {
            ev.measurement_fields[ues_key(s[i + k].qci)] = s[i + k].active_ues;
            ev.measurement_fields[volume_key(s[i + k].qci)] = s[i + k].volume_gb;
        }
        ev.measurement_fields[kPrbKey] = s[i].dl_prb_util_pct;
        out.push_back(std::move(ev));
    }
    return out;
}

inline nlohmann::ordered_json to_json(const VesEvent& ev) {
    nlohmann::ordered_json fields = nlohmann::ordered_json::object();
    for (Qci q : kAllQcis) {
        auto k = ues_key(q);
        if (auto it = ev.measurement_fields.find(k); it != ev.measurement_fields.end()) fields[k] = it->second;
    }
    for (Qci q : kAllQcis) {
        auto k = volume_key(q);
        if (auto it = ev.measurement_fields.find(k); it != ev.measurement_fields.end()) fields[k] = it->second;
    }
    for (const auto& [k, v] : ev.measurement_fields)
        if (!fields.contains(k)) fields[k] = v;
    nlohmann::ordered_json j;
    j["event"]["commonEventHeader"]["sourceName"] = ev.source_name;
    j["event"]["commonEventHeader"]["startEpochHour"] = ev.start_epoch_hour;
    j["event"]["measurementFields"] = std::move(fields);
    return j;
}

inline VesEvent ves_event_from_json(const nlohmann::json& j) {
    try {
        const auto& e = j.at("event");
        const auto& h = e.at("commonEventHeader");
        VesEvent ev{h.at("sourceName").get<std::string>(), h.at("startEpochHour").get<long>(), {}};
        for (const auto& [k, v] : e.at("measurementFields").items()) ev.measurement_fields[k] = v.get<double>();
        return ev;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("malformed VES event: ") + ex.what());
    }
}

inline void write_ves_jsonl(std::ostream& out, std::span<const VesEvent> events) {
    for (const auto& ev : events) out << to_json(ev).dump() << '\n';
}

inline std::vector<VesEvent> read_ves_jsonl(std::istream& in) {
    std::vector<VesEvent> out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("invalid JSON", lineno);
        out.push_back(ves_event_from_json(j));
    }
    return out;
}

// Single-owner collector: events from any producer are appended here and
// assembled into a Dataset once complete.
class VesCollector {
public:
    void ingest(const VesEvent& ev) {
        auto rows = ingest_ves_event(ev);
        samples_.insert(samples_.end(), rows.begin(), rows.end());
    }

    // Dead-lettering variant: failed events are kept instead of thrown.
    bool try_ingest(const VesEvent& ev) {
        try {
            ingest(ev);
            return true;
        } catch (const IngestionError& e) {
            dead_letters_.push_back(e.event());
            return false;
        }
    }

    const std::vector<VesEvent>& dead_letters() const noexcept { return dead_letters_; }
    std::size_t size() const noexcept { return samples_.size(); }

    Dataset take_dataset() {
        std::sort(samples_.begin(), samples_.end(), sample_order);
        std::vector<CellId> cells;
        for (const auto& s : samples_)
            if (s.hour == samples_.front().hour && (cells.empty() || cells.back() != s.cell)) cells.push_back(s.cell);
        Dataset ds(std::move(samples_), std::move(cells), std::nullopt);
        samples_.clear();
        return ds;
    }

private:
    std::vector<KpiSample> samples_;
    std::vector<VesEvent> dead_letters_;
};

enum class PrbAllocator { VolumeProportional, UeProportional };

// Splits the cell's DL PRB utilization over its four bearers; indexed by
// qci_index. Shares sum to dl_prb_util_pct.
inline std::array<double, 4> per_bearer_prb_share(std::span<const KpiSample> at_hour,
                                                   PrbAllocator allocator = PrbAllocator::VolumeProportional) {
    if (at_hour.size() != kAllQcis.size()) throw ContractError("per_bearer_prb_share needs exactly four samples");
    std::array<bool, 4> seen{};
    std::array<double, 4> weight{};
    for (const auto& s : at_hour) {
        if (s.hour != at_hour[0].hour || s.cell != at_hour[0].cell)
            throw ContractError("per_bearer_prb_share samples span several (hour, cell) pairs");
        const auto i = qci_index(s.qci);
        if (seen[i]) throw ContractError("duplicate QCI " + std::to_string(qci_number(s.qci)));
        seen[i] = true;
        weight[i] = allocator == PrbAllocator::VolumeProportional ? s.volume_gb : s.active_ues;
    }
    const double prb = at_hour[0].dl_prb_util_pct;
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    std::array<double, 4> share{};
    for (std::size_t i = 0; i < share.size(); ++i)
        share[i] = total > 0.0 ? prb * weight[i] / total : prb / static_cast<double>(share.size());
    return share;
}

class SliceMapping {
public:
    SliceMapping() = default;
    explicit SliceMapping(std::map<std::string, std::set<Qci>> slices) : slices_(std::move(slices)) { validate(); }

    static SliceMapping default_mapping() {
        return SliceMapping({{"A", {Qci::QCI1, Qci::QCI9}}, {"B", {Qci::QCI2, Qci::QCI5}}});
    }

    const std::map<std::string, std::set<Qci>>& slices() const noexcept { return slices_; }

    const std::string& slice_of(Qci q) const {
        for (const auto& [id, qcis] : slices_)
            if (qcis.contains(q)) return id;
        throw ContractError("QCI not mapped");
    }

    std::vector<std::string> slice_ids() const {
        std::vector<std::string> out;
        for (const auto& kv : slices_) out.push_back(kv.first);
        return out;
    }

private:
    void validate() const {
        if (slices_.empty()) throw ConfigError("slice mapping is empty");
        std::array<int, 4> count{};
        for (const auto& [id, qcis] : slices_) {
            if (id.empty()) throw ConfigError("slice id must not be empty");
            if (qcis.empty()) throw ConfigError("slice '" + id + "' has no QCIs");
            for (Qci q : qcis) ++count[qci_index(q)];
        }
        for (std::size_t i = 0; i < count.size(); ++i)
            if (count[i] != 1)
                throw ConfigError("QCI" + std::to_string(qci_number(kAllQcis[i])) + " must belong to exactly one slice");
    }

    std::map<std::string, std::set<Qci>> slices_;
};

enum class Channel { ActiveUes, VolumeGb, PrbShare };

inline constexpr std::array<Channel, 3> kAllChannels{Channel::ActiveUes, Channel::VolumeGb, Channel::PrbShare};

inline const char* channel_name(Channel c) {
    switch (c) {
        case Channel::ActiveUes: return "active_ues";
        case Channel::VolumeGb: return "volume_gb";
        case Channel::PrbShare: return "prb_share_pct";
    }
    return "?";
}

// Hourly KPIs of one slice in one cell, gapless from start_hour.
struct SliceSeries {
    std::string slice_id;
    CellId cell;
    long start_hour = 0;
    std::vector<double> active_ues;
    std::vector<double> volume_gb;
    std::vector<double> prb_share_pct;

    std::size_t size() const noexcept { return active_ues.size(); }
    long end_hour() const noexcept { return start_hour + static_cast<long>(size()); }

    const std::vector<double>& channel(Channel c) const {
        switch (c) {
            case Channel::ActiveUes: return active_ues;
            case Channel::VolumeGb: return volume_gb;
            case Channel::PrbShare: return prb_share_pct;
        }
        throw ContractError("unknown channel");
    }

    void append(long hour, double ues, double vol, double prb) {
        if (size() == 0) start_hour = hour;
        else if (hour != end_hour())
            throw ContractError("slice series append breaks the hour sequence at " + std::to_string(hour));
        active_ues.push_back(ues);
        volume_gb.push_back(vol);
        prb_share_pct.push_back(prb);
    }

    std::string key() const { return slice_id + "/" + to_string(cell); }

    friend bool operator==(const SliceSeries&, const SliceSeries&) = default;
};

// Series ordered by (slice_id, cell).
inline std::vector<SliceSeries> tag_and_aggregate(const Dataset& ds, const SliceMapping& mapping,
                                                  PrbAllocator allocator = PrbAllocator::VolumeProportional) {
    const auto ids = mapping.slice_ids();
    const auto& cells = ds.cells();
    std::array<std::size_t, 4> slot{};
    for (Qci q : kAllQcis) {
        const auto& id = mapping.slice_of(q);
        slot[qci_index(q)] = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
    }

    std::vector<SliceSeries> out;
    for (const auto& id : ids)
        for (const auto& c : cells) {
            SliceSeries s{id, c, ds.start_hour(), {}, {}, {}};
            s.active_ues.reserve(static_cast<std::size_t>(ds.hours()));
            s.volume_gb.reserve(static_cast<std::size_t>(ds.hours()));
            s.prb_share_pct.reserve(static_cast<std::size_t>(ds.hours()));
            out.push_back(std::move(s));
        }

    const auto& samples = ds.samples();
    for (std::size_t i = 0; i < samples.size(); i += kAllQcis.size()) {
        std::span<const KpiSample> group(samples.data() + i, kAllQcis.size());
        const auto share = per_bearer_prb_share(group, allocator);
        const std::size_t cell_pos = (i / kAllQcis.size()) % cells.size();
        std::vector<std::array<double, 3>> acc(ids.size(), {0.0, 0.0, 0.0});
        for (std::size_t k = 0; k < group.size(); ++k) {
            auto& a = acc[slot[k]];
            a[0] += group[k].active_ues;
            a[1] += group[k].volume_gb;
            a[2] += share[k];
        }
        for (std::size_t si = 0; si < ids.size(); ++si) {
            auto& s = out[si * cells.size() + cell_pos];
            s.active_ues.push_back(acc[si][0]);
            s.volume_gb.push_back(acc[si][1]);
            s.prb_share_pct.push_back(std::min(acc[si][2], 100.0));
        }
    }
    return out;
}

}  // namespace pcl
