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

// Scenario configuration: one JSON document, validated with error paths.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcl/e2_node_sim.hpp"
#include "pcl/error.hpp"
#include "pcl/forecaster/arima.hpp"
#include "pcl/forecaster/lstm.hpp"
#include "pcl/forecaster/model.hpp"
#include "pcl/kpi_pipeline.hpp"
#include "pcl/pcl_rapp.hpp"
#include "pcl/traffic_model.hpp"

namespace pcl {

struct ForecasterChoice {
    ModelKind kind = ModelKind::Lstm;
    LstmConfig lstm;
    int arima_season = 24;
    std::vector<ArimaOrder> arima_grid = default_arima_grid(24);
    int naive_season = 24;
};

struct ScenarioConfig {
    std::uint64_t seed = 42;
    std::optional<GeneratorConfig> generator = GeneratorConfig{};
    std::optional<std::string> dataset_csv;  // resolved path
    SliceMapping mapping = SliceMapping::default_mapping();
    PrbAllocator allocator = PrbAllocator::VolumeProportional;
    double train_fraction = 0.8;
    ForecasterChoice forecaster;
    LoopConfig loop;  // prb_per_ue is estimated from the training data
    std::map<std::string, long> static_limit_overrides;  // by slice id
    DynamicOptions dynamic;
    std::string output_dir = "out";
    int jobs = 0;  // 0: one per hardware thread
};

namespace config_detail {

using json = nlohmann::json;

// Walks one JSON object, remembering which keys were read so unknown keys
// can be reported.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
        throw ConfigError(path + ": " + msg);
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail(at(key), "required");
        return j_.at(key);
    }

    double number(const std::string& key, double def, double lo, double hi, bool open_lo = false) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        const double x = v.get<double>();
        if (!(open_lo ? x > lo : x >= lo) || !(x <= hi))
            fail(at(key), "expected a number in " + std::string(open_lo ? "(" : "[") + format_double(lo) + ", " +
                              format_double(hi) + "]");
        return x;
    }

    long integer(const std::string& key, long def, long lo, long hi) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        const long x = v.get<long>();
        if (x < lo || x > hi)
            fail(at(key), "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    }

    std::string string(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
        auto s = string(key, def);
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + ("'" + a + "'");
            fail(at(key), "expected one of " + list + ", got '" + s + "'");
        }
        return s;
    }

    std::optional<Reader> object(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return Reader(raw(key), at(key));
    }

    const json& object_json() const { return j_; }

    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!seen_.contains(k)) fail(at(k), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline QciProfile read_profile(Reader r, QciProfile p) {
    p.base_ues = r.number("base_ues", p.base_ues, 0.0, 1e6);
    p.diurnal_amp1 = r.number("diurnal_amp1", p.diurnal_amp1, 0.0, 10.0);
    p.diurnal_peak1 = r.number("diurnal_peak1", p.diurnal_peak1, 0.0, 24.0);
    p.diurnal_amp2 = r.number("diurnal_amp2", p.diurnal_amp2, 0.0, 10.0);
    p.diurnal_peak2 = r.number("diurnal_peak2", p.diurnal_peak2, 0.0, 24.0);
    p.weekly_amp = r.number("weekly_amp", p.weekly_amp, 0.0, 0.999999);
    p.weekly_peak_day = r.number("weekly_peak_day", p.weekly_peak_day, 0.0, 7.0);
    p.gb_per_ue = r.number("gb_per_ue", p.gb_per_ue, 0.0, 1e6);
    p.prb_pct_per_ue = r.number("prb_pct_per_ue", p.prb_pct_per_ue, 0.0, 100.0);
    r.finish();
    return p;
}

inline GeneratorConfig read_generator(Reader r) {
    GeneratorConfig g;
    g.n_enb = static_cast<int>(r.integer("n_enb", g.n_enb, 1, 1000));
    g.cells_per_enb = static_cast<int>(r.integer("cells_per_enb", g.cells_per_enb, 1, 1000));
    g.days = static_cast<int>(r.integer("days", g.days, 2, 3660));
    g.noise_sigma = r.number("noise_sigma", g.noise_sigma, 0.0, 0.999999);
    g.cell_scale_spread = r.number("cell_scale_spread", g.cell_scale_spread, 0.0, 0.999999);
    if (auto prof = r.object("profiles")) {
        for (const auto& [k, _] : prof->object_json().items()) {
            auto n = parse_long(k);
            auto q = n ? qci_from_number(*n) : std::nullopt;
            if (!q) Reader::fail(prof->at(k), "expected a QCI number (1, 2, 5 or 9)");
            auto& slot = g.per_qci_profile[qci_index(*q)];
            slot = read_profile(Reader(prof->raw(k), prof->at(k)), slot);
        }
        prof->finish();
    }
    r.finish();
    return g;
}

inline SliceMapping read_slices(const json& j, const std::string& path) {
    if (!j.is_object()) Reader::fail(path, "expected an object of slice id -> QCI list");
    std::map<std::string, std::set<Qci>> m;
    for (const auto& [id, list] : j.items()) {
        const auto p = path + "." + id;
        if (id.empty() || !std::all_of(id.begin(), id.end(), [](char ch) {
                return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
            }))
            Reader::fail(p, "slice ids may only contain letters, digits, '_' and '-'");
        if (!list.is_array()) Reader::fail(p, "expected an array of QCI numbers");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& v = list[i];
            auto q = v.is_number_integer() ? qci_from_number(v.get<long>()) : std::nullopt;
            if (!q) Reader::fail(p + "[" + std::to_string(i) + "]", "expected a QCI number (1, 2, 5 or 9)");
            m[id].insert(*q);
        }
    }
    try {
        return SliceMapping(std::move(m));
    } catch (const ConfigError& e) {
        Reader::fail(path, e.what());
    }
}

inline LstmConfig read_lstm(Reader r) {
    LstmConfig c;
    c.layers = static_cast<int>(r.integer("layers", c.layers, 1, 16));
    c.units_per_layer = static_cast<int>(r.integer("units_per_layer", c.units_per_layer, 1, 4096));
    c.activation = r.choice("activation", "relu", {"relu", "tanh"}) == "relu" ? Activation::Relu : Activation::Tanh;
    c.batch_size = static_cast<int>(r.integer("batch_size", c.batch_size, 1, 1 << 20));
    c.epochs = static_cast<int>(r.integer("epochs", c.epochs, 1, 1 << 20));
    c.learning_rate = r.number("learning_rate", c.learning_rate, 0.0, 10.0, true);
    c.beta1 = r.number("beta1", c.beta1, 0.0, 0.999999999);
    c.beta2 = r.number("beta2", c.beta2, 0.0, 0.999999999);
    c.epsilon = r.number("epsilon", c.epsilon, 0.0, 1.0, true);
    c.input_window = static_cast<int>(r.integer("input_window", c.input_window, 1, 1 << 16));
    c.horizon = static_cast<int>(r.integer("horizon", c.horizon, 1, 1 << 16));
    r.finish();
    return c;
}

inline void read_forecaster(Reader r, ForecasterChoice& f) {
    f.kind = model_kind_from_name(r.choice("kind", "lstm", {"lstm", "arima", "seasonal_naive"}));
    if (auto l = r.object("lstm")) f.lstm = read_lstm(*l);
    if (auto a = r.object("arima")) {
        f.arima_season = static_cast<int>(a->integer("season", 24, 2, 1 << 16));
        f.arima_grid = default_arima_grid(f.arima_season);
        if (a->has("grid")) {
            const auto& g = a->raw("grid");
            if (g.is_string()) {
                if (g != "default") Reader::fail(a->at("grid"), "expected \"default\" or an array of orders");
            } else if (g.is_array() && !g.empty()) {
                f.arima_grid.clear();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const auto p = a->at("grid") + "[" + std::to_string(i) + "]";
                    Reader o(g[i], p);
                    ArimaOrder ord{static_cast<int>(o.integer("p", 0, 0, 8)), static_cast<int>(o.integer("d", 0, 0, 2)),
                                   static_cast<int>(o.integer("q", 0, 0, 8)), static_cast<int>(o.integer("P", 0, 0, 4)),
                                   static_cast<int>(o.integer("D", 0, 0, 2)), static_cast<int>(o.integer("Q", 0, 0, 4)),
                                   f.arima_season};
                    o.finish();
                    try {
                        ord.validate();
                    } catch (const ConfigError& e) {
                        Reader::fail(p, e.what());
                    }
                    f.arima_grid.push_back(ord);
                }
            } else {
                Reader::fail(a->at("grid"), "expected \"default\" or a non-empty array of orders");
            }
        }
        a->finish();
    }
    if (auto n = r.object("seasonal_naive")) {
        f.naive_season = static_cast<int>(n->integer("season", 24, 1, 1 << 16));
        n->finish();
    }
    r.finish();
}

inline void read_loop(Reader r, LoopConfig& loop, const SliceMapping& mapping) {
    loop.plmn_id = r.string("plmn_id", loop.plmn_id);
    if (!valid_plmn(loop.plmn_id)) Reader::fail(r.at("plmn_id"), "expected 5 or 6 digits");
    loop.margin = r.number("margin", loop.margin, 0.0, 100.0);
    loop.cell_cap_pct = r.number("cell_cap_pct", loop.cell_cap_pct, 0.0, 100.0, true);
    if (auto p = r.object("priority")) {
        for (const auto& [id, v] : p->object_json().items()) {
            if (!mapping.slices().contains(id)) Reader::fail(p->at(id), "unknown slice");
            loop.priority[id] = priority_from_name(p->choice(id, "high", {"high", "low"}));
        }
        p->finish();
    }
    if (auto c = r.object("cloud")) {
        loop.sizing.ues_per_vm = c->integer("ues_per_vm", loop.sizing.ues_per_vm, 1, 1L << 30);
        loop.sizing.cpu_per_vm = c->integer("cpu_per_vm", loop.sizing.cpu_per_vm, 0, 1L << 30);
        loop.sizing.mem_per_vm = c->integer("mem_per_vm", loop.sizing.mem_per_vm, 0, 1L << 30);
        c->finish();
    }
    r.finish();
}

}  // namespace config_detail

// `base_dir` resolves a relative dataset CSV path.
inline ScenarioConfig parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    using config_detail::Reader;
    Reader r(j, "$");
    ScenarioConfig c;
    c.seed = static_cast<std::uint64_t>(r.integer("seed", 42, 0, std::numeric_limits<long>::max()));
    if (auto d = r.object("dataset")) {
        const bool gen = d->has("generator"), csv = d->has("csv");
        if (gen == csv) Reader::fail(r.at("dataset"), "exactly one of 'generator' or 'csv' is required");
        if (gen) {
            c.generator = config_detail::read_generator(*d->object("generator"));
        } else {
            c.generator.reset();
            std::filesystem::path p = d->string("csv", "");
            if (p.empty()) Reader::fail(d->at("csv"), "path must not be empty");
            c.dataset_csv = (p.is_relative() ? base_dir / p : p).lexically_normal().string();
        }
        d->finish();
    }
    if (r.has("slices")) c.mapping = config_detail::read_slices(r.raw("slices"), r.at("slices"));
    c.allocator = r.choice("prb_allocator", "volume", {"volume", "ues"}) == "volume" ? PrbAllocator::VolumeProportional
                                                                                     : PrbAllocator::UeProportional;
    c.train_fraction = r.number("train_fraction", 0.8, 0.0, 1.0, true);
    if (c.train_fraction >= 1.0) Reader::fail(r.at("train_fraction"), "expected a number in (0, 1)");
    if (auto f = r.object("forecaster")) config_detail::read_forecaster(*f, c.forecaster);
    if (auto l = r.object("loop")) config_detail::read_loop(*l, c.loop, c.mapping);
    if (auto s = r.object("static_limits")) {
        for (const auto& [id, _] : s->object_json().items()) {
            if (!c.mapping.slices().contains(id)) Reader::fail(s->at(id), "unknown slice");
            c.static_limit_overrides[id] = s->integer(id, 0, 0, 1L << 40);
        }
        s->finish();
    }
    c.dynamic.feedback = ue_feedback_from_name(r.choice("ue_feedback", "observed", {"observed", "admitted"}));
    c.dynamic.warm_start = r.choice("history", "warm", {"warm", "cold"}) == "warm";
    if (auto t = r.object("transport")) {
        c.dynamic.transport = t->choice("mode", "inprocess", {"inprocess", "tcp"}) == "tcp" ? TransportMode::TcpLoopback
                                                                                         : TransportMode::InProcess;
        c.dynamic.base_port = static_cast<std::uint16_t>(t->integer("base_port", 0, 0, 65532));
        t->finish();
    }
    c.output_dir = r.string("output_dir", c.output_dir);
    c.jobs = static_cast<int>(r.integer("jobs", 0, 0, 1024));
    r.finish();
    return c;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    auto j = nlohmann::json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
    return parse_scenario(j, path.parent_path());
}

// Fully resolved configuration, itself a valid scenario document. Output
// location, parallelism and ports are left out: they do not change results.
inline nlohmann::ordered_json canonical_json(const ScenarioConfig& c) {
    using oj = nlohmann::ordered_json;
    oj j;
    j["seed"] = c.seed;
    if (c.generator) {
        const auto& g = *c.generator;
        oj profiles = oj::object();
        for (Qci q : kAllQcis) {
            const auto& p = g.per_qci_profile[qci_index(q)];
            profiles[std::to_string(qci_number(q))] = {
                {"base_ues", p.base_ues},       {"diurnal_amp1", p.diurnal_amp1},
                {"diurnal_peak1", p.diurnal_peak1}, {"diurnal_amp2", p.diurnal_amp2},
                {"diurnal_peak2", p.diurnal_peak2}, {"weekly_amp", p.weekly_amp},
                {"weekly_peak_day", p.weekly_peak_day}, {"gb_per_ue", p.gb_per_ue},
                {"prb_pct_per_ue", p.prb_pct_per_ue}};
        }
        j["dataset"]["generator"] = {{"n_enb", g.n_enb},
                                     {"cells_per_enb", g.cells_per_enb},
                                     {"days", g.days},
                                     {"noise_sigma", g.noise_sigma},
                                     {"cell_scale_spread", g.cell_scale_spread},
                                     {"profiles", std::move(profiles)}};
    } else {
        j["dataset"]["csv"] = *c.dataset_csv;
    }
    oj slices = oj::object();
    for (const auto& [id, qcis] : c.mapping.slices()) {
        oj list = oj::array();
        for (Qci q : qcis) list.push_back(qci_number(q));
        slices[id] = std::move(list);
    }
    j["slices"] = std::move(slices);
    j["prb_allocator"] = c.allocator == PrbAllocator::VolumeProportional ? "volume" : "ues";
    j["train_fraction"] = c.train_fraction;
    oj grid = oj::array();
    for (const auto& o : c.forecaster.arima_grid)
        grid.push_back({{"p", o.p}, {"d", o.d}, {"q", o.q}, {"P", o.P}, {"D", o.D}, {"Q", o.Q}});
    const auto& l = c.forecaster.lstm;
    oj lstm{{"layers", l.layers},
            {"units_per_layer", l.units_per_layer},
            {"activation", activation_name(l.activation)},
            {"batch_size", l.batch_size},
            {"epochs", l.epochs},
            {"learning_rate", l.learning_rate},
            {"beta1", l.beta1},
            {"beta2", l.beta2},
            {"epsilon", l.epsilon},
            {"input_window", l.input_window},
            {"horizon", l.horizon}};
    j["forecaster"] = {{"kind", model_kind_name(c.forecaster.kind)},
                       {"lstm", std::move(lstm)},
                       {"arima", {{"season", c.forecaster.arima_season}, {"grid", std::move(grid)}}},
                       {"seasonal_naive", {{"season", c.forecaster.naive_season}}}};
    oj prio = oj::object();
    for (const auto& [id, p] : c.loop.priority) prio[id] = priority_name(p);
    j["loop"] = {{"plmn_id", c.loop.plmn_id},
                 {"margin", c.loop.margin},
                 {"cell_cap_pct", c.loop.cell_cap_pct},
                 {"priority", std::move(prio)},
                 {"cloud",
                  {{"ues_per_vm", c.loop.sizing.ues_per_vm},
                   {"cpu_per_vm", c.loop.sizing.cpu_per_vm},
                   {"mem_per_vm", c.loop.sizing.mem_per_vm}}}};
    oj limits = oj::object();
    for (const auto& [id, v] : c.static_limit_overrides) limits[id] = v;
    j["static_limits"] = std::move(limits);
    j["ue_feedback"] = c.dynamic.feedback == UeFeedback::Observed ? "observed" : "admitted";
    j["history"] = c.dynamic.warm_start ? "warm" : "cold";
    j["transport"] = {{"mode", c.dynamic.transport == TransportMode::TcpLoopback ? "tcp" : "inprocess"}};
    return j;
}

inline std::string config_digest(const ScenarioConfig& c) { return digest_hex(canonical_json(c).dump()); }

}  // namespace pcl
