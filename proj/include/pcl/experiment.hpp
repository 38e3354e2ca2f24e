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

// Experiment harness behind the command line: dataset generation, model
// training with an accuracy table, static/dynamic runs and the comparison.

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "pcl/e2_node_sim.hpp"
#include "pcl/error.hpp"
#include "pcl/forecaster/accuracy.hpp"
#include "pcl/forecaster/model.hpp"
#include "pcl/kpi_pipeline.hpp"
#include "pcl/pcl_rapp.hpp"
#include "pcl/plot.hpp"
#include "pcl/scenario.hpp"
#include "pcl/traffic_model.hpp"

namespace pcl {

inline constexpr const char* kVersion = "1.0.0";

namespace fs = std::filesystem;

// Write-temp-then-rename so readers never see a partial file.
inline void write_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Output directory plus its manifest: config digest, versions and a digest
// per artifact. Artifacts from a different configuration count as absent.
class Workspace {
public:
    Workspace(fs::path dir, const ScenarioConfig& cfg)
        : dir_(std::move(dir)), config_(canonical_json(cfg)), digest_(config_digest(cfg)), seed_(cfg.seed) {
        const auto path = dir_ / "manifest.json";
        if (!fs::exists(path)) return;
        auto j = nlohmann::json::parse(read_file(path), nullptr, false);
        if (j.is_discarded() || !j.contains("config_digest") || j["config_digest"] != digest_) return;
        if (j.contains("commands"))
            for (const auto& c : j["commands"]) commands_.insert(c.get<std::string>());
        if (j.contains("artifacts"))
            for (const auto& [k, v] : j["artifacts"].items()) artifacts_[k] = v.get<std::string>();
    }

    const fs::path& dir() const noexcept { return dir_; }
    fs::path path(const std::string& rel) const { return dir_ / rel; }

    void write(const std::string& rel, const std::string& content) {
        write_atomic(path(rel), content);
        artifacts_[rel] = digest_hex(content);
    }

    // Present, recorded under this configuration, and unmodified.
    bool fresh(const std::string& rel) const {
        auto it = artifacts_.find(rel);
        if (it == artifacts_.end() || !fs::exists(path(rel))) return false;
        return digest_hex(read_file(path(rel))) == it->second;
    }

    std::string read(const std::string& rel) const { return read_file(path(rel)); }

    void record_command(const std::string& name) {
        commands_.insert(name);
        nlohmann::ordered_json j;
        j["schema"] = "pcl-manifest-v1";
        j["versions"] = {{"pcl", kVersion},
                         {"forecast_model", "forecast-model-v1"},
                         {"dataset_csv", std::string(kDatasetCsvHeader)},
                         {"report_csv", std::string(kReportCsvHeader)}};
        j["seed"] = seed_;
        j["config_digest"] = digest_;
        j["config"] = config_;
        j["commands"] = commands_;
        j["artifacts"] = artifacts_;
        write_atomic(path("manifest.json"), j.dump(1) + "\n");
    }

private:
    fs::path dir_;
    nlohmann::ordered_json config_;
    std::string digest_;
    std::uint64_t seed_;
    std::set<std::string> commands_;
    std::map<std::string, std::string> artifacts_;
};

inline std::string model_rel_path(ModelKind kind, Channel ch, const SliceSeries& s) {
    return std::string("models/") + model_kind_name(kind) + "/" + channel_name(ch) + "/" + s.slice_id + "_" +
           to_string(s.cell) + ".json";
}

struct ModelJob {
    ModelKind kind;
    Channel channel;
    std::size_t series;
};

inline ForecastModel train_one(const ScenarioConfig& cfg, const ModelJob& job, const SliceSeries& s) {
    const auto& values = s.channel(job.channel);
    const std::string tag = s.key() + "/" + channel_name(job.channel);
    switch (job.kind) {
        case ModelKind::Lstm: {
            LstmConfig c = cfg.forecaster.lstm;
            c.seed = cfg.seed ^ fnv1a64(tag);
            return train_lstm(values, c, tag);
        }
        case ModelKind::Arima: return fit_arima(values, cfg.forecaster.arima_grid, tag);
        case ModelKind::SeasonalNaive: return make_seasonal_naive(values, cfg.forecaster.naive_season, 1, tag);
    }
    throw ContractError("unknown model kind");
}

// Jobs are independent, so they run on worker threads; results keep job order.
inline std::vector<ForecastModel> run_model_jobs(const ScenarioConfig& cfg, const std::vector<ModelJob>& jobs,
                                                 const std::vector<SliceSeries>& train) {
    std::vector<ForecastModel> out(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            try {
                out[i] = train_one(cfg, jobs[i], train[jobs[i].series]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned n = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs) : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

struct AccuracyRow {
    ModelKind kind;
    Channel channel;
    AccuracyReport report;
};

struct CompareSummary {
    SliceTotals static_totals;
    SliceTotals dynamic_totals;
    double ratio = 0.0;
};

class Experiment {
public:
    Experiment(ScenarioConfig cfg, std::ostream& log, bool build_missing = true, std::string config_hint = "<config>")
        : cfg_(std::move(cfg)),
          ws_(cfg_.output_dir, cfg_),
          log_(log),
          build_missing_(build_missing),
          config_hint_(std::move(config_hint)) {}

    const ScenarioConfig& config() const noexcept { return cfg_; }
    const Workspace& workspace() const noexcept { return ws_; }

    Dataset cmd_generate() {
        Dataset ds = build_dataset();
        ws_.write("dataset.csv", dataset_to_csv(ds));
        ws_.record_command("generate");
        log_ << "generate: wrote " << ws_.path("dataset.csv").string() << " (" << ds.hours() << " hours, "
             << ds.cells().size() << " cells)\n";
        return ds;
    }

    std::vector<AccuracyRow> cmd_train() {
        const Dataset ds = dataset();
        const auto [train, test] = split_train_test(ds, cfg_.train_fraction);
        const auto train_series = tag_and_aggregate(train, cfg_.mapping, cfg_.allocator);
        const auto full_series = tag_and_aggregate(ds, cfg_.mapping, cfg_.allocator);

        std::vector<ModelJob> jobs;
        for (ModelKind k : {ModelKind::Lstm, ModelKind::Arima, ModelKind::SeasonalNaive})
            for (Channel ch : kAllChannels)
                for (std::size_t i = 0; i < train_series.size(); ++i) jobs.push_back({k, ch, i});
        const auto models = run_model_jobs(cfg_, jobs, train_series);

        std::map<std::pair<ModelKind, Channel>, AccuracyReport> acc;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const auto& s = train_series[jobs[j].series];
            ws_.write(model_rel_path(jobs[j].kind, jobs[j].channel, s), serialize_model(models[j]));
            const auto& full = full_series[jobs[j].series].channel(jobs[j].channel);
            const auto preds = one_step_predictions(models[j], full, s.size(), full.size());
            const auto r = accuracy(preds, std::span<const double>(full).subspan(s.size()));
            auto& a = acc[{jobs[j].kind, jobs[j].channel}];
            a.n_points += r.n_points;
            a.n_within += r.n_within;
        }
        std::vector<AccuracyRow> rows;
        std::ostringstream csv;
        csv << "model,channel,accuracy_pct,n_within,n_points\n";
        for (auto& [key, a] : acc) {
            a.accuracy_pct = 100.0 * static_cast<double>(a.n_within) / static_cast<double>(a.n_points);
            rows.push_back({key.first, key.second, a});
            csv << model_kind_name(key.first) << ',' << channel_name(key.second) << ',' << format_double(a.accuracy_pct)
                << ',' << a.n_within << ',' << a.n_points << '\n';
        }
        ws_.write("accuracy.csv", csv.str());
        ws_.record_command("train");
        print_accuracy(rows);
        return rows;
    }

    RunReport cmd_run(const std::string& mode) {
        if (mode != "static" && mode != "dynamic") throw ConfigError("--mode must be 'static' or 'dynamic'");
        const Dataset ds = dataset();
        const auto [train, test] = split_train_test(ds, cfg_.train_fraction);
        const auto train_series = tag_and_aggregate(train, cfg_.mapping, cfg_.allocator);
        RunSetup setup{cfg_.mapping, cfg_.allocator, cfg_.loop, static_limits(train_series, cfg_.static_limit_overrides)};
        setup.loop.prb_per_ue = estimate_prb_per_ue(train_series);

        RunReport r = mode == "static" ? run_static(train, test, setup)
                                       : run_dynamic(train, test, setup, models(train_series), cfg_.dynamic);
        std::ostringstream rep, aud;
        write_report_csv(rep, r);
        write_audit_csv(aud, r);
        ws_.write("report_" + mode + ".csv", rep.str());
        ws_.write("audit_" + mode + ".csv", aud.str());
        ws_.write("totals_" + mode + ".json", totals_json(r).dump(1) + "\n");
        ws_.record_command("run-" + mode);
        const auto t = r.totals();
        log_ << "run " << mode << ": hours " << test.start_hour() << ".." << test.end_hour() - 1 << ", under "
             << t.under_served << ", over " << t.over_served << ", non-optimal " << t.non_optimal << '\n';
        return r;
    }

    CompareSummary cmd_compare() {
        const auto st = cmd_run("static");
        const auto dy = cmd_run("dynamic");
        std::istringstream s_in(ws_.read("report_static.csv")), d_in(ws_.read("report_dynamic.csv"));
        const auto s_rows = parse_report_csv(s_in);
        const auto d_rows = parse_report_csv(d_in);
        const auto plot = project_plot_rows(s_rows, d_rows);
        std::ostringstream pcsv;
        write_plot_csv(pcsv, plot);
        ws_.write("plot.csv", pcsv.str());
        ws_.write("plot.svg", render_plot_svg(plot));

        CompareSummary c{st.totals(), dy.totals(), 0.0};
        c.ratio = c.static_totals.non_optimal > 0 ? static_cast<double>(c.dynamic_totals.non_optimal) /
                                                        static_cast<double>(c.static_totals.non_optimal)
                                                  : (c.dynamic_totals.non_optimal == 0 ? 0.0 : 1e300);
        nlohmann::ordered_json j{{"static", totals_json(st)},
                                 {"dynamic", totals_json(dy)},
                                 {"non_optimal_ratio", c.ratio},
                                 {"dynamic_below_static", c.dynamic_totals.non_optimal < c.static_totals.non_optimal}};
        ws_.write("compare.json", j.dump(1) + "\n");
        ws_.record_command("compare");
        log_ << "compare: static non-optimal " << c.static_totals.non_optimal << ", dynamic "
             << c.dynamic_totals.non_optimal << ", ratio " << format_double(c.ratio) << '\n';
        return c;
    }

private:
    Dataset build_dataset() const {
        if (cfg_.dataset_csv) return load_dataset(*cfg_.dataset_csv);
        GeneratorConfig g = *cfg_.generator;
        g.seed = cfg_.seed;
        return generate_synthetic_dataset(g);
    }

    Dataset dataset() {
        if (ws_.fresh("dataset.csv")) {
            std::istringstream in(ws_.read("dataset.csv"));
            return parse_dataset_csv(in);
        }
        if (!build_missing_)
            throw PrerequisiteError("dataset.csv is missing or stale in '" + ws_.dir().string() +
                                    "'; run `pcl generate --config " + config_hint_ + "` first");
        return cmd_generate();
    }

    // Active-UE models of the configured kind, one per slice series.
    std::map<std::string, ForecastModel> models(const std::vector<SliceSeries>& train_series) {
        const ModelKind kind = cfg_.forecaster.kind;
        std::map<std::string, ForecastModel> out;
        std::vector<ModelJob> missing;
        for (std::size_t i = 0; i < train_series.size(); ++i) {
            const auto rel = model_rel_path(kind, Channel::ActiveUes, train_series[i]);
            if (ws_.fresh(rel)) out[train_series[i].key()] = parse_model(ws_.read(rel));
            else missing.push_back({kind, Channel::ActiveUes, i});
        }
        if (missing.empty()) return out;
        if (!build_missing_)
            throw PrerequisiteError(std::string(model_kind_name(kind)) + " models are missing or stale in '" +
                                    ws_.dir().string() + "'; run `pcl train --config " + config_hint_ + "` first");
        const auto built = run_model_jobs(cfg_, missing, train_series);
        for (std::size_t j = 0; j < missing.size(); ++j) {
            const auto& s = train_series[missing[j].series];
            ws_.write(model_rel_path(kind, Channel::ActiveUes, s), serialize_model(built[j]));
            out[s.key()] = built[j];
        }
        ws_.record_command("models-on-demand");
        log_ << "built " << missing.size() << ' ' << model_kind_name(kind) << " models on demand\n";
        return out;
    }

    void print_accuracy(const std::vector<AccuracyRow>& rows) {
        log_ << "test accuracy (tolerance 1% of series max)\n";
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-16s %10s %10s %15s\n", "channel", "lstm", "arima", "seasonal_naive");
        log_ << buf;
        for (Channel ch : kAllChannels) {
            double v[3] = {0, 0, 0};
            for (const auto& r : rows)
                if (r.channel == ch) v[static_cast<int>(r.kind)] = r.report.accuracy_pct;
            std::snprintf(buf, sizeof buf, "%-16s %9.2f%% %9.2f%% %14.2f%%\n", channel_name(ch), v[0], v[1], v[2]);
            log_ << buf;
        }
        double lstm = 0.0, arima = 0.0;
        for (const auto& r : rows) {
            if (r.channel != Channel::ActiveUes) continue;
            if (r.kind == ModelKind::Lstm) lstm = r.report.accuracy_pct;
            if (r.kind == ModelKind::Arima) arima = r.report.accuracy_pct;
        }
        log_ << "lstm " << (lstm >= arima ? ">=" : "<") << " arima on active_ues\n";
    }

    ScenarioConfig cfg_;
    Workspace ws_;
    std::ostream& log_;
    bool build_missing_;
    std::string config_hint_;
};

}  // namespace pcl
