#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pcl/e2_node_sim.hpp"

namespace pcl {
namespace {

TEST(ServiceMetrics, Examples) {
    EXPECT_EQ(compute_service_metrics(10, 10), (ServiceCounts{0, 0, 0}));
    EXPECT_EQ(compute_service_metrics(15, 10), (ServiceCounts{5, 0, 5}));
    EXPECT_EQ(compute_service_metrics(4, 10), (ServiceCounts{0, 6, 6}));
    EXPECT_THROW(compute_service_metrics(-1, 3), ContractError);
    EXPECT_THROW(compute_service_metrics(1, -3), ContractError);
}

TEST(ServiceMetrics, IdentityOverRandomPairs) {
    Rng rng(8);
    for (int i = 0; i < 10000; ++i) {
        const long a = rng.uniform_int(0, 1000), l = rng.uniform_int(0, 1000);
        const auto c = compute_service_metrics(a, l);
        EXPECT_EQ(c.non_optimal, std::abs(a - l));
        EXPECT_TRUE(c.under_served == 0 || c.over_served == 0);
    }
}

GeneratorConfig small_generator(double noise = 0.05, int days = 6) {
    GeneratorConfig g;
    g.n_enb = 1;
    g.cells_per_enb = 2;
    g.days = days;
    g.noise_sigma = noise;
    return g;
}

struct Scenario {
    Dataset train, test;
    std::vector<SliceSeries> train_series;
    RunSetup setup;

    explicit Scenario(const GeneratorConfig& g, double fraction = 0.5) {
        std::tie(train, test) = split_train_test(generate_synthetic_dataset(g), fraction);
        train_series = tag_and_aggregate(train, setup.mapping, setup.allocator);
        setup.static_limits = static_limits(train_series);
        setup.loop.prb_per_ue = estimate_prb_per_ue(train_series);
    }

    std::map<std::string, ForecastModel> naive_models() const {
        std::map<std::string, ForecastModel> m;
        for (const auto& s : train_series) m[s.key()] = make_seasonal_naive(s.active_ues, 24, 1, s.key());
        return m;
    }
};

// Raw slice demand summed straight from the dataset grid.
double raw_demand(const Dataset& ds, long hour, const CellId& cell, const std::string& slice, const SliceMapping& m) {
    double ues = 0.0;
    for (Qci q : kAllQcis)
        if (m.slice_of(q) == slice) ues += ds.at(hour, cell, q).active_ues;
    return ues;
}

TEST(StepHour, AmpleLimitsNeverUnderServe) {
    Scenario sc(small_generator());
    NodeSliceConfig node;
    for (const auto& c : sc.test.cells()) {
        node.cells[c].slices["A"] = {100000, 50.0};
        node.cells[c].slices["B"] = {100000, 50.0};
    }
    for (long h = sc.test.start_hour(); h < sc.test.end_hour(); ++h) {
        const auto r = step_hour(h, node, samples_at(sc.test, h), sc.setup.mapping);
        EXPECT_EQ(r.metrics.size(), 4u);
        EXPECT_EQ(r.events.size(), 2u);
        for (const auto& m : r.metrics) EXPECT_EQ(m.under_served, 0);
    }
}

TEST(StepHour, ZeroQuotaStarvesSlice) {
    Scenario sc(small_generator());
    NodeSliceConfig node;
    for (const auto& c : sc.test.cells()) {
        node.cells[c].slices["A"] = {0, 0.0};
        node.cells[c].slices["B"] = {1000, 60.0};
    }
    const long h = sc.test.start_hour() + 5;
    const auto r = step_hour(h, node, samples_at(sc.test, h), sc.setup.mapping);
    for (const auto& m : r.metrics) {
        if (m.slice_id != "A") continue;
        EXPECT_EQ(m.under_served, std::llround(raw_demand(sc.test, h, m.cell, "A", sc.setup.mapping)));
        EXPECT_EQ(m.prb_served_pct, 0.0);
    }
    // Served volume of the paused slice reaches the collector as zero.
    for (const auto& ev : r.events) {
        EXPECT_EQ(ev.measurement_fields.at(volume_key(Qci::QCI1)), 0.0);
        EXPECT_EQ(ev.measurement_fields.at(volume_key(Qci::QCI9)), 0.0);
    }
}

TEST(StepHour, ServedPrbIsFeasible) {
    Scenario sc(small_generator());
    Rng rng(12);
    for (long h = sc.test.start_hour(); h < sc.test.end_hour(); ++h) {
        NodeSliceConfig node;
        for (const auto& c : sc.test.cells()) {
            const double qa = rng.uniform(0.0, 100.0);
            node.cells[c].slices["A"] = {rng.uniform_int(0, 100), qa};
            node.cells[c].slices["B"] = {rng.uniform_int(0, 100), rng.uniform(0.0, 100.0 - qa)};
        }
        const auto r = step_hour(h, node, samples_at(sc.test, h), sc.setup.mapping);
        std::map<CellId, double> per_cell;
        for (const auto& m : r.metrics) {
            EXPECT_LE(m.prb_served_pct, m.prb_quota_pct);
            EXPECT_LE(m.prb_served_pct, m.prb_demand_pct);
            per_cell[m.cell] += m.prb_served_pct;
        }
        for (const auto& [_, v] : per_cell) EXPECT_LE(v, 100.0 + 1e-9);
        for (const auto& ev : r.events) EXPECT_LE(ev.measurement_fields.at(kPrbKey), 100.0);
    }
}

TEST(StepHour, MissingDemandIsSimulationError) {
    Scenario sc(small_generator());
    NodeSliceConfig node;
    node.cells[{7, 7}].slices["A"] = {1, 1.0};
    const long h = sc.test.start_hour();
    EXPECT_THROW(step_hour(h, node, samples_at(sc.test, h), sc.setup.mapping), SimulationError);
    EXPECT_THROW(step_hour(h + 1, {}, samples_at(sc.test, h), sc.setup.mapping), SimulationError);
    const auto s = samples_at(sc.test, h);
    EXPECT_THROW(step_hour(h, {}, s.first(3), sc.setup.mapping), SimulationError);
}

TEST(StepHour, AdmittedFeedbackCapsReportedUes) {
    Scenario sc(small_generator());
    NodeSliceConfig node;
    for (const auto& c : sc.test.cells()) {
        node.cells[c].slices["A"] = {1, 50.0};
        node.cells[c].slices["B"] = {1, 50.0};
    }
    const long h = sc.test.start_hour() + 20;
    const auto obs = step_hour(h, node, samples_at(sc.test, h), sc.setup.mapping, PrbAllocator::VolumeProportional,
                               UeFeedback::Observed);
    const auto adm = step_hour(h, node, samples_at(sc.test, h), sc.setup.mapping, PrbAllocator::VolumeProportional,
                               UeFeedback::Admitted);
    EXPECT_EQ(obs.metrics, adm.metrics);
    for (std::size_t i = 0; i < adm.events.size(); ++i) {
        double a = 0.0;
        for (Qci q : {Qci::QCI1, Qci::QCI9}) {
            a += adm.events[i].measurement_fields.at(ues_key(q));
            EXPECT_DOUBLE_EQ(obs.events[i].measurement_fields.at(ues_key(q)), sc.test.at(h, sc.test.cells()[i], q).active_ues);
        }
        EXPECT_NEAR(a, 1.0, 1e-9);
    }
}

TEST(RunStatic, UpperEnvelopeOnlyOverServes) {
    Scenario sc(small_generator());
    const auto test_series = tag_and_aggregate(sc.test, sc.setup.mapping);
    long expected_over = 0;
    for (const auto& s : test_series) {
        long peak = 0;
        for (double v : s.active_ues) peak = std::max(peak, static_cast<long>(std::llround(v)));
        sc.setup.static_limits[s.key()] = peak;
        for (double v : s.active_ues) expected_over += peak - std::llround(v);
    }
    const auto r = run_static(sc.train, sc.test, sc.setup);
    EXPECT_EQ(r.totals().under_served, 0);
    EXPECT_EQ(r.totals().over_served, expected_over);
}

TEST(RunStatic, MatchesBruteForceOracle) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto g = small_generator(0.1);
        g.seed = seed;
        Scenario sc(g, 0.6);
        const auto r = run_static(sc.train, sc.test, sc.setup);

        long under = 0, over = 0, entries = 0;
        for (long h = sc.test.start_hour(); h < sc.test.end_hour(); ++h)
            for (const auto& cell : sc.test.cells())
                for (const std::string slice : {"A", "B"}) {
                    double mean = 0.0;
                    for (long t = sc.train.start_hour(); t < sc.train.end_hour(); ++t)
                        mean += raw_demand(sc.train, t, cell, slice, sc.setup.mapping);
                    mean /= static_cast<double>(sc.train.hours());
                    const long limit = static_cast<long>(std::ceil(mean));
                    const long actual = std::llround(raw_demand(sc.test, h, cell, slice, sc.setup.mapping));
                    under += std::max(actual - limit, 0L);
                    over += std::max(limit - actual, 0L);
                    ++entries;
                }
        EXPECT_EQ(r.totals(), (SliceTotals{under, over, under + over, entries})) << seed;
    }
}

TEST(RunDynamic, MetricsMatchRawDemand) {
    Scenario sc(small_generator());
    const auto r = run_dynamic(sc.train, sc.test, sc.setup, sc.naive_models());
    ASSERT_EQ(r.hourly.size(), static_cast<std::size_t>(sc.test.hours()) * 4u);
    for (const auto& m : r.hourly) {
        const double raw = raw_demand(sc.test, m.hour, m.cell, m.slice_id, sc.setup.mapping);
        EXPECT_EQ(m.actual_raw, raw);
        EXPECT_EQ(m.actual_ues, std::llround(raw));
        EXPECT_EQ(m.non_optimal, std::abs(m.actual_ues - m.limit_ues));
    }
    EXPECT_EQ(r.stats.fallback_hours, 0);
    EXPECT_EQ(r.stats.ves_events, sc.test.hours() * 2);
    EXPECT_EQ(r.stats.dead_letters, 0);
}

TEST(RunDynamic, ZeroNoisePeriodicIsWithinRounding) {
    Scenario sc(small_generator(0.0, 8));
    const auto r = run_dynamic(sc.train, sc.test, sc.setup, sc.naive_models());
    for (const auto& m : r.hourly) EXPECT_LE(m.non_optimal, 1) << m.hour << ' ' << m.slice_id;
    const auto t = r.totals();
    EXPECT_LT(static_cast<double>(t.non_optimal) / static_cast<double>(t.entries), 1.0);
    EXPECT_LT(t.non_optimal, run_static(sc.train, sc.test, sc.setup).totals().non_optimal);
}

TEST(RunDynamic, ColdStartFallsBackUntilHistorySuffices) {
    Scenario sc(small_generator());
    DynamicOptions opt;
    opt.warm_start = false;
    const auto cold = run_dynamic(sc.train, sc.test, sc.setup, sc.naive_models(), opt);
    EXPECT_EQ(cold.stats.fallback_hours, 24);
    const auto st = run_static(sc.train, sc.test, sc.setup);
    // Fallback hours enforce exactly the static limits.
    for (std::size_t i = 0; i < 24 * 4; ++i) EXPECT_EQ(cold.hourly[i], st.hourly[i]);
}

TEST(RunDynamic, TcpTransportMatchesInProcess) {
    Scenario sc(small_generator());
    const auto models = sc.naive_models();
    DynamicOptions tcp;
    tcp.transport = TransportMode::TcpLoopback;
    const auto a = run_dynamic(sc.train, sc.test, sc.setup, models);
    const auto b = run_dynamic(sc.train, sc.test, sc.setup, models, tcp);
    EXPECT_EQ(a.hourly, b.hourly);
    EXPECT_EQ(a.stats, b.stats);
    EXPECT_EQ(a.final_cloud, b.final_cloud);
}

std::string report_text(const RunReport& r) {
    std::ostringstream os;
    write_report_csv(os, r);
    write_audit_csv(os, r);
    os << totals_json(r).dump(2);
    return os.str();
}

TEST(RunDynamic, ReplayIsByteIdentical) {
    Scenario sc(small_generator());
    const auto models = sc.naive_models();
    EXPECT_EQ(report_text(run_dynamic(sc.train, sc.test, sc.setup, models)),
              report_text(run_dynamic(sc.train, sc.test, sc.setup, models)));
    EXPECT_EQ(report_text(run_static(sc.train, sc.test, sc.setup)), report_text(run_static(sc.train, sc.test, sc.setup)));
}

TEST(Report, TotalsEqualReSummedCsv) {
    Scenario sc(small_generator());
    const auto r = run_dynamic(sc.train, sc.test, sc.setup, sc.naive_models());
    std::stringstream csv;
    write_report_csv(csv, r);
    const auto rows = parse_report_csv(csv);
    ASSERT_EQ(rows.size(), r.hourly.size());
    std::map<std::string, long> under, over, non;
    for (const auto& m : rows) {
        under[m.slice_id] += m.under_served;
        over[m.slice_id] += m.over_served;
        non[m.slice_id] += m.non_optimal;
    }
    const auto j = totals_json(r);
    long total = 0;
    for (const auto& [id, v] : non) {
        EXPECT_EQ(j["slices"][id]["under_served"].get<long>(), under[id]);
        EXPECT_EQ(j["slices"][id]["over_served"].get<long>(), over[id]);
        EXPECT_EQ(j["slices"][id]["non_optimal"].get<long>(), v);
        total += v;
    }
    EXPECT_EQ(j["total"]["non_optimal"].get<long>(), total);
}

TEST(Report, CsvParserRejectsDamage) {
    std::istringstream bad_header("hour,slice\n");
    EXPECT_THROW(parse_report_csv(bad_header), ParseError);
    std::istringstream bad_row(std::string(kReportCsvHeader) + "\n1,A,0,0,x,1,0,0,0\n");
    EXPECT_THROW(parse_report_csv(bad_row), ParseError);
}

}  // namespace
}  // namespace pcl
