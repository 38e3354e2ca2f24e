#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pcl/control_plane.hpp"
#include "pcl/pcl_rapp.hpp"

namespace pcl {
namespace {

AdaptiveLimit limit(long ues, double quota, long hour = 595) { return {"A", {0, 0}, hour, ues, quota}; }
SliceState state(long ues, double quota) { return {"A", {0, 0}, {ues, quota}}; }

TEST(ComputeAdaptiveLimit, Examples) {
    EXPECT_EQ(compute_adaptive_limit(0.0, 0.0), 0);
    EXPECT_EQ(compute_adaptive_limit(12.3, 0.0), 13);
    EXPECT_EQ(compute_adaptive_limit(10.0, 0.1), 11);
    EXPECT_EQ(compute_adaptive_limit(13.0), 13);
    EXPECT_THROW(compute_adaptive_limit(-1.0, 0.0), ContractError);
    EXPECT_THROW(compute_adaptive_limit(1.0, -0.1), ContractError);
    EXPECT_THROW(compute_adaptive_limit(std::nan(""), 0.0), ContractError);
}

TEST(ComputeAdaptiveLimit, MonotoneInForecastAndMargin) {
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
        const double f = rng.uniform(0.0, 500.0), g = f + rng.uniform(0.0, 5.0);
        const double m = rng.uniform(0.0, 0.5), n = m + rng.uniform(0.0, 0.5);
        EXPECT_LE(compute_adaptive_limit(f, m), compute_adaptive_limit(g, m));
        EXPECT_LE(compute_adaptive_limit(f, m), compute_adaptive_limit(f, n));
        EXPECT_GE(static_cast<double>(compute_adaptive_limit(f, m)), f * (1.0 + m) - 1e-6);
    }
}

TEST(DerivePrbQuota, Examples) {
    EXPECT_EQ(derive_prb_quota(0, 2.0, 100.0), 0.0);
    EXPECT_EQ(derive_prb_quota(20, 2.0, 100.0), 40.0);
    EXPECT_EQ(derive_prb_quota(80, 2.0, 100.0), 100.0);
    EXPECT_EQ(derive_prb_quota(80, 2.0, 70.0), 70.0);
    EXPECT_THROW(derive_prb_quota(1, 0.0, 100.0), ContractError);
    EXPECT_THROW(derive_prb_quota(1, -1.0, 100.0), ContractError);
    EXPECT_THROW(derive_prb_quota(1, 1.0, 0.0), ContractError);
}

TEST(DerivePrbQuota, NeverExceedsCap) {
    Rng rng(6);
    for (int i = 0; i < 2000; ++i) {
        const double cap = rng.uniform(1.0, 100.0);
        EXPECT_LE(derive_prb_quota(rng.uniform_int(0, 1000), rng.uniform(0.01, 10.0), cap), cap);
    }
}

TEST(EstimatePrbPerUe, MeanOfRatiosOverActiveHours) {
    SliceSeries a{"A", {0, 0}, 0, {2.0, 0.0, 4.0}, {0, 0, 0}, {4.0, 9.0, 4.0}};
    SliceSeries b{"A", {0, 1}, 0, {1.0}, {0}, {3.0}};
    SliceSeries idle{"B", {0, 0}, 0, {0.0, 0.0}, {0, 0}, {0.0, 0.0}};
    const std::vector<SliceSeries> all{a, b, idle};
    const auto est = estimate_prb_per_ue(all);
    EXPECT_DOUBLE_EQ(est.at("A"), (2.0 + 1.0 + 3.0) / 3.0);
    EXPECT_EQ(est.at("B"), 100.0);
}

TEST(BuildSliceDescriptor, NoChangeIsSingleHold) {
    const auto d = build_slice_descriptor("A", "40486", state(10, 20.0), limit(10, 20.0));
    ASSERT_EQ(d.layer_descriptors.size(), 1u);
    EXPECT_EQ(d.layer_descriptors[0].direction, ScaleDirection::Hold);
    EXPECT_EQ(d.timestamp_hour, 595);
}

TEST(BuildSliceDescriptor, ScaleUpUes) {
    const auto d = build_slice_descriptor("A", "40486", state(10, 20.0), limit(13, 20.0));
    ASSERT_EQ(d.layer_descriptors.size(), 1u);
    EXPECT_EQ(d.layer_descriptors[0],
              (LayerDescriptor{SchedulerLayer::MacScheduler, SliceParameter::MaxActiveUes, 13.0, ScaleDirection::ScaleUp}));
}

TEST(BuildSliceDescriptor, MixedDirectionsApplyToTarget) {
    const auto d = build_slice_descriptor("A", "40486", state(10, 40.0), limit(13, 20.0));
    ASSERT_EQ(d.layer_descriptors.size(), 2u);
    EXPECT_EQ(d.layer_descriptors[0].direction, ScaleDirection::ScaleUp);
    EXPECT_EQ(d.layer_descriptors[1].direction, ScaleDirection::ScaleDown);
    EXPECT_EQ(d.layer_descriptors[1].parameter, SliceParameter::PrbQuotaPct);

    NodeSliceConfig node;
    node.cells[{0, 0}].slices["A"] = {10, 40.0};
    const std::vector<CellId> cells{{0, 0}};
    const auto msgs = xapp_translate(d, node, cells, {"A"});
    ASSERT_EQ(msgs.size(), 1u);
    const auto r = e2_apply(msgs[0], node);
    EXPECT_EQ(r.config.get({0, 0}, "A"), (SliceParams{13, 20.0}));
}

TEST(BuildSliceDescriptor, RejectsSliceMismatch) {
    SliceState other{"B", {0, 0}, {1, 1.0}};
    EXPECT_THROW(build_slice_descriptor("A", "40486", other, limit(1, 1.0)), ContractError);
    EXPECT_THROW(build_slice_descriptor("A", "40486", state(1, 1.0), AdaptiveLimit{"A", {0, 1}, 0, 1, 1.0}),
                 ContractError);
}

TEST(BuildSliceDescriptor, RejectsInvalidTarget) {
    EXPECT_THROW(build_slice_descriptor("A", "40486", state(1, 1.0), limit(0, 5.0)), ContractError);
    EXPECT_THROW(build_slice_descriptor("A", "40486", state(1, 1.0), limit(1, 101.0)), ContractError);
    EXPECT_THROW(build_slice_descriptor("A", "4048", state(1, 1.0), limit(2, 1.0)), ContractError);
}

TEST(InferCloudScaling, Examples) {
    CloudSizing sizing{10, 2, 4};
    const auto off = infer_cloud_scaling("B", 0.0, sizing, SlicePriority::Low, 7);
    EXPECT_EQ(off, (CloudScalingDirective{"B", 0, 0, 0, false, 7}));

    const auto on = infer_cloud_scaling("A", 13.0, sizing, SlicePriority::High, 7);
    EXPECT_EQ(on, (CloudScalingDirective{"A", 2, 4, 8, true, 7}));

    // A high-priority slice keeps an active (possibly empty) allocation.
    EXPECT_TRUE(infer_cloud_scaling("A", 0.0, sizing, SlicePriority::High, 7).activate);
}

TEST(InferCloudScaling, ReactivationAfterDeactivation) {
    CloudSizing sizing{10, 2, 4};
    CloudState cloud;
    cloud = o2_scale(infer_cloud_scaling("B", 25.0, sizing, SlicePriority::Low, 1), cloud);
    EXPECT_EQ(cloud.slices["B"], (CloudSliceState{3, 6, 12, true}));
    cloud = o2_scale(infer_cloud_scaling("B", 0.0, sizing, SlicePriority::Low, 2), cloud);
    EXPECT_EQ(cloud.slices["B"], (CloudSliceState{0, 0, 0, false}));
    const auto again = infer_cloud_scaling("B", 4.2, sizing, SlicePriority::Low, 3);
    EXPECT_TRUE(again.activate);
    cloud = o2_scale(again, cloud);
    EXPECT_EQ(cloud.slices["B"], (CloudSliceState{1, 2, 4, true}));
}

// Two slices in two cells with a periodic history.
struct LoopFixture {
    std::vector<SliceSeries> history;
    std::map<std::string, ForecastModel> models;
    LoopConfig cfg;

    explicit LoopFixture(long hours = 72) {
        for (const auto& id : {"A", "B"})
            for (int c = 0; c < 2; ++c) {
                SliceSeries s{id, {0, c}, 0, {}, {}, {}};
                for (long h = 0; h < hours; ++h) {
                    const double ues = 5.0 + 3.0 * c + 4.0 * std::sin(2.0 * M_PI * static_cast<double>(h % 24) / 24.0) +
                                       (id[0] == 'B' ? 10.3 : 0.0);
                    s.append(h, ues, ues * 0.1, ues * 0.5);
                }
                models[s.key()] = make_seasonal_naive(s.active_ues, 24, 1, s.key());
                history.push_back(std::move(s));
            }
        cfg.prb_per_ue = {{"A", 0.5}, {"B", 0.5}};
        cfg.priority = {{"B", SlicePriority::Low}};
    }
};

TEST(ClosedLoopStep, InsufficientHistoryIsLoopError) {
    LoopFixture fx(20);
    EXPECT_THROW(closed_loop_step(20, fx.history, fx.models, {}, fx.cfg), LoopError);
    // History must end right before the governed hour.
    LoopFixture later(48);
    EXPECT_THROW(closed_loop_step(50, later.history, later.models, {}, later.cfg), LoopError);
}

TEST(ClosedLoopStep, FallbackReassertsStaticLimits) {
    LoopFixture fx(20);
    std::map<std::string, long> statics;
    for (const auto& s : fx.history) statics[s.key()] = 9;
    const auto out = static_fallback_step(20, fx.history, statics, {}, fx.cfg);
    ASSERT_EQ(out.limits.size(), 4u);
    for (const auto& l : out.limits) {
        EXPECT_EQ(l.max_active_ues, 9);
        EXPECT_EQ(l.prb_quota_pct, 4.5);
    }
}

TEST(ClosedLoopStep, PeriodicNaiveLimitsAreDemandCeiling) {
    LoopFixture fx(96);
    NodeSliceConfig node;
    for (long h = 48; h < 96; ++h) {
        const auto out = closed_loop_step(h, fx.history, fx.models, node, fx.cfg);
        for (std::size_t i = 0; i < fx.history.size(); ++i) {
            const double actual = fx.history[i].active_ues[static_cast<std::size_t>(h)];
            EXPECT_EQ(out.limits[i].max_active_ues, static_cast<long>(std::ceil(actual - 1e-9))) << h;
        }
    }
}

TEST(ClosedLoopStep, PureAndIdempotentOnNoChange) {
    LoopFixture fx(72);
    NodeSliceConfig node;
    const auto a = closed_loop_step(60, fx.history, fx.models, node, fx.cfg);
    const auto b = closed_loop_step(60, fx.history, fx.models, node, fx.cfg);
    EXPECT_EQ(a, b);

    // Enforce the first step's limits, then ask for the same hour's limits again.
    for (const auto& l : a.limits) node.cells[l.cell].slices[l.slice_id] = l.params();
    const auto again = closed_loop_step(60, fx.history, fx.models, node, fx.cfg);
    for (const auto& p : again.policies) {
        ASSERT_EQ(p.descriptor.layer_descriptors.size(), 1u);
        EXPECT_EQ(p.descriptor.layer_descriptors[0].direction, ScaleDirection::Hold);
    }
}

TEST(ClosedLoopStep, QuotaOversubscriptionRescalesProportionally) {
    LoopFixture fx(72);
    fx.cfg.prb_per_ue = {{"A", 6.0}, {"B", 6.0}};
    const auto out = closed_loop_step(60, fx.history, fx.models, {}, fx.cfg);
    std::map<CellId, double> sum;
    std::map<CellId, std::map<std::string, std::pair<long, double>>> per;
    for (const auto& l : out.limits) {
        sum[l.cell] += l.prb_quota_pct;
        per[l.cell][l.slice_id] = {l.max_active_ues, l.prb_quota_pct};
    }
    for (const auto& [cell, s] : sum) {
        EXPECT_LE(s, 100.0);
        const auto& a = per[cell]["A"];
        const auto& b = per[cell]["B"];
        const double ra = std::min(100.0, 6.0 * static_cast<double>(a.first));
        const double rb = std::min(100.0, 6.0 * static_cast<double>(b.first));
        if (ra + rb > 100.0) {
            EXPECT_NEAR(s, 100.0, 1e-9);
            EXPECT_NEAR(a.second / b.second, ra / rb, 1e-9);
        }
    }
}

TEST(ClosedLoopStep, DecreasesPrecedeIncreasesWithinCell) {
    LoopFixture fx(72);
    NodeSliceConfig node;
    node.cells[{0, 0}].slices["A"] = {0, 0.0};
    node.cells[{0, 0}].slices["B"] = {100, 90.0};
    const auto out = closed_loop_step(60, fx.history, fx.models, node, fx.cfg);
    std::vector<std::string> order;
    for (const auto& p : out.policies)
        if (p.scope.front() == CellId{0, 0}) order.push_back(p.descriptor.slice_id);
    EXPECT_EQ(order, (std::vector<std::string>{"B", "A"}));
}

TEST(ClosedLoopStep, CloudDirectivesPerSlice) {
    LoopFixture fx(72);
    const auto out = closed_loop_step(60, fx.history, fx.models, {}, fx.cfg);
    ASSERT_EQ(out.directives.size(), 2u);
    EXPECT_EQ(out.directives[0].slice_id, "A");
    EXPECT_EQ(out.directives[1].slice_id, "B");
    double fb = 0.0;
    for (const auto& s : fx.history)
        if (s.slice_id == "B") fb += s.active_ues[36];
    EXPECT_EQ(out.directives[1].target_vm_count, (compute_adaptive_limit(fb) + 9) / 10);
}

TEST(StaticLimits, CeilOfTrainMeanWithOverrides) {
    SliceSeries a{"A", {0, 0}, 0, {1.0, 2.0, 4.0}, {0, 0, 0}, {0, 0, 0}};
    SliceSeries b{"B", {0, 0}, 0, {3.0, 3.0}, {0, 0}, {0, 0}};
    const std::vector<SliceSeries> all{a, b};
    const auto d = static_limits(all);
    EXPECT_EQ(d.at("A/enb0-cell0"), 3);
    EXPECT_EQ(d.at("B/enb0-cell0"), 3);
    const auto o = static_limits(all, {{"B", 17}});
    EXPECT_EQ(o.at("B/enb0-cell0"), 17);
    EXPECT_THROW(static_limits(all, {{"A", -1}}), ConfigError);
}

}  // namespace
}  // namespace pcl
