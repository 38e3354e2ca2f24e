#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pcl/forecaster/accuracy.hpp"
#include "pcl/forecaster/lstm.hpp"
#include "pcl/forecaster/model.hpp"
#include "support/oracles.hpp"

namespace pcl {
namespace {

using test::numeric_gradient;
using test::random_batch;

class LstmGradientCheck : public ::testing::TestWithParam<int> {};

TEST_P(LstmGradientCheck, MatchesCentralDifferences) { EXPECT_LE(test::gradient_check(GetParam()), 1e-4); }

INSTANTIATE_TEST_SUITE_P(Seeds, LstmGradientCheck, ::testing::Range(0, 16));

TEST(LstmGradients, ZeroModelZeroInputs) {
    LstmNetwork net(2, 3, 1, Activation::Relu);
    LstmBatch batch{Eigen::MatrixXd::Zero(5, 4), Eigen::MatrixXd::Constant(1, 4, 0.7)};
    std::vector<double> g(net.parameter_count());
    net.loss_and_gradients(batch, g);
    for (const auto& s : net.tensors()) {
        double norm = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) norm += std::abs(g[s.offset + i]);
        if (s.name == "dense.bias") {
            EXPECT_NEAR(norm, 2.0 * 0.7, 1e-12) << s.name;
        } else if (s.name.ends_with("weight") || s.name.find(".w_") != std::string::npos) {
            EXPECT_EQ(norm, 0.0) << s.name;
        }
    }

    LstmBatch zero{Eigen::MatrixXd::Zero(5, 4), Eigen::MatrixXd::Zero(1, 4)};
    net.loss_and_gradients(zero, g);
    for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(LstmGradients, PaddingSlotsHaveZeroGradient) {
    LstmNetwork net(1, 2, 1, Activation::Tanh);
    net.initialize(3);
    const auto pad = net.padding_indices();
    ASSERT_FALSE(pad.empty());
    Rng rng(5);
    const auto batch = random_batch(rng, 4, 1, 2);
    std::vector<double> g(net.parameter_count());
    net.loss_and_gradients(batch, g);
    const auto numeric = numeric_gradient(net, batch);
    for (std::size_t i : pad) {
        EXPECT_EQ(g[i], 0.0);
        EXPECT_EQ(numeric[i], 0.0);
    }
}

TEST(LstmGradients, ShapeMismatch) {
    LstmNetwork net(1, 2, 2, Activation::Relu);
    LstmBatch bad{Eigen::MatrixXd::Zero(4, 3), Eigen::MatrixXd::Zero(1, 3)};
    std::vector<double> g(net.parameter_count());
    EXPECT_THROW(net.loss_and_gradients(bad, g), ContractError);
    std::vector<double> short_grad(3);
    LstmBatch ok{Eigen::MatrixXd::Zero(4, 3), Eigen::MatrixXd::Zero(2, 3)};
    EXPECT_THROW(net.loss_and_gradients(ok, short_grad), ContractError);
}

LstmConfig small_config() {
    LstmConfig c;
    c.layers = 1;
    c.units_per_layer = 8;
    c.epochs = 20;
    c.input_window = 24;
    c.seed = 7;
    return c;
}

TEST(TrainLstm, ConstantSeries) {
    std::vector<double> xs(120, 37.5);
    auto model = train_lstm(xs, small_config());
    std::vector<double> window(24, 37.5);
    const double pred = predict_next(model, window).front();
    EXPECT_NEAR(pred, 37.5, 0.01 * 37.5);
    auto preds = one_step_predictions(model, xs, 24, xs.size());
    std::vector<double> actual(xs.begin() + 24, xs.end());
    EXPECT_DOUBLE_EQ(accuracy(preds, actual).accuracy_pct, 100.0);
}

TEST(TrainLstm, Deterministic) {
    std::vector<double> xs;
    for (int t = 0; t < 96; ++t) xs.push_back(10.0 + 5.0 * std::sin(t * 2.0 * std::numbers::pi / 24.0));
    auto cfg = small_config();
    cfg.epochs = 3;
    auto a = train_lstm(xs, cfg);
    auto b = train_lstm(xs, cfg);
    const auto pa = std::get<LstmState>(a.parameters).network.parameters();
    const auto pb = std::get<LstmState>(b.parameters).network.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    EXPECT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin()));
    EXPECT_EQ(serialize_model(a), serialize_model(b));
}

TEST(TrainLstm, PeriodicSeriesReachesNaiveLevel) {
    // Zero-noise 24 h pattern: seasonal-naive is exact, LSTM must approach it.
    std::vector<double> xs;
    for (int t = 0; t < 24 * 12; ++t) {
        const double h = t % 24;
        xs.push_back(30.0 + 18.0 * std::cos(2.0 * std::numbers::pi * (h - 20.0) / 24.0) +
                     6.0 * std::cos(4.0 * std::numbers::pi * (h - 12.0) / 24.0));
    }
    const std::size_t split = 24 * 10;
    LstmConfig cfg;
    cfg.layers = 1;
    cfg.units_per_layer = 24;
    cfg.epochs = 400;
    cfg.learning_rate = 3e-3;
    cfg.seed = 1;
    auto model = train_lstm(std::span<const double>(xs.data(), split), cfg);
    const double ref_max = *std::max_element(xs.begin(), xs.end());
    auto preds = one_step_predictions(model, xs, split, xs.size());
    std::vector<double> actual(xs.begin() + static_cast<std::ptrdiff_t>(split), xs.end());
    auto naive = make_seasonal_naive(xs);
    auto naive_preds = one_step_predictions(naive, xs, split, xs.size());
    EXPECT_DOUBLE_EQ(accuracy(naive_preds, actual, ref_max).accuracy_pct, 100.0);
    EXPECT_GE(accuracy(preds, actual, ref_max).accuracy_pct, 99.0);
}

TEST(TrainLstm, TooShort) {
    std::vector<double> xs(25, 1.0);
    EXPECT_THROW(train_lstm(xs, small_config()), TrainingError);
}

TEST(TrainLstm, DivergenceReportsEpoch) {
    std::vector<double> xs;
    for (int t = 0; t < 60; ++t) xs.push_back(t % 7);
    auto cfg = small_config();
    cfg.learning_rate = 1e300;
    try {
        train_lstm(xs, cfg);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_GE(e.epoch(), 0);
        EXPECT_LT(e.epoch(), cfg.epochs);
    }
}

TEST(LstmConfigTest, Validation) {
    LstmConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.layers, 2);
    EXPECT_EQ(c.units_per_layer, 150);
    EXPECT_EQ(c.activation, Activation::Relu);
    EXPECT_EQ(c.batch_size, 24);
    EXPECT_EQ(c.epochs, 120);
    for (auto mutate : std::vector<void (*)(LstmConfig&)>{
             [](LstmConfig& x) { x.layers = 0; }, [](LstmConfig& x) { x.units_per_layer = 0; },
             [](LstmConfig& x) { x.batch_size = 0; }, [](LstmConfig& x) { x.epochs = 0; },
             [](LstmConfig& x) { x.input_window = 0; }, [](LstmConfig& x) { x.horizon = 0; }}) {
        LstmConfig bad;
        mutate(bad);
        EXPECT_THROW(bad.validate(), ConfigError);
    }
}

}  // namespace
}  // namespace pcl
