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

// Trained predictors behind one value type, one-step prediction and JSON
// persistence.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pcl/error.hpp"
#include "pcl/forecaster/accuracy.hpp"
#include "pcl/forecaster/arima.hpp"
#include "pcl/forecaster/lstm.hpp"
#include "pcl/forecaster/normalization.hpp"

namespace pcl {

enum class ModelKind { Lstm, Arima, SeasonalNaive };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::Lstm: return "lstm";
        case ModelKind::Arima: return "arima";
        case ModelKind::SeasonalNaive: return "seasonal_naive";
    }
    return "?";
}

inline ModelKind model_kind_from_name(std::string_view s) {
    if (s == "lstm") return ModelKind::Lstm;
    if (s == "arima") return ModelKind::Arima;
    if (s == "seasonal_naive") return ModelKind::SeasonalNaive;
    throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

struct LstmState {
    LstmConfig config;
    LstmNetwork network;
};

struct ArimaState {
    ArimaOrder order;
    ArimaCoefficients coef;
    double sigma2 = 0.0;
    double aic = 0.0;
};

struct NaiveState {
    int season = 24;
    int horizon = 1;
};

struct ForecastModel {
    ModelKind kind = ModelKind::SeasonalNaive;
    std::variant<LstmState, ArimaState, NaiveState> parameters = NaiveState{};
    Normalization normalization;
    std::string trained_on;
};

inline ForecastModel train_lstm(std::span<const double> series, const LstmConfig& cfg, std::string trained_on = {}) {
    auto r = train_lstm_network(series, cfg);
    return {ModelKind::Lstm, LstmState{cfg, std::move(r.network)}, r.normalization, std::move(trained_on)};
}

inline ForecastModel fit_arima(std::span<const double> series, std::span<const ArimaOrder> candidates,
                               std::string trained_on = {}) {
    auto fit = select_arima(series, candidates);
    return {ModelKind::Arima, ArimaState{fit.order, fit.coef, fit.sigma2, fit.aic}, Normalization::fit(series),
            std::move(trained_on)};
}

inline ForecastModel make_seasonal_naive(std::span<const double> series, int season = 24, int horizon = 1,
                                         std::string trained_on = {}) {
    if (season < 1 || horizon < 1) throw ConfigError("seasonal-naive season and horizon must be >= 1");
    require_finite(series, "series");
    return {ModelKind::SeasonalNaive, NaiveState{season, horizon}, Normalization::fit(series), std::move(trained_on)};
}

inline int model_horizon(const ForecastModel& m) {
    switch (m.kind) {
        case ModelKind::Lstm: return std::get<LstmState>(m.parameters).config.horizon;
        case ModelKind::Arima: return 1;
        case ModelKind::SeasonalNaive: return std::get<NaiveState>(m.parameters).horizon;
    }
    return 1;
}

// Shortest window predict_next accepts (LSTM requires exactly this length).
inline std::size_t required_window(const ForecastModel& m) {
    switch (m.kind) {
        case ModelKind::Lstm: return static_cast<std::size_t>(std::get<LstmState>(m.parameters).config.input_window);
        case ModelKind::Arima:
            return static_cast<std::size_t>(std::get<ArimaState>(m.parameters).order.conditioning_length() + 1);
        case ModelKind::SeasonalNaive: return static_cast<std::size_t>(std::get<NaiveState>(m.parameters).season);
    }
    return 1;
}

// Forecast of the `horizon` values following `window`, clamped at zero.
inline std::vector<double> predict_next(const ForecastModel& m, std::span<const double> window) {
    require_finite(window, "prediction window");
    const std::size_t need = required_window(m);
    std::vector<double> out;
    switch (m.kind) {
        case ModelKind::Lstm: {
            const auto& st = std::get<LstmState>(m.parameters);
            if (window.size() != need)
                throw ContractError("LSTM window must have exactly " + std::to_string(need) + " values, got " +
                                    std::to_string(window.size()));
            Eigen::MatrixXd x(static_cast<Eigen::Index>(need), 1);
            for (std::size_t i = 0; i < need; ++i) x(static_cast<Eigen::Index>(i), 0) = m.normalization.normalize(window[i]);
            const Eigen::MatrixXd y = st.network.predict(x);
            for (Eigen::Index h = 0; h < y.rows(); ++h) out.push_back(m.normalization.denormalize(y(h, 0)));
            break;
        }
        case ModelKind::Arima: {
            const auto& st = std::get<ArimaState>(m.parameters);
            if (window.size() < need)
                throw ContractError("ARIMA window needs at least " + std::to_string(need) + " values");
            out = arima_forecast(st.order, st.coef, window, 1);
            break;
        }
        case ModelKind::SeasonalNaive: {
            const auto& st = std::get<NaiveState>(m.parameters);
            if (window.size() < need)
                throw ContractError("seasonal-naive window needs at least " + std::to_string(need) + " values");
            const std::size_t n = window.size();
            const auto s = static_cast<std::size_t>(st.season);
            for (int h = 0; h < st.horizon; ++h) out.push_back(window[n - s + static_cast<std::size_t>(h) % s]);
            break;
        }
    }
    for (double& v : out) {
        if (!std::isfinite(v)) throw ContractError("model produced a non-finite prediction");
        v = std::max(v, 0.0);
    }
    return out;
}

// ARIMA predictions replay the residual recursion over the whole history so
// slowly decaying MA start-up transients match the fit.
inline std::size_t prediction_history(const ForecastModel& m) {
    if (m.kind != ModelKind::Arima) return required_window(m);
    return std::numeric_limits<std::size_t>::max();
}

// One-step-ahead forecasts for series[begin, end), each made from the values
// preceding it.
inline std::vector<double> one_step_predictions(const ForecastModel& m, std::span<const double> series,
                                                std::size_t begin, std::size_t end) {
    const std::size_t need = required_window(m);
    const std::size_t hist = prediction_history(m);
    if (begin < need || end > series.size() || begin > end)
        throw ContractError("one_step_predictions range does not leave a full window");
    std::vector<double> out;
    out.reserve(end - begin);
    for (std::size_t t = begin; t < end; ++t) {
        const std::size_t from = m.kind == ModelKind::Lstm ? t - need : (t > hist ? t - hist : 0);
        out.push_back(predict_next(m, series.subspan(from, t - from)).front());
    }
    return out;
}

// ---- persistence ----------------------------------------------------------

inline nlohmann::ordered_json to_json(const LstmConfig& c) {
    return {{"layers", c.layers},
            {"unitsPerLayer", c.units_per_layer},
            {"activation", activation_name(c.activation)},
            {"batchSize", c.batch_size},
            {"epochs", c.epochs},
            {"learningRate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"inputWindow", c.input_window},
            {"horizon", c.horizon},
            {"seed", c.seed}};
}

inline LstmConfig lstm_config_from_json(const nlohmann::json& j) {
    LstmConfig c;
    c.layers = j.at("layers").get<int>();
    c.units_per_layer = j.at("unitsPerLayer").get<int>();
    const auto act = j.at("activation").get<std::string>();
    if (act != "relu" && act != "tanh") throw ParseError("unknown activation '" + act + "'");
    c.activation = act == "relu" ? Activation::Relu : Activation::Tanh;
    c.batch_size = j.at("batchSize").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.learning_rate = j.at("learningRate").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.input_window = j.at("inputWindow").get<int>();
    c.horizon = j.at("horizon").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline nlohmann::ordered_json to_json(const ArimaOrder& o) {
    return {{"p", o.p}, {"d", o.d}, {"q", o.q}, {"P", o.P}, {"D", o.D}, {"Q", o.Q}, {"s", o.s}};
}

inline ArimaOrder arima_order_from_json(const nlohmann::json& j) {
    ArimaOrder o{j.at("p").get<int>(), j.at("d").get<int>(), j.at("q").get<int>(), j.at("P").get<int>(),
                 j.at("D").get<int>(), j.at("Q").get<int>(), j.at("s").get<int>()};
    o.validate();
    return o;
}

namespace model_detail {

inline nlohmann::ordered_json tensor(const std::string& name, int rows, int cols, std::span<const double> data) {
    return {{"name", name}, {"shape", {rows, cols}}, {"data", std::vector<double>(data.begin(), data.end())}};
}

inline std::vector<double> read_tensor(const nlohmann::json& tensors, const std::string& name, int rows, int cols) {
    for (const auto& t : tensors) {
        if (t.at("name").get<std::string>() != name) continue;
        const auto shape = t.at("shape").get<std::vector<int>>();
        if (shape.size() != 2 || shape[0] != rows || shape[1] != cols)
            throw ParseError("tensor '" + name + "' has an unexpected shape");
        auto data = t.at("data").get<std::vector<double>>();
        if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
            throw ParseError("tensor '" + name + "' data length does not match its shape");
        for (double v : data)
            if (!std::isfinite(v)) throw ParseError("tensor '" + name + "' holds a non-finite value");
        return data;
    }
    throw ParseError("missing tensor '" + name + "'");
}

}  // namespace model_detail

inline nlohmann::ordered_json to_json(const ForecastModel& m) {
    nlohmann::ordered_json j;
    j["schema"] = "forecast-model-v1";
    j["kind"] = model_kind_name(m.kind);
    j["trainedOn"] = m.trained_on;
    j["normalization"] = {{"min", m.normalization.min}, {"max", m.normalization.max}};
    auto tensors = nlohmann::ordered_json::array();
    switch (m.kind) {
        case ModelKind::Lstm: {
            const auto& st = std::get<LstmState>(m.parameters);
            j["config"] = to_json(st.config);
            const auto p = st.network.parameters();
            for (const auto& s : st.network.tensors())
                tensors.push_back(model_detail::tensor(s.name, s.rows, s.cols, p.subspan(s.offset, s.size())));
            break;
        }
        case ModelKind::Arima: {
            const auto& st = std::get<ArimaState>(m.parameters);
            j["config"] = {{"order", to_json(st.order)}, {"sigma2", st.sigma2}, {"aic", st.aic}};
            tensors.push_back(model_detail::tensor("ar", 1, st.order.p, st.coef.ar));
            tensors.push_back(model_detail::tensor("ma", 1, st.order.q, st.coef.ma));
            tensors.push_back(model_detail::tensor("sar", 1, st.order.P, st.coef.sar));
            tensors.push_back(model_detail::tensor("sma", 1, st.order.Q, st.coef.sma));
            tensors.push_back(model_detail::tensor("mean", 1, 1, std::span<const double>(&st.coef.mean, 1)));
            break;
        }
        case ModelKind::SeasonalNaive: {
            const auto& st = std::get<NaiveState>(m.parameters);
            j["config"] = {{"season", st.season}, {"horizon", st.horizon}};
            break;
        }
    }
    j["tensors"] = std::move(tensors);
    return j;
}

inline ForecastModel forecast_model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<std::string>() != "forecast-model-v1") throw ParseError("unsupported model schema");
        ForecastModel m;
        m.kind = model_kind_from_name(j.at("kind").get<std::string>());
        m.trained_on = j.at("trainedOn").get<std::string>();
        m.normalization = {j.at("normalization").at("min").get<double>(), j.at("normalization").at("max").get<double>()};
        if (!(m.normalization.max >= m.normalization.min)) throw ParseError("normalization max < min");
        const auto& cfg = j.at("config");
        const auto& tensors = j.at("tensors");
        switch (m.kind) {
            case ModelKind::Lstm: {
                auto c = lstm_config_from_json(cfg);
                c.validate();
                LstmNetwork net(c.layers, c.units_per_layer, c.horizon, c.activation);
                auto p = net.parameters();
                for (const auto& s : net.tensors()) {
                    auto data = model_detail::read_tensor(tensors, s.name, s.rows, s.cols);
                    std::copy(data.begin(), data.end(), p.begin() + static_cast<std::ptrdiff_t>(s.offset));
                }
                m.parameters = LstmState{c, std::move(net)};
                break;
            }
            case ModelKind::Arima: {
                ArimaState st;
                st.order = arima_order_from_json(cfg.at("order"));
                st.sigma2 = cfg.at("sigma2").get<double>();
                st.aic = cfg.at("aic").get<double>();
                st.coef.ar = model_detail::read_tensor(tensors, "ar", 1, st.order.p);
                st.coef.ma = model_detail::read_tensor(tensors, "ma", 1, st.order.q);
                st.coef.sar = model_detail::read_tensor(tensors, "sar", 1, st.order.P);
                st.coef.sma = model_detail::read_tensor(tensors, "sma", 1, st.order.Q);
                st.coef.mean = model_detail::read_tensor(tensors, "mean", 1, 1).front();
                m.parameters = st;
                break;
            }
            case ModelKind::SeasonalNaive:
                m.parameters = NaiveState{cfg.at("season").get<int>(), cfg.at("horizon").get<int>()};
                break;
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
}

inline std::string serialize_model(const ForecastModel& m) { return to_json(m).dump(1) + "\n"; }

inline ForecastModel parse_model(std::string_view text) {
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("model file is not valid JSON");
    return forecast_model_from_json(j);
}

}  // namespace pcl
