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

// Stacked LSTM regressor with a dense head, trained by backpropagation
// through time and Adam. All parameters live in one flat buffer so the
// optimizer, persistence and gradient checks work on a single vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcl/error.hpp"
#include "pcl/forecaster/normalization.hpp"
#include "pcl/types.hpp"

namespace pcl {

enum class Activation { Relu, Tanh };

inline const char* activation_name(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

struct LstmConfig {
    int layers = 2;
    int units_per_layer = 150;
    Activation activation = Activation::Relu;
    int batch_size = 24;
    int epochs = 120;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int input_window = 24;
    int horizon = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (layers < 1) throw ConfigError("lstm.layers must be >= 1");
        if (units_per_layer < 1) throw ConfigError("lstm.units_per_layer must be >= 1");
        if (batch_size < 1) throw ConfigError("lstm.batch_size must be >= 1");
        if (epochs < 1) throw ConfigError("lstm.epochs must be >= 1");
        if (input_window < 1) throw ConfigError("lstm.input_window must be >= 1");
        if (horizon < 1) throw ConfigError("lstm.horizon must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("lstm.learning_rate must be > 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
            throw ConfigError("lstm Adam decay rates must be in [0, 1)");
        if (!(epsilon > 0.0)) throw ConfigError("lstm.epsilon must be > 0");
    }
};

struct TensorSpec {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

// Inputs are window x batch (one scalar per step); targets horizon x batch.
struct LstmBatch {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
};

class LstmNetwork {
public:
    using Matrix = Eigen::MatrixXd;
    using MatMap = Eigen::Map<Matrix>;
    using ConstMatMap = Eigen::Map<const Matrix>;

    using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

    // Every tensor starts on a 64-byte boundary of an aligned buffer, so
    // vectorized kernels take the same path on every run (summation order
    // and hence rounding depend on alignment). The gap slots are padding
    // that no computation reads.
    static constexpr std::size_t kAlign = 8;

    LstmNetwork() = default;

    LstmNetwork(int layers, int units, int horizon, Activation act)
        : layers_(layers), units_(units), horizon_(horizon), activation_(act) {
        if (layers < 1 || units < 1 || horizon < 1) throw ContractError("LSTM dimensions must be >= 1");
        std::size_t off = 0;
        auto add = [&](std::string name, int r, int c) {
            specs_.push_back({std::move(name), r, c, off});
            off += specs_.back().size();
            off = (off + kAlign - 1) / kAlign * kAlign;
        };
        for (int l = 0; l < layers; ++l) {
            const std::string p = "lstm" + std::to_string(l);
            add(p + ".w_input", 4 * units, l == 0 ? 1 : units);
            add(p + ".w_recurrent", 4 * units, units);
            add(p + ".bias", 4 * units, 1);
        }
        add("dense.weight", horizon, units);
        add("dense.bias", horizon, 1);
        params_.assign(off, 0.0);
    }

    int layers() const noexcept { return layers_; }
    int units() const noexcept { return units_; }
    int horizon() const noexcept { return horizon_; }
    Activation activation() const noexcept { return activation_; }
    const std::vector<TensorSpec>& tensors() const noexcept { return specs_; }
    std::span<double> parameters() noexcept { return params_; }
    std::span<const double> parameters() const noexcept { return params_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    // Indices of buffer slots not covered by any tensor.
    std::vector<std::size_t> padding_indices() const {
        std::vector<bool> used(params_.size(), false);
        for (const auto& s : specs_)
            for (std::size_t i = 0; i < s.size(); ++i) used[s.offset + i] = true;
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < used.size(); ++i)
            if (!used[i]) out.push_back(i);
        return out;
    }

    // Glorot-uniform weights, zero biases except the forget gate (1.0).
    void initialize(std::uint64_t seed) {
        Rng rng(seed);
        std::fill(params_.begin(), params_.end(), 0.0);
        for (const auto& s : specs_) {
            auto m = view(std::span<double>(params_), s);
            if (s.cols == 1 && s.name.ends_with("bias")) {
                if (s.name.starts_with("lstm")) m.block(units_, 0, units_, 1).setConstant(1.0);
                continue;
            }
            const double fan_out = static_cast<double>(s.rows);
            const double fan_in = static_cast<double>(s.cols);
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            for (int c = 0; c < s.cols; ++c)
                for (int r = 0; r < s.rows; ++r) m(r, c) = rng.uniform(-limit, limit);
        }
    }

    Matrix predict(const Matrix& inputs) const {
        Workspace ws;
        return forward(params_, inputs, ws);
    }

    // Batch mean squared error over all horizon outputs.
    double loss(const LstmBatch& batch) const {
        check_batch(batch);
        Workspace ws;
        const Matrix y = forward(params_, batch.inputs, ws);
        return (y - batch.targets).squaredNorm() / static_cast<double>(y.size());
    }

    // Returns the loss and writes d(loss)/d(param) into `grad` (same layout
    // as parameters(); padding slots get 0).
    double loss_and_gradients(const LstmBatch& batch, std::span<double> grad) const {
        check_batch(batch);
        if (grad.size() != params_.size()) throw ContractError("gradient buffer size mismatch");
        Workspace ws;
        const Matrix y = forward(params_, batch.inputs, ws);
        const Matrix dy = 2.0 * (y - batch.targets) / static_cast<double>(y.size());
        backward(dy, ws, grad);
        return (y - batch.targets).squaredNorm() / static_cast<double>(y.size());
    }

    bool all_finite() const {
        return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
    }

private:
    struct StepCache {
        Matrix gates;  // 4U x B, post-activation, order i, f, g, o
        Matrix cell;   // U x B
        Matrix cell_act;
        Matrix hidden;
    };
    struct Workspace {
        std::vector<Matrix> inputs;                  // per step, 1 x B
        std::vector<std::vector<StepCache>> layers;  // [layer][step]
    };

    static MatMap view(std::span<double> buf, const TensorSpec& s) {
        return MatMap(buf.data() + s.offset, s.rows, s.cols);
    }
    static ConstMatMap view(std::span<const double> buf, const TensorSpec& s) {
        return ConstMatMap(buf.data() + s.offset, s.rows, s.cols);
    }
    const TensorSpec& spec(int layer, int which) const { return specs_[static_cast<std::size_t>(3 * layer + which)]; }
    const TensorSpec& dense_w() const { return specs_[static_cast<std::size_t>(3 * layers_)]; }
    const TensorSpec& dense_b() const { return specs_[static_cast<std::size_t>(3 * layers_ + 1)]; }

    void check_batch(const LstmBatch& b) const {
        if (b.inputs.cols() == 0 || b.inputs.rows() == 0) throw ContractError("empty LSTM batch");
        if (b.targets.rows() != horizon_ || b.targets.cols() != b.inputs.cols())
            throw ContractError("LSTM batch shape mismatch: targets must be horizon x batch");
    }

    template <typename Derived>
    void activate(Eigen::MatrixBase<Derived>&& m) const {
        if (activation_ == Activation::Relu) m = m.cwiseMax(0.0);
        else m = m.array().tanh().matrix();
    }
    // Derivative of the activation, given its output.
    Matrix activation_grad(const Matrix& out) const {
        if (activation_ == Activation::Relu) return (out.array() > 0.0).cast<double>().matrix();
        return (1.0 - out.array().square()).matrix();
    }

    Matrix forward(std::span<const double> p, const Matrix& inputs, Workspace& ws) const {
        const int steps = static_cast<int>(inputs.rows());
        const auto batch = inputs.cols();
        const int u = units_;
        ws.inputs.resize(static_cast<std::size_t>(steps));
        for (int t = 0; t < steps; ++t) ws.inputs[static_cast<std::size_t>(t)] = inputs.row(t);
        ws.layers.assign(static_cast<std::size_t>(layers_), std::vector<StepCache>(static_cast<std::size_t>(steps)));

        Matrix h_prev, c_prev;
        for (int l = 0; l < layers_; ++l) {
            const auto wx = view(p, spec(l, 0));
            const auto wh = view(p, spec(l, 1));
            const auto b = view(p, spec(l, 2));
            h_prev = Matrix::Zero(u, batch);
            c_prev = Matrix::Zero(u, batch);
            auto& cache = ws.layers[static_cast<std::size_t>(l)];
            for (int t = 0; t < steps; ++t) {
                const Matrix& x = l == 0 ? ws.inputs[static_cast<std::size_t>(t)]
                                         : ws.layers[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(t)].hidden;
                auto& sc = cache[static_cast<std::size_t>(t)];
                sc.gates.noalias() = wx * x;
                sc.gates.noalias() += wh * h_prev;
                sc.gates.colwise() += b.col(0);
                auto ifo_sigmoid = [&](int row) {
                    sc.gates.middleRows(row, u) =
                        (1.0 / (1.0 + (-sc.gates.middleRows(row, u).array()).exp())).matrix();
                };
                ifo_sigmoid(0);
                ifo_sigmoid(u);
                ifo_sigmoid(3 * u);
                activate(sc.gates.middleRows(2 * u, u));
                sc.cell = sc.gates.middleRows(u, u).cwiseProduct(c_prev) +
                          sc.gates.middleRows(0, u).cwiseProduct(sc.gates.middleRows(2 * u, u));
                sc.cell_act = sc.cell;
                activate(sc.cell_act.block(0, 0, u, batch));
                sc.hidden = sc.gates.middleRows(3 * u, u).cwiseProduct(sc.cell_act);
                h_prev = sc.hidden;
                c_prev = sc.cell;
            }
        }
        Matrix y = view(p, dense_w()) * h_prev;
        y.colwise() += view(p, dense_b()).col(0);
        return y;
    }

    void backward(const Matrix& dy, const Workspace& ws, std::span<double> grad) const {
        std::fill(grad.begin(), grad.end(), 0.0);
        const int steps = static_cast<int>(ws.inputs.size());
        const int u = units_;
        const auto batch = dy.cols();
        const auto& top = ws.layers.back();

        view(grad, dense_w()).noalias() = dy * top.back().hidden.transpose();
        view(grad, dense_b()) = dy.rowwise().sum();

        // dh arriving from above, per step.
        std::vector<Matrix> dh_above(static_cast<std::size_t>(steps), Matrix::Zero(u, batch));
        dh_above.back() = view(std::span<const double>(params_), dense_w()).transpose() * dy;

        const Matrix zeros = Matrix::Zero(u, batch);
        Matrix dz(4 * u, batch);
        for (int l = layers_ - 1; l >= 0; --l) {
            const auto wx = view(std::span<const double>(params_), spec(l, 0));
            const auto wh = view(std::span<const double>(params_), spec(l, 1));
            auto gwx = view(grad, spec(l, 0));
            auto gwh = view(grad, spec(l, 1));
            auto gb = view(grad, spec(l, 2));
            const auto& cache = ws.layers[static_cast<std::size_t>(l)];
            std::vector<Matrix> dx_below;
            if (l > 0) dx_below.assign(static_cast<std::size_t>(steps), Matrix());

            Matrix dh_next = Matrix::Zero(u, batch);
            Matrix dc_next = Matrix::Zero(u, batch);
            for (int t = steps - 1; t >= 0; --t) {
                const auto& sc = cache[static_cast<std::size_t>(t)];
                const Matrix& c_prev = t > 0 ? cache[static_cast<std::size_t>(t - 1)].cell : zeros;
                const Matrix& h_prev = t > 0 ? cache[static_cast<std::size_t>(t - 1)].hidden : zeros;
                const auto ig = sc.gates.middleRows(0, u).array();
                const auto fg = sc.gates.middleRows(u, u).array();
                const auto gg = sc.gates.middleRows(2 * u, u);
                const auto og = sc.gates.middleRows(3 * u, u).array();

                const Matrix dh = dh_above[static_cast<std::size_t>(t)] + dh_next;
                const Matrix dc =
                    (dh.array() * og * activation_grad(sc.cell_act).array()).matrix() + dc_next;
                dz.middleRows(0, u) = (dc.array() * gg.array() * ig * (1.0 - ig)).matrix();
                dz.middleRows(u, u) = (dc.array() * c_prev.array() * fg * (1.0 - fg)).matrix();
                dz.middleRows(2 * u, u) = (dc.array() * ig * activation_grad(Matrix(gg)).array()).matrix();
                dz.middleRows(3 * u, u) = (dh.array() * sc.cell_act.array() * og * (1.0 - og)).matrix();
                dc_next = (dc.array() * fg).matrix();

                const Matrix& x = l == 0 ? ws.inputs[static_cast<std::size_t>(t)]
                                         : ws.layers[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(t)].hidden;
                gwx.noalias() += dz * x.transpose();
                gwh.noalias() += dz * h_prev.transpose();
                gb += dz.rowwise().sum();
                dh_next.noalias() = wh.transpose() * dz;
                if (l > 0) dx_below[static_cast<std::size_t>(t)].noalias() = wx.transpose() * dz;
            }
            if (l > 0) dh_above = std::move(dx_below);
        }
    }

    int layers_ = 0;
    int units_ = 0;
    int horizon_ = 0;
    Activation activation_ = Activation::Relu;
    std::vector<TensorSpec> specs_;
    Buffer params_;
};

// Sliding windows over a normalized series: sample k takes
// xs[k, k + window) as input and xs[k + window, k + window + horizon) as target.
inline LstmBatch make_windows(std::span<const double> xs, int window, int horizon, std::span<const std::size_t> which) {
    LstmBatch b{Eigen::MatrixXd(window, static_cast<Eigen::Index>(which.size())),
                Eigen::MatrixXd(horizon, static_cast<Eigen::Index>(which.size()))};
    for (std::size_t j = 0; j < which.size(); ++j) {
        const std::size_t k = which[j];
        for (int t = 0; t < window; ++t) b.inputs(t, static_cast<Eigen::Index>(j)) = xs[k + static_cast<std::size_t>(t)];
        for (int h = 0; h < horizon; ++h)
            b.targets(h, static_cast<Eigen::Index>(j)) = xs[k + static_cast<std::size_t>(window + h)];
    }
    return b;
}

class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n, double lr, double beta1, double beta2, double eps)
        : m_(n, 0.0), v_(n, 0.0), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::span<double> params, std::span<const double> grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
        }
    }

private:
    std::vector<double> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

struct LstmTrainResult {
    LstmNetwork network;
    Normalization normalization;
    std::vector<double> epoch_loss;
};

inline LstmTrainResult train_lstm_network(std::span<const double> series, const LstmConfig& cfg) {
    cfg.validate();
    require_finite(series, "training series");
    const auto min_len = static_cast<std::size_t>(cfg.input_window + cfg.horizon + 1);
    if (series.size() < min_len)
        throw TrainingError("series too short for LSTM training: need " + std::to_string(min_len) + " points, got " +
                            std::to_string(series.size()));

    LstmTrainResult r{LstmNetwork(cfg.layers, cfg.units_per_layer, cfg.horizon, cfg.activation),
                      Normalization::fit(series), {}};
    r.network.initialize(cfg.seed);
    const auto xs = r.normalization.normalize(series);

    const std::size_t n_samples = xs.size() - static_cast<std::size_t>(cfg.input_window + cfg.horizon) + 1;
    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), std::size_t{0});

    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    AdamOptimizer adam(r.network.parameter_count(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    LstmNetwork::Buffer grad(r.network.parameter_count());
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.next_u64() % i)]);
        double total = 0.0;
        for (std::size_t start = 0; start < n_samples; start += bs) {
            const std::size_t len = std::min(bs, n_samples - start);
            const auto batch = make_windows(xs, cfg.input_window, cfg.horizon,
                                            std::span<const std::size_t>(order.data() + start, len));
            const double loss = r.network.loss_and_gradients(batch, grad);
            if (!std::isfinite(loss)) throw DivergenceError(epoch);
            total += loss * static_cast<double>(len);
            adam.step(r.network.parameters(), grad);
        }
        const double epoch_loss = total / static_cast<double>(n_samples);
        if (!std::isfinite(epoch_loss) || !r.network.all_finite()) throw DivergenceError(epoch);
        r.epoch_loss.push_back(epoch_loss);
    }
    return r;
}

}  // namespace pcl
