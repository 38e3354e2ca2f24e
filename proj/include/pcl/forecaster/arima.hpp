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

// Seasonal ARIMA(p,d,q)(P,D,Q)_s fitted by conditional least squares, with
// order selection by AIC over a candidate grid.
//
// Model on the differenced series w = (1-B)^d (1-B^s)^D y:
//   phi(B) Phi(B^s) (w_t - mu) = theta(B) Theta(B^s) e_t
// with mu estimated only when d + D == 0. Residuals before the first
// available AR lag are taken as zero.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcl/error.hpp"
#include "pcl/forecaster/normalization.hpp"

namespace pcl {

struct ArimaOrder {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 24;

    void validate() const {
        if (p < 0 || d < 0 || q < 0 || P < 0 || D < 0 || Q < 0) throw ConfigError("ARIMA orders must be >= 0");
        if (s < 2) throw ConfigError("ARIMA seasonal period must be >= 2");
        if (d + D > 3) throw ConfigError("ARIMA d + D must be <= 3");
    }

    bool has_mean() const noexcept { return d + D == 0; }
    int coefficient_count() const noexcept { return p + q + P + Q + (has_mean() ? 1 : 0); }
    // Observations consumed by differencing plus the longest AR lag.
    int conditioning_length() const noexcept { return d + s * D + p + s * P; }

    std::string to_string() const {
        return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")(" +
               std::to_string(P) + "," + std::to_string(D) + "," + std::to_string(Q) + ")" + std::to_string(s);
    }

    friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

inline std::vector<ArimaOrder> default_arima_grid(int s = 24) {
    std::vector<ArimaOrder> out;
    for (int d = 0; d <= 1; ++d)
        for (int D = 0; D <= 1; ++D)
            for (int p = 0; p <= 2; ++p)
                for (int q = 0; q <= 2; ++q)
                    for (int P = 0; P <= 1; ++P)
                        for (int Q = 0; Q <= 1; ++Q) out.push_back({p, d, q, P, D, Q, s});
    return out;
}

struct ArimaCoefficients {
    std::vector<double> ar, ma, sar, sma;
    double mean = 0.0;

    friend bool operator==(const ArimaCoefficients&, const ArimaCoefficients&) = default;
};

struct ArimaFit {
    ArimaOrder order;
    ArimaCoefficients coef;
    double sse = 0.0;
    double sigma2 = 0.0;
    double aic = 0.0;
    long n_eval = 0;
};

namespace arima_detail {

// Coefficients c_k (k >= 1) of prod (1 + sign * sum a_i B^i)(1 + sign * sum A_j B^{s j}),
// returned as the list of (lag, coefficient) with c_0 = 1 omitted.
inline std::vector<std::pair<int, double>> expand(std::span<const double> a, std::span<const double> A, int s,
                                                  double sign) {
    const int len = static_cast<int>(a.size()) + s * static_cast<int>(A.size());
    std::vector<double> poly(static_cast<std::size_t>(len) + 1, 0.0);
    for (std::size_t j = 0; j <= A.size(); ++j) {
        const double cj = j == 0 ? 1.0 : sign * A[j - 1];
        for (std::size_t i = 0; i <= a.size(); ++i) {
            const double ci = i == 0 ? 1.0 : sign * a[i - 1];
            poly[i + static_cast<std::size_t>(s) * j] += ci * cj;
        }
    }
    std::vector<std::pair<int, double>> out;
    for (int k = 1; k <= len; ++k)
        if (poly[static_cast<std::size_t>(k)] != 0.0) out.emplace_back(k, poly[static_cast<std::size_t>(k)]);
    return out;
}

// Coefficients of (1-B)^d (1-B^s)^D, lags >= 1.
inline std::vector<double> differencing_polynomial(int d, int D, int s) {
    std::vector<double> poly{1.0};
    auto mul = [&](int lag) {
        std::vector<double> next(poly.size() + static_cast<std::size_t>(lag), 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + static_cast<std::size_t>(lag)] -= poly[i];
        }
        poly = std::move(next);
    };
    for (int i = 0; i < d; ++i) mul(1);
    for (int i = 0; i < D; ++i) mul(s);
    return poly;
}

inline std::vector<double> difference(std::span<const double> y, const ArimaOrder& o) {
    const auto poly = differencing_polynomial(o.d, o.D, o.s);
    const std::size_t k = poly.size() - 1;
    if (y.size() <= k) return {};
    std::vector<double> w(y.size() - k);
    for (std::size_t t = 0; t < w.size(); ++t) {
        double v = 0.0;
        for (std::size_t j = 0; j <= k; ++j) v += poly[j] * y[t + k - j];
        w[t] = v;
    }
    return w;
}

// True when every root of 1 + sign * sum c_i z^i lies outside the unit
// circle (stationary AR / invertible MA factor).
inline bool roots_outside_unit_circle(std::span<const double> c, double sign) {
    if (c.empty()) return true;
    const auto n = static_cast<Eigen::Index>(c.size());
    if (n == 1) return std::abs(c[0]) < 1.0 - 1e-4;
    // Companion matrix of the reciprocal polynomial; its eigenvalues are the
    // inverse roots.
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) comp(0, i) = -sign * c[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) return false;
    return es.eigenvalues().cwiseAbs().maxCoeff() < 1.0 - 1e-4;
}

inline bool admissible(const ArimaCoefficients& c) {
    return roots_outside_unit_circle(c.ar, -1.0) && roots_outside_unit_circle(c.sar, -1.0) &&
           roots_outside_unit_circle(c.ma, 1.0) && roots_outside_unit_circle(c.sma, 1.0);
}

inline ArimaCoefficients unpack(const ArimaOrder& o, const Eigen::VectorXd& theta) {
    ArimaCoefficients c;
    Eigen::Index i = 0;
    for (int k = 0; k < o.p; ++k) c.ar.push_back(theta[i++]);
    for (int k = 0; k < o.q; ++k) c.ma.push_back(theta[i++]);
    for (int k = 0; k < o.P; ++k) c.sar.push_back(theta[i++]);
    for (int k = 0; k < o.Q; ++k) c.sma.push_back(theta[i++]);
    if (o.has_mean()) c.mean = theta[i++];
    return c;
}

// Residuals of the differenced series; entries before the AR start are 0.
inline std::vector<double> residuals(std::span<const double> w, const ArimaOrder& o, const ArimaCoefficients& c) {
    // w_t - mu = sum ar_k (w_{t-k} - mu) + e_t + sum ma_k e_{t-k}
    const auto ar = expand(c.ar, c.sar, o.s, -1.0);  // coefficients of phi(B)Phi(B^s)
    const auto ma = expand(c.ma, c.sma, o.s, 1.0);
    const std::size_t start = static_cast<std::size_t>(o.p + o.s * o.P);
    std::vector<double> e(w.size(), 0.0);
    for (std::size_t t = start; t < w.size(); ++t) {
        double v = w[t] - c.mean;
        for (const auto& [lag, a] : ar) v += a * (w[t - static_cast<std::size_t>(lag)] - c.mean);
        for (const auto& [lag, m] : ma)
            if (t >= static_cast<std::size_t>(lag)) v -= m * e[t - static_cast<std::size_t>(lag)];
        e[t] = v;
    }
    return e;
}

}  // namespace arima_detail

// CSS fit of one order. The objective sums squared residuals over original
// indices >= eval_start, so fits of different orders sharing eval_start are
// conditioned on the same observations and their AICs are comparable.
// The search stays inside the stationary/invertible region. Returns nullopt
// when the fit does not converge to finite values.
inline std::optional<ArimaFit> fit_arima_order(std::span<const double> y, const ArimaOrder& order,
                                               std::optional<int> eval_start = std::nullopt) {
    order.validate();
    const int cond = order.conditioning_length();
    const int first = eval_start ? *eval_start : cond;
    if (first < cond) throw ContractError("eval_start precedes the order's conditioning length");
    const int diff_lag = order.d + order.s * order.D;
    const auto w = arima_detail::difference(y, order);
    if (static_cast<int>(y.size()) - first < order.coefficient_count() + 2) return std::nullopt;

    const std::size_t w_first = static_cast<std::size_t>(first - diff_lag);
    const auto n_eval = static_cast<Eigen::Index>(w.size() - w_first);

    auto residual_vector = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& r) {
        const auto coef = arima_detail::unpack(order, theta);
        if (!arima_detail::admissible(coef)) return false;
        const auto e = arima_detail::residuals(w, order, coef);
        r.resize(n_eval);
        for (Eigen::Index i = 0; i < n_eval; ++i) r[i] = e[w_first + static_cast<std::size_t>(i)];
        return r.allFinite();
    };

    const auto k = static_cast<Eigen::Index>(order.coefficient_count());
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
    if (order.has_mean()) {
        double m = 0.0;
        for (double v : w) m += v;
        theta[k - 1] = m / static_cast<double>(w.size());
    }
    Eigen::VectorXd r;
    if (!residual_vector(theta, r)) return std::nullopt;
    double sse = r.squaredNorm();

    // Levenberg-Marquardt with a central-difference Jacobian (one-sided at the
    // admissible-region boundary).
    if (k > 0 && sse > 0.0) {
        double lambda = 1e-3;
        Eigen::MatrixXd J(n_eval, k);
        Eigen::VectorXd rp, rm, trial_r;
        for (int iter = 0; iter < 200; ++iter) {
            for (Eigen::Index j = 0; j < k; ++j) {
                const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
                Eigen::VectorXd tp = theta, tm = theta;
                tp[j] += h;
                tm[j] -= h;
                const bool up = residual_vector(tp, rp);
                const bool down = residual_vector(tm, rm);
                if (up && down) J.col(j) = (rp - rm) / (2.0 * h);
                else if (up) J.col(j) = (rp - r) / h;
                else if (down) J.col(j) = (r - rm) / h;
                else return std::nullopt;
            }
            const Eigen::MatrixXd JtJ = J.transpose() * J;
            const Eigen::VectorXd g = J.transpose() * r;
            bool improved = false;
            bool converged = false;
            for (int attempt = 0; attempt < 30; ++attempt) {
                Eigen::MatrixXd A = JtJ;
                A.diagonal() += lambda * (JtJ.diagonal().array() + 1e-12).matrix();
                const Eigen::VectorXd step = A.ldlt().solve(-g);
                const Eigen::VectorXd trial = theta + step;
                if (step.allFinite() && residual_vector(trial, trial_r) && trial_r.squaredNorm() < sse) {
                    const double rel = (sse - trial_r.squaredNorm()) / sse;
                    theta = trial;
                    r = trial_r;
                    sse = r.squaredNorm();
                    lambda = std::max(lambda * 0.3, 1e-12);
                    improved = true;
                    converged = rel < 1e-10;
                    break;
                }
                lambda *= 10.0;
            }
            if (!improved || converged || sse == 0.0) break;
            if (lambda > 1e12) break;
        }
    }
    if (!std::isfinite(sse) || !theta.allFinite()) return std::nullopt;

    ArimaFit fit;
    fit.order = order;
    fit.coef = arima_detail::unpack(order, theta);
    fit.sse = sse;
    fit.n_eval = static_cast<long>(n_eval);
    fit.sigma2 = sse / static_cast<double>(n_eval);
    // Gaussian conditional log-likelihood; an exact fit gets the smallest
    // representable variance so ties are broken by parameter count.
    const double var = std::max(fit.sigma2, std::numeric_limits<double>::min());
    fit.aic = static_cast<double>(n_eval) * (std::log(2.0 * 3.14159265358979323846 * var) + 1.0) +
              2.0 * static_cast<double>(k + 1);
    return fit;
}

// Minimum-AIC candidate; ties keep the earlier candidate.
inline ArimaFit select_arima(std::span<const double> y, std::span<const ArimaOrder> candidates) {
    if (candidates.empty()) throw ConfigError("ARIMA candidate list is empty");
    require_finite(y, "ARIMA series");
    int eval_start = 0;
    for (const auto& o : candidates) {
        o.validate();
        eval_start = std::max(eval_start, o.conditioning_length());
    }
    const int s = candidates.front().s;
    if (y.size() < static_cast<std::size_t>(3 * s))
        throw FitError("series too short for seasonal ARIMA: need " + std::to_string(3 * s) + " points");
    std::optional<ArimaFit> best;
    for (const auto& o : candidates) {
        auto f = fit_arima_order(y, o, eval_start);
        if (f && (!best || f->aic < best->aic)) best = std::move(f);
    }
    if (!best) throw FitError("no ARIMA candidate converged");
    return *best;
}

// Forecasts `horizon` steps after the end of `y`.
inline std::vector<double> arima_forecast(const ArimaOrder& o, const ArimaCoefficients& c, std::span<const double> y,
                                          int horizon) {
    const int need = o.conditioning_length() + 1;
    if (static_cast<int>(y.size()) < need)
        throw ContractError("ARIMA window too short: need " + std::to_string(need) + " values");
    auto w = arima_detail::difference(y, o);
    auto e = arima_detail::residuals(w, o, c);
    const auto ar = arima_detail::expand(c.ar, c.sar, o.s, -1.0);
    const auto ma = arima_detail::expand(c.ma, c.sma, o.s, 1.0);
    const auto dpoly = arima_detail::differencing_polynomial(o.d, o.D, o.s);

    std::vector<double> ys(y.begin(), y.end());
    std::vector<double> out;
    for (int h = 0; h < horizon; ++h) {
        const std::size_t t = w.size();
        double v = c.mean;
        for (const auto& [lag, a] : ar) v -= a * (w[t - static_cast<std::size_t>(lag)] - c.mean);
        for (const auto& [lag, m] : ma)
            if (t >= static_cast<std::size_t>(lag)) v += m * e[t - static_cast<std::size_t>(lag)];
        w.push_back(v);
        e.push_back(0.0);
        // Undo differencing: y_t = w_t - sum_{k>=1} dpoly_k y_{t-k}.
        double yt = v;
        const std::size_t n = ys.size();
        for (std::size_t k = 1; k < dpoly.size(); ++k) yt -= dpoly[k] * ys[n - k];
        ys.push_back(yt);
        out.push_back(yt);
    }
    return out;
}

}  // namespace pcl
