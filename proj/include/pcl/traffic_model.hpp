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

// KPI dataset schema, the seeded synthetic traffic generator and the CSV
// reader/writer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pcl/error.hpp"
#include "pcl/types.hpp"

namespace pcl {

struct KpiSample {
    long hour = 0;
    CellId cell;
    Qci qci = Qci::QCI1;
    double active_ues = 0.0;
    double volume_gb = 0.0;
    double dl_prb_util_pct = 0.0;

    friend bool operator==(const KpiSample&, const KpiSample&) = default;
};

inline bool sample_order(const KpiSample& a, const KpiSample& b) {
    if (a.hour != b.hour) return a.hour < b.hour;
    if (a.cell != b.cell) return a.cell < b.cell;
    return qci_index(a.qci) < qci_index(b.qci);
}

// Gapless grid of samples: hours x cells x 4 QCIs, sorted by (hour, cell, qci).
class Dataset {
public:
    Dataset() = default;

    // Takes ownership of `samples`; validates the grid shape.
    Dataset(std::vector<KpiSample> samples, std::vector<CellId> cells, std::optional<std::uint64_t> seed)
        : samples_(std::move(samples)), cells_(std::move(cells)), seed_(seed) {
        std::sort(cells_.begin(), cells_.end());
        if (cells_.empty()) throw ContractError("dataset has no cells");
        const std::size_t per_hour = cells_.size() * kAllQcis.size();
        if (samples_.empty() || samples_.size() % per_hour != 0)
            throw ContractError("dataset sample count is not hours x cells x 4");
        hours_ = static_cast<long>(samples_.size() / per_hour);
        start_hour_ = samples_.front().hour;
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            const auto& s = samples_[i];
            const long h = start_hour_ + static_cast<long>(i / per_hour);
            const auto& c = cells_[(i / kAllQcis.size()) % cells_.size()];
            if (s.hour != h || s.cell != c || s.qci != kAllQcis[i % kAllQcis.size()])
                throw ContractError("dataset samples are not a sorted gapless grid at index " + std::to_string(i));
        }
    }

    const std::vector<KpiSample>& samples() const noexcept { return samples_; }
    const std::vector<CellId>& cells() const noexcept { return cells_; }
    long hours() const noexcept { return hours_; }
    long start_hour() const noexcept { return start_hour_; }
    long end_hour() const noexcept { return start_hour_ + hours_; }  // exclusive
    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

    std::size_t cell_position(const CellId& c) const {
        auto it = std::lower_bound(cells_.begin(), cells_.end(), c);
        if (it == cells_.end() || *it != c) throw ContractError("unknown cell " + to_string(c));
        return static_cast<std::size_t>(it - cells_.begin());
    }

    const KpiSample& at(long hour, const CellId& c, Qci q) const {
        if (hour < start_hour_ || hour >= end_hour())
            throw ContractError("hour " + std::to_string(hour) + " outside dataset");
        const auto idx = (static_cast<std::size_t>(hour - start_hour_) * cells_.size() + cell_position(c)) *
                             kAllQcis.size() +
                         qci_index(q);
        return samples_[idx];
    }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.samples_ == b.samples_ && a.cells_ == b.cells_;
    }

private:
    std::vector<KpiSample> samples_;
    std::vector<CellId> cells_;
    std::optional<std::uint64_t> seed_;
    long hours_ = 0;
    long start_hour_ = 0;
};

// Shape of one bearer class's traffic in a single cell.
struct QciProfile {
    double base_ues = 10.0;  // mean active UEs at diurnal/weekly factor 1
    double diurnal_amp1 = 0.6;
    double diurnal_peak1 = 20.0;  // hour of the 24 h harmonic's maximum
    double diurnal_amp2 = 0.2;
    double diurnal_peak2 = 12.0;  // hour of one of the 12 h harmonic's maxima
    double weekly_amp = 0.0;
    double weekly_peak_day = 5.0;
    double gb_per_ue = 0.1;
    double prb_pct_per_ue = 0.5;
};

inline std::array<QciProfile, 4> default_qci_profiles() {
    return {{
        // voice: two busy hours, late morning and evening
        {14.0, 0.45, 19.0, 0.30, 11.0, 0.0, 5.0, 0.02, 0.30},
        // live video: strong evening peak
        {5.0, 0.70, 21.0, 0.15, 15.0, 0.0, 5.0, 0.40, 1.20},
        // IMS signalling: flat-ish, tiny volume
        {20.0, 0.35, 18.0, 0.10, 10.0, 0.0, 5.0, 0.001, 0.05},
        // buffered video: late evening
        {35.0, 0.60, 22.0, 0.20, 16.0, 0.0, 5.0, 0.30, 0.60},
    }};
}

struct GeneratorConfig {
    int n_enb = 2;
    int cells_per_enb = 3;
    int days = 31;
    std::uint64_t seed = 42;
    double noise_sigma = 0.05;
    // Per-cell load multipliers are drawn from [1 - spread, 1 + spread].
    double cell_scale_spread = 0.4;
    std::array<QciProfile, 4> per_qci_profile = default_qci_profiles();
};

inline double diurnal_factor(const QciProfile& p, long hour) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double h = static_cast<double>(hour % 24);
    const double f = 1.0 + p.diurnal_amp1 * std::cos(two_pi * (h - p.diurnal_peak1) / 24.0) +
                     p.diurnal_amp2 * std::cos(2.0 * two_pi * (h - p.diurnal_peak2) / 24.0);
    return std::max(f, 0.02);
}

inline double weekly_factor(const QciProfile& p, long hour) {
    if (p.weekly_amp == 0.0) return 1.0;
    const double day = static_cast<double>((hour / 24) % 7);
    return 1.0 + p.weekly_amp * std::cos(2.0 * std::numbers::pi * (day - p.weekly_peak_day) / 7.0);
}

inline void validate(const GeneratorConfig& cfg) {
    if (cfg.n_enb < 1) throw ConfigError("n_enb must be >= 1");
    if (cfg.cells_per_enb < 1) throw ConfigError("cells_per_enb must be >= 1");
    if (cfg.days < 2) throw ConfigError("days must be >= 2");
    if (!(cfg.noise_sigma >= 0.0 && cfg.noise_sigma < 1.0)) throw ConfigError("noise_sigma must be in [0, 1)");
    if (!(cfg.cell_scale_spread >= 0.0 && cfg.cell_scale_spread < 1.0))
        throw ConfigError("cell_scale_spread must be in [0, 1)");
    for (const auto& p : cfg.per_qci_profile) {
        if (!(p.base_ues >= 0.0) || !(p.gb_per_ue >= 0.0) || !(p.prb_pct_per_ue >= 0.0))
            throw ConfigError("QCI profile coefficients must be non-negative");
        if (!(p.weekly_amp >= 0.0 && p.weekly_amp < 1.0)) throw ConfigError("weekly_amp must be in [0, 1)");
    }
}

inline Dataset generate_synthetic_dataset(const GeneratorConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);

    std::vector<CellId> cells;
    std::vector<double> cell_scale;
    for (int e = 0; e < cfg.n_enb; ++e)
        for (int c = 0; c < cfg.cells_per_enb; ++c) {
            cells.push_back({e, c});
            cell_scale.push_back(rng.uniform(1.0 - cfg.cell_scale_spread, 1.0 + cfg.cell_scale_spread));
        }

    const long hours = static_cast<long>(cfg.days) * 24;
    std::vector<KpiSample> samples;
    samples.reserve(static_cast<std::size_t>(hours) * cells.size() * kAllQcis.size());
    for (long h = 0; h < hours; ++h) {
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            std::array<double, 4> ues{};
            double prb = 0.0;
            for (std::size_t q = 0; q < kAllQcis.size(); ++q) {
                const auto& p = cfg.per_qci_profile[q];
                const double noise = cfg.noise_sigma > 0.0 ? rng.uniform(-cfg.noise_sigma, cfg.noise_sigma) : 0.0;
                ues[q] = p.base_ues * cell_scale[ci] * diurnal_factor(p, h) * weekly_factor(p, h) * (1.0 + noise);
                prb += ues[q] * p.prb_pct_per_ue;
            }
            prb = std::clamp(prb, 0.0, 100.0);
            for (std::size_t q = 0; q < kAllQcis.size(); ++q)
                samples.push_back({h, cells[ci], kAllQcis[q], ues[q], ues[q] * cfg.per_qci_profile[q].gb_per_ue, prb});
        }
    }
    return Dataset(std::move(samples), std::move(cells), cfg.seed);
}

inline constexpr std::string_view kDatasetCsvHeader = "hour,enb,cell,qci,active_ues,volume_gb,dl_prb_util_pct";

inline void write_dataset_csv(std::ostream& out, const Dataset& ds) {
    out << kDatasetCsvHeader << '\n';
    for (const auto& s : ds.samples())
        out << s.hour << ',' << s.cell.enb_index << ',' << s.cell.cell_index << ',' << qci_number(s.qci) << ','
            << format_double(s.active_ues) << ',' << format_double(s.volume_gb) << ','
            << format_double(s.dl_prb_util_pct) << '\n';
}

inline std::string dataset_to_csv(const Dataset& ds) {
    std::ostringstream os;
    write_dataset_csv(os, ds);
    return os.str();
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

// Row numbers in errors are 1-based file lines (the header is line 1).
inline Dataset parse_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kDatasetCsvHeader) {
        auto cols = detail::split_csv_line(line);
        auto expected = detail::split_csv_line(kDatasetCsvHeader);
        for (const auto& name : expected)
            if (std::find(cols.begin(), cols.end(), name) == cols.end())
                throw ParseError("missing column '" + std::string(name) + "'", 1);
        throw ParseError("header must be exactly '" + std::string(kDatasetCsvHeader) + "'", 1);
    }

    struct Row {
        KpiSample s;
        long line;
    };
    std::vector<Row> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 7) throw ParseError("expected 7 fields, got " + std::to_string(f.size()), lineno);
        auto hour = parse_long(f[0]);
        auto enb = parse_long(f[1]);
        auto cell = parse_long(f[2]);
        auto qn = parse_long(f[3]);
        auto ues = parse_double(f[4]);
        auto vol = parse_double(f[5]);
        auto prb = parse_double(f[6]);
        if (!hour || !enb || !cell || !qn || !ues || !vol || !prb) throw ParseError("non-numeric field", lineno);
        auto q = qci_from_number(*qn);
        if (!q) throw RangeError("qci must be 1, 2, 5 or 9", lineno);
        if (*enb < 0 || *cell < 0) throw RangeError("negative enb/cell index", lineno);
        if (!std::isfinite(*ues) || *ues < 0.0) throw RangeError("active_ues must be finite and >= 0", lineno);
        if (!std::isfinite(*vol) || *vol < 0.0) throw RangeError("volume_gb must be finite and >= 0", lineno);
        if (!(*prb >= 0.0 && *prb <= 100.0)) throw RangeError("dl_prb_util_pct must be in [0,100]", lineno);
        rows.push_back({{*hour, {static_cast<int>(*enb), static_cast<int>(*cell)}, *q, *ues, *vol, *prb}, lineno});
    }
    if (rows.empty()) throw ParseError("dataset has no rows", lineno);

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return sample_order(a.s, b.s); });

    std::vector<CellId> cells;
    for (const auto& r : rows)
        if (r.s.hour == rows.front().s.hour &&
            (cells.empty() || cells.back() != r.s.cell))
            cells.push_back(r.s.cell);

    const std::size_t per_hour = cells.size() * kAllQcis.size();
    const long start = rows.front().s.hour;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const long expect_hour = start + static_cast<long>(i / per_hour);
        const auto& expect_cell = cells[(i / kAllQcis.size()) % cells.size()];
        const Qci expect_q = kAllQcis[i % kAllQcis.size()];
        if (r.s.hour != expect_hour) {
            if (r.s.hour > expect_hour)
                throw ParseError("hour gap: expected hour " + std::to_string(expect_hour) + " rows, found hour " +
                                     std::to_string(r.s.hour), r.line);
            throw ParseError("hour " + std::to_string(r.s.hour) + " has extra rows", r.line);
        }
        if (r.s.cell != expect_cell || r.s.qci != expect_q)
            throw ParseError("hour " + std::to_string(r.s.hour) + " is missing or duplicating the row for " +
                                 to_string(expect_cell) + " qci" + std::to_string(qci_number(expect_q)),
                             r.line);
        if (i % kAllQcis.size() != 0 && r.s.dl_prb_util_pct != rows[i - 1].s.dl_prb_util_pct)
            throw ParseError("dl_prb_util_pct differs between QCI rows of the same hour and cell", r.line);
    }

    std::vector<KpiSample> samples;
    samples.reserve(rows.size());
    for (auto& r : rows) samples.push_back(r.s);
    return Dataset(std::move(samples), std::move(cells), std::nullopt);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset file '" + path + "'");
    return parse_dataset_csv(in);
}

// Chronological split at hour floor(hours * train_fraction).
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
    const long n_train = static_cast<long>(std::floor(static_cast<double>(ds.hours()) * train_fraction + 1e-9));
    if (n_train < 1 || n_train >= ds.hours())
        throw ConfigError("train_fraction leaves an empty train or test partition");
    const std::size_t cut = static_cast<std::size_t>(n_train) * ds.cells().size() * kAllQcis.size();
    const auto& s = ds.samples();
    Dataset train({s.begin(), s.begin() + static_cast<std::ptrdiff_t>(cut)}, ds.cells(), ds.seed());
    Dataset test({s.begin() + static_cast<std::ptrdiff_t>(cut), s.end()}, ds.cells(), ds.seed());
    return {std::move(train), std::move(test)};
}

}  // namespace pcl
