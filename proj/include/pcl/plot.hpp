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

// Four-panel comparison plot: demand vs limits, static under/over, dynamic
// under/over, cumulative non-optimal. Data rows are projections of the two
// run-report CSVs; the SVG is drawn from those rows only.

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pcl/e2_node_sim.hpp"
#include "pcl/error.hpp"

namespace pcl {

struct PlotRow {
    std::string panel;
    long hour = 0;
    std::string series;
    long value = 0;

    friend bool operator==(const PlotRow&, const PlotRow&) = default;
};

inline constexpr std::string_view kPlotCsvHeader = "panel,hour,series,value";

inline std::vector<PlotRow> project_plot_rows(std::span<const ServiceMetrics> static_rows,
                                              std::span<const ServiceMetrics> dynamic_rows) {
    struct Hourly {
        long actual = 0, limit = 0, under = 0, over = 0, non_optimal = 0;
    };
    auto fold = [](std::span<const ServiceMetrics> rows) {
        std::map<long, Hourly> h;
        for (const auto& m : rows) {
            auto& x = h[m.hour];
            x.actual += m.actual_ues;
            x.limit += m.limit_ues;
            x.under += m.under_served;
            x.over += m.over_served;
            x.non_optimal += m.non_optimal;
        }
        return h;
    };
    const auto s = fold(static_rows);
    const auto d = fold(dynamic_rows);
    if (s.size() != d.size() || !std::equal(s.begin(), s.end(), d.begin(), [](const auto& a, const auto& b) {
            return a.first == b.first && a.second.actual == b.second.actual;
        }))
        throw ContractError("static and dynamic reports cover different hours or demand");

    std::vector<PlotRow> out;
    for (const auto& [h, x] : s) {
        out.push_back({"demand", h, "actual", x.actual});
        out.push_back({"demand", h, "static_limit", x.limit});
        out.push_back({"demand", h, "dynamic_limit", d.at(h).limit});
    }
    for (const auto& [h, x] : s) {
        out.push_back({"static", h, "under_served", x.under});
        out.push_back({"static", h, "over_served", x.over});
    }
    for (const auto& [h, x] : d) {
        out.push_back({"dynamic", h, "under_served", x.under});
        out.push_back({"dynamic", h, "over_served", x.over});
    }
    long cs = 0, cd = 0;
    for (const auto& [h, x] : s) {
        cs += x.non_optimal;
        cd += d.at(h).non_optimal;
        out.push_back({"cumulative", h, "static_non_optimal", cs});
        out.push_back({"cumulative", h, "dynamic_non_optimal", cd});
    }
    return out;
}

inline void write_plot_csv(std::ostream& out, std::span<const PlotRow> rows) {
    out << kPlotCsvHeader << '\n';
    for (const auto& r : rows) out << r.panel << ',' << r.hour << ',' << r.series << ',' << r.value << '\n';
}

namespace plot_detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

struct Panel {
    const char* key;
    const char* title;
};

inline constexpr Panel kPanels[] = {
    {"demand", "Active UEs: demand vs limits"},
    {"static", "Static limit: under/over-served UEs"},
    {"dynamic", "Adaptive limit: under/over-served UEs"},
    {"cumulative", "Cumulative non-optimally served UE-hours"},
};

inline const char* color(const std::string& series) {
    if (series == "actual") return "#222222";
    if (series == "static_limit" || series == "static_non_optimal") return "#d62728";
    if (series == "dynamic_limit" || series == "dynamic_non_optimal") return "#1f77b4";
    if (series == "under_served") return "#ff7f0e";
    return "#2ca02c";
}

}  // namespace plot_detail

inline std::string render_plot_svg(std::span<const PlotRow> rows) {
    using namespace plot_detail;
    constexpr double W = 1100, H = 640, pw = 440, ph = 230, ml = 60, mt = 40;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t p = 0; p < 4; ++p) {
        const double x0 = ml + static_cast<double>(p % 2) * (pw + 2 * ml);
        const double y0 = mt + static_cast<double>(p / 2) * (ph + 80);
        std::map<std::string, std::vector<std::pair<long, long>>> lines;
        std::vector<std::string> order;
        for (const auto& r : rows)
            if (r.panel == kPanels[p].key) {
                if (!lines.contains(r.series)) order.push_back(r.series);
                lines[r.series].push_back({r.hour, r.value});
            }
        o << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 - 10) << "\" font-size=\"13\">" << kPanels[p].title
          << "</text>\n";
        o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
          << "\" fill=\"none\" stroke=\"#888\"/>\n";
        if (lines.empty()) continue;
        long hmin = std::numeric_limits<long>::max(), hmax = std::numeric_limits<long>::min(), vmax = 1;
        for (const auto& [_, pts] : lines)
            for (const auto& [h, v] : pts) {
                hmin = std::min(hmin, h);
                hmax = std::max(hmax, h + 1);
                vmax = std::max(vmax, v);
            }
        auto X = [&](long h) { return x0 + pw * static_cast<double>(h - hmin) / static_cast<double>(hmax - hmin); };
        auto Y = [&](long v) { return y0 + ph - ph * static_cast<double>(v) / static_cast<double>(vmax); };
        o << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(y0 + 4) << "\" text-anchor=\"end\">" << vmax << "</text>\n";
        o << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(y0 + ph) << "\" text-anchor=\"end\">0</text>\n";
        o << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 + ph + 14) << "\">hour " << hmin << "</text>\n";
        o << "<text x=\"" << num(x0 + pw) << "\" y=\"" << num(y0 + ph + 14) << "\" text-anchor=\"end\">hour " << hmax
          << "</text>\n";
        for (std::size_t k = 0; k < order.size(); ++k) {
            const auto& pts = lines[order[k]];
            o << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << color(order[k]) << "\" points=\"";
            for (const auto& [h, v] : pts) o << num(X(h)) << ',' << num(Y(v)) << ' ' << num(X(h + 1)) << ',' << num(Y(v)) << ' ';
            o << "\"/>\n";
            const double lx = x0 + 8 + static_cast<double>(k) * 140, ly = y0 + ph + 30;
            o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 18) << "\" y2=\""
              << num(ly - 4) << "\" stroke=\"" << color(order[k]) << "\" stroke-width=\"2\"/>\n";
            o << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(ly) << "\">" << order[k] << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace pcl
