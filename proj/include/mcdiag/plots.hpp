#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mcdiag/chain_core.hpp"
#include "mcdiag/ess.hpp"
#include "mcdiag/transforms.hpp"

namespace mcdiag {

struct RankPlotData {
    std::size_t bins = 0;
    double reference = 0.0;                       // expected count per bin, N/bins
    std::vector<std::vector<double>> histograms;  // per chain, tied ranks spread fractionally
};

// Histograms of the pooled ranks restricted to each chain. Each chain's
// bin counts sum to N (average-rank ties contribute to the bin their
// averaged rank lands in).
inline RankPlotData rank_plot_data(const Matrix& draws, std::size_t bins = 20) {
    if (bins < 1) throw std::invalid_argument("rank_plot_data: need at least one bin");
    const auto ranks = pooled_ranks(draws.values);
    const auto s = static_cast<double>(draws.total());
    RankPlotData data;
    data.bins = bins;
    data.reference = static_cast<double>(draws.iters) / static_cast<double>(bins);
    data.histograms.assign(draws.chains, std::vector<double>(bins, 0.0));
    for (std::size_t m = 0; m < draws.chains; ++m) {
        for (std::size_t n = 0; n < draws.iters; ++n) {
            const double r = ranks[m * draws.iters + n];
            auto b = static_cast<std::size_t>((r - 1.0) / s * static_cast<double>(bins));
            if (b >= bins) b = bins - 1;
            data.histograms[m][b] += 1.0;
        }
    }
    return data;
}

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct SvgCanvas {
    double width, height;
    std::string body;

    SvgCanvas(double w, double h) : width(w), height(h) {}

    void rect(double x, double y, double w, double h, const std::string& fill) {
        body += "<rect x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" width=\"" + svg_num(w) +
                "\" height=\"" + svg_num(h) + "\" fill=\"" + fill + "\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              bool dashed = false) {
        body += "<line x1=\"" + svg_num(x1) + "\" y1=\"" + svg_num(y1) + "\" x2=\"" + svg_num(x2) +
                "\" y2=\"" + svg_num(y2) + "\" stroke=\"" + stroke + "\"" +
                (dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    }
    void circle(double cx, double cy, double r, const std::string& fill) {
        body += "<circle cx=\"" + svg_num(cx) + "\" cy=\"" + svg_num(cy) + "\" r=\"" + svg_num(r) +
                "\" fill=\"" + fill + "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
        body += "<polyline fill=\"none\" stroke=\"" + stroke + "\" points=\"";
        for (const auto& [x, y] : pts) body += svg_num(x) + "," + svg_num(y) + " ";
        body += "\"/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 14) {
        body += "<text x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" font-family=\"monospace\" font-size=\"" +
                std::to_string(size) + "\">" + s + "</text>\n";
    }
    std::string finish() const {
        return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" "
               "version=\"1.1\" width=\"" + svg_num(width) + "\" height=\"" + svg_num(height) +
               "\" viewBox=\"0 0 " + svg_num(width) + " " + svg_num(height) + "\">\n" +
               "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body + "</svg>\n";
    }
};

constexpr double panel_w = 640.0;
constexpr double panel_h = 480.0;
constexpr double margin = 50.0;

}  // namespace detail

// Small-multiple rank histograms, one 640x480 panel per chain, two panels
// per row, with the uniform reference line at N/bins.
inline std::string rank_plot(const Matrix& draws, const std::string& param,
                             std::size_t bins = 20) {
    using namespace detail;
    const RankPlotData data = rank_plot_data(draws, bins);
    const std::size_t cols = draws.chains >= 2 ? 2 : 1;
    const std::size_t rows = (draws.chains + cols - 1) / cols;
    SvgCanvas svg(panel_w * static_cast<double>(cols), panel_h * static_cast<double>(rows));

    double max_count = data.reference;
    for (const auto& h : data.histograms)
        for (double c : h) max_count = std::max(max_count, c);

    for (std::size_t m = 0; m < draws.chains; ++m) {
        const double ox = panel_w * static_cast<double>(m % cols);
        const double oy = panel_h * static_cast<double>(m / cols);
        const double plot_w = panel_w - 2 * margin;
        const double plot_h = panel_h - 2 * margin;
        svg.text(ox + margin, oy + margin - 12, param + " ranks, chain " + std::to_string(m + 1));
        svg.line(ox + margin, oy + panel_h - margin, ox + panel_w - margin, oy + panel_h - margin,
                 "black");
        const double bw = plot_w / static_cast<double>(bins);
        for (std::size_t b = 0; b < bins; ++b) {
            const double h = data.histograms[m][b] / max_count * plot_h;
            svg.rect(ox + margin + bw * static_cast<double>(b), oy + panel_h - margin - h,
                     bw * 0.9, h, "steelblue");
        }
        const double ref_y = oy + panel_h - margin - data.reference / max_count * plot_h;
        svg.line(ox + margin, ref_y, ox + panel_w - margin, ref_y, "gray", true);
    }
    return svg.finish();
}

namespace detail {

// Shared scatter/line panel for the ESS-style plots: x in [0,1] or draw
// counts, y = ESS with the recommended-threshold dashed line.
inline std::string ess_panel(const std::string& title, const std::vector<double>& xs,
                             const std::vector<std::vector<double>>& series,
                             const std::vector<std::string>& colors, double threshold,
                             bool as_bars) {
    SvgCanvas svg(panel_w, panel_h);
    const double plot_w = panel_w - 2 * margin;
    const double plot_h = panel_h - 2 * margin;
    double max_y = threshold * 1.2;
    for (const auto& s : series)
        for (double v : s)
            if (std::isfinite(v)) max_y = std::max(max_y, v * 1.05);
    double min_x = xs.front(), max_x = xs.back();
    if (max_x == min_x) max_x = min_x + 1.0;

    auto px = [&](double x) { return margin + (x - min_x) / (max_x - min_x) * plot_w; };
    auto py = [&](double y) { return panel_h - margin - y / max_y * plot_h; };

    svg.text(margin, margin - 12, title);
    svg.line(margin, panel_h - margin, panel_w - margin, panel_h - margin, "black");
    svg.line(margin, margin, margin, panel_h - margin, "black");
    svg.line(margin, py(threshold), panel_w - margin, py(threshold), "black", true);
    svg.text(panel_w - margin - 60, py(threshold) - 4, "ESS=" + std::to_string((int)threshold), 12);

    for (std::size_t s = 0; s < series.size(); ++s) {
        if (as_bars) {
            const double bw = plot_w / static_cast<double>(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (!std::isfinite(series[s][i])) continue;
                svg.rect(px(xs[i]) - bw * 0.35, py(series[s][i]),
                         bw * 0.7, panel_h - margin - py(series[s][i]), colors[s]);
            }
        } else {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (!std::isfinite(series[s][i])) continue;
                pts.emplace_back(px(xs[i]), py(series[s][i]));
                svg.circle(px(xs[i]), py(series[s][i]), 3.0, colors[s]);
            }
            if (pts.size() > 1) svg.polyline(pts, colors[s]);
        }
    }
    return svg.finish();
}

}  // namespace detail

inline std::string quantile_ess_plot(const Matrix& draws, const std::string& param,
                                     const std::vector<double>& quantile_grid,
                                     double threshold = 400.0) {
    std::vector<double> ess(quantile_grid.size());
    for (std::size_t i = 0; i < quantile_grid.size(); ++i)
        ess[i] = ess_quantile(draws, quantile_grid[i]).ess;
    return detail::ess_panel("quantile ESS: " + param, quantile_grid, {ess},
                             {"steelblue"}, threshold, false);
}

inline std::vector<double> default_quantile_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 99; ++i) grid.push_back(static_cast<double>(i) / 100.0);
    return grid;
}

inline std::string local_ess_plot(const Matrix& draws, const std::string& param, std::size_t k,
                                  double threshold = 400.0) {
    const auto results = ess_local(draws, k);
    std::vector<double> xs(k), ess(k);
    for (std::size_t i = 0; i < k; ++i) {
        xs[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
        ess[i] = results[i].ess;
    }
    return detail::ess_panel("small-interval ESS: " + param, xs, {ess}, {"steelblue"},
                             threshold, true);
}

inline std::string ess_evolution_plot(const Matrix& draws, const std::string& param,
                                      std::span<const std::size_t> grid,
                                      double threshold = 400.0) {
    const auto points = ess_evolution(draws, grid);
    std::vector<double> xs, bulk, tail;
    for (const auto& p : points) {
        xs.push_back(static_cast<double>(p.prefix));
        bulk.push_back(p.bulk);
        tail.push_back(p.tail);
    }
    return detail::ess_panel("ESS evolution (bulk=blue, tail=orange): " + param, xs, {bulk, tail},
                             {"steelblue", "darkorange"}, threshold, false);
}

// 40-column terminal bar chart fallback.
inline std::string ascii_bar_chart(const std::vector<std::string>& labels,
                                   const std::vector<double>& values, double reference = 0.0) {
    constexpr int width = 40;
    double max_v = reference;
    for (double v : values)
        if (std::isfinite(v)) max_v = std::max(max_v, v);
    if (max_v <= 0.0) max_v = 1.0;
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        char buf[128];
        const int n = std::isfinite(values[i])
                          ? static_cast<int>(values[i] / max_v * width + 0.5)
                          : 0;
        std::snprintf(buf, sizeof(buf), "%12s |%-*s| %g\n", labels[i].c_str(), width,
                      std::string(static_cast<std::size_t>(n), '#').c_str(),
                      values[i]);
        out += buf;
    }
    return out;
}

}  // namespace mcdiag
