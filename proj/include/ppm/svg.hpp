#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "format.hpp"
#include "metrics.hpp"
#include "tuner.hpp"

namespace ppm {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string short_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// One panel at (ox, oy) of size w x h.
inline void draw_panel(std::ostringstream& svg, double ox, double oy, double w, double h, const std::string& title,
                       const std::string& xlabel, std::span<const PlotSeries> series)
{
    static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i]))
                continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    const double left = ox + 60, right = ox + w - 15, top = oy + 30, bottom = oy + h - 40;
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << oy + 18
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(title) << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\"" << bottom - top
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 32 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << xml_escape(xlabel) << "</text>\n";
    if (!(x0 <= x1))
        return;
    if (x1 == x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 == y0) {
        const double pad = y0 == 0.0 ? 1.0 : std::abs(y0) * 0.05;
        y0 -= pad;
        y1 += pad;
    }
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (right - left); };
    auto py = [&](double y) { return bottom - (y - y0) / (y1 - y0) * (bottom - top); };
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        svg << "<text x=\"" << px(xv) << "\" y=\"" << bottom + 14 << "\" text-anchor=\"middle\" font-size=\"10\">"
            << short_num(xv) << "</text>\n";
        svg << "<text x=\"" << left - 4 << "\" y=\"" << py(yv) + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
            << short_num(yv) << "</text>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = colors[si % std::size(colors)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i]))
                svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        svg << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i]))
                svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\" fill=\"" << color
                    << "\"/>\n";
        if (series.size() > 1)
            svg << "<text x=\"" << right - 4 << "\" y=\"" << top + 14 + 13 * static_cast<double>(si)
                << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << color << "\">" << xml_escape(s.label)
                << "</text>\n";
    }
}

} // namespace detail

struct PlotPanel {
    std::string title;
    std::string xlabel;
    std::vector<PlotSeries> series;
};

// Static SVG with panels laid out in a grid.
inline std::string render_panels(std::span<const PlotPanel> panels, int columns = 2)
{
    const double w = 380, h = 260;
    columns = std::max(1, std::min<int>(columns, static_cast<int>(std::max<std::size_t>(1, panels.size()))));
    const auto rows = (panels.size() + static_cast<std::size_t>(columns) - 1) / static_cast<std::size_t>(columns);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * columns << "\" height=\""
        << h * static_cast<double>(std::max<std::size_t>(rows, 1)) << "\" font-family=\"sans-serif\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const double ox = w * static_cast<double>(i % static_cast<std::size_t>(columns));
        const double oy = h * static_cast<double>(i / static_cast<std::size_t>(columns));
        detail::draw_panel(svg, ox, oy, w, h, panels[i].title, panels[i].xlabel, panels[i].series);
    }
    svg << "</svg>\n";
    return svg.str();
}

// Mean measure against M proportion, one panel per measure.
inline std::string sweep_svg(std::span<const SweepRow> rows, std::size_t n_train)
{
    std::vector<PlotPanel> panels;
    for (Measure m : all_measures) {
        PlotSeries s{std::string(measure_name(m)), {}, {}};
        for (const auto& r : rows)
            if (r.measure == m) {
                s.x.push_back(static_cast<double>(r.M) / static_cast<double>(n_train));
                s.y.push_back(r.n_evals ? r.mean : NAN);
            }
        if (!s.x.empty())
            panels.push_back({std::string(measure_name(m)), "M proportion", {std::move(s)}});
    }
    return render_panels(panels);
}

// Mean loss against M proportion, one series per alpha.
inline std::string tuning_svg(std::span<const TuningResult> results)
{
    PlotPanel panel{"mean loss", "M proportion", {}};
    for (const auto& t : results) {
        PlotSeries s{"alpha=" + detail::short_num(t.alpha), {}, {}};
        for (const auto& r : t.loss_by_m) {
            s.x.push_back(static_cast<double>(r.M) / static_cast<double>(t.n_train_per_fold));
            s.y.push_back(r.n_evals ? r.mean_loss : NAN);
        }
        panel.series.push_back(std::move(s));
    }
    return render_panels(std::span<const PlotPanel>(&panel, 1), 1);
}

} // namespace ppm
