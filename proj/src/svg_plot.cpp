#include "susplab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

namespace susplab::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void expand(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
};

// Round the tick spacing to 1/2/5 times a power of ten.
double nice_step(double span, int target_ticks) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    double step;
    if (norm < 1.5) {
        step = 1.0;
    } else if (norm < 3.5) {
        step = 2.0;
    } else if (norm < 7.5) {
        step = 5.0;
    } else {
        step = 10.0;
    }
    return step * mag;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void write_line_plot(std::ostream& out, const std::vector<Series>& series,
                     const PlotOptions& opts) {
    const double margin_left = 70.0;
    const double margin_right = 20.0;
    const double margin_top = opts.title.empty() ? 16.0 : 34.0;
    const double margin_bottom = 48.0;
    const double plot_w = opts.width - margin_left - margin_right;
    const double plot_h = opts.height - margin_top - margin_bottom;

    auto tx = [&](double v) { return opts.log10_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return opts.log10_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return false;
        if (opts.log10_x && !(x > 0.0)) return false;
        if (opts.log10_y && !(y > 0.0)) return false;
        return true;
    };

    Range rx, ry;
    for (const auto& s : series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            rx.expand(tx(s.x[i]));
            ry.expand(ty(s.y[i]));
        }
    }
    if (!rx.valid()) {
        rx = {0.0, 1.0};
    }
    if (!ry.valid()) {
        ry = {0.0, 1.0};
    }
    if (rx.hi == rx.lo) {
        rx.lo -= 0.5;
        rx.hi += 0.5;
    }
    if (ry.hi == ry.lo) {
        const double pad = std::max(0.5, std::abs(ry.hi) * 0.1);
        ry.lo -= pad;
        ry.hi += pad;
    }

    auto px = [&](double v) {
        return margin_left + (tx(v) - rx.lo) / (rx.hi - rx.lo) * plot_w;
    };
    auto py = [&](double v) {
        return margin_top + (ry.hi - ty(v)) / (ry.hi - ry.lo) * plot_h;
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
        << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width
        << " " << opts.height << "\">\n";
    out << "<rect width=\"" << opts.width << "\" height=\"" << opts.height
        << "\" fill=\"white\"/>\n";
    if (!opts.title.empty()) {
        out << "<text x=\"" << opts.width / 2 << "\" y=\"20\" font-size=\"14\" "
               "text-anchor=\"middle\" font-family=\"sans-serif\">"
            << opts.title << "</text>\n";
    }

    // Grid and ticks.
    const double x_step = nice_step(rx.hi - rx.lo, 6);
    const double y_step = nice_step(ry.hi - ry.lo, 5);
    out << "<g font-size=\"11\" font-family=\"sans-serif\" fill=\"#333\">\n";
    for (double v = std::ceil(rx.lo / x_step) * x_step; v <= rx.hi + 1e-9 * x_step;
         v += x_step) {
        const double x = margin_left + (v - rx.lo) / (rx.hi - rx.lo) * plot_w;
        out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(margin_top)
            << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(margin_top + plot_h)
            << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(x) << "\" y=\""
            << fmt(margin_top + plot_h + 16) << "\" text-anchor=\"middle\">"
            << fmt(v) << "</text>\n";
    }
    for (double v = std::ceil(ry.lo / y_step) * y_step; v <= ry.hi + 1e-9 * y_step;
         v += y_step) {
        const double y = margin_top + (ry.hi - v) / (ry.hi - ry.lo) * plot_h;
        out << "<line x1=\"" << fmt(margin_left) << "\" y1=\"" << fmt(y)
            << "\" x2=\"" << fmt(margin_left + plot_w) << "\" y2=\"" << fmt(y)
            << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(margin_left - 6) << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
    }
    out << "</g>\n";

    out << "<rect x=\"" << fmt(margin_left) << "\" y=\"" << fmt(margin_top)
        << "\" width=\"" << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

    // Axis labels.
    out << "<g font-size=\"12\" font-family=\"sans-serif\" fill=\"#111\">\n";
    if (!opts.x_label.empty()) {
        out << "<text x=\"" << fmt(margin_left + plot_w / 2) << "\" y=\""
            << fmt(static_cast<double>(opts.height) - 10.0)
            << "\" text-anchor=\"middle\">"
            << (opts.log10_x ? "log10(" + opts.x_label + ")" : opts.x_label)
            << "</text>\n";
    }
    if (!opts.y_label.empty()) {
        const double cx = 16.0;
        const double cy = margin_top + plot_h / 2;
        out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(cy)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << fmt(cx)
            << " " << fmt(cy) << ")\">"
            << (opts.log10_y ? "log10(" + opts.y_label + ")" : opts.y_label)
            << "</text>\n";
    }
    out << "</g>\n";

    // Data polylines.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        const std::size_t stride =
            std::max<std::size_t>(1, n / opts.max_points_per_series);
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.3\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < n; i += stride) {
            if (!usable(s.x[i], s.y[i])) continue;
            if (!first) out << ' ';
            first = false;
            out << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
        }
        out << "\"/>\n";
    }

    // Legend for multi-series plots.
    if (series.size() > 1) {
        out << "<g font-size=\"11\" font-family=\"sans-serif\">\n";
        double ly = margin_top + 12.0;
        for (std::size_t si = 0; si < series.size(); ++si) {
            const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
            const double lx = margin_left + plot_w - 150.0;
            out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4)
                << "\" x2=\"" << fmt(lx + 22) << "\" y2=\"" << fmt(ly - 4)
                << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
            out << "<text x=\"" << fmt(lx + 28) << "\" y=\"" << fmt(ly)
                << "\">" << series[si].label << "</text>\n";
            ly += 16.0;
        }
        out << "</g>\n";
    }
    out << "</svg>\n";
}

}  // namespace susplab::svg
