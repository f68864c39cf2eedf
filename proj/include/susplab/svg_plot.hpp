// Dependency-free SVG line plots for time series and convergence curves.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace susplab::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    int width = 900;
    int height = 420;
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log10_x = false;  ///< plot log10 of x (positive values only)
    bool log10_y = false;
    std::size_t max_points_per_series = 2000;  ///< stride-decimated above this
};

/// One SVG document with axes, ticks, a legend when there are multiple
/// series, and one polyline per series. Non-finite points are skipped.
void write_line_plot(std::ostream& out, const std::vector<Series>& series,
                     const PlotOptions& opts);

}  // namespace susplab::svg
