#pragma once

#include <string>
#include <utility>
#include <vector>

namespace semalloc::app {

struct Series {
    std::string name;
    std::string color = "#1f77b4";
    std::string dash;  // SVG stroke-dasharray, empty for solid
    std::vector<std::pair<double, double>> points;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = true;
    double width = 800;
    double height = 560;
    std::vector<Series> series;
};

// Self-contained SVG document: axes, ticks, legend and one <polyline> per
// series. Non-finite or (on a log axis) non-positive points are dropped.
std::string render_svg(const LineChart& chart);

std::string xml_escape(const std::string& s);

} // namespace semalloc::app
