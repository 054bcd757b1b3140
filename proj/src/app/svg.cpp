#include "semalloc/app/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <sstream>

namespace semalloc::app {

std::string xml_escape(const std::string& s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

namespace {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double map(double v, double pix_lo, double pix_hi) const
    {
        const double a = log ? std::log10(v) : v;
        const double b0 = log ? std::log10(lo) : lo;
        const double b1 = log ? std::log10(hi) : hi;
        return pix_lo + (a - b0) / (b1 - b0) * (pix_hi - pix_lo);
    }
};

double nice_step(double span)
{
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0;
    return step * mag;
}

std::string num(double v)
{
    return fmt::format("{:.2f}", v);
}

std::string tick_label(double v)
{
    return fmt::format("{:g}", v);
}

} // namespace

std::string render_svg(const LineChart& chart)
{
    const double left = 90;
    const double right = chart.width - 220;
    const double top = 50;
    const double bottom = chart.height - 60;

    auto usable = [&](double x, double y) { return std::isfinite(x) && std::isfinite(y) && (!chart.log_y || y > 0); };

    Axis xa;
    Axis ya;
    ya.log = chart.log_y;
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : chart.series) {
        for (const auto& [x, y] : s.points) {
            if (!usable(x, y)) {
                continue;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = chart.log_y ? 1.0 : 0.0;
        ymax = chart.log_y ? 10.0 : 1.0;
    }
    if (xmax == xmin) {
        xmax = xmin + 1.0;
    }
    const double xstep = nice_step(xmax - xmin);
    xa.lo = std::floor(xmin / xstep) * xstep;
    xa.hi = std::ceil(xmax / xstep) * xstep;
    if (chart.log_y) {
        ya.lo = std::pow(10.0, std::floor(std::log10(ymin)));
        ya.hi = std::pow(10.0, std::ceil(std::log10(ymax)));
        if (ya.hi <= ya.lo) {
            ya.hi = ya.lo * 10.0;
        }
    } else {
        if (ymax == ymin) {
            ymax = ymin + 1.0;
        }
        const double ystep = nice_step(ymax - ymin);
        ya.lo = std::floor(ymin / ystep) * ystep;
        ya.hi = std::ceil(ymax / ystep) * ystep;
    }

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                       chart.width, chart.height, chart.width, chart.height);
    svg << fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", chart.width,
                       chart.height);
    svg << fmt::format("<text x=\"{}\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\" "
                       "text-anchor=\"middle\">{}</text>\n",
                       num((left + right) / 2), xml_escape(chart.title));

    // Grid and ticks.
    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#000000\">\n";
    for (double x = xa.lo; x <= xa.hi + 1e-9 * xstep; x += xstep) {
        const double px = xa.map(x, left, right);
        svg << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#dddddd\"/>\n", num(px),
                           num(top), num(bottom));
        svg << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(px), num(bottom + 16),
                           tick_label(std::abs(x) < 1e-12 * xstep ? 0.0 : x));
    }
    if (chart.log_y) {
        const int d0 = static_cast<int>(std::lround(std::log10(ya.lo)));
        const int d1 = static_cast<int>(std::lround(std::log10(ya.hi)));
        for (int d = d0; d <= d1; ++d) {
            const double py = ya.map(std::pow(10.0, d), bottom, top);
            svg << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#dddddd\"/>\n", num(left),
                               num(py), num(right));
            svg << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">1e{}</text>\n", num(left - 6),
                               num(py + 4), d);
            if (d < d1) {
                for (int m = 2; m <= 9; ++m) {
                    const double pm = ya.map(m * std::pow(10.0, d), bottom, top);
                    svg << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#000000\"/>\n",
                                       num(left), num(pm), num(left + 4));
                }
            }
        }
    } else {
        const double ystep = nice_step(ya.hi - ya.lo);
        for (double y = ya.lo; y <= ya.hi + 1e-9 * ystep; y += ystep) {
            const double py = ya.map(y, bottom, top);
            svg << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#dddddd\"/>\n", num(left),
                               num(py), num(right));
            svg << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(left - 6), num(py + 4),
                               tick_label(y));
        }
    }
    svg << "</g>\n";

    svg << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n",
                       num(left), num(top), num(right - left), num(bottom - top));
    svg << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" "
                       "text-anchor=\"middle\">{}</text>\n",
                       num((left + right) / 2), num(chart.height - 20), xml_escape(chart.x_label));
    svg << fmt::format("<text x=\"20\" y=\"{0}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
                       "transform=\"rotate(-90 20 {0})\">{1}</text>\n",
                       num((top + bottom) / 2), xml_escape(chart.y_label));

    for (const auto& s : chart.series) {
        std::string pts;
        for (const auto& [x, y] : s.points) {
            if (!usable(x, y)) {
                continue;
            }
            if (!pts.empty()) {
                pts += ' ';
            }
            pts += num(xa.map(x, left, right)) + ',' + num(ya.map(y, bottom, top));
        }
        svg << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n",
                           xml_escape(s.color),
                           s.dash.empty() ? "" : fmt::format(" stroke-dasharray=\"{}\"", xml_escape(s.dash)), pts);
    }

    // Legend.
    svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = top + 10;
    for (const auto& s : chart.series) {
        svg << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
                           num(right + 15), num(ly), num(right + 45), xml_escape(s.color),
                           s.dash.empty() ? "" : fmt::format(" stroke-dasharray=\"{}\"", xml_escape(s.dash)));
        svg << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(right + 52), num(ly + 4), xml_escape(s.name));
        ly += 20;
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

} // namespace semalloc::app
