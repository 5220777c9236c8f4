#include "dynkit/cli/plot.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace dynkit::cli {

namespace {

const char* color_of(int series) { return kPalette[static_cast<std::size_t>(series) % kPalette.size()]; }

std::string fmt(const char* pattern, double a, double b, double c, double d)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

}  // namespace

SvgPlot::SvgPlot(Domain window) : window_(std::move(window))
{
    if (window_.dimension() != 2) throw Error("plot: only 2D data can be drawn");
}

double SvgPlot::sx(double x) const { return (x - window_.lower()[0]) / window_.extent(0) * kCanvas; }
double SvgPlot::sy(double y) const { return (window_.upper()[1] - y) / window_.extent(1) * kCanvas; }

void SvgPlot::add_boxes(const Grid& grid, const BoxSet& set, int series)
{
    if (grid.dimension() != 2) throw Error("plot: only 2D data can be drawn");
    const Vec w = grid.box_width();
    const double pw = w[0] / window_.extent(0) * kCanvas;
    const double ph = w[1] / window_.extent(1) * kCanvas;
    const std::string color = color_of(series);
    set.for_each([&](std::uint32_t b) {
        const Vec lo = grid.box_lower(BoxId{b});
        elements_.push_back(fmt("<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" ", sx(lo[0]),
                                sy(lo[1] + w[1]), pw, ph) +
                            "fill=\"" + color + "\" fill-opacity=\"0.6\"/>");
    });
}

void SvgPlot::segment(const Vec& a, const Vec& b, const char* color)
{
    elements_.push_back(fmt("<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" ", sx(a[0]), sy(a[1]), sx(b[0]),
                            sy(b[1])) +
                        "stroke=\"" + color + "\" stroke-width=\"1.5\"/>");
}

void SvgPlot::add_polyline(const std::vector<Vec>& points, int series)
{
    for (const Vec& p : points) {
        if (p.size() != 2) throw Error("plot: only 2D data can be drawn");
    }
    const char* color = color_of(series);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const Vec a = window_.wrap(points[i - 1]);
        const Vec b = a + (points[i] - points[i - 1]);
        std::array<std::vector<double>, 2> shifts;
        for (int k = 0; k < 2; ++k) {
            shifts[k].push_back(0.0);
            if (!window_.periodic(k)) continue;
            if (b[k] >= window_.upper()[k]) shifts[k].push_back(-window_.extent(k));
            if (b[k] < window_.lower()[k]) shifts[k].push_back(window_.extent(k));
        }
        for (double dx : shifts[0]) {
            for (double dy : shifts[1]) segment(a + make_vec({dx, dy}), b + make_vec({dx, dy}), color);
        }
    }
}

void SvgPlot::add_cloud(const std::vector<Vec>& points, int series)
{
    const std::string color = color_of(series);
    for (const Vec& p : points) {
        if (p.size() != 2) throw Error("plot: only 2D data can be drawn");
        const Vec q = window_.wrap(p);
        elements_.push_back(fmt("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"1.5\" ", sx(q[0]), sy(q[1]), 0, 0) + "fill=\"" +
                            color + "\"/>");
    }
}

void SvgPlot::add_markers(const std::vector<Vec>& points, int series)
{
    const std::string color = color_of(series);
    for (const Vec& p : points) {
        if (p.size() != 2) throw Error("plot: only 2D data can be drawn");
        const Vec q = window_.wrap(p);
        elements_.push_back(fmt("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"5\" ", sx(q[0]), sy(q[1]), 0, 0) +
                            "fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>");
    }
}

std::string SvgPlot::str() const
{
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" viewBox=\"0 0 1000 1000\">\n"
        "<defs><clipPath id=\"window\"><rect x=\"0\" y=\"0\" width=\"1000\" height=\"1000\"/></clipPath></defs>\n"
        "<rect x=\"0\" y=\"0\" width=\"1000\" height=\"1000\" fill=\"#ffffff\"/>\n"
        "<g clip-path=\"url(#window)\">\n";
    for (const auto& e : elements_) {
        out += e;
        out += '\n';
    }
    out += "</g>\n</svg>\n";
    return out;
}

void SvgPlot::write(const std::filesystem::path& path) const
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << str();
}

}  // namespace dynkit::cli
