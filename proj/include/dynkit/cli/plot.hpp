#pragma once

#include "dynkit/phase_space.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace dynkit::cli {

inline constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};

/// Deterministic 1000x1000 SVG of a 2D window. Coordinates are printed with a
/// fixed number of decimals so the bytes depend only on the data.
class SvgPlot {
public:
    static constexpr int kCanvas = 1000;

    explicit SvgPlot(Domain window);

    void add_boxes(const Grid& grid, const BoxSet& set, int series);
    /// Segments are drawn in the fundamental domain; on periodic axes each
    /// segment is also drawn shifted by one period where it crosses an edge.
    void add_polyline(const std::vector<Vec>& points, int series);
    void add_cloud(const std::vector<Vec>& points, int series);
    void add_markers(const std::vector<Vec>& points, int series);

    std::size_t element_count() const { return elements_.size(); }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    double sx(double x) const;
    double sy(double y) const;
    void segment(const Vec& a, const Vec& b, const char* color);

    Domain window_;
    std::vector<std::string> elements_;
};

}  // namespace dynkit::cli
