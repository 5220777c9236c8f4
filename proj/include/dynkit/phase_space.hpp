#pragma once

#include "dynkit/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace dynkit {

/// Rectangular window in R^n (n <= 3) with optional per-axis periodicity.
///
/// Periodic axes are flat circles of length upper - lower; distances along
/// them use the minimum image.
class Domain {
public:
    Domain() = default;
    Domain(Vec lower, Vec upper, std::array<bool, kMaxDimension> periodic = {});

    static Domain unit_torus(int dimension);

    int dimension() const noexcept { return static_cast<int>(lower_.size()); }
    const Vec& lower() const noexcept { return lower_; }
    const Vec& upper() const noexcept { return upper_; }
    bool periodic(int axis) const noexcept { return periodic_[axis]; }
    const std::array<bool, kMaxDimension>& periodicity() const noexcept { return periodic_; }
    bool any_periodic() const noexcept;
    double extent(int axis) const noexcept { return upper_[axis] - lower_[axis]; }
    Vec center() const { return (lower_ + upper_) / 2.0; }

    /// Wraps periodic coordinates into [lower, upper); other axes untouched.
    Vec wrap(const Vec& p) const;
    /// b - a, taking the minimum image on periodic axes.
    Vec displacement(const Vec& a, const Vec& b) const;
    double distance(const Vec& a, const Vec& b) const { return displacement(a, b).norm(); }
    /// Membership after wrapping; half-open [lower, upper) on non-periodic axes.
    bool contains(const Vec& p) const;

    bool operator==(const Domain& other) const;

private:
    Vec lower_;
    Vec upper_;
    std::array<bool, kMaxDimension> periodic_{};
};

struct BoxId {
    std::uint32_t index = 0;
    auto operator<=>(const BoxId&) const = default;
};

using MultiIndex = std::array<std::uint32_t, kMaxDimension>;

struct BoxGeometry {
    Vec center;
    Vec radius;
};

/// Uniform dyadic partition of a Domain into half-open boxes.
class Grid {
public:
    static constexpr int kMaxDepth = 12;

    Grid() = default;
    Grid(Domain domain, std::vector<int> depth);

    const Domain& domain() const noexcept { return domain_; }
    int dimension() const noexcept { return domain_.dimension(); }
    int depth(int axis) const noexcept { return depth_[axis]; }
    const std::vector<int>& depths() const noexcept { return depth_; }
    std::uint32_t boxes_per_axis(int axis) const noexcept { return counts_[axis]; }
    std::uint32_t box_count() const noexcept { return box_count_; }
    const Vec& box_width() const noexcept { return width_; }
    Vec box_radius() const { return width_ / 2.0; }
    /// Euclidean diameter of one box.
    double box_diameter() const { return width_.norm(); }

    std::optional<BoxId> box_of_point(const Vec& p) const;
    BoxGeometry box_geometry(BoxId b) const;
    Vec box_lower(BoxId b) const;

    MultiIndex multi_index(BoxId b) const;
    BoxId linear_index(const MultiIndex& m) const;
    bool valid(BoxId b) const noexcept { return b.index < box_count_; }

    /// Calls visit(linear index) for every box meeting the half-open rectangle
    /// [lo, hi). Returns true when the rectangle leaves the window along a
    /// non-periodic axis.
    template <class Visit>
    bool for_each_box_in_rect(const Vec& lo, const Vec& hi, Visit&& visit) const;

    /// Boxes at Chebyshev index distance exactly 1 (wrapping periodic axes).
    std::vector<BoxId> neighbors(BoxId b) const;

    bool operator==(const Grid& other) const { return domain_ == other.domain_ && depth_ == other.depth_; }

private:
    struct AxisRange {
        std::int64_t first;
        std::int64_t last;  // inclusive
    };

    Domain domain_;
    std::vector<int> depth_;
    std::array<std::uint32_t, kMaxDimension> counts_{1, 1, 1};
    std::uint32_t box_count_ = 0;
    Vec width_;
};

/// Dense membership bit vector over the boxes of one grid.
class BoxSet {
public:
    using Run = std::pair<std::uint32_t, std::uint32_t>;  // (first index, length)

    BoxSet() = default;
    explicit BoxSet(std::uint32_t universe, bool filled = false);

    static BoxSet full(std::uint32_t universe) { return BoxSet(universe, true); }

    std::uint32_t universe() const noexcept { return universe_; }
    std::uint32_t count() const noexcept;
    bool empty() const noexcept { return count() == 0; }

    bool contains(std::uint32_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
    bool contains(BoxId b) const noexcept { return contains(b.index); }
    void insert(std::uint32_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void insert(BoxId b) noexcept { insert(b.index); }
    void erase(std::uint32_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    BoxSet& operator|=(const BoxSet& other);
    BoxSet& operator&=(const BoxSet& other);
    BoxSet& operator-=(const BoxSet& other);
    BoxSet complement() const;
    bool subset_of(const BoxSet& other) const;
    bool intersects(const BoxSet& other) const;

    friend BoxSet operator|(BoxSet a, const BoxSet& b) { return a |= b; }
    friend BoxSet operator&(BoxSet a, const BoxSet& b) { return a &= b; }
    friend BoxSet operator-(BoxSet a, const BoxSet& b) { return a -= b; }
    bool operator==(const BoxSet& other) const = default;

    template <class Visit>
    void for_each(Visit&& visit) const
    {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                const int bit = __builtin_ctzll(bits);
                visit(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(bit)));
                bits &= bits - 1;
            }
        }
    }

    std::vector<std::uint32_t> indices() const;
    /// Smallest member, or universe() when empty.
    std::uint32_t first() const noexcept;

    std::vector<Run> runs() const;
    static BoxSet from_runs(std::uint32_t universe, const std::vector<Run>& runs);

private:
    void check_compatible(const BoxSet& other) const;
    void trim() noexcept;

    std::uint32_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

enum class SetOp { unite, intersect, difference };

BoxSet set_algebra(const BoxSet& a, const BoxSet& b, SetOp op);

/// Boxes of `set` with at least one neighbour outside it.
BoxSet boundary_boxes(const Grid& grid, const BoxSet& set);
/// All boxes within Chebyshev index distance 1 of `set`, including `set`.
BoxSet dilate(const Grid& grid, const BoxSet& set);

// ---------------------------------------------------------------------------

template <class Visit>
bool Grid::for_each_box_in_rect(const Vec& lo, const Vec& hi, Visit&& visit) const
{
    const int n = dimension();
    std::array<AxisRange, kMaxDimension> range{};
    std::array<bool, kMaxDimension> full_axis{};
    bool escapes = false;
    for (int i = 0; i < n; ++i) {
        // Clamped so the integer conversions below stay defined for huge images.
        const double a = std::clamp((lo[i] - domain_.lower()[i]) / width_[i], -1e15, 1e15);
        const double b = std::clamp((hi[i] - domain_.lower()[i]) / width_[i], -1e15, 1e15);
        std::int64_t first = static_cast<std::int64_t>(std::floor(a));
        std::int64_t last = static_cast<std::int64_t>(std::ceil(b)) - 1;
        if (last < first) last = first;
        const auto count = static_cast<std::int64_t>(counts_[i]);
        if (domain_.periodic(i)) {
            full_axis[i] = last - first + 1 >= count;
        } else {
            if (first < 0) {
                escapes = true;
                first = 0;
            }
            if (last >= count) {
                escapes = true;
                last = count - 1;
            }
            if (first > last) return true;  // entirely outside along this axis
        }
        range[i] = {first, last};
    }
    for (int i = n; i < kMaxDimension; ++i) range[i] = {0, 0};

    auto axis_index = [&](int axis, std::int64_t k) -> std::uint32_t {
        const auto count = static_cast<std::int64_t>(counts_[axis]);
        if (!domain_.periodic(axis)) return static_cast<std::uint32_t>(k);
        std::int64_t m = k % count;
        if (m < 0) m += count;
        return static_cast<std::uint32_t>(m);
    };
    auto span_of = [&](int axis) -> std::pair<std::int64_t, std::int64_t> {
        if (axis < n && full_axis[axis]) return {0, static_cast<std::int64_t>(counts_[axis]) - 1};
        return {range[axis].first, range[axis].last};
    };

    const auto [z0, z1] = span_of(2);
    const auto [y0, y1] = span_of(1);
    const auto [x0, x1] = span_of(0);
    for (std::int64_t k2 = z0; k2 <= z1; ++k2) {
        const std::uint32_t i2 = n > 2 ? axis_index(2, k2) : 0;
        for (std::int64_t k1 = y0; k1 <= y1; ++k1) {
            const std::uint32_t i1 = n > 1 ? axis_index(1, k1) : 0;
            const std::uint32_t base = (i2 * counts_[1] + i1) * counts_[0];
            for (std::int64_t k0 = x0; k0 <= x1; ++k0) visit(base + axis_index(0, k0));
        }
    }
    return escapes;
}

}  // namespace dynkit
