#include "dynkit/phase_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace dynkit {

// ---------------------------------------------------------------------------
// Domain

Domain::Domain(Vec lower, Vec upper, std::array<bool, kMaxDimension> periodic)
    : lower_(std::move(lower)), upper_(std::move(upper)), periodic_(periodic)
{
    if (lower_.size() != upper_.size()) throw Error("domain: lower/upper dimension mismatch");
    if (lower_.size() < 1 || lower_.size() > kMaxDimension)
        throw Error("domain: dimension must be 1, 2 or 3");
    for (int i = 0; i < dimension(); ++i) {
        if (!(lower_[i] < upper_[i])) throw Error("domain: lower must be < upper on every axis");
    }
    for (int i = dimension(); i < kMaxDimension; ++i) periodic_[i] = false;
}

Domain Domain::unit_torus(int dimension)
{
    std::array<bool, kMaxDimension> periodic{};
    for (int i = 0; i < dimension; ++i) periodic[i] = true;
    return Domain(Vec::Zero(dimension), Vec::Ones(dimension), periodic);
}

bool Domain::any_periodic() const noexcept
{
    for (int i = 0; i < dimension(); ++i) {
        if (periodic_[i]) return true;
    }
    return false;
}

Vec Domain::wrap(const Vec& p) const
{
    Vec out = p;
    for (int i = 0; i < dimension(); ++i) {
        if (!periodic_[i]) continue;
        const double len = extent(i);
        double t = (p[i] - lower_[i]) / len;
        t -= std::floor(t);
        double x = lower_[i] + t * len;
        // floor() can round t up to exactly 1 for tiny negative offsets.
        if (x >= upper_[i]) x = lower_[i];
        out[i] = x;
    }
    return out;
}

Vec Domain::displacement(const Vec& a, const Vec& b) const
{
    Vec d = b - a;
    for (int i = 0; i < dimension(); ++i) {
        if (!periodic_[i]) continue;
        const double len = extent(i);
        d[i] -= len * std::round(d[i] / len);
    }
    return d;
}

bool Domain::contains(const Vec& p) const
{
    if (p.size() != lower_.size()) return false;
    for (int i = 0; i < dimension(); ++i) {
        if (periodic_[i]) continue;
        if (!(p[i] >= lower_[i] && p[i] < upper_[i])) return false;
    }
    return true;
}

bool Domain::operator==(const Domain& other) const
{
    if (dimension() != other.dimension()) return false;
    for (int i = 0; i < dimension(); ++i) {
        if (lower_[i] != other.lower_[i] || upper_[i] != other.upper_[i] || periodic_[i] != other.periodic_[i])
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(Domain domain, std::vector<int> depth) : domain_(std::move(domain)), depth_(std::move(depth))
{
    const int n = domain_.dimension();
    if (static_cast<int>(depth_.size()) != n) throw Error("grid: depth must have one entry per axis");
    std::uint64_t total = 1;
    width_ = Vec(n);
    for (int i = 0; i < n; ++i) {
        if (depth_[i] < 0 || depth_[i] > kMaxDepth) throw Error("grid: depth must lie in [0, 12]");
        counts_[i] = std::uint32_t{1} << depth_[i];
        total *= counts_[i];
        width_[i] = domain_.extent(i) / counts_[i];
    }
    if (total >= (std::uint64_t{1} << 31)) throw Error("grid: too many boxes");
    box_count_ = static_cast<std::uint32_t>(total);
}

std::optional<BoxId> Grid::box_of_point(const Vec& p) const
{
    if (p.size() != dimension()) return std::nullopt;
    const Vec q = domain_.wrap(p);
    MultiIndex m{};
    for (int i = 0; i < dimension(); ++i) {
        const double t = (q[i] - domain_.lower()[i]) / width_[i];
        if (!(t >= 0.0)) return std::nullopt;  // also rejects NaN
        auto k = static_cast<std::int64_t>(std::floor(t));
        if (k >= static_cast<std::int64_t>(counts_[i])) {
            if (!domain_.periodic(i)) return std::nullopt;
            k = counts_[i] - 1;  // rounding at the wrapped upper face
        }
        m[i] = static_cast<std::uint32_t>(k);
    }
    return linear_index(m);
}

BoxGeometry Grid::box_geometry(BoxId b) const
{
    if (!valid(b)) throw Error("grid: invalid box id");
    const MultiIndex m = multi_index(b);
    Vec center(dimension());
    for (int i = 0; i < dimension(); ++i) center[i] = domain_.lower()[i] + (m[i] + 0.5) * width_[i];
    return {center, box_radius()};
}

Vec Grid::box_lower(BoxId b) const
{
    if (!valid(b)) throw Error("grid: invalid box id");
    const MultiIndex m = multi_index(b);
    Vec lo(dimension());
    for (int i = 0; i < dimension(); ++i) lo[i] = domain_.lower()[i] + m[i] * width_[i];
    return lo;
}

MultiIndex Grid::multi_index(BoxId b) const
{
    MultiIndex m{};
    std::uint32_t rest = b.index;
    for (int i = 0; i < dimension(); ++i) {
        m[i] = rest % counts_[i];
        rest /= counts_[i];
    }
    return m;
}

BoxId Grid::linear_index(const MultiIndex& m) const
{
    std::uint32_t index = 0;
    for (int i = dimension() - 1; i >= 0; --i) index = index * counts_[i] + m[i];
    return BoxId{index};
}

std::vector<BoxId> Grid::neighbors(BoxId b) const
{
    const MultiIndex m = multi_index(b);
    const int n = dimension();
    std::vector<BoxId> out;
    std::array<int, kMaxDimension> off{};
    const int total = n == 1 ? 3 : (n == 2 ? 9 : 27);
    for (int code = 0; code < total; ++code) {
        int c = code;
        bool self = true;
        for (int i = 0; i < n; ++i) {
            off[i] = c % 3 - 1;
            c /= 3;
            if (off[i] != 0) self = false;
        }
        if (self) continue;
        MultiIndex nb{};
        bool inside = true;
        for (int i = 0; i < n; ++i) {
            std::int64_t k = static_cast<std::int64_t>(m[i]) + off[i];
            const auto count = static_cast<std::int64_t>(counts_[i]);
            if (k < 0 || k >= count) {
                if (!domain_.periodic(i)) {
                    inside = false;
                    break;
                }
                k = (k + count) % count;
            }
            nb[i] = static_cast<std::uint32_t>(k);
        }
        if (!inside) continue;
        const BoxId id = linear_index(nb);
        if (id != b && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// BoxSet

BoxSet::BoxSet(std::uint32_t universe, bool filled)
    : universe_(universe), words_((static_cast<std::size_t>(universe) + 63) / 64, filled ? ~std::uint64_t{0} : 0)
{
    trim();
}

void BoxSet::trim() noexcept
{
    if (universe_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (universe_ % 64)) - 1;
}

std::uint32_t BoxSet::count() const noexcept
{
    std::uint32_t total = 0;
    for (std::uint64_t w : words_) total += static_cast<std::uint32_t>(std::popcount(w));
    return total;
}

void BoxSet::check_compatible(const BoxSet& other) const
{
    if (universe_ != other.universe_) throw Error("box set: grid mismatch");
}

BoxSet& BoxSet::operator|=(const BoxSet& other)
{
    check_compatible(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
}

BoxSet& BoxSet::operator&=(const BoxSet& other)
{
    check_compatible(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
}

BoxSet& BoxSet::operator-=(const BoxSet& other)
{
    check_compatible(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
}

BoxSet BoxSet::complement() const
{
    BoxSet out = *this;
    for (auto& w : out.words_) w = ~w;
    out.trim();
    return out;
}

bool BoxSet::subset_of(const BoxSet& other) const
{
    check_compatible(other);
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if ((words_[i] & ~other.words_[i]) != 0) return false;
    }
    return true;
}

bool BoxSet::intersects(const BoxSet& other) const
{
    check_compatible(other);
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if ((words_[i] & other.words_[i]) != 0) return true;
    }
    return false;
}

std::vector<std::uint32_t> BoxSet::indices() const
{
    std::vector<std::uint32_t> out;
    out.reserve(count());
    for_each([&](std::uint32_t i) { out.push_back(i); });
    return out;
}

std::uint32_t BoxSet::first() const noexcept
{
    for (std::size_t w = 0; w < words_.size(); ++w) {
        if (words_[w] != 0) return static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(words_[w])));
    }
    return universe_;
}

std::vector<BoxSet::Run> BoxSet::runs() const
{
    std::vector<Run> out;
    for_each([&](std::uint32_t i) {
        if (!out.empty() && out.back().first + out.back().second == i)
            ++out.back().second;
        else
            out.emplace_back(i, 1);
    });
    return out;
}

BoxSet BoxSet::from_runs(std::uint32_t universe, const std::vector<Run>& runs)
{
    BoxSet out(universe);
    for (const auto& [start, length] : runs) {
        if (static_cast<std::uint64_t>(start) + length > universe) throw Error("box set: run exceeds universe");
        for (std::uint32_t k = 0; k < length; ++k) out.insert(start + k);
    }
    return out;
}

BoxSet set_algebra(const BoxSet& a, const BoxSet& b, SetOp op)
{
    switch (op) {
    case SetOp::unite: return a | b;
    case SetOp::intersect: return a & b;
    case SetOp::difference: return a - b;
    }
    throw Error("set_algebra: unknown operation");
}

BoxSet boundary_boxes(const Grid& grid, const BoxSet& set)
{
    BoxSet out(set.universe());
    set.for_each([&](std::uint32_t i) {
        for (BoxId nb : grid.neighbors(BoxId{i})) {
            if (!set.contains(nb)) {
                out.insert(i);
                return;
            }
        }
    });
    return out;
}

BoxSet dilate(const Grid& grid, const BoxSet& set)
{
    BoxSet out = set;
    set.for_each([&](std::uint32_t i) {
        for (BoxId nb : grid.neighbors(BoxId{i})) out.insert(nb);
    });
    return out;
}

}  // namespace dynkit
