#pragma once

#include "dynkit/phase_space.hpp"
#include "dynkit/system.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace dynkit {

/// Compressed adjacency lists; node ids are box indices, plus an optional
/// sink id one past the last box.
struct Adjacency {
    std::vector<std::uint64_t> offsets;  // size node_count + 1
    std::vector<std::uint32_t> targets;

    std::span<const std::uint32_t> out(std::uint32_t node) const
    {
        return {targets.data() + offsets[node], targets.data() + offsets[node + 1]};
    }
    std::size_t node_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

/// Outer approximation of a map on the boxes of a grid, fattened by eps.
///
/// Box b gets an edge to every box meeting the rectangle
///     f(center_b) +- (B_b radius + eps)
/// where B_b is the map's entrywise derivative bound over b. Rectangles leaving a
/// non-periodic axis add an edge to the sink (id = box_count()). Out-edges are
/// sorted, with the sink last.
class TransitionGraph {
public:
    TransitionGraph(Grid grid, MapPtr map, double eps, Adjacency adjacency, double step_tolerance);

    const Grid& grid() const noexcept { return grid_; }
    const MapPtr& map() const noexcept { return map_; }
    double eps() const noexcept { return eps_; }
    std::uint32_t box_count() const noexcept { return grid_.box_count(); }
    std::uint32_t sink() const noexcept { return grid_.box_count(); }

    std::span<const std::uint32_t> out(std::uint32_t box) const { return adjacency_.out(box); }
    bool has_edge(std::uint32_t from, std::uint32_t to) const;
    bool reaches_sink(std::uint32_t box) const;
    std::uint64_t edge_count() const noexcept { return adjacency_.targets.size(); }
    const Adjacency& adjacency() const noexcept { return adjacency_; }

    /// Predecessor lists over boxes (edges into the sink dropped).
    const Adjacency& reverse() const;

    /// Bound on d(f(x), y) for x in box a, y in box b, whenever a -> b.
    double step_tolerance() const noexcept { return step_tolerance_; }

private:
    Grid grid_;
    MapPtr map_;
    double eps_;
    Adjacency adjacency_;
    double step_tolerance_ = 0.0;
    mutable std::shared_ptr<Adjacency> reverse_;
    std::shared_ptr<std::once_flag> reverse_once_ = std::make_shared<std::once_flag>();
};

TransitionGraph build_graph(const Grid& grid, MapPtr map, double eps, int threads = 1);

struct GraphStats {
    std::uint32_t boxes = 0;
    std::uint64_t edges = 0;
    std::uint64_t sink_edges = 0;
    std::uint32_t min_out = 0;
    std::uint32_t max_out = 0;
    double mean_out = 0.0;
};

GraphStats graph_stats(const TransitionGraph& g);

/// Writes one "source target" line per edge; the sink is printed as box_count.
void write_adjacency(const TransitionGraph& g, std::ostream& out);

// Set operators -------------------------------------------------------------

/// Out-neighbours of `set` (sink excluded); `hits_sink` reports sink edges.
BoxSet image(const TransitionGraph& g, const BoxSet& set, bool* hits_sink = nullptr);
/// Boxes reachable from `seeds` by paths of length >= 0.
BoxSet forward_reachable(const TransitionGraph& g, const BoxSet& seeds);
/// Boxes with a path of length >= 0 into `targets`.
BoxSet backward_reachable(const TransitionGraph& g, const BoxSet& targets);

// Recurrence ----------------------------------------------------------------

struct SccResult {
    /// Component of each box; components are numbered by smallest member.
    std::vector<std::uint32_t> component_of;
    std::uint32_t component_count = 0;
    /// Component contains an edge (size > 1 or a self-loop).
    std::vector<bool> nontrivial;
};

/// Iterative Tarjan on the box nodes; the sink is never part of a component.
SccResult strongly_connected_components(const TransitionGraph& g);

struct ChainComponent {
    std::uint32_t id = 0;
    BoxSet members;
    bool is_trivial = false;
};

BoxSet chain_recurrent_boxes(const TransitionGraph& g);
BoxSet chain_recurrent_boxes(const TransitionGraph& g, const SccResult& scc);
/// Non-trivial components only, ordered by smallest member.
std::vector<ChainComponent> chain_components(const TransitionGraph& g);
std::vector<ChainComponent> chain_components(const TransitionGraph& g, const SccResult& scc);
bool is_chain_transitive(const TransitionGraph& g);

struct EpsChain {
    std::vector<Vec> points;
    /// Threshold of each step: d(f(points[i]), points[i+1]) < eps[i].
    std::vector<double> eps;

    std::size_t length() const { return points.empty() ? 0 : points.size() - 1; }
};

/// Largest ratio d(f(x_i), x_{i+1}) / eps_i; the chain is valid iff < 1.
double chain_defect_ratio(const DynamicalMap& map, const EpsChain& chain);
bool validate_chain(const DynamicalMap& map, const EpsChain& chain);

/// Shortest box path of length >= 1 from box(p) to box(q), realized through
/// box centers with endpoints p and q. Every step is within step_tolerance().
std::optional<EpsChain> find_eps_chain(const TransitionGraph& g, const Vec& p, const Vec& q);

struct ReturnsAt {
    int step = 0;
};
struct NoReturn {
    int iterations = 0;
};
using ReturnResult = std::variant<ReturnsAt, NoReturn>;

/// Iterates the outer image of {b} on an eps = 0 graph until it meets b.
ReturnResult nonwandering_probe(const TransitionGraph& g, BoxId b, int n_max);
ReturnResult nonwandering_probe(MapPtr map, const Grid& grid, BoxId b, int n_max);

/// Position-dependent jump tolerance for strong chains.
struct EpsFunction {
    enum class Kind { constant, radial };
    Kind kind = Kind::constant;
    double c = 0.1;

    double operator()(const Vec& x) const { return kind == Kind::constant ? c : c / (1.0 + x.norm()); }
    static EpsFunction constant(double c) { return {Kind::constant, c}; }
    static EpsFunction radial(double c) { return {Kind::radial, c}; }
};

/// Looks for an eps(x)-chain p -> ... -> p of length in [1, max_len] whose
/// interior points are centers of `grid` boxes; jumps follow
/// d(f(x_j), x_{j+1}) < eps(f(x_j)). Every returned chain validates exactly.
std::optional<EpsChain> strong_chain_search(const DynamicalMap& map, const Vec& p, const EpsFunction& eps_fn,
                                            const Grid& grid, int max_len);

}  // namespace dynkit
